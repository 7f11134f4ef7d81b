/**
 * Test harness: replays recorded API exchanges as a fetch implementation and
 * drives the app through real DOM events.
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { ApiClient } from "../src/api.js";
import type { FetchLike } from "../src/api.js";
import { App } from "../src/app.js";

const here = dirname(fileURLToPath(import.meta.url));

export interface Exchange {
  method: string;
  path: string;
  request_body: unknown;
  status: number;
  response: unknown;
  retry_after?: string;
}

export interface JourneyFixture {
  base: string;
  exchanges: Exchange[];
}

export function loadJourney(): JourneyFixture {
  return JSON.parse(readFileSync(join(here, "fixtures", "journey.json"), "utf8"));
}

export function loadExtras(): Record<string, { status: number; response: unknown; retry_after?: string }> {
  return JSON.parse(readFileSync(join(here, "fixtures", "extras.json"), "utf8"));
}

/** Serves recorded exchanges in order, one queue per method+path. */
export class FixtureServer {
  private queues = new Map<string, Exchange[]>();
  readonly seen: { method: string; path: string; body: unknown }[] = [];
  /** When true, responses wait until release() is called. */
  hold = false;
  private waiting: (() => void)[] = [];

  constructor(exchanges: Exchange[]) {
    for (const exchange of exchanges) {
      const key = `${exchange.method} ${exchange.path}`;
      const queue = this.queues.get(key) ?? [];
      queue.push(exchange);
      this.queues.set(key, queue);
    }
  }

  release(): void {
    const pending = this.waiting;
    this.waiting = [];
    for (const resolve of pending) resolve();
  }

  get pendingCount(): number {
    return this.waiting.length;
  }

  fetch: FetchLike = async (input, init) => {
    const url = new URL(input);
    const method = init?.method ?? "GET";
    const pathWithQuery = `${url.pathname}${url.search}`;
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.seen.push({ method, path: pathWithQuery, body });
    if (this.hold) {
      await new Promise<void>((resolve) => this.waiting.push(resolve));
    }
    const queue = this.queues.get(`${method} ${pathWithQuery}`);
    const exchange = queue?.shift();
    if (!exchange) {
      throw new Error(`no recorded exchange for ${method} ${pathWithQuery}`);
    }
    return new Response(JSON.stringify(exchange.response), {
      status: exchange.status,
      headers: { "Content-Type": "application/json", "X-Api-Version": "1" },
    });
  };
}

/** In-memory Storage stand-in so tests never share browser state. */
export class MemoryStorage implements Storage {
  private map = new Map<string, string>();
  get length(): number {
    return this.map.size;
  }
  clear(): void {
    this.map.clear();
  }
  getItem(key: string): string | null {
    return this.map.get(key) ?? null;
  }
  key(index: number): string | null {
    return [...this.map.keys()][index] ?? null;
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
}

export function makeApp(server: FixtureServer, storage: Storage = new MemoryStorage()) {
  const root = document.createElement("main");
  root.id = "app";
  document.body.append(root);
  const client = new ApiClient("http://service.test", server.fetch);
  const app = new App(root, client, storage);
  return { app, root, client };
}

/** Let queued promise chains settle. */
export async function flush(): Promise<void> {
  for (let i = 0; i < 4; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

export function click(element: Element | null): void {
  if (!element) throw new Error("expected an element to click");
  (element as HTMLElement).click();
}

export function submitForm(form: Element | null): void {
  if (!form) throw new Error("expected a form to submit");
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

export function typeInto(input: Element | null, text: string): void {
  if (!input) throw new Error("expected an input to type into");
  (input as HTMLInputElement).value = text;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

/** Check a radio by value within a named group, firing the change event. */
export function checkRadio(root: ParentNode, name: string, value: string): void {
  const input = root.querySelector<HTMLInputElement>(
    `input[name="${name}"][value="${value}"]`,
  );
  if (!input) throw new Error(`no radio ${name}=${value}`);
  input.checked = true;
  input.dispatchEvent(new Event("change", { bubbles: true }));
}

/** Fill and submit the onboarding survey with the recorded answers. */
export function fillSurvey(root: ParentNode): void {
  checkRadio(root, "perception", "intuitive");
  checkRadio(root, "processing", "active");
  checkRadio(root, "understanding", "global");
  checkRadio(root, "confidence-Pronouns", "Weak");
  checkRadio(root, "confidence-Punctuation", "Moderate");
  checkRadio(root, "confidence-Transitions", "Strong");
  typeInto(root.querySelector("#age"), "21");
  typeInto(root.querySelector("#native-language"), "Spanish");
  submitForm(root.querySelector("form[aria-label='onboarding survey']"));
}

/** Answer every question in the one-at-a-time test with the recorded answers. */
export async function answerTest(
  root: ParentNode,
  answers: Record<string, string>,
  options: { skipLast?: boolean } = {},
): Promise<void> {
  const items = Object.keys(answers);
  const limit = options.skipLast ? items.length - 1 : items.length;
  for (let i = 0; i < limit; i += 1) {
    const radio = root.querySelector<HTMLInputElement>(".choices input[type='radio']");
    if (!radio) throw new Error("no choices rendered");
    const itemId = radio.name.replace(/^answer-/, "");
    checkRadio(root, `answer-${itemId}`, answers[itemId]);
    await flush();
    const next = findButton(root, "Next");
    if (i < limit - 1 && next && !next.disabled) {
      click(next);
      await flush();
    }
  }
}

export function findButton(root: ParentNode, label: string): HTMLButtonElement | null {
  for (const button of root.querySelectorAll("button")) {
    if (button.textContent?.trim().startsWith(label)) return button as HTMLButtonElement;
  }
  return null;
}

/** Send one chat line through the composer, as a student would. */
export async function sendChatLine(root: ParentNode, text: string): Promise<void> {
  typeInto(root.querySelector("#chat-input"), text);
  submitForm(root.querySelector("form.composer"));
  await flush();
}
