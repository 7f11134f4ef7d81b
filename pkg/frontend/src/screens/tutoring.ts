/**
 * The tutoring screen: learning materials on the left, the tutor chat on the
 * right. One chat request is in flight at a time; the composer locks while a
 * reply is pending and permanently once the tutor closes the session.
 */

import { el } from "../dom.js";
import type { App } from "../app.js";

function materialsPane(app: App): HTMLElement {
  const { state } = app;
  const pane = el("div", { class: "materials-pane" });
  pane.append(el("h3", { text: `Learning materials: ${state.journey?.current_concept ?? ""}` }));
  if (state.exercises.length === 0) {
    pane.append(el("p", { text: "No materials for this session." }));
    return pane;
  }
  const index = Math.min(state.exerciseIndex, state.exercises.length - 1);
  const exercise = state.exercises[index];
  pane.append(
    el("p", {
      class: "exercise-position",
      role: "status",
      text: `Exercise ${index + 1} of ${state.exercises.length}`,
    }),
  );
  const card = el("div", { class: "question-card" });
  card.append(el("p", { class: "question-stem", text: exercise.stem }));
  const choices = el("ul", { class: "materials-choices" });
  for (const choice of exercise.choices) {
    choices.append(el("li", { text: `${choice.label}. ${choice.text}` }));
  }
  card.append(choices);
  pane.append(card);

  const nav = el("div", { class: "exercise-nav" });
  const prev = el("button", { type: "button", text: "Previous exercise" });
  prev.disabled = index === 0;
  prev.addEventListener("click", () => app.showExercise(index - 1));
  const next = el("button", { type: "button", text: "Next exercise" });
  next.disabled = index === state.exercises.length - 1;
  next.addEventListener("click", () => app.showExercise(index + 1));
  nav.append(prev, next);
  pane.append(nav);
  return pane;
}

function chatPane(app: App): HTMLElement {
  const { state } = app;
  const pane = el("div", { class: "chat-pane" });
  pane.append(el("h3", { text: "Tutor" }));

  const log = el("div", { class: "chat-log", role: "log", "aria-label": "conversation" });
  for (const turn of state.transcript) {
    log.append(
      el("div", { class: `chat-turn ${turn.role}` }, [
        el("span", { class: "chat-role", text: turn.role === "tutor" ? "Tutor" : "You" }),
        el("p", { class: "chat-text", text: turn.text }),
      ]),
    );
  }
  if (state.chatPending) {
    log.append(el("p", { class: "chat-waiting", role: "status", text: "Tutor is replying..." }));
  }
  pane.append(log);

  if (state.sessionFinished) {
    pane.append(
      el("p", { class: "session-over", role: "status", text: "The tutor has ended this session." }),
    );
    const proceed = el("button", { type: "button", class: "primary", text: "Proceed to post-test" });
    proceed.addEventListener("click", () => void app.proceedToPosttest());
    pane.append(proceed);
  }

  const composer = el("form", { class: "composer", "aria-label": "send a message" });
  const input = el("input", {
    type: "text",
    id: "chat-input",
    "aria-label": "your message",
    placeholder: "Type your answer or question...",
    autocomplete: "off",
  });
  input.value = state.chatDraft;
  input.disabled = state.chatPending || state.sessionFinished;
  input.addEventListener("input", () => {
    state.chatDraft = input.value;
  });
  const send = el("button", { type: "submit", text: "Send" });
  send.disabled = state.chatPending || state.sessionFinished;
  composer.append(input, send);
  composer.addEventListener("submit", (event) => {
    event.preventDefault();
    void app.sendChat();
  });
  pane.append(composer);
  return pane;
}

export function renderTutoring(app: App): HTMLElement {
  const root = el("section", { class: "screen", "data-screen": "tutoring" });
  const split = el("div", { class: "split-panel" });
  split.append(materialsPane(app), chatPane(app));
  root.append(split);
  return root;
}
