/**
 * Resuming a saved session: the app re-enters at whatever phase the server
 * reports, rebuilds an in-progress chat from the event log, and falls back
 * to the landing screen when the saved token is no longer accepted.
 */

import { beforeEach, describe, expect, it } from "vitest";

import { FixtureServer, MemoryStorage, loadExtras, loadJourney, makeApp } from "./helpers.js";
import type { Exchange } from "./helpers.js";

function seededStorage(studentId: string): MemoryStorage {
  const storage = new MemoryStorage();
  storage.setItem("tutorkit:last", studentId);
  storage.setItem(`tutorkit:token:${studentId}`, "recorded-token");
  return storage;
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("resume", () => {
  it("rebuilds an in-progress tutoring session from the event log", async () => {
    const extras = loadExtras();
    const mid = extras["resume_mid_session"] as unknown as {
      student_id: string;
      exchanges: Exchange[];
    };
    const server = new FixtureServer(mid.exchanges);
    const { app, root } = makeApp(server, seededStorage(mid.student_id));
    await app.boot();

    expect(root.getAttribute("data-phase")).toBe("TutoringSession");
    expect(root.querySelector("[data-screen='tutoring']")).toBeTruthy();

    // The chat shows every turn of the unfinished session, in order.
    const roles = [...root.querySelectorAll(".chat-turn")].map((node) =>
      node.classList.contains("tutor") ? "tutor" : "student",
    );
    expect(roles).toEqual(["tutor", "student", "tutor", "student", "tutor"]);

    // Materials came from the idempotent session re-open; input is live.
    expect(root.querySelector(".exercise-position")?.textContent).toMatch(/Exercise 1 of \d/);
    expect(root.querySelector<HTMLInputElement>("#chat-input")?.disabled).toBe(false);
  });

  it("re-enters a completed journey on the results screen", async () => {
    const journey = loadJourney().exchanges;
    const readyz = journey.find((e) => e.path === "/readyz")!;
    const profiles = journey.filter((e) => e.path.endsWith("/profile"));
    const finalProfile = profiles[profiles.length - 1];
    const reports = journey.filter((e) => e.path.includes("/report?"));
    const server = new FixtureServer([readyz, finalProfile, ...reports]);
    const { app, root } = makeApp(server, seededStorage("web-demo"));
    await app.boot();

    expect(root.getAttribute("data-phase")).toBe("Completed");
    expect(root.querySelectorAll("[data-screen='completed'] .report-card").length).toBe(3);
  });

  it("falls back to the landing screen when the saved token is rejected", async () => {
    const extras = loadExtras();
    const journey = loadJourney().exchanges;
    const readyz = journey.find((e) => e.path === "/readyz")!;
    const rejected: Exchange = {
      method: "GET",
      path: "/students/web-extras/profile",
      request_body: null,
      status: extras["unauthorized"].status,
      response: extras["unauthorized"].response,
    };
    const server = new FixtureServer([readyz, rejected]);
    const { app, root } = makeApp(server, seededStorage("web-extras"));
    await app.boot();

    expect(root.getAttribute("data-phase")).toBe("none");
    expect(root.querySelector("[data-screen='landing']")).toBeTruthy();
  });
});
