/**
 * Post-placement screen: the student's self-assessment next to the measured
 * proficiency, and a preview of the exercises planned for the next session.
 */

import { el } from "../dom.js";
import type { App } from "../app.js";

export function renderPreview(app: App): HTMLElement {
  const { state } = app;
  const root = el("section", { class: "screen", "data-screen": "preview" });
  const concept = state.journey?.current_concept ?? "";
  root.append(el("h2", { text: `Up next: ${concept}` }));

  const profile = state.profile;
  if (profile) {
    const table = el("table", { class: "assessment-table" });
    table.append(
      el("tr", {}, [
        el("th", { text: "Concept" }),
        el("th", { text: "Your assessment" }),
        el("th", { text: "Measured" }),
      ]),
    );
    for (const [name, conceptState] of Object.entries(profile.concept_states)) {
      table.append(
        el("tr", {}, [
          el("td", { text: name }),
          el("td", { text: conceptState.self_reported ?? "-" }),
          el("td", { text: conceptState.measured ?? "-" }),
        ]),
      );
    }
    root.append(el("h3", { text: "How you see it vs. how you tested" }), table);
  }

  root.append(el("h3", { text: "Planned exercises for this session" }));
  if (state.exercises.length > 0) {
    const list = el("ol", { class: "exercise-preview" });
    for (const exercise of state.exercises) {
      list.append(el("li", { text: exercise.stem }));
    }
    root.append(list);
  } else {
    root.append(
      el("p", {
        class: "screen-intro",
        text: "Your exercises will appear here when the session starts.",
      }),
    );
  }

  const start = el("button", { type: "button", class: "primary", text: "Start tutoring session" });
  start.addEventListener("click", () => void app.startSession());
  root.append(start);
  return root;
}
