/** Entry screen: start a new journey or resume one with a saved session. */

import { el } from "../dom.js";
import type { App } from "../app.js";

export function renderLanding(app: App): HTMLElement {
  const root = el("section", { class: "screen", "data-screen": "landing" });
  root.append(el("h2", { text: "Personal writing tutor" }));
  root.append(
    el("p", {
      class: "screen-intro",
      text:
        "Three concepts, three tutoring sessions, and a placement test to " +
        "match the exercises to you.",
    }),
  );
  const form = el("form", { "aria-label": "start or resume" });
  const input = el("input", {
    type: "text",
    id: "student-id",
    "aria-label": "student name",
    placeholder: "Pick a student name (optional)",
    autocomplete: "off",
  });
  const start = el("button", { type: "submit", class: "primary", text: "Start learning" });
  form.append(el("div", { class: "field" }, [input]), start);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void app.begin(input.value.trim() || undefined);
  });
  root.append(form);
  return root;
}
