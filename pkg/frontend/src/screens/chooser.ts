/** Concept chooser between learning cycles: pick any remaining concept. */

import { el } from "../dom.js";
import type { App } from "../app.js";

export function renderChooser(app: App, remaining: string[]): HTMLElement {
  const root = el("section", { class: "screen", "data-screen": "chooser" });
  root.append(el("h2", { text: "Choose your next concept" }));
  root.append(
    el("p", {
      class: "screen-intro",
      text: "You will be tutored on every concept; the order is up to you.",
    }),
  );
  const list = el("div", { class: "concept-list" });
  for (const concept of remaining) {
    const measured = app.state.profile?.concept_states[concept]?.measured;
    const button = el("button", { type: "button", class: "concept-choice" }, [
      el("strong", { text: concept }),
      el("span", { text: measured ? ` (measured: ${measured})` : "" }),
    ]);
    button.addEventListener("click", () => void app.chooseConcept(concept));
    list.append(button);
  }
  root.append(list);
  return root;
}
