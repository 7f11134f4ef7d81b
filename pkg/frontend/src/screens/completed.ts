/** Final screen: the journey is complete; one progress card per concept. */

import { el } from "../dom.js";
import type { ProgressReport } from "../api.js";
import { reportCard } from "./report.js";

export function renderCompleted(reports: ProgressReport[]): HTMLElement {
  const root = el("section", { class: "screen", "data-screen": "completed" });
  root.append(el("h2", { text: "Journey complete!" }));
  root.append(
    el("p", {
      class: "screen-intro",
      text: "You have been tutored on every concept. Here is how you moved.",
    }),
  );
  for (const report of reports) {
    root.append(reportCard(report));
  }
  return root;
}
