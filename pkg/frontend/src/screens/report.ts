/**
 * Progress screen after a post-test: the pre and post proficiency side by
 * side with the gain. Every number is shown exactly as the server sent it;
 * nothing is recomputed here.
 */

import { el } from "../dom.js";
import type { ProgressReport } from "../api.js";
import type { App } from "../app.js";

function formatNumber(value: number): string {
  return value.toFixed(2);
}

function signed(value: number): string {
  return `${value >= 0 ? "+" : ""}${value.toFixed(2)}`;
}

export function reportCard(report: ProgressReport): HTMLElement {
  const card = el("div", { class: "report-card", "data-concept": report.concept });
  card.append(el("h3", { text: `Your progress on ${report.concept}` }));
  const table = el("table", { class: "report-table" });
  table.append(
    el("tr", {}, [
      el("th", { text: "" }),
      el("th", { text: "Before tutoring" }),
      el("th", { text: "After tutoring" }),
    ]),
    el("tr", {}, [
      el("td", { text: "Ability estimate" }),
      el("td", { class: "theta-pre", text: formatNumber(report.theta_pre) }),
      el("td", { class: "theta-post", text: formatNumber(report.theta_post) }),
    ]),
    el("tr", {}, [
      el("td", { text: "Expected correctness" }),
      el("td", { class: "prob-pre", text: formatNumber(report.prob_pre) }),
      el("td", { class: "prob-post", text: formatNumber(report.prob_post) }),
    ]),
  );
  card.append(table);
  card.append(
    el("p", { class: "gain-line" }, [
      "Learning gain: ",
      el("strong", { class: "gain-value", text: signed(report.gain) }),
    ]),
  );
  return card;
}

export function renderReport(app: App, report: ProgressReport): HTMLElement {
  const root = el("section", { class: "screen", "data-screen": "report" });
  root.append(el("h2", { text: "Post-test complete" }));
  root.append(reportCard(report));
  const next = app.state.journey?.phase === "Completed" ? "See your full results" : "Choose the next concept";
  const cont = el("button", { type: "button", class: "primary", text: next });
  cont.addEventListener("click", () => void app.continueAfterReport());
  root.append(cont);
  return root;
}
