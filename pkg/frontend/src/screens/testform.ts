/**
 * One-question-at-a-time test screen, shared by the pre-test and post-test.
 *
 * Submission stays disabled until every item has an answer; the review strip
 * at the bottom highlights unanswered questions and jumps to them.
 */

import { el } from "../dom.js";
import type { TestForm } from "../api.js";
import type { App } from "../app.js";

export function renderTestForm(app: App, form: TestForm): HTMLElement {
  const { state } = app;
  const total = form.items.length;
  const index = Math.min(state.questionIndex, total - 1);
  const item = form.items[index];
  const title = form.kind === "pretest" ? "Placement test" : "Post-test";

  const root = el("section", { class: "screen", "data-screen": form.kind });
  root.append(el("h2", { text: title }));
  root.append(
    el("p", {
      class: "progress",
      role: "status",
      text: `Question ${index + 1} of ${total}`,
    }),
  );

  const answered = Object.keys(state.answerDraft).length;
  const bar = el("div", { class: "progress-bar", "aria-hidden": "true" });
  bar.append(
    el("div", {
      class: "progress-fill",
      style: `width: ${Math.round((answered / total) * 100)}%`,
    }),
  );
  root.append(bar);

  const card = el("div", { class: "question-card" });
  card.append(el("p", { class: "question-concept", text: item.concept }));
  card.append(el("p", { class: "question-stem", text: item.stem }));
  const choiceList = el("div", { class: "choices", role: "radiogroup", "aria-label": "answer choices" });
  for (const choice of item.choices) {
    const id = `choice-${item.item_id}-${choice.label}`;
    const input = el("input", {
      type: "radio",
      name: `answer-${item.item_id}`,
      id,
      value: choice.label,
    });
    if (state.answerDraft[item.item_id] === choice.label) input.checked = true;
    input.addEventListener("change", () => {
      app.selectAnswer(item.item_id, choice.label);
    });
    const label = el("label", { for: id }, [`${choice.label}. ${choice.text}`]);
    choiceList.append(el("div", { class: "choice-row" }, [input, label]));
  }
  card.append(choiceList);
  root.append(card);

  const nav = el("div", { class: "test-nav" });
  const prev = el("button", { type: "button", text: "Previous" });
  prev.disabled = index === 0;
  prev.addEventListener("click", () => app.showQuestion(index - 1));
  const next = el("button", { type: "button", text: "Next" });
  next.disabled = index === total - 1;
  next.addEventListener("click", () => app.showQuestion(index + 1));
  nav.append(prev, next);
  root.append(nav);

  const review = el("div", { class: "review-strip", "aria-label": "question overview" });
  const missing: number[] = [];
  form.items.forEach((formItem, i) => {
    const isAnswered = formItem.item_id in state.answerDraft;
    if (!isAnswered) missing.push(i + 1);
    const dot = el("button", {
      type: "button",
      class: `review-dot${isAnswered ? "" : " missing"}${i === index ? " current" : ""}`,
      "aria-label": `question ${i + 1}${isAnswered ? "" : ", unanswered"}`,
      text: String(i + 1),
    });
    dot.addEventListener("click", () => app.showQuestion(i));
    review.append(dot);
  });
  root.append(review);

  const submit = el("button", { type: "button", class: "primary", text: `Submit ${title.toLowerCase()}` });
  submit.disabled = missing.length > 0;
  submit.addEventListener("click", () => void app.submitTest(form));
  root.append(submit);
  if (missing.length > 0) {
    root.append(
      el("p", {
        class: "missing-note",
        role: "status",
        text: `Unanswered: ${missing.join(", ")}`,
      }),
    );
  }
  return root;
}
