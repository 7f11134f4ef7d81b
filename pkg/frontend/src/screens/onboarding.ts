/**
 * Onboarding survey: learning-style poles (with plain-language explanations),
 * per-concept confidence, and basic demographics.
 */

import { el, radioGroup } from "../dom.js";
import type { App } from "../app.js";

const STYLE_AXES = [
  {
    name: "perception",
    legend: "Perception: how do you prefer to take in material?",
    options: [
      {
        value: "sensory",
        label: "Sensory",
        note: "You prefer facts, concrete examples, and well-established procedures.",
      },
      {
        value: "intuitive",
        label: "Intuitive",
        note: "You prefer abstract concepts, principles, theories, and discovering possibilities.",
      },
    ],
  },
  {
    name: "processing",
    legend: "Processing: how do you prefer to work with material?",
    options: [
      {
        value: "active",
        label: "Active",
        note: "You learn by trying things out and discussing them, not just listening.",
      },
      {
        value: "reflective",
        label: "Reflective",
        note: "You learn by thinking material through quietly before acting.",
      },
    ],
  },
  {
    name: "understanding",
    legend: "Understanding: how does material come together for you?",
    options: [
      {
        value: "sequential",
        label: "Sequential",
        note: "You build understanding in linear steps, each following from the last.",
      },
      {
        value: "global",
        label: "Global",
        note: "You need the big picture and context first; details then fall into place.",
      },
    ],
  },
] as const;

const CONFIDENCE_LEVELS = ["Weak", "Moderate", "Strong"];

export function renderOnboarding(app: App, concepts: string[]): HTMLElement {
  const root = el("section", { class: "screen", "data-screen": "onboarding" });
  root.append(el("h2", { text: "Welcome! Tell us how you learn" }));
  root.append(
    el("p", {
      class: "screen-intro",
      text:
        "Your answers shape how the tutor explains things and which exercises " +
        "you get. After this survey you will take a short placement test, then " +
        "work through three tutoring sessions, one per concept.",
    }),
  );

  const form = el("form", { "aria-label": "onboarding survey" });
  const styleReaders: Record<string, () => string | null> = {};
  const styleBlock = el("div", { class: "survey-block" });
  styleBlock.append(el("h3", { text: "Learning style" }));
  for (const axis of STYLE_AXES) {
    const { fieldset, value } = radioGroup(axis.name, axis.legend, [...axis.options]);
    styleReaders[axis.name] = value;
    styleBlock.append(fieldset);
  }
  form.append(styleBlock);

  const confidenceBlock = el("div", { class: "survey-block" });
  confidenceBlock.append(el("h3", { text: "Your confidence per concept" }));
  const confidenceReaders: Record<string, () => string | null> = {};
  for (const concept of concepts) {
    const { fieldset, value } = radioGroup(
      `confidence-${concept}`,
      `How confident are you about ${concept}?`,
      CONFIDENCE_LEVELS.map((level) => ({ value: level, label: level })),
    );
    confidenceReaders[concept] = value;
    confidenceBlock.append(fieldset);
  }
  form.append(confidenceBlock);

  const demographicsBlock = el("div", { class: "survey-block" });
  demographicsBlock.append(el("h3", { text: "About you" }));
  const ageInput = el("input", {
    type: "number",
    id: "age",
    name: "age",
    min: "1",
    max: "120",
  });
  const languageInput = el("input", {
    type: "text",
    id: "native-language",
    name: "native_language",
  });
  demographicsBlock.append(
    el("div", { class: "field" }, [el("label", { for: "age", text: "Age" }), ageInput]),
    el("div", { class: "field" }, [
      el("label", { for: "native-language", text: "Native language" }),
      languageInput,
    ]),
  );
  form.append(demographicsBlock);

  const submit = el("button", { type: "submit", text: "Start the placement test" });
  form.append(submit);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const style: Record<string, string> = {};
    for (const axis of STYLE_AXES) {
      const chosen = styleReaders[axis.name]();
      if (!chosen) {
        app.showError(`Please choose a ${axis.name} style.`);
        return;
      }
      style[axis.name] = chosen;
    }
    const selfAssessment: Record<string, string> = {};
    for (const concept of concepts) {
      const chosen = confidenceReaders[concept]();
      if (!chosen) {
        app.showError(`Please rate your confidence in ${concept}.`);
        return;
      }
      selfAssessment[concept] = chosen;
    }
    const demographics: Record<string, unknown> = {};
    if (ageInput.value) demographics["age"] = Number(ageInput.value);
    if (languageInput.value) demographics["native_language"] = languageInput.value;
    void app.submitSurvey({
      student_id: app.state.studentId ?? "",
      perception: style["perception"],
      processing: style["processing"],
      understanding: style["understanding"],
      self_assessment: selfAssessment,
      demographics,
    });
  });

  root.append(form);
  return root;
}
