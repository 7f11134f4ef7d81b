/**
 * Screen router and action layer.
 *
 * The server's state machine is authoritative: after every response the app
 * mirrors the returned journey view and re-renders whichever screen belongs
 * to that phase. The UI adds nothing on top except draft inputs.
 */

import { ApiClient, ApiError } from "./api.js";
import type { JourneyView, ProgressReport, SurveyBody, TestForm, TranscriptEvent } from "./api.js";
import { initialState } from "./state.js";
import type { ViewState } from "./state.js";
import { clear, el } from "./dom.js";
import { renderLanding } from "./screens/landing.js";
import { renderOnboarding } from "./screens/onboarding.js";
import { renderTestForm } from "./screens/testform.js";
import { renderPreview } from "./screens/preview.js";
import { renderTutoring } from "./screens/tutoring.js";
import { renderReport } from "./screens/report.js";
import { renderChooser } from "./screens/chooser.js";
import { renderCompleted } from "./screens/completed.js";

const SENTINEL = "FINISHED.";

function newIdempotencyKey(): string {
  if (typeof crypto !== "undefined" && "randomUUID" in crypto) {
    return crypto.randomUUID();
  }
  return `key-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

export class App {
  readonly state: ViewState = initialState();
  private concepts: string[] = [];
  private formKey = newIdempotencyKey();
  private retry: (() => void) | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    private readonly storage: Storage = localStorage,
  ) {}

  /** Restore a saved session if one exists, otherwise show the landing screen. */
  async boot(): Promise<void> {
    const saved = this.storage.getItem("tutorkit:last");
    if (saved) {
      const token = this.storage.getItem(`tutorkit:token:${saved}`);
      if (token) {
        this.state.studentId = saved;
        this.client.setToken(token);
        try {
          await this.resume();
          return;
        } catch {
          this.client.setToken(null);
          this.state.studentId = null;
        }
      }
    }
    this.render();
  }

  /** Create the student (or pick a generated id) and enter onboarding. */
  async begin(studentId?: string): Promise<void> {
    await this.guard(async () => {
      const created = await this.client.createStudent(studentId);
      this.state.studentId = created.student_id;
      this.client.setToken(created.token);
      this.storage.setItem("tutorkit:last", created.student_id);
      this.storage.setItem(`tutorkit:token:${created.student_id}`, created.token);
      await this.loadConcepts();
      this.state.journey = {
        phase: "Onboarding",
        current_concept: null,
        completed_concepts: [],
        session_index: 0,
      };
      this.render();
    });
  }

  /** Re-enter an existing journey at whatever phase the server reports. */
  private async resume(): Promise<void> {
    const sid = this.state.studentId!;
    await this.loadConcepts();
    let view: JourneyView;
    try {
      const result = await this.client.getProfile(sid);
      this.state.profile = result.profile;
      view = result;
    } catch (err) {
      if (err instanceof ApiError && err.code === "state_conflict") {
        this.state.journey = {
          phase: "Onboarding",
          current_concept: null,
          completed_concepts: [],
          session_index: 0,
        };
        this.render();
        return;
      }
      throw err;
    }
    this.state.journey = {
      phase: view.phase,
      current_concept: view.current_concept,
      completed_concepts: view.completed_concepts,
      session_index: view.session_index,
    };
    if (view.phase === "PreTest") {
      this.state.form = (await this.client.getPretest(sid)).form;
      this.state.questionIndex = 0;
    } else if (view.phase === "TutoringSession") {
      await this.rebuildSession(sid);
    } else if (view.phase === "PostTest") {
      this.state.form = (await this.client.getPosttest(sid)).form;
      this.formKey = newIdempotencyKey();
      this.state.questionIndex = 0;
    } else if (view.phase === "Completed") {
      await this.loadCompletedReports();
    }
    this.render();
  }

  /** Rebuild the chat panel for an in-progress session from the event log. */
  private async rebuildSession(sid: string): Promise<void> {
    const { events } = await this.client.getTranscript(sid);
    const turns = currentSessionTurns(events);
    if (turns.length === 0) {
      this.state.previewing = true;
      return;
    }
    const started = await this.client.startSession(sid);
    this.state.exercises = started.exercises;
    this.state.transcript = turns;
    this.state.sessionFinished = started.finished;
    this.state.previewing = false;
  }

  private async loadConcepts(): Promise<void> {
    if (this.concepts.length === 0) {
      this.concepts = (await this.client.ready()).concepts;
    }
  }

  async submitSurvey(body: SurveyBody): Promise<void> {
    await this.guard(async () => {
      const view = await this.client.submitSurvey(this.state.studentId!, body);
      this.sync(view);
      this.state.form = (await this.client.getPretest(this.state.studentId!)).form;
      this.formKey = newIdempotencyKey();
      this.state.answerDraft = {};
      this.state.questionIndex = 0;
      this.render();
    });
  }

  selectAnswer(itemId: string, label: string): void {
    this.state.answerDraft[itemId] = label;
    this.render();
  }

  showQuestion(index: number): void {
    const total = this.state.form?.items.length ?? 0;
    this.state.questionIndex = Math.max(0, Math.min(index, total - 1));
    this.render();
  }

  showExercise(index: number): void {
    const total = this.state.exercises.length;
    this.state.exerciseIndex = Math.max(0, Math.min(index, total - 1));
    this.render();
  }

  async submitTest(form: TestForm): Promise<void> {
    const sid = this.state.studentId!;
    const answers = { ...this.state.answerDraft };
    await this.guard(async () => {
      if (form.kind === "pretest") {
        const result = await this.client.submitPretest(sid, answers, null, this.formKey);
        this.sync(result);
        this.state.profile = result.profile;
        this.state.exercises = result.exercises;
        this.state.previewing = true;
      } else {
        const result = await this.client.submitPosttest(sid, answers, this.formKey);
        this.sync(result);
        this.state.report = result.report;
      }
      this.state.form = null;
      this.state.answerDraft = {};
      this.state.questionIndex = 0;
      this.formKey = newIdempotencyKey();
      this.render();
    });
  }

  async startSession(): Promise<void> {
    await this.guard(
      async () => {
        const result = await this.client.startSession(this.state.studentId!);
        this.sync(result);
        this.state.exercises = result.exercises;
        this.state.exerciseIndex = 0;
        this.state.transcript = [{ role: "tutor", text: result.tutor_message }];
        this.state.sessionFinished = result.finished;
        this.state.previewing = false;
        this.render();
      },
      () => void this.startSession(),
    );
  }

  async sendChat(): Promise<void> {
    const text = this.state.chatDraft.trim();
    if (!text || this.state.chatPending || this.state.sessionFinished) return;
    this.state.chatPending = true;
    this.render();
    try {
      const result = await this.client.chat(this.state.studentId!, text);
      // The student's turn is shown only once the server has recorded it.
      this.state.transcript.push({ role: "student", text });
      this.state.transcript.push({ role: "tutor", text: result.reply });
      this.state.chatDraft = "";
      this.state.sessionFinished = result.finished;
      this.sync(result);
      this.state.banner = null;
      this.state.error = null;
    } catch (err) {
      this.handleFailure(err, null);
    } finally {
      this.state.chatPending = false;
      this.render();
      this.focusComposer();
    }
  }

  async proceedToPosttest(): Promise<void> {
    await this.guard(
      async () => {
        const sid = this.state.studentId!;
        this.state.form = (await this.client.getPosttest(sid)).form;
        this.formKey = newIdempotencyKey();
        this.state.answerDraft = {};
        this.state.questionIndex = 0;
        this.render();
      },
      () => void this.proceedToPosttest(),
    );
  }

  async continueAfterReport(): Promise<void> {
    await this.guard(async () => {
      this.state.report = null;
      this.state.transcript = [];
      this.state.sessionFinished = false;
      this.state.exercises = [];
      this.state.exerciseIndex = 0;
      const sid = this.state.studentId!;
      const result = await this.client.getProfile(sid);
      this.state.profile = result.profile;
      this.sync(result);
      if (this.state.journey?.phase === "Completed") {
        await this.loadCompletedReports();
      }
      this.render();
    });
  }

  async chooseConcept(concept: string): Promise<void> {
    await this.guard(async () => {
      const result = await this.client.chooseConcept(this.state.studentId!, concept);
      this.sync(result);
      this.state.exercises = result.exercises;
      this.state.exerciseIndex = 0;
      this.state.previewing = true;
      this.render();
    });
  }

  private async loadCompletedReports(): Promise<void> {
    const sid = this.state.studentId!;
    const concepts = this.state.journey?.completed_concepts ?? [];
    const reports: ProgressReport[] = [];
    for (const concept of concepts) {
      reports.push(await this.client.getReport(sid, concept));
    }
    this.state.completedReports = reports;
  }

  showError(message: string): void {
    this.state.error = message;
    this.render();
  }

  /** Mirror the server's journey view; the phase shown is never invented locally. */
  private sync(view: JourneyView): void {
    this.state.journey = {
      phase: view.phase,
      current_concept: view.current_concept,
      completed_concepts: view.completed_concepts,
      session_index: view.session_index,
    };
    this.state.banner = null;
    this.state.error = null;
    this.retry = null;
  }

  /** Run an action, routing failures to the banner (transient) or inline error. */
  private async guard(action: () => Promise<void>, retry: (() => void) | null = null): Promise<void> {
    try {
      await action();
    } catch (err) {
      this.handleFailure(err, retry);
      this.render();
    }
  }

  private handleFailure(err: unknown, retry: (() => void) | null): void {
    if (err instanceof ApiError) {
      if (err.transient || err.status === 0) {
        this.state.banner = `The tutor is temporarily unreachable (${err.message}). Your input is preserved.`;
        this.retry = retry;
      } else {
        this.state.error = err.message;
      }
      return;
    }
    this.state.error = String(err);
  }

  private focusComposer(): void {
    const input = this.root.querySelector<HTMLInputElement>("#chat-input");
    if (input && !input.disabled) input.focus();
  }

  render(): void {
    const { state } = this;
    clear(this.root);
    this.root.setAttribute("data-phase", state.journey?.phase ?? "none");

    if (state.banner) {
      const banner = el("div", { class: "banner", role: "alert" }, [state.banner]);
      if (this.retry) {
        const again = el("button", { type: "button", text: "Retry" });
        const action = this.retry;
        again.addEventListener("click", () => action());
        banner.append(again);
      }
      this.root.append(banner);
    }
    if (state.error) {
      this.root.append(el("div", { class: "inline-error", role: "alert" }, [state.error]));
    }

    this.root.append(this.currentScreen());
  }

  private currentScreen(): HTMLElement {
    const { state } = this;
    const phase = state.journey?.phase;
    if (!phase) return renderLanding(this);
    switch (phase) {
      case "Onboarding":
        return renderOnboarding(this, this.concepts);
      case "PreTest":
        return state.form
          ? renderTestForm(this, state.form)
          : renderLanding(this);
      case "TutoringSession":
        return state.previewing ? renderPreview(this) : renderTutoring(this);
      case "PostTest":
        if (state.form) return renderTestForm(this, state.form);
        // The session just ended: the closing chat stays visible with the
        // proceed affordance until the student moves on.
        return renderTutoring(this);
      case "ConceptSelect":
        if (state.report) return renderReport(this, state.report);
        return renderChooser(this, this.remainingConcepts());
      case "Completed":
        if (state.report) return renderReport(this, state.report);
        return renderCompleted(state.completedReports);
    }
  }

  private remainingConcepts(): string[] {
    const done = new Set(this.state.journey?.completed_concepts ?? []);
    const all = this.concepts.length > 0
      ? this.concepts
      : Object.keys(this.state.profile?.concept_states ?? {});
    return all.filter((concept) => !done.has(concept));
  }
}

/** Chat turns belonging to the current session: everything after the last boundary. */
export function currentSessionTurns(
  events: TranscriptEvent[],
): { role: "tutor" | "student"; text: string }[] {
  let start = 0;
  events.forEach((event, i) => {
    if (
      event.kind === "pretest_submitted" ||
      event.kind === "concept_chosen" ||
      event.kind === "session_finished"
    ) {
      start = i + 1;
    }
  });
  const turns: { role: "tutor" | "student"; text: string }[] = [];
  for (const event of events.slice(start)) {
    if (event.kind === "tutor_message" || event.kind === "student_message") {
      const raw = String(event.payload["text"] ?? "");
      const text = raw.replace(SENTINEL, "").trim();
      turns.push({ role: event.kind === "tutor_message" ? "tutor" : "student", text });
    }
  }
  return turns;
}
