/**
 * UI-local view state.
 *
 * The server's journey view is authoritative for the phase; everything else
 * here is draft input (unsent answers, the chat composer) or a cache of the
 * latest server responses needed to render the current screen.
 */

import type { Exercise, JourneyView, Profile, ProgressReport, TestForm } from "./api.js";

export interface ChatTurn {
  role: "tutor" | "student";
  text: string;
}

export interface ViewState {
  studentId: string | null;
  /** Authoritative journey position, mirrored from the last server response. */
  journey: JourneyView | null;
  profile: Profile | null;
  /** Exercises selected for the current tutoring session. */
  exercises: Exercise[];
  /** Which exercise the materials pane is showing. */
  exerciseIndex: number;
  /** Chat history; a student turn is appended only after the server acknowledges it. */
  transcript: ChatTurn[];
  /** True once the tutor has ended the session (or the turn cap hit). */
  sessionFinished: boolean;
  /** Exactly one chat request may be awaiting a reply. */
  chatPending: boolean;
  /** Draft student message, preserved across transient failures. */
  chatDraft: string;
  /** Draft test answers keyed by item id, preserved across validation errors. */
  answerDraft: Record<string, string>;
  /** Index of the test question currently shown (one at a time). */
  questionIndex: number;
  /** The test form being taken, if any. */
  form: TestForm | null;
  /** Report returned by the last post-test submission. */
  report: ProgressReport | null;
  /** One report per concept, fetched for the completion screen. */
  completedReports: ProgressReport[];
  /** True between pre-test submission and the student starting the session. */
  previewing: boolean;
  /** Transient banner text for gateway outages; input stays usable. */
  banner: string | null;
  /** Inline error for the current screen, cleared on the next success. */
  error: string | null;
}

export function initialState(): ViewState {
  return {
    studentId: null,
    journey: null,
    profile: null,
    exercises: [],
    exerciseIndex: 0,
    transcript: [],
    sessionFinished: false,
    chatPending: false,
    chatDraft: "",
    answerDraft: {},
    questionIndex: 0,
    form: null,
    report: null,
    completedReports: [],
    previewing: false,
    banner: null,
    error: null,
  };
}
