/**
 * Typed client for the tutoring service HTTP API.
 *
 * Thin by design: every number shown in the UI (abilities, probabilities,
 * gains) comes from these responses verbatim. The client never computes
 * scores locally.
 */

export type Phase =
  | "Onboarding"
  | "PreTest"
  | "TutoringSession"
  | "PostTest"
  | "ConceptSelect"
  | "Completed";

export interface JourneyView {
  phase: Phase;
  current_concept: string | null;
  completed_concepts: string[];
  session_index: number;
}

export interface Choice {
  label: string;
  text: string;
}

export interface Exercise {
  item_id: string;
  concept: string;
  stem: string;
  choices: Choice[];
}

export interface TestForm {
  kind: "pretest" | "posttest";
  concepts: string[];
  items: Exercise[];
}

export interface ConceptState {
  self_reported: string | null;
  measured: string | null;
  discrepancy: string | null;
  theta_pre: number | null;
  theta_post: number | null;
  gain: number | null;
}

export interface SessionSummary {
  specific_topics: string;
  response_level_actions: string;
  learning_style_actions: string;
  session_concept: string;
}

export interface Profile {
  schema_version: number;
  student_id: string;
  demographics: Record<string, unknown>;
  style: { perception: string; processing: string; understanding: string };
  concept_states: Record<string, ConceptState>;
  summaries: SessionSummary[];
  sessions_completed: number;
  last_first_response_ratio: number | null;
}

export interface ProgressReport {
  concept: string;
  theta_pre: number;
  theta_post: number;
  prob_pre: number;
  prob_post: number;
  gain: number;
}

export interface SurveyBody {
  student_id: string;
  perception: string;
  processing: string;
  understanding: string;
  self_assessment: Record<string, string>;
  demographics: Record<string, unknown>;
}

export interface TranscriptEvent {
  kind: string;
  payload: Record<string, unknown>;
  timestamp: number;
}

export type PretestResult = JourneyView & { exercises: Exercise[]; profile: Profile };
export type SessionStart = JourneyView & {
  exercises: Exercise[];
  tutor_message: string;
  finished: boolean;
};
export type ChatResult = JourneyView & { reply: string; finished: boolean };
export type PosttestResult = JourneyView & { report: ProgressReport };
export type ConceptResult = JourneyView & { exercises: Exercise[] };
export type ProfileResult = JourneyView & { profile: Profile };

/** A domain error from the service's uniform envelope. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly expectedPhase?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }

  /** Gateway outages are transient: worth a retry banner, not a dead end. */
  get transient(): boolean {
    return this.status === 502 || this.status === 503;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private token: string | null = null;

  constructor(
    public readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    extraHeaders?: Record<string, string>,
  ): Promise<T> {
    const headers: Record<string, string> = { ...extraHeaders };
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, "unreachable", `service unreachable: ${String(err)}`);
    }
    const doc = await response.json();
    if (!response.ok) {
      const envelope = (doc as { error?: { code?: string; message?: string; expected_phase?: string } }).error ?? {};
      throw new ApiError(
        response.status,
        envelope.code ?? "unknown",
        envelope.message ?? `request failed with status ${response.status}`,
        envelope.expected_phase,
      );
    }
    return doc as T;
  }

  ready(): Promise<{ status: string; provider: string; bank_items: number; concepts: string[] }> {
    return this.request("GET", "/readyz");
  }

  createStudent(studentId?: string): Promise<{ student_id: string; token: string }> {
    return this.request("POST", "/students", studentId ? { student_id: studentId } : {});
  }

  submitSurvey(studentId: string, body: SurveyBody): Promise<JourneyView> {
    return this.request("POST", `/students/${studentId}/survey`, body);
  }

  getPretest(studentId: string): Promise<{ form: TestForm }> {
    return this.request("GET", `/students/${studentId}/pretest`);
  }

  submitPretest(
    studentId: string,
    answers: Record<string, string>,
    firstConcept: string | null,
    idempotencyKey: string,
  ): Promise<PretestResult> {
    const body: Record<string, unknown> = { answers };
    if (firstConcept) body["first_concept"] = firstConcept;
    return this.request("POST", `/students/${studentId}/pretest`, body, {
      "Idempotency-Key": idempotencyKey,
    });
  }

  startSession(studentId: string): Promise<SessionStart> {
    return this.request("POST", `/students/${studentId}/session`);
  }

  chat(studentId: string, text: string): Promise<ChatResult> {
    return this.request("POST", `/students/${studentId}/chat`, { text });
  }

  getPosttest(studentId: string): Promise<{ form: TestForm }> {
    return this.request("GET", `/students/${studentId}/posttest`);
  }

  submitPosttest(
    studentId: string,
    answers: Record<string, string>,
    idempotencyKey: string,
  ): Promise<PosttestResult> {
    return this.request("POST", `/students/${studentId}/posttest`, { answers }, {
      "Idempotency-Key": idempotencyKey,
    });
  }

  getReport(studentId: string, concept: string): Promise<ProgressReport> {
    return this.request("GET", `/students/${studentId}/report?concept=${encodeURIComponent(concept)}`);
  }

  chooseConcept(studentId: string, concept?: string): Promise<ConceptResult> {
    return this.request("POST", `/students/${studentId}/concept`, concept ? { concept } : {});
  }

  getProfile(studentId: string): Promise<ProfileResult> {
    return this.request("GET", `/students/${studentId}/profile`);
  }

  getTranscript(studentId: string): Promise<{ events: TranscriptEvent[] }> {
    return this.request("GET", `/students/${studentId}/transcript`);
  }
}
