"""Journey state machine: phases, events, tutoring sessions, and replay."""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field, replace
from enum import Enum

from .bank import ItemBank, assemble_posttest, assemble_pretest, select_exercises
from .errors import (
    ProtocolError,
    StateError,
    SummaryParseError,
    ValidationError,
)
from .gateway import SENTINEL, ChatMessage
from .irt import learning_gain, prob_correct
from .prompts import (
    PromptConfig,
    build_summary_prompt,
    build_system_prompt,
    parse_summary,
)
from .students import (
    OnboardingSurvey,
    StudentProfile,
    apply_summary,
    init_profile,
    placeholder_summary,
    record_posttest,
    record_pretest,
)

logger = logging.getLogger(__name__)


class Phase(str, Enum):
    ONBOARDING = "Onboarding"
    PRETEST = "PreTest"
    TUTORING = "TutoringSession"
    POSTTEST = "PostTest"
    CONCEPT_SELECT = "ConceptSelect"
    COMPLETED = "Completed"


EVENT_KINDS = (
    "survey_submitted",
    "pretest_submitted",
    "student_message",
    "tutor_message",
    "session_finished",
    "posttest_submitted",
    "concept_chosen",
)

FINISH_REASONS = ("sentinel", "turn_cap", "abort")

# Matches one choice letter that stands alone (not embedded in a word/number).
_LABEL_RE = re.compile(r"(?<![A-Za-z0-9])([A-Ea-e])(?![A-Za-z0-9])")


@dataclass(frozen=True)
class SessionEvent:
    """One append-only entry in a student's journey log."""

    kind: str
    payload: dict
    timestamp: float

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValidationError(f"unknown event kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": self.payload, "timestamp": self.timestamp}

    @staticmethod
    def from_dict(obj: dict) -> "SessionEvent":
        return SessionEvent(obj["kind"], obj.get("payload", {}), obj.get("timestamp", 0.0))


def make_event(kind: str, payload: dict, timestamp: float | None = None) -> SessionEvent:
    return SessionEvent(kind, payload, time.time() if timestamp is None else timestamp)


@dataclass(frozen=True)
class JourneyState:
    """Where one student is in the tutoring journey."""

    phase: Phase = Phase.ONBOARDING
    current_concept: str | None = None
    completed_concepts: tuple[str, ...] = ()
    transcript: tuple[ChatMessage, ...] = ()
    exercises_in_play: tuple[str, ...] = ()
    first_responses: dict = field(default_factory=dict)
    session_index: int = 0
    tutored_items: tuple[str, ...] = ()
    awaiting_summary: bool = False
    pending_reason: str | None = None

    @property
    def turn_count(self) -> int:
        """Student and tutor utterances so far; the system prompt is not a turn."""
        return sum(1 for m in self.transcript if m.role != "system")

    def current_exercise(self) -> str | None:
        """The first presented exercise without a recorded first response."""
        for item_id in self.exercises_in_play:
            if item_id not in self.first_responses:
                return item_id
        return None


@dataclass(frozen=True)
class Effect:
    """An external action the caller must perform after an advance."""

    kind: str  # "request_opening" | "request_reply" | "request_summary"


@dataclass(frozen=True)
class AdvanceResult:
    state: JourneyState
    profile: StudentProfile | None
    effects: tuple[Effect, ...] = ()


@dataclass(frozen=True)
class OrchestratorConfig:
    exercises_per_session: int = 3
    turn_cap: int = 60
    summarize_on_abort: bool = True
    prompt: PromptConfig = field(default_factory=PromptConfig)


@dataclass(frozen=True)
class ProgressReport:
    """Before/after numbers for one concept, straight off the student model."""

    concept: str
    theta_pre: float
    theta_post: float
    prob_pre: float
    prob_post: float
    gain: float


def extract_answer(text: str) -> str | None:
    """Return the choice label when the message contains exactly one standalone
    letter A-E (case-insensitive); otherwise None."""
    labels = {m.group(1).upper() for m in _LABEL_RE.finditer(text)}
    if len(labels) == 1:
        return labels.pop()
    return None


def split_sentinel(raw_reply: str) -> tuple[str, bool]:
    """Strip the session-end sentinel when it terminates the reply.

    The sentinel only counts when it is the final non-whitespace content;
    a mid-reply occurrence leaves the session open.
    """
    trimmed = raw_reply.rstrip()
    if trimmed.endswith(SENTINEL):
        return trimmed[: -len(SENTINEL)].rstrip(), True
    return trimmed, False


def _reject(state: JourneyState, event: SessionEvent, expected: str) -> ProtocolError:
    return ProtocolError(
        f"event {event.kind!r} is not legal in phase {state.phase.value!r}; "
        f"expected phase {expected}",
        expected_phase=expected,
    )


def _grade_form_answers(form, answers, bank: ItemBank) -> dict[str, int]:
    """Validate a submitted answer map against a test form and grade it."""
    if not isinstance(answers, dict):
        raise ValidationError("answers must map item_id to a choice label")
    unknown = sorted(set(answers) - set(form.item_ids))
    if unknown:
        raise ValidationError("answers include items not on the form: " + ", ".join(unknown))
    missing = sorted(set(form.item_ids) - set(answers))
    if missing:
        raise ValidationError("answers are missing items: " + ", ".join(missing))
    graded = {}
    for item_id in form.item_ids:
        exercise = bank.get(item_id)
        label = answers[item_id]
        valid = {c.label for c in exercise.choices}
        if label not in valid:
            raise ValidationError(
                f"answer {label!r} for {item_id} is not one of its choice labels"
            )
        graded[item_id] = int(label == exercise.answer)
    return graded


def _start_session(
    state: JourneyState,
    profile: StudentProfile,
    concept: str,
    bank: ItemBank,
    config: OrchestratorConfig,
) -> JourneyState:
    """Select exercises, build the system prompt, and enter the tutoring phase."""
    concept_state = profile.state_for(concept)
    if concept_state.theta_pre is None:
        raise StateError(f"no pre-test ability recorded for {concept!r}")
    exercises = select_exercises(
        concept_state.theta_pre,
        concept,
        bank,
        n=config.exercises_per_session,
        exclude=state.tutored_items,
    )
    session_index = state.session_index + 1
    prev_summary = profile.summaries[-1] if session_index >= 2 else None
    system_prompt = build_system_prompt(
        profile, concept, exercises, session_index, prev_summary, config.prompt
    )
    ids = tuple(ex.item_id for ex in exercises)
    return replace(
        state,
        phase=Phase.TUTORING,
        current_concept=concept,
        exercises_in_play=ids,
        first_responses={},
        transcript=(ChatMessage("system", system_prompt),),
        session_index=session_index,
        tutored_items=state.tutored_items + ids,
        awaiting_summary=False,
        pending_reason=None,
    )


def pretest_responses_by_concept(form, graded: dict[str, int], bank: ItemBank) -> dict:
    """Group graded pre-test answers into per-concept (params, correct) pairs."""
    grouped = {concept: [] for concept in form.concepts}
    for item_id in form.item_ids:
        exercise = bank.get(item_id)
        grouped[exercise.concept].append((exercise.params, graded[item_id]))
    return grouped


def posttest_form_for(state: JourneyState, profile: StudentProfile, bank: ItemBank):
    """The deterministic post-test form for the current concept."""
    concept = state.current_concept
    if concept is None:
        raise StateError("no concept is in play")
    concept_state = profile.state_for(concept)
    if concept_state.theta_pre is None:
        raise StateError(f"no pre-test ability recorded for {concept!r}")
    pretest_ids = set(assemble_pretest(bank).item_ids)
    exclude = set(state.tutored_items) | pretest_ids
    return assemble_posttest(bank, concept, concept_state.theta_pre, exclude)


def advance(
    state: JourneyState,
    event: SessionEvent,
    profile: StudentProfile | None,
    bank: ItemBank,
    config: OrchestratorConfig | None = None,
) -> AdvanceResult:
    """Apply one event to the journey, returning the successor state and effects.

    Pure given its inputs: an illegal or malformed event raises without any
    state change, and replaying a recorded event stream reproduces the same
    states and profiles.
    """
    cfg = config or OrchestratorConfig()
    kind = event.kind

    if kind == "survey_submitted":
        if state.phase != Phase.ONBOARDING:
            raise _reject(state, event, Phase.ONBOARDING.value)
        raw = event.payload.get("survey")
        if not isinstance(raw, dict):
            raise ValidationError("survey_submitted needs a 'survey' object")
        try:
            survey = OnboardingSurvey(
                student_id=raw["student_id"],
                perception=raw["perception"],
                processing=raw["processing"],
                understanding=raw["understanding"],
                self_assessment=dict(raw["self_assessment"]),
                demographics=dict(raw.get("demographics", {})),
            )
        except KeyError as exc:
            raise ValidationError(f"survey is missing field {exc.args[0]!r}") from None
        new_profile = init_profile(survey, bank.concepts)
        return AdvanceResult(replace(state, phase=Phase.PRETEST), new_profile)

    if profile is None:
        raise _reject(state, event, Phase.ONBOARDING.value)

    if kind == "pretest_submitted":
        if state.phase != Phase.PRETEST:
            raise _reject(state, event, Phase.PRETEST.value)
        form = assemble_pretest(bank)
        graded = _grade_form_answers(form, event.payload.get("answers"), bank)
        new_profile = record_pretest(profile, pretest_responses_by_concept(form, graded, bank))
        concept = event.payload.get("first_concept") or bank.concepts[0]
        if concept not in bank.concepts:
            raise ValidationError(f"unknown concept {concept!r}")
        new_state = _start_session(state, new_profile, concept, bank, cfg)
        return AdvanceResult(new_state, new_profile, (Effect("request_opening"),))

    if kind == "student_message":
        if state.phase != Phase.TUTORING:
            raise _reject(state, event, Phase.TUTORING.value)
        text = event.payload.get("text")
        if not isinstance(text, str) or not text.strip():
            raise ValidationError("student message must be non-empty text")
        first_responses = dict(state.first_responses)
        current = state.current_exercise()
        if current is not None:
            label = extract_answer(text)
            if label is not None:
                exercise = bank.get(current)
                first_responses[current] = int(label == exercise.answer)
        new_state = replace(
            state,
            transcript=state.transcript + (ChatMessage("student", text),),
            first_responses=first_responses,
        )
        return AdvanceResult(new_state, profile, (Effect("request_reply"),))

    if kind == "tutor_message":
        if state.phase != Phase.TUTORING:
            raise _reject(state, event, Phase.TUTORING.value)
        raw = event.payload.get("text")
        if not isinstance(raw, str) or not raw.strip():
            raise ValidationError("tutor message must be non-empty text")
        display, finished = split_sentinel(raw)
        new_state = replace(
            state, transcript=state.transcript + (ChatMessage("tutor", display),)
        )
        effects = ()
        if finished:
            new_state = replace(new_state, awaiting_summary=True, pending_reason="sentinel")
            effects = (Effect("request_summary"),)
        elif new_state.turn_count >= cfg.turn_cap:
            new_state = replace(new_state, awaiting_summary=True, pending_reason="turn_cap")
            effects = (Effect("request_summary"),)
        return AdvanceResult(new_state, profile, effects)

    if kind == "session_finished":
        if state.phase != Phase.TUTORING:
            raise _reject(state, event, Phase.TUTORING.value)
        reason = event.payload.get("reason", "sentinel")
        if reason not in FINISH_REASONS:
            raise ValidationError(f"unknown finish reason {reason!r}")
        concept = state.current_concept or ""
        summary_reply = event.payload.get("summary_reply")
        if summary_reply is None:
            parsed = placeholder_summary(concept)
        else:
            try:
                parsed = parse_summary(summary_reply, concept)
            except SummaryParseError as exc:
                logger.warning("summary for %s did not parse: %s", concept, exc)
                parsed = placeholder_summary(concept)
        new_profile = apply_summary(profile, parsed)
        ratio = None
        if state.first_responses:
            ratio = sum(state.first_responses.values()) / len(state.first_responses)
        new_profile = replace(new_profile, last_first_response_ratio=ratio)
        new_state = replace(
            state, phase=Phase.POSTTEST, awaiting_summary=False, pending_reason=None
        )
        return AdvanceResult(new_state, new_profile)

    if kind == "posttest_submitted":
        if state.phase != Phase.POSTTEST:
            raise _reject(state, event, Phase.POSTTEST.value)
        concept = state.current_concept
        form = posttest_form_for(state, profile, bank)
        graded = _grade_form_answers(form, event.payload.get("answers"), bank)
        responses = [(bank.get(item_id).params, graded[item_id]) for item_id in form.item_ids]
        new_profile = record_posttest(profile, concept, responses, bank.params_for(concept))
        completed = state.completed_concepts + (concept,)
        remaining = [c for c in bank.concepts if c not in completed]
        new_state = replace(
            state,
            phase=Phase.CONCEPT_SELECT if remaining else Phase.COMPLETED,
            completed_concepts=completed,
        )
        return AdvanceResult(new_state, new_profile)

    if kind == "concept_chosen":
        if state.phase != Phase.CONCEPT_SELECT:
            raise _reject(state, event, Phase.CONCEPT_SELECT.value)
        remaining = [c for c in bank.concepts if c not in state.completed_concepts]
        concept = event.payload.get("concept") or remaining[0]
        if concept not in bank.concepts:
            raise ValidationError(f"unknown concept {concept!r}")
        if concept in state.completed_concepts:
            raise ValidationError(f"concept {concept!r} is already completed")
        new_state = _start_session(state, profile, concept, bank, cfg)
        return AdvanceResult(new_state, profile, (Effect("request_opening"),))

    raise _reject(state, event, state.phase.value)


def replay_events(events, bank: ItemBank, config: OrchestratorConfig | None = None):
    """Rebuild (state, profile) by folding a recorded event stream.

    Gateway calls are not repeated: tutor replies and summaries ride in the
    recorded events themselves.
    """
    state = JourneyState()
    profile = None
    for event in events:
        result = advance(state, event, profile, bank, config)
        state, profile = result.state, result.profile
    return state, profile


def progress_report(profile: StudentProfile, concept: str, items) -> ProgressReport:
    """Before/after ability and expected correctness over the concept's items."""
    state = profile.state_for(concept)
    if state.theta_pre is None:
        raise StateError(f"no pre-test recorded for {concept!r}")
    if state.theta_post is None or state.gain is None:
        raise StateError(f"no post-test recorded for {concept!r}")
    items = list(items)
    prob_pre = sum(prob_correct(p, state.theta_pre) for p in items) / len(items)
    prob_post = sum(prob_correct(p, state.theta_post) for p in items) / len(items)
    return ProgressReport(
        concept=concept,
        theta_pre=state.theta_pre,
        theta_post=state.theta_post,
        prob_pre=prob_pre,
        prob_post=prob_post,
        gain=state.gain,
    )


JOURNEY_SCHEMA_VERSION = 1


def state_to_doc(state: JourneyState) -> dict:
    return {
        "schema_version": JOURNEY_SCHEMA_VERSION,
        "phase": state.phase.value,
        "current_concept": state.current_concept,
        "completed_concepts": list(state.completed_concepts),
        "transcript": [m.to_dict() for m in state.transcript],
        "exercises_in_play": list(state.exercises_in_play),
        "first_responses": dict(state.first_responses),
        "session_index": state.session_index,
        "tutored_items": list(state.tutored_items),
        "awaiting_summary": state.awaiting_summary,
        "pending_reason": state.pending_reason,
    }


def state_from_doc(doc: dict) -> JourneyState:
    version = doc.get("schema_version")
    if version != JOURNEY_SCHEMA_VERSION:
        raise ValidationError(f"unsupported journey schema_version {version!r}")
    return JourneyState(
        phase=Phase(doc["phase"]),
        current_concept=doc["current_concept"],
        completed_concepts=tuple(doc["completed_concepts"]),
        transcript=tuple(ChatMessage.from_dict(m) for m in doc["transcript"]),
        exercises_in_play=tuple(doc["exercises_in_play"]),
        first_responses=dict(doc["first_responses"]),
        session_index=doc["session_index"],
        tutored_items=tuple(doc["tutored_items"]),
        awaiting_summary=doc["awaiting_summary"],
        pending_reason=doc["pending_reason"],
    )


class SessionRunner:
    """Drives one student's journey: validates commands, calls the gateway,
    and commits events only after their effects succeed."""

    def __init__(self, student_id: str, bank: ItemBank, provider, store=None,
                 config: OrchestratorConfig | None = None):
        self.student_id = student_id
        self.bank = bank
        self.provider = provider
        self.store = store
        self.config = config or OrchestratorConfig()
        self.state = JourneyState()
        self.profile: StudentProfile | None = None

    @classmethod
    def resume(cls, student_id: str, bank: ItemBank, provider, store,
               config: OrchestratorConfig | None = None) -> "SessionRunner":
        """Rebuild a runner from the persisted event log."""
        runner = cls(student_id, bank, provider, store, config)
        events = store.read_events(student_id)
        runner.state, runner.profile = replay_events(events, bank, runner.config)
        return runner

    def _commit(self, events, result: AdvanceResult):
        if self.store is not None:
            self.store.append_events(self.student_id, events)
        self.state, self.profile = result.state, result.profile
        if self.store is not None and self.profile is not None:
            from .students import profile_to_doc  # local import avoids a cycle

            self.store.write_snapshot(
                self.student_id, profile_to_doc(self.profile), state_to_doc(self.state)
            )

    def _advance(self, event: SessionEvent, state=None, profile=None) -> AdvanceResult:
        base_state = self.state if state is None else state
        base_profile = self.profile if profile is None else profile
        return advance(base_state, event, base_profile, self.bank, self.config)

    def _summary_leg(self, events, result: AdvanceResult) -> AdvanceResult:
        """When a session just ended, fetch the summary and close it out."""
        if not result.state.awaiting_summary:
            return result
        reason = result.state.pending_reason or "sentinel"
        history = list(result.state.transcript) + [
            ChatMessage("student", build_summary_prompt())
        ]
        summary_reply = self.provider.complete(history)
        finish = make_event(
            "session_finished", {"summary_reply": summary_reply, "reason": reason}
        )
        closed = self._advance(finish, result.state, result.profile)
        events.append(finish)
        return closed

    def submit_survey(self, survey: dict):
        event = make_event("survey_submitted", {"survey": survey})
        result = self._advance(event)
        self._commit([event], result)

    def pretest_form(self):
        if self.state.phase != Phase.PRETEST:
            raise ProtocolError(
                f"pre-test is not available in phase {self.state.phase.value!r}",
                expected_phase=Phase.PRETEST.value,
            )
        return assemble_pretest(self.bank)

    def submit_pretest(self, answers: dict, first_concept: str | None = None):
        payload = {"answers": dict(answers)}
        if first_concept:
            payload["first_concept"] = first_concept
        event = make_event("pretest_submitted", payload)
        result = self._advance(event)
        self._commit([event], result)

    def start_session(self) -> tuple[list, str]:
        """Trigger the tutor's opening message; idempotent once started.

        Returns the exercises in play and the first tutor utterance.
        """
        if self.state.phase != Phase.TUTORING:
            raise ProtocolError(
                f"no tutoring session to start in phase {self.state.phase.value!r}",
                expected_phase=Phase.TUTORING.value,
            )
        exercises = [self.bank.get(item_id) for item_id in self.state.exercises_in_play]
        opened = [m for m in self.state.transcript if m.role == "tutor"]
        if opened:
            return exercises, opened[0].content
        reply = self.provider.complete(list(self.state.transcript))
        event = make_event("tutor_message", {"text": reply})
        result = self._advance(event)
        events = [event]
        result = self._summary_leg(events, result)
        self._commit(events, result)
        display, _ = split_sentinel(reply)
        return exercises, display

    def handle_student_message(self, text: str) -> tuple[str, bool]:
        """One chat turn: record the message, get the tutor reply, finalize on
        the sentinel or the turn cap. Nothing commits if the gateway fails."""
        student_event = make_event("student_message", {"text": text})
        mid = self._advance(student_event)
        reply = self.provider.complete(list(mid.state.transcript))
        tutor_event = make_event("tutor_message", {"text": reply})
        after_reply = self._advance(tutor_event, mid.state, mid.profile)
        events = [student_event, tutor_event]
        final = self._summary_leg(events, after_reply)
        self._commit(events, final)
        display, _ = split_sentinel(reply)
        finished = final.state.phase != Phase.TUTORING
        return display, finished

    def force_finalize(self, reason: str = "abort"):
        """Operator abort: close the live session, with or without a summary."""
        if self.state.phase != Phase.TUTORING:
            raise ProtocolError(
                f"no tutoring session to finalize in phase {self.state.phase.value!r}",
                expected_phase=Phase.TUTORING.value,
            )
        summary_reply = None
        if self.config.summarize_on_abort:
            history = list(self.state.transcript) + [
                ChatMessage("student", build_summary_prompt())
            ]
            summary_reply = self.provider.complete(history)
        event = make_event(
            "session_finished", {"summary_reply": summary_reply, "reason": reason}
        )
        result = self._advance(event)
        self._commit([event], result)

    def posttest_form(self):
        if self.state.phase != Phase.POSTTEST:
            raise ProtocolError(
                f"post-test is not available in phase {self.state.phase.value!r}",
                expected_phase=Phase.POSTTEST.value,
            )
        return posttest_form_for(self.state, self.profile, self.bank)

    def submit_posttest(self, answers: dict):
        event = make_event("posttest_submitted", {"answers": dict(answers)})
        result = self._advance(event)
        self._commit([event], result)

    def choose_concept(self, concept: str | None = None):
        payload = {"concept": concept} if concept else {}
        event = make_event("concept_chosen", payload)
        result = self._advance(event)
        self._commit([event], result)

    def report(self, concept: str) -> ProgressReport:
        if self.profile is None:
            raise StateError("no profile recorded yet")
        return progress_report(self.profile, concept, self.bank.params_for(concept))
