"""Three-axis student model: learning style, per-concept proficiency, session history."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import StateError, ValidationError
from .irt import Ability, estimate_theta, learning_gain

PERCEPTION_POLES = ("sensory", "intuitive")
PROCESSING_POLES = ("active", "reflective")
UNDERSTANDING_POLES = ("sequential", "global")

# Measured proficiency cut points on the theta scale.
WEAK_BELOW = -0.5
STRONG_ABOVE = 0.5

UNKNOWN_FIELD = "Unknown"


class ProficiencyLabel(str, Enum):
    WEAK = "Weak"
    MODERATE = "Moderate"
    STRONG = "Strong"

    @property
    def rank(self) -> int:
        return _LABEL_RANK[self]


_LABEL_RANK = {
    ProficiencyLabel.WEAK: 0,
    ProficiencyLabel.MODERATE: 1,
    ProficiencyLabel.STRONG: 2,
}


def parse_label(value) -> ProficiencyLabel:
    if isinstance(value, ProficiencyLabel):
        return value
    try:
        return ProficiencyLabel(str(value).capitalize())
    except ValueError:
        raise ValidationError(
            f"unknown proficiency label {value!r}; expected Weak, Moderate, or Strong"
        ) from None


def label_for_theta(theta: float, weak_below: float = WEAK_BELOW,
                    strong_above: float = STRONG_ABOVE) -> ProficiencyLabel:
    """Map a theta estimate onto the three-level proficiency scale."""
    if theta < weak_below:
        return ProficiencyLabel.WEAK
    if theta > strong_above:
        return ProficiencyLabel.STRONG
    return ProficiencyLabel.MODERATE


def discrepancy(self_reported: ProficiencyLabel, measured: ProficiencyLabel) -> str:
    """Compare self-report against measurement on the label ranks."""
    if measured.rank > self_reported.rank:
        return "underconfident"
    if measured.rank < self_reported.rank:
        return "overconfident"
    return "aligned"


@dataclass(frozen=True)
class LearningStyle:
    """Poles on the perception, processing, and understanding dimensions."""

    perception: str
    processing: str
    understanding: str

    def __post_init__(self):
        for dim, value, poles in (
            ("perception", self.perception, PERCEPTION_POLES),
            ("processing", self.processing, PROCESSING_POLES),
            ("understanding", self.understanding, UNDERSTANDING_POLES),
        ):
            if value not in poles:
                raise ValidationError(
                    f"learning style dimension {dim!r} must be one of {poles}, got {value!r}"
                )

    @property
    def display(self) -> str:
        """Slash-joined capitalized poles, processing first (e.g. Active/Intuitive/Global)."""
        return "/".join(
            p.capitalize() for p in (self.processing, self.perception, self.understanding)
        )


@dataclass(frozen=True)
class ParsedSummary:
    """The three structured sections recovered from a session-end summary."""

    specific_topics: str
    response_level_actions: str
    learning_style_actions: str
    session_concept: str = ""

    def __post_init__(self):
        for name, value in (
            ("specific_topics", self.specific_topics),
            ("response_level_actions", self.response_level_actions),
            ("learning_style_actions", self.learning_style_actions),
        ):
            if not value or not value.strip():
                raise ValidationError(f"summary field {name!r} must be non-empty")


def placeholder_summary(session_concept: str = "") -> ParsedSummary:
    """The summary recorded when a reply could not be parsed."""
    return ParsedSummary(UNKNOWN_FIELD, UNKNOWN_FIELD, UNKNOWN_FIELD, session_concept)


@dataclass(frozen=True)
class ConceptState:
    """Everything measured for one concept so far."""

    self_reported: ProficiencyLabel | None = None
    measured: ProficiencyLabel | None = None
    discrepancy: str | None = None
    theta_pre: float | None = None
    theta_post: float | None = None
    gain: float | None = None


@dataclass(frozen=True)
class OnboardingSurvey:
    """Answers collected before any testing starts."""

    student_id: str
    perception: str
    processing: str
    understanding: str
    self_assessment: dict
    demographics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class StudentProfile:
    """Immutable snapshot of one student; update operations return new copies."""

    student_id: str
    demographics: dict
    style: LearningStyle
    concept_states: dict
    summaries: tuple = ()
    last_first_response_ratio: float | None = None

    @property
    def sessions_completed(self) -> int:
        return len(self.summaries)

    def state_for(self, concept: str) -> ConceptState:
        try:
            return self.concept_states[concept]
        except KeyError:
            raise StateError(f"profile has no state for concept {concept!r}") from None


def init_profile(survey: OnboardingSurvey, concepts) -> StudentProfile:
    """Build a fresh profile from the onboarding survey.

    Requires a pole for every style dimension and a self-reported proficiency
    for every bank concept.
    """
    if not survey.student_id:
        raise ValidationError("survey is missing a student_id")
    style = LearningStyle(survey.perception, survey.processing, survey.understanding)
    concepts = tuple(concepts)
    missing = [c for c in concepts if c not in survey.self_assessment]
    if missing:
        raise ValidationError(
            "survey is missing a self-reported proficiency for: " + ", ".join(missing)
        )
    states = {
        c: ConceptState(self_reported=parse_label(survey.self_assessment[c]))
        for c in concepts
    }
    return StudentProfile(
        student_id=survey.student_id,
        demographics=dict(survey.demographics),
        style=style,
        concept_states=states,
    )


def record_pretest(profile: StudentProfile, responses) -> StudentProfile:
    """Store per-concept diagnostic results from the graded pre-test.

    `responses` maps each concept to its list of (ItemParams, correct) pairs.
    """
    expected = set(profile.concept_states)
    got = set(responses)
    if got != expected:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        parts = []
        if missing:
            parts.append("missing concepts: " + ", ".join(missing))
        if extra:
            parts.append("unexpected concepts: " + ", ".join(extra))
        raise ValidationError("pre-test responses are incomplete; " + "; ".join(parts))
    states = dict(profile.concept_states)
    for concept in profile.concept_states:
        pairs = list(responses[concept])
        if not pairs:
            raise ValidationError(f"pre-test responses for {concept!r} are empty")
        state = states[concept]
        if state.self_reported is None:
            raise StateError(f"no self-reported proficiency recorded for {concept!r}")
        ability: Ability = estimate_theta(pairs)
        measured = label_for_theta(ability.theta)
        states[concept] = replace(
            state,
            measured=measured,
            discrepancy=discrepancy(state.self_reported, measured),
            theta_pre=ability.theta,
        )
    return replace(profile, concept_states=states)


def apply_summary(profile: StudentProfile, summary: ParsedSummary) -> StudentProfile:
    """Append a session summary; history is append-only."""
    return replace(profile, summaries=profile.summaries + (summary,))


def record_posttest(profile: StudentProfile, concept: str, responses,
                    gain_items) -> StudentProfile:
    """Store the post-test ability and the learning gain for one concept.

    `gain_items` are the calibrated items the gain is averaged over.
    """
    state = profile.state_for(concept)
    if state.theta_pre is None:
        raise StateError(f"cannot record a post-test for {concept!r} before the pre-test")
    pairs = list(responses)
    if not pairs:
        raise ValidationError(f"post-test responses for {concept!r} are empty")
    ability = estimate_theta(pairs)
    gain = learning_gain(state.theta_pre, ability.theta, gain_items)
    states = dict(profile.concept_states)
    states[concept] = replace(state, theta_post=ability.theta, gain=gain)
    return replace(profile, concept_states=states)


PROFILE_SCHEMA_VERSION = 1


def profile_to_doc(profile: StudentProfile) -> dict:
    """Serialize a profile to its persisted document form."""
    return {
        "schema_version": PROFILE_SCHEMA_VERSION,
        "student_id": profile.student_id,
        "demographics": dict(profile.demographics),
        "style": {
            "perception": profile.style.perception,
            "processing": profile.style.processing,
            "understanding": profile.style.understanding,
        },
        "concept_states": {
            concept: {
                "self_reported": state.self_reported.value if state.self_reported else None,
                "measured": state.measured.value if state.measured else None,
                "discrepancy": state.discrepancy,
                "theta_pre": state.theta_pre,
                "theta_post": state.theta_post,
                "gain": state.gain,
            }
            for concept, state in profile.concept_states.items()
        },
        "summaries": [
            {
                "specific_topics": s.specific_topics,
                "response_level_actions": s.response_level_actions,
                "learning_style_actions": s.learning_style_actions,
                "session_concept": s.session_concept,
            }
            for s in profile.summaries
        ],
        "sessions_completed": profile.sessions_completed,
        "last_first_response_ratio": profile.last_first_response_ratio,
    }


def profile_from_doc(doc: dict) -> StudentProfile:
    """Rebuild a profile from its persisted document form."""
    version = doc.get("schema_version")
    if version != PROFILE_SCHEMA_VERSION:
        raise ValidationError(f"unsupported profile schema_version {version!r}")
    style = LearningStyle(**doc["style"])
    states = {}
    for concept, raw in doc["concept_states"].items():
        states[concept] = ConceptState(
            self_reported=parse_label(raw["self_reported"]) if raw["self_reported"] else None,
            measured=parse_label(raw["measured"]) if raw["measured"] else None,
            discrepancy=raw["discrepancy"],
            theta_pre=raw["theta_pre"],
            theta_post=raw["theta_post"],
            gain=raw["gain"],
        )
    summaries = tuple(
        ParsedSummary(
            s["specific_topics"],
            s["response_level_actions"],
            s["learning_style_actions"],
            s.get("session_concept", ""),
        )
        for s in doc.get("summaries", ())
    )
    return StudentProfile(
        student_id=doc["student_id"],
        demographics=dict(doc.get("demographics", {})),
        style=style,
        concept_states=states,
        summaries=summaries,
        last_first_response_ratio=doc.get("last_first_response_ratio"),
    )
