"""Personalized conversation-based tutoring toolkit.

Diagnoses per-concept ability from test responses with a two-parameter
logistic response model, selects exercises whose difficulty sits near the
student's estimated ability, assembles personalized tutor prompts around a
three-part student model (cognitive, affective, learning style), and closes
the loop with structured end-of-session summaries. Ships an HTTP service, a
CLI, a deterministic mock chat provider, and a synthetic-student simulator.
"""

from .bank import (
    CHOICE_LABELS,
    DEFAULT_CONCEPTS,
    Choice,
    Exercise,
    ItemBank,
    TestForm,
    assemble_posttest,
    assemble_pretest,
    bank_report,
    bank_to_doc,
    bundled_bank,
    load_bank,
    select_exercises,
)
from .errors import (
    AuthorizationError,
    BankLoadError,
    ConfigurationError,
    EmptyInputError,
    ExhaustedConceptError,
    InvalidParameterError,
    NotConvergedError,
    NotFoundError,
    ProtocolError,
    ProviderProtocolError,
    ProviderUnavailableError,
    ScriptValidationError,
    StateError,
    SummaryParseError,
    TutorKitError,
    UndefinedAUCError,
    ValidationError,
)
from .gateway import (
    ChatMessage,
    GatewayConfig,
    HttpChatProvider,
    MockChatProvider,
    MockScript,
    bundled_demo_script,
    complete,
    load_script,
    make_provider,
)
from .irt import (
    Ability,
    CalibrationConfig,
    CalibrationResult,
    InteractionRecord,
    ItemParams,
    calibrate,
    compute_auc,
    estimate_theta,
    learning_gain,
    neg_log_posterior,
    neg_log_posterior_grad,
    params_from_doc,
    params_to_doc,
    prob_correct,
)
from .orchestrator import (
    AdvanceResult,
    Effect,
    JourneyState,
    OrchestratorConfig,
    Phase,
    ProgressReport,
    SessionEvent,
    SessionRunner,
    advance,
    extract_answer,
    make_event,
    progress_report,
    replay_events,
    split_sentinel,
    state_from_doc,
    state_to_doc,
)
from .prompts import (
    SENTINEL,
    PromptBundle,
    PromptConfig,
    StrategySet,
    build_bundle,
    build_summary_prompt,
    build_system_prompt,
    parse_summary,
    render_summary_reply,
    strategies_for,
)
from .sim import (
    CohortReport,
    TranscriptStats,
    generate_interaction_log,
    holdout_split,
    log_predictions,
    read_interaction_log,
    run_cohort,
    transcript_stats,
    write_interaction_log,
)
from .storage import EventStore
from .students import (
    ConceptState,
    LearningStyle,
    OnboardingSurvey,
    ParsedSummary,
    ProficiencyLabel,
    StudentProfile,
    apply_summary,
    discrepancy,
    init_profile,
    label_for_theta,
    placeholder_summary,
    profile_from_doc,
    profile_to_doc,
    record_posttest,
    record_pretest,
)

__version__ = "0.1.0"

__all__ = [
    "Ability",
    "AdvanceResult",
    "AuthorizationError",
    "BankLoadError",
    "CHOICE_LABELS",
    "CalibrationConfig",
    "CalibrationResult",
    "ChatMessage",
    "Choice",
    "CohortReport",
    "ConceptState",
    "ConfigurationError",
    "DEFAULT_CONCEPTS",
    "Effect",
    "EmptyInputError",
    "EventStore",
    "Exercise",
    "ExhaustedConceptError",
    "GatewayConfig",
    "HttpChatProvider",
    "InteractionRecord",
    "InvalidParameterError",
    "ItemBank",
    "ItemParams",
    "JourneyState",
    "LearningStyle",
    "MockChatProvider",
    "MockScript",
    "NotConvergedError",
    "NotFoundError",
    "OnboardingSurvey",
    "OrchestratorConfig",
    "ParsedSummary",
    "Phase",
    "ProficiencyLabel",
    "ProgressReport",
    "PromptBundle",
    "PromptConfig",
    "ProtocolError",
    "ProviderProtocolError",
    "ProviderUnavailableError",
    "SENTINEL",
    "ScriptValidationError",
    "SessionEvent",
    "SessionRunner",
    "StateError",
    "StrategySet",
    "StudentProfile",
    "SummaryParseError",
    "TestForm",
    "TranscriptStats",
    "TutorKitError",
    "UndefinedAUCError",
    "ValidationError",
    "advance",
    "apply_summary",
    "assemble_posttest",
    "assemble_pretest",
    "bank_report",
    "bank_to_doc",
    "build_bundle",
    "build_summary_prompt",
    "build_system_prompt",
    "bundled_bank",
    "bundled_demo_script",
    "calibrate",
    "complete",
    "compute_auc",
    "discrepancy",
    "estimate_theta",
    "extract_answer",
    "generate_interaction_log",
    "holdout_split",
    "init_profile",
    "label_for_theta",
    "learning_gain",
    "load_bank",
    "load_script",
    "log_predictions",
    "make_event",
    "make_provider",
    "neg_log_posterior",
    "neg_log_posterior_grad",
    "params_from_doc",
    "params_to_doc",
    "parse_summary",
    "placeholder_summary",
    "prob_correct",
    "profile_from_doc",
    "profile_to_doc",
    "progress_report",
    "read_interaction_log",
    "record_posttest",
    "record_pretest",
    "render_summary_reply",
    "replay_events",
    "run_cohort",
    "select_exercises",
    "split_sentinel",
    "state_from_doc",
    "state_to_doc",
    "strategies_for",
    "transcript_stats",
    "write_interaction_log",
]
