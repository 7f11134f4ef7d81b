"""Assembles tutor system prompts from the student model and parses session summaries."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import StateError, SummaryParseError, ValidationError
from .students import (
    LearningStyle,
    ParsedSummary,
    StudentProfile,
    UNKNOWN_FIELD,
)

SENTINEL = "FINISHED."

_ORDINALS = ("zeroth", "first", "second", "third", "fourth", "fifth", "sixth",
             "seventh", "eighth", "ninth", "tenth")

SUMMARY_HEADERS = (
    "Specific topics",
    "Action items regarding the student's response level",
    "Action items regarding the student's learning style",
)


@dataclass(frozen=True)
class PromptConfig:
    """Tunable prompt behavior."""

    overconfident_line_enabled: bool = True
    struggle_threshold: float = 0.5


@dataclass(frozen=True)
class StrategySet:
    """The three teaching strategy lines matched to a learning style."""

    style: LearningStyle
    strategy_lines: tuple[str, str, str]


@dataclass(frozen=True)
class PromptBundle:
    """Everything the gateway needs to run one tutoring session."""

    system_prompt: str
    summary_prompt: str
    concept: str
    session_index: int
    materials: tuple


@lru_cache(maxsize=1)
def _templates() -> dict:
    raw = resources.files("tutorkit").joinpath("data/prompt_templates.json").read_text("utf-8")
    return json.loads(raw)["blocks"]


@lru_cache(maxsize=1)
def _strategy_table() -> dict:
    raw = resources.files("tutorkit").joinpath("data/strategies.json").read_text("utf-8")
    return json.loads(raw)


def _ordinal(n: int) -> str:
    return _ORDINALS[n] if 0 <= n < len(_ORDINALS) else f"{n}th"


def strategies_for(style: LearningStyle) -> StrategySet:
    """Look up the strategy line for each of the style's three poles.

    Lines are ordered processing, perception, understanding to match how the
    style itself is displayed.
    """
    table = _strategy_table()
    lines = (
        table["processing"][style.processing],
        table["perception"][style.perception],
        table["understanding"][style.understanding],
    )
    return StrategySet(style=style, strategy_lines=lines)


def _render_materials(blocks, exercises) -> list[str]:
    lines = [blocks["materials_header"]]
    for number, ex in enumerate(exercises, start=1):
        lines.append("")
        lines.append(blocks["question_line"].format(number=number, stem=ex.stem))
        for choice in ex.choices:
            lines.append(blocks["choice_line"].format(label=choice.label, text=choice.text))
        lines.append(blocks["answer_line"].format(answer=ex.answer))
        lines.append(blocks["explanation_line"].format(explanation=ex.explanation))
    return lines


def build_system_prompt(
    profile: StudentProfile,
    concept: str,
    exercises,
    session_index: int,
    prev_summary: ParsedSummary | None = None,
    config: PromptConfig | None = None,
) -> str:
    """Compose the session's system prompt from the three-axis student model.

    Emits, in order: the tutor role, the welcome-back line (second session on),
    the class opener, the concept line, the proficiency-discrepancy line when
    the pre-test disagrees with the self-report, the learning-style strategies,
    the previous session's summary blocks (second session on), the struggle
    adaptation block when the last session's first responses were mostly wrong,
    the fixed tutoring rules, and the learning materials.
    """
    cfg = config or PromptConfig()
    exercises = list(exercises)
    if session_index < 1:
        raise ValidationError(f"session_index must be >= 1, got {session_index}")
    if not exercises:
        raise ValidationError("a session prompt needs at least one exercise")
    ids = [ex.item_id for ex in exercises]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate exercises passed to the prompt builder")
    if session_index >= 2 and prev_summary is None:
        raise StateError(f"session {session_index} needs the previous session's summary")
    if session_index == 1 and prev_summary is not None:
        raise StateError("the first session cannot carry a previous summary")

    state = profile.state_for(concept)
    if state.measured is None or state.discrepancy is None or state.self_reported is None:
        raise StateError(f"pre-test results for {concept!r} are not recorded yet")

    blocks = _templates()
    lines = [blocks["role"]]
    if session_index >= 2:
        lines.append(blocks["welcome_back"].format(
            ordinal=_ordinal(session_index),
            previous_concept=prev_summary.session_concept,
        ))
        lines.append(blocks["start_later_session"])
    else:
        lines.append(blocks["start_first_session"])
    lines.append(blocks["concept"].format(concept=concept))

    if state.discrepancy == "underconfident":
        lines.append(blocks["underconfident"].format(
            self_label=state.self_reported.value,
            measured_label=state.measured.value,
        ))
    elif state.discrepancy == "overconfident" and cfg.overconfident_line_enabled:
        lines.append(blocks["overconfident"].format(self_label=state.self_reported.value))

    strategies = strategies_for(profile.style)
    lines.append(blocks["style_header"].format(style=profile.style.display))
    for number, text in enumerate(strategies.strategy_lines, start=1):
        lines.append(f"{number}. {text}")

    if session_index >= 2:
        lines.append(blocks["review_header"])
        lines.append(blocks["topics_label"])
        lines.append(prev_summary.specific_topics)
        lines.append(blocks["actions_header"])
        lines.append(blocks["response_actions_label"])
        lines.append(prev_summary.response_level_actions)
        lines.append(blocks["style_actions_label"])
        lines.append(prev_summary.learning_style_actions)

    ratio = profile.last_first_response_ratio
    if session_index >= 2 and ratio is not None and ratio < cfg.struggle_threshold:
        lines.append(blocks["struggle_header"])
        for number, text in enumerate(blocks["struggle_strategies"], start=1):
            lines.append(f"{number}. {text}")

    lines.extend(blocks["base_rules"])
    lines.extend(_render_materials(blocks, exercises))
    return "\n".join(lines) + "\n"


def build_summary_prompt() -> str:
    """The fixed instruction that asks the tutor model for a structured summary."""
    return "\n".join(_templates()["summary_prompt"]) + "\n"


def build_bundle(
    profile: StudentProfile,
    concept: str,
    exercises,
    session_index: int,
    prev_summary: ParsedSummary | None = None,
    config: PromptConfig | None = None,
) -> PromptBundle:
    """Bundle the system prompt and summary prompt for one session."""
    system_prompt = build_system_prompt(
        profile, concept, exercises, session_index, prev_summary, config
    )
    return PromptBundle(
        system_prompt=system_prompt,
        summary_prompt=build_summary_prompt(),
        concept=concept,
        session_index=session_index,
        materials=tuple(exercises),
    )


def _header_pattern(header: str) -> re.Pattern:
    # Tolerates leading list markers or markdown emphasis and a bolded colon,
    # e.g. "*Specific topics:", "**Specific topics:**", "  specific TOPICS :".
    return re.compile(
        r"^[ \t>*_#-]*" + re.escape(header) + r"\s*\*{0,2}\s*:\s*\*{0,2}",
        re.IGNORECASE | re.MULTILINE,
    )


def parse_summary(reply: str, session_concept: str = "") -> ParsedSummary:
    """Split a summary reply into its three sections on the starred headers.

    Header matching is case-insensitive and tolerant of whitespace and
    markdown bold. A section left blank is recorded as "Unknown". A missing
    header raises, with the raw reply attached for logging.
    """
    if not isinstance(reply, str) or not reply.strip():
        raise SummaryParseError("summary reply is empty", raw_reply=reply or "")
    matches = []
    for header in SUMMARY_HEADERS:
        m = _header_pattern(header).search(reply)
        if m is None:
            raise SummaryParseError(
                f"summary reply is missing the {header!r} header", raw_reply=reply
            )
        matches.append(m)
    starts = [m.start() for m in matches]
    if starts != sorted(starts):
        raise SummaryParseError("summary headers are out of order", raw_reply=reply)
    sections = []
    for k, m in enumerate(matches):
        end = matches[k + 1].start() if k + 1 < len(matches) else len(reply)
        text = reply[m.end():end].strip()
        sections.append(text if text else UNKNOWN_FIELD)
    return ParsedSummary(
        specific_topics=sections[0],
        response_level_actions=sections[1],
        learning_style_actions=sections[2],
        session_concept=session_concept,
    )


def render_summary_reply(summary: ParsedSummary) -> str:
    """Write a ParsedSummary back into the reply skeleton parse_summary reads."""
    return (
        f"*{SUMMARY_HEADERS[0]}: {summary.specific_topics}\n"
        f"*{SUMMARY_HEADERS[1]}: {summary.response_level_actions}\n"
        f"*{SUMMARY_HEADERS[2]}: {summary.learning_style_actions}\n"
    )
