"""Shared fixtures: bundled bank, golden files, mock scripts, journey drivers."""

from pathlib import Path

import pytest

from tutorkit.bank import TestForm, bundled_bank
from tutorkit.gateway import MockChatProvider, load_script
from tutorkit.orchestrator import SessionRunner
from tutorkit.storage import EventStore

# The production dataclass happens to match pytest's collection pattern.
TestForm.__test__ = False

GOLDEN_DIR = Path(__file__).parent / "golden"

WELL_FORMED_SUMMARY = (
    "*Specific topics: The session walked through the selected exercises; "
    "the student engaged with each question.\n"
    "*Action items regarding the student's response level: Ask the student "
    "to explain answers before confirming them.\n"
    "*Action items regarding the student's learning style: Open each topic "
    "with the big picture before the details."
)


def golden(name: str) -> str:
    return (GOLDEN_DIR / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def bank():
    return bundled_bank()


def journey_script_doc(extra_rules=()) -> dict:
    """Document form of a script that can drive a full three-concept journey:
    replies that end each session with the sentinel, plus a rule answering
    summary requests."""
    return {
        "replies": [
            "Hello! Let's look at the first question together.",
            "Good thinking. That is right.",
            "Great work today. FINISHED.",
            "Welcome back! Here is your first question.",
            "That wraps this topic up nicely. FINISHED.",
            "Last topic! Here is the opening question.",
            "You have finished everything. FINISHED.",
        ],
        "terminal": "We are out of scripted replies. FINISHED.",
        "rules": [{"contains": "*Specific topics", "reply": WELL_FORMED_SUMMARY}]
        + list(extra_rules),
    }


def journey_script(extra_rules=()):
    return load_script(journey_script_doc(extra_rules))


def survey_for(student_id: str, **overrides) -> dict:
    base = {
        "student_id": student_id,
        "perception": "intuitive",
        "processing": "active",
        "understanding": "global",
        "self_assessment": {
            "Pronouns": "Moderate",
            "Punctuation": "Weak",
            "Transitions": "Strong",
        },
        "demographics": {"age": "21", "first_language": "Spanish"},
    }
    base.update(overrides)
    return base


def make_runner(bank, tmp_path=None, script=None, config=None, student_id="stu-1"):
    store = EventStore(tmp_path) if tmp_path is not None else None
    provider = MockChatProvider(script or journey_script())
    return SessionRunner(student_id, bank, provider, store, config)


def correct_answers(bank, form) -> dict:
    return {item_id: bank.get(item_id).answer for item_id in form.item_ids}


def drive_full_journey(runner, bank):
    """Survey through Completed, answering every test correctly."""
    runner.submit_survey(survey_for(runner.student_id))
    runner.submit_pretest(correct_answers(bank, runner.pretest_form()))
    while True:
        runner.start_session()
        finished = False
        while not finished:
            _, finished = runner.handle_student_message("My answer is B")
        runner.submit_posttest(correct_answers(bank, runner.posttest_form()))
        if runner.state.phase.value == "Completed":
            return
        runner.choose_concept()
