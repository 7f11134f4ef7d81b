"""Synthetic-student simulation and transcript analytics.

The simulated cohort exercises the diagnosis-and-selection loop end to end:
each student gets one true ability per concept, answers the pre-test as a
Bernoulli draw on the response model, has ability estimated from those
answers, receives adaptively selected exercises, and answers each exactly
once. The aggregate first-response correctness ratio checks that selection
really targets items the student has roughly even odds on; the recovery RMSE
checks the ability estimates themselves. Simulated ability is static, so the
simulator makes no claims about gain magnitudes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bank import ItemBank, assemble_posttest, assemble_pretest, select_exercises
from .errors import EmptyInputError, InvalidParameterError, ValidationError
from .irt import Ability, InteractionRecord, ItemParams, estimate_theta, learning_gain, prob_correct
from .orchestrator import split_sentinel

SELECTION_POLICIES = ("estimated", "oracle", "random")


@dataclass(frozen=True)
class ConceptTrajectory:
    """One simulated student's path through a single concept."""

    concept: str
    theta_true: float
    theta_pre: float
    selected_items: tuple[str, ...]
    first_responses: tuple[int, ...]
    theta_post: float
    gain: float


@dataclass(frozen=True)
class StudentTrajectory:
    student_index: int
    concepts: tuple[ConceptTrajectory, ...]


@dataclass(frozen=True)
class CohortReport:
    n_students: int
    seed: int
    selection: str
    correctness_ratio_first_response: float
    mean_gain: dict
    theta_recovery_rmse: float
    trajectories: tuple[StudentTrajectory, ...]

    def to_doc(self) -> dict:
        return {
            "n_students": self.n_students,
            "seed": self.seed,
            "selection": self.selection,
            "correctness_ratio_first_response": self.correctness_ratio_first_response,
            "mean_gain": dict(self.mean_gain),
            "theta_recovery_rmse": self.theta_recovery_rmse,
            "trajectories": [
                {
                    "student_index": t.student_index,
                    "concepts": [
                        {
                            "concept": c.concept,
                            "theta_true": c.theta_true,
                            "theta_pre": c.theta_pre,
                            "selected_items": list(c.selected_items),
                            "first_responses": list(c.first_responses),
                            "theta_post": c.theta_post,
                            "gain": c.gain,
                        }
                        for c in t.concepts
                    ],
                }
                for t in self.trajectories
            ],
        }


def _params_for_bank(bank: ItemBank, params) -> dict:
    """Resolve the calibrated parameter map, defaulting to the bank's own."""
    if params is None:
        return {ex.item_id: ex.params for ex in bank.exercises}
    resolved = dict(params)
    missing = [ex.item_id for ex in bank.exercises if ex.item_id not in resolved]
    if missing:
        raise ValidationError(
            "calibrated params do not cover the bank; missing: " + ", ".join(missing[:5])
        )
    return resolved


def run_cohort(
    n: int,
    bank: ItemBank,
    params=None,
    seed: int = 0,
    selection: str = "estimated",
) -> CohortReport:
    """Simulate n students through pre-test, selection, tutoring answers, and
    post-test. Deterministic for fixed arguments.

    selection picks the exercise-targeting policy: "estimated" uses the
    pre-test ability estimate, "oracle" uses the true ability, and "random"
    ignores ability and draws uniformly; the last two exist as baselines.
    """
    if n <= 0:
        raise EmptyInputError("cohort size must be a positive count")
    if selection not in SELECTION_POLICIES:
        raise InvalidParameterError(
            f"selection must be one of {', '.join(SELECTION_POLICIES)}"
        )
    param_map = _params_for_bank(bank, params)
    form = assemble_pretest(bank)
    concepts = bank.concepts

    children = np.random.SeedSequence(seed).spawn(n)
    trajectories = []
    total_first = 0
    total_correct = 0
    sq_errors = []
    gains = {concept: [] for concept in concepts}

    for index in range(n):
        answer_seq, select_seq = children[index].spawn(2)
        rng = np.random.default_rng(answer_seq)
        select_rng = np.random.default_rng(select_seq)

        theta_true = {c: float(v) for c, v in zip(concepts, rng.normal(0.0, 1.0, len(concepts)))}
        pretest_correct = {}
        for item_id in form.item_ids:
            ex = bank.get(item_id)
            p = prob_correct(param_map[item_id], theta_true[ex.concept])
            pretest_correct[item_id] = int(rng.random() < p)

        concept_records = []
        for concept in concepts:
            block = [
                (param_map[item_id], pretest_correct[item_id])
                for item_id in form.item_ids
                if bank.get(item_id).concept == concept
            ]
            theta_pre = estimate_theta(block).theta
            sq_errors.append((theta_pre - theta_true[concept]) ** 2)

            if selection == "random":
                eligible = sorted(
                    bank.items_for(concept, role="tutoring"), key=lambda e: e.item_id
                )
                count = min(3, len(eligible))
                picks = select_rng.choice(len(eligible), size=count, replace=False)
                chosen = [eligible[i] for i in picks]
            else:
                target = theta_true[concept] if selection == "oracle" else theta_pre
                chosen = select_exercises(target, concept, bank, n=3)

            outcomes = []
            for ex in chosen:
                p = prob_correct(param_map[ex.item_id], theta_true[concept])
                outcomes.append(int(rng.random() < p))
            total_first += len(outcomes)
            total_correct += sum(outcomes)

            exclude = set(form.item_ids) | {ex.item_id for ex in chosen}
            post_form = assemble_posttest(bank, concept, theta_pre, exclude)
            post_block = []
            for item_id in post_form.item_ids:
                p = prob_correct(param_map[item_id], theta_true[concept])
                post_block.append((param_map[item_id], int(rng.random() < p)))
            theta_post = estimate_theta(post_block).theta
            concept_items = [param_map[ex.item_id] for ex in bank.items_for(concept)]
            gain = learning_gain(theta_pre, theta_post, concept_items)
            gains[concept].append(gain)

            concept_records.append(
                ConceptTrajectory(
                    concept=concept,
                    theta_true=theta_true[concept],
                    theta_pre=theta_pre,
                    selected_items=tuple(ex.item_id for ex in chosen),
                    first_responses=tuple(outcomes),
                    theta_post=theta_post,
                    gain=gain,
                )
            )
        trajectories.append(StudentTrajectory(index, tuple(concept_records)))

    return CohortReport(
        n_students=n,
        seed=seed,
        selection=selection,
        correctness_ratio_first_response=total_correct / total_first,
        mean_gain={c: float(np.mean(v)) for c, v in gains.items()},
        theta_recovery_rmse=float(np.sqrt(np.mean(sq_errors))),
        trajectories=tuple(trajectories),
    )


def generate_interaction_log(
    n_students: int, n_items: int, seed: int = 7
) -> tuple[list[InteractionRecord], dict, dict]:
    """Build a synthetic calibration corpus with known ground truth.

    Every student answers every item per the response model. Returns the
    records plus the true item parameters and true abilities, keyed by id.
    """
    if n_students <= 0 or n_items <= 0:
        raise EmptyInputError("need at least one student and one item")
    rng = np.random.default_rng(seed)
    thetas = rng.normal(0.0, 1.0, n_students)
    discs = rng.uniform(0.5, 2.5, n_items)
    diffs = rng.normal(0.0, 1.0, n_items)

    student_ids = [f"S{i + 1:04d}" for i in range(n_students)]
    item_ids = [f"I{j + 1:03d}" for j in range(n_items)]
    true_params = {
        item_ids[j]: ItemParams(item_ids[j], float(discs[j]), float(diffs[j]))
        for j in range(n_items)
    }
    true_thetas = {
        student_ids[i]: Ability(float(thetas[i]), None) for i in range(n_students)
    }

    probs = 1.0 / (1.0 + np.exp(-discs[None, :] * (thetas[:, None] - diffs[None, :])))
    draws = rng.random((n_students, n_items)) < probs
    records = [
        InteractionRecord(student_ids[i], item_ids[j], int(draws[i, j]))
        for i in range(n_students)
        for j in range(n_items)
    ]
    return records, true_params, true_thetas


def holdout_split(records, fraction: float = 0.2, seed: int = 0):
    """Deterministically split interaction records into train and held-out sets."""
    if not 0.0 < fraction < 1.0:
        raise InvalidParameterError("holdout fraction must be in (0, 1)")
    records = list(records)
    if not records:
        raise EmptyInputError("no records to split")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(records))
    cut = int(len(records) * fraction)
    held = [records[i] for i in order[:cut]]
    train = [records[i] for i in order[cut:]]
    return train, held


def log_predictions(records, item_params) -> tuple[list[float], list[int]]:
    """Score a log under fitted item parameters.

    Re-estimates each student's ability from their own responses, then
    predicts every response's correctness probability. Records whose item is
    not covered by the parameter map are rejected.
    """
    records = list(records)
    if not records:
        raise EmptyInputError("no records to score")
    by_student = {}
    for rec in records:
        if rec.item_id not in item_params:
            raise ValidationError(f"no fitted parameters for item {rec.item_id!r}")
        by_student.setdefault(rec.student_id, []).append(rec)
    thetas = {
        sid: estimate_theta([(item_params[r.item_id], r.correct) for r in recs]).theta
        for sid, recs in by_student.items()
    }
    predictions = [prob_correct(item_params[r.item_id], thetas[r.student_id]) for r in records]
    outcomes = [r.correct for r in records]
    return predictions, outcomes


def read_interaction_log(path) -> list[InteractionRecord]:
    """Read line-delimited {student_id, item_id, correct} records."""
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(
                    InteractionRecord(obj["student_id"], obj["item_id"], obj["correct"])
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError,
                    ValidationError) as exc:
                raise ValidationError(f"{path}:{lineno}: bad interaction record: {exc}") from None
    return records


def write_interaction_log(records, path):
    with open(path, "w", encoding="utf-8") as handle:
        for rec in records:
            handle.write(
                json.dumps(
                    {"student_id": rec.student_id, "item_id": rec.item_id, "correct": rec.correct}
                )
                + "\n"
            )


@dataclass(frozen=True)
class TranscriptStats:
    """Dialogue and utterance statistics over recorded event logs."""

    dialogues: int
    total_turns: int
    avg_turns_per_dialogue: float
    tutor_utterances: int
    student_utterances: int
    avg_words_tutor: float
    avg_words_student: float
    empty: bool

    def to_doc(self) -> dict:
        return {
            "dialogues": self.dialogues,
            "total_turns": self.total_turns,
            "avg_turns_per_dialogue": self.avg_turns_per_dialogue,
            "tutor_utterances": self.tutor_utterances,
            "student_utterances": self.student_utterances,
            "avg_words_tutor": self.avg_words_tutor,
            "avg_words_student": self.avg_words_student,
            "empty": self.empty,
        }


def count_words(text: str) -> int:
    """Whitespace tokens that contain at least one letter or digit."""
    return sum(1 for token in text.split() if any(ch.isalnum() for ch in token))


_DIALOGUE_OPENERS = {"pretest_submitted", "concept_chosen"}


def transcript_stats(paths) -> TranscriptStats:
    """Tally dialogues and word counts from orchestrator event logs.

    A dialogue runs from a session-opening event (pre-test submission or
    concept choice) to its session_finished event; chat turns are the student
    and tutor messages in between. A log that ends mid-session still counts
    its open dialogue. Tutor word counts use the display text, with the
    session-end sentinel stripped.
    """
    dialogues = 0
    turns = 0
    tutor_utts = 0
    student_utts = 0
    tutor_words = 0
    student_words = 0

    for path in paths:
        in_dialogue = False
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    event = json.loads(line)
                    kind = event["kind"]
                    payload = event.get("payload", {})
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ValidationError(f"{path}:{lineno}: bad event record: {exc}") from None
                if kind in _DIALOGUE_OPENERS:
                    dialogues += 1
                    in_dialogue = True
                elif kind == "session_finished":
                    in_dialogue = False
                elif in_dialogue and kind == "student_message":
                    text = payload.get("text", "")
                    turns += 1
                    student_utts += 1
                    student_words += count_words(text)
                elif in_dialogue and kind == "tutor_message":
                    display, _ = split_sentinel(payload.get("text", ""))
                    turns += 1
                    tutor_utts += 1
                    tutor_words += count_words(display)

    return TranscriptStats(
        dialogues=dialogues,
        total_turns=turns,
        avg_turns_per_dialogue=turns / dialogues if dialogues else 0.0,
        tutor_utterances=tutor_utts,
        student_utterances=student_utts,
        avg_words_tutor=tutor_words / tutor_utts if tutor_utts else 0.0,
        avg_words_student=student_words / student_utts if student_utts else 0.0,
        empty=dialogues == 0,
    )


def bundled_transcript_paths() -> list[Path]:
    """Paths of the packaged sample transcripts, sorted by name."""
    from importlib import resources

    folder = resources.files("tutorkit.data") / "transcripts"
    return sorted(Path(str(p)) for p in folder.iterdir() if p.name.endswith(".ndjson"))
