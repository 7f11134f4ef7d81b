"""Exercise bank: loading, validation, and deterministic test/exercise selection."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BankLoadError,
    ConfigurationError,
    ExhaustedConceptError,
    ValidationError,
)
from .irt import ItemParams

DEFAULT_CONCEPTS = ("Pronouns", "Punctuation", "Transitions")
ROLE_TAGS = ("pretest", "posttest", "tutoring")
CHOICE_LABELS = ("A", "B", "C", "D", "E")
PRETEST_PER_CONCEPT = 5
POSTTEST_SIZE = 5


@dataclass(frozen=True)
class Choice:
    label: str
    text: str


@dataclass(frozen=True)
class Exercise:
    """One multiple-choice exercise with its calibrated parameters."""

    item_id: str
    concept: str
    stem: str
    choices: tuple[Choice, ...]
    answer: str
    explanation: str
    params: ItemParams
    role_tags: frozenset[str]

    @property
    def difficulty(self) -> float:
        return self.params.difficulty


@dataclass(frozen=True)
class TestForm:
    """An ordered, fixed selection of items presented as a test."""

    kind: str  # "pretest" or "posttest"
    concepts: tuple[str, ...]
    item_ids: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in ("pretest", "posttest"):
            raise ValidationError(f"unknown form kind {self.kind!r}")
        if len(set(self.item_ids)) != len(self.item_ids):
            raise ValidationError("test form contains duplicate items")


class ItemBank:
    """Immutable indexed collection of exercises."""

    def __init__(self, exercises, concepts=DEFAULT_CONCEPTS):
        self.concepts = tuple(concepts)
        self.exercises = tuple(exercises)
        self._by_id = {}
        self._by_concept = {c: [] for c in self.concepts}
        for ex in self.exercises:
            self._by_id[ex.item_id] = ex
            self._by_concept[ex.concept].append(ex)

    def __len__(self):
        return len(self.exercises)

    def __contains__(self, item_id):
        return item_id in self._by_id

    def get(self, item_id: str) -> Exercise:
        try:
            return self._by_id[item_id]
        except KeyError:
            raise ConfigurationError(f"unknown item {item_id!r}") from None

    def items_for(self, concept: str, role: str | None = None) -> list[Exercise]:
        if concept not in self._by_concept:
            raise ConfigurationError(
                f"unknown concept {concept!r}; bank covers {', '.join(self.concepts)}"
            )
        found = self._by_concept[concept]
        if role is None:
            return list(found)
        return [ex for ex in found if role in ex.role_tags]

    def params_for(self, concept: str) -> list[ItemParams]:
        return [ex.params for ex in self.items_for(concept)]

    def median_difficulty(self) -> float:
        return float(np.median([ex.difficulty for ex in self.exercises]))


def _parse_exercise(obj, position):
    if not isinstance(obj, dict):
        raise BankLoadError(f"entry {position} is not an object")
    try:
        item_id = obj["item_id"]
        concept = obj["concept"]
        stem = obj["stem"]
        raw_choices = obj["choices"]
        answer = obj["answer"]
        explanation = obj["explanation"]
        raw_params = obj["params"]
    except KeyError as exc:
        raise BankLoadError(f"entry {position} is missing field {exc.args[0]!r}") from None
    if not item_id or not isinstance(item_id, str):
        raise BankLoadError(f"entry {position} has an empty item_id")
    if not stem or not str(stem).strip():
        raise BankLoadError(f"item {item_id!r} has an empty stem")
    choices = []
    seen_labels = set()
    for ch in raw_choices:
        label, text = ch["label"], ch["text"]
        if label not in CHOICE_LABELS:
            raise BankLoadError(f"item {item_id!r} has choice label {label!r}, expected one of A-E")
        if label in seen_labels:
            raise BankLoadError(f"item {item_id!r} repeats choice label {label!r}")
        seen_labels.add(label)
        choices.append(Choice(label, str(text)))
    if not choices:
        raise BankLoadError(f"item {item_id!r} has no choices")
    if answer not in seen_labels:
        raise BankLoadError(f"item {item_id!r} answer {answer!r} is not among its choice labels")
    tags = frozenset(obj.get("role_tags", ()))
    unknown_tags = tags - set(ROLE_TAGS)
    if unknown_tags:
        raise BankLoadError(f"item {item_id!r} has unknown role tags {sorted(unknown_tags)}")
    try:
        params = ItemParams(item_id, float(raw_params["a"]), float(raw_params["d"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise BankLoadError(f"item {item_id!r} has malformed params: {exc}") from None
    return Exercise(
        item_id=item_id,
        concept=concept,
        stem=str(stem),
        choices=tuple(choices),
        answer=answer,
        explanation=str(explanation),
        params=params,
        role_tags=tags,
    )


def load_bank(source, concepts=DEFAULT_CONCEPTS) -> ItemBank:
    """Parse and validate a bank document (a JSON array of exercise objects).

    `source` may be a path to a JSON file or an already-parsed list.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = source
    if not isinstance(doc, list):
        raise BankLoadError("bank document must be a JSON array of exercise objects")
    exercises = []
    seen = set()
    for pos, obj in enumerate(doc):
        ex = _parse_exercise(obj, pos)
        if ex.item_id in seen:
            raise BankLoadError(f"duplicate item_id {ex.item_id!r}")
        seen.add(ex.item_id)
        if ex.concept not in concepts:
            raise BankLoadError(
                f"item {ex.item_id!r} has unknown concept {ex.concept!r}; "
                f"expected one of {', '.join(concepts)}"
            )
        exercises.append(ex)
    return ItemBank(exercises, concepts)


def bank_to_doc(bank: ItemBank) -> list[dict]:
    """Serialize a bank back to its document form."""
    doc = []
    for ex in bank.exercises:
        doc.append({
            "item_id": ex.item_id,
            "concept": ex.concept,
            "stem": ex.stem,
            "choices": [{"label": c.label, "text": c.text} for c in ex.choices],
            "answer": ex.answer,
            "explanation": ex.explanation,
            "params": {"a": ex.params.discrimination, "d": ex.params.difficulty},
            "role_tags": sorted(ex.role_tags),
        })
    return doc


def assemble_pretest(bank: ItemBank) -> TestForm:
    """Fixed 15-item diagnostic form: per concept, the 5 pretest-tagged items
    with difficulty nearest the bank median, presented in item_id order."""
    median = bank.median_difficulty()
    ordered_ids = []
    deficient = []
    for concept in bank.concepts:
        candidates = bank.items_for(concept, role="pretest")
        if len(candidates) < PRETEST_PER_CONCEPT:
            deficient.append(f"{concept} ({len(candidates)} pretest items, need {PRETEST_PER_CONCEPT})")
            continue
        ranked = sorted(candidates, key=lambda ex: (abs(ex.difficulty - median), ex.item_id))
        chosen = sorted(ranked[:PRETEST_PER_CONCEPT], key=lambda ex: ex.item_id)
        ordered_ids.extend(ex.item_id for ex in chosen)
    if deficient:
        raise ConfigurationError("bank cannot fill the pre-test: " + "; ".join(deficient))
    return TestForm(kind="pretest", concepts=bank.concepts, item_ids=tuple(ordered_ids))


def select_exercises(theta: float, concept: str, bank: ItemBank, n: int = 3,
                     exclude=()) -> list[Exercise]:
    """Pick the n tutoring exercises whose difficulty is closest to theta.

    Ties break on ascending item_id. Returns fewer than n when the concept is
    short on unseen items; raises when nothing at all is left.
    """
    if n < 1:
        raise ValidationError(f"n must be at least 1, got {n}")
    excluded = set(exclude)
    candidates = [ex for ex in bank.items_for(concept, role="tutoring")
                  if ex.item_id not in excluded]
    if not candidates:
        raise ExhaustedConceptError(f"no unseen tutoring exercises remain for {concept!r}")
    ranked = sorted(candidates, key=lambda ex: (abs(ex.difficulty - theta), ex.item_id))
    return ranked[:n]


def assemble_posttest(bank: ItemBank, concept: str, theta: float, exclude=()) -> TestForm:
    """Five posttest-tagged items of the concept nearest the student's current
    theta, excluding anything already seen, presented in item_id order."""
    excluded = set(exclude)
    candidates = [ex for ex in bank.items_for(concept, role="posttest")
                  if ex.item_id not in excluded]
    if len(candidates) < POSTTEST_SIZE:
        raise ConfigurationError(
            f"bank cannot fill the post-test for {concept!r}: "
            f"{len(candidates)} eligible items, need {POSTTEST_SIZE}"
        )
    ranked = sorted(candidates, key=lambda ex: (abs(ex.difficulty - theta), ex.item_id))
    chosen = sorted(ranked[:POSTTEST_SIZE], key=lambda ex: ex.item_id)
    return TestForm(kind="posttest", concepts=(concept,),
                    item_ids=tuple(ex.item_id for ex in chosen))


def bank_report(bank: ItemBank) -> dict:
    """Per-concept role coverage and parameter ranges, for validation output."""
    report = {"total_items": len(bank), "concepts": {}}
    for concept in bank.concepts:
        items = bank.items_for(concept)
        counts = {role: len(bank.items_for(concept, role)) for role in ROLE_TAGS}
        ds = [ex.difficulty for ex in items]
        report["concepts"][concept] = {
            "items": len(items),
            "roles": counts,
            "difficulty_range": [min(ds), max(ds)] if ds else None,
        }
    return report


def bundled_bank() -> ItemBank:
    """Load the item bank packaged with the library."""
    from importlib import resources

    path = resources.files("tutorkit.data") / "default_bank.json"
    return load_bank(json.loads(path.read_text(encoding="utf-8")))
