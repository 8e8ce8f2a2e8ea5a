"""Dataset model and the three classroom file formats.

A dataset couples instructor intents (each owning exactly one context
passage) with labeled questions, collected from students or produced by
augmentation. On disk a dataset is three UTF-8 files:

  intents.txt    one intent name per non-blank line
  contexts.txt   records introduced by "# <intent name>" header lines;
                 every line until the next header belongs to that
                 intent's context
  questions.csv  RFC-4180, header "question,intent"; exports append
                 "origin" and "parent" columns so synthetic rows keep
                 their provenance across save/load

LF and CRLF input are both accepted; serializers emit LF.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field

from classbot.errors import ClassbotError

HUMAN = "human"
SYNTHETIC = "synthetic"

QUESTIONS_HEADERS = (
    ["question", "intent"],
    ["question", "intent", "origin"],
    ["question", "intent", "origin", "parent"],
)

_TERMINAL_PUNCTUATION = ".?!,;:…"


class DatasetFormatError(ClassbotError):
    """A dataset file could not be parsed; carries every problem found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class Intent:
    """An instructor-defined topic label owning one context passage.

    Names are single-line; context lines must not start with '#', which
    is reserved for record headers in contexts.txt.
    """

    name: str
    context: str

    def __post_init__(self):
        object.__setattr__(self, "name", self.name.strip())
        object.__setattr__(self, "context", self.context.strip())
        if not self.name:
            raise ValueError("intent name must be non-empty after trimming")
        if "\n" in self.name or "\r" in self.name:
            raise ValueError(f"intent name {self.name!r} must not span lines")
        if not self.context:
            raise ValueError(f"intent {self.name!r} has an empty context")
        if any(line.startswith("#") for line in self.context.splitlines()):
            raise ValueError(
                f"context for {self.name!r} has a line starting with '#' (reserved for headers)"
            )


@dataclass(frozen=True)
class LabeledQuestion:
    """A question labeled with an intent, of human or synthetic origin.

    parent_id links a synthetic question back to the human question it
    was paraphrased from. Referential rules (parent exists, is human,
    shares the intent) are checked by validate(), not here, so that
    broken datasets can still be loaded and reported on.
    """

    id: str
    text: str
    intent_name: str
    origin: str = HUMAN
    parent_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "text", self.text.strip())
        object.__setattr__(self, "intent_name", self.intent_name.strip())
        if not self.id:
            raise ValueError("question id must be non-empty")
        if not self.text:
            raise ValueError(f"question {self.id!r} has empty text")
        if self.origin not in (HUMAN, SYNTHETIC):
            raise ValueError(f"question {self.id!r} has unknown origin {self.origin!r}")


@dataclass(frozen=True)
class Dataset:
    intents: tuple[Intent, ...] = ()
    questions: tuple[LabeledQuestion, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "intents", tuple(self.intents))
        object.__setattr__(self, "questions", tuple(self.questions))

    @property
    def intent_names(self) -> list[str]:
        return [intent.name for intent in self.intents]

    def context_for(self, intent_name: str) -> str:
        for intent in self.intents:
            if intent.name == intent_name:
                return intent.context
        raise KeyError(f"no intent named {intent_name!r}")

    def question_by_id(self, question_id: str) -> LabeledQuestion:
        for question in self.questions:
            if question.id == question_id:
                return question
        raise KeyError(f"no question with id {question_id!r}")


@dataclass(frozen=True)
class ValidationIssue:
    location: str
    message: str
    severity: str = "error"
    category: str = "structure"

    def to_dict(self) -> dict:
        return {"location": self.location, "message": self.message, "severity": self.severity}


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "issues", tuple(self.issues))

    @property
    def errors(self) -> list[ValidationIssue]:
        return [issue for issue in self.issues if issue.severity == "error"]

    @property
    def warnings(self) -> list[ValidationIssue]:
        return [issue for issue in self.issues if issue.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "errors": [issue.to_dict() for issue in self.errors],
            "warnings": [issue.to_dict() for issue in self.warnings],
        }


def normalize_question_text(text: str) -> str:
    """Normalization used for duplicate detection: case-fold, collapse
    internal whitespace, strip terminal punctuation."""
    collapsed = " ".join(text.split())
    return collapsed.rstrip(_TERMINAL_PUNCTUATION).strip().casefold()


def _strip_bom(content: str) -> str:
    return content.lstrip("﻿")


def parse_intents_file(content: str) -> list[str]:
    """Parse intents.txt: one trimmed name per non-blank line, file order."""
    names: list[str] = []
    first_line: dict[str, int] = {}
    problems: list[str] = []
    for lineno, raw in enumerate(_strip_bom(content).splitlines(), start=1):
        name = raw.strip()
        if not name:
            continue
        if name in first_line:
            problems.append(
                f"line {lineno}: duplicate intent name {name!r} (first seen at line {first_line[name]})"
            )
        else:
            first_line[name] = lineno
            names.append(name)
    if problems:
        raise DatasetFormatError(problems)
    if not names:
        raise DatasetFormatError(["intents file has no non-blank lines"])
    return names


def parse_contexts_file(content: str, intents: list[str]) -> dict[str, str]:
    """Parse contexts.txt: "# <intent name>" headers, passage lines below.

    Every intent must receive exactly one non-empty context.
    """
    known = set(intents)
    contexts: dict[str, str] = {}
    problems: list[str] = []
    current: str | None = None
    current_known = False
    buffer: list[str] = []

    def flush():
        if current is None or not current_known:
            return
        text = "\n".join(buffer).strip()
        if not text:
            problems.append(f"intent {current!r} has an empty context")
        else:
            contexts[current] = text

    for lineno, raw in enumerate(_strip_bom(content).splitlines(), start=1):
        if raw.startswith("#"):
            flush()
            name = raw[1:].strip()
            buffer = []
            if name not in known:
                problems.append(f"line {lineno}: header names unknown intent {name!r}")
                current, current_known = name, False
            elif name in contexts or (name == current and current_known):
                problems.append(f"line {lineno}: duplicate context for intent {name!r}")
                current, current_known = name, False
            else:
                current, current_known = name, True
        else:
            if current is None:
                if raw.strip():
                    problems.append(f"line {lineno}: content before the first '# <intent>' header")
                    current, current_known = "", False
            else:
                buffer.append(raw)
    flush()

    for name in intents:
        if name not in contexts and not any(f"{name!r} has an empty context" in p for p in problems):
            problems.append(f"intent {name!r} has no context")
    if problems:
        raise DatasetFormatError(problems)
    return contexts


def parse_questions_csv(content: str, intents: list[str]) -> list[LabeledQuestion]:
    """Parse questions.csv into labeled questions with fresh row-based ids.

    Accepts the two-column classroom form (all rows human-origin) and the
    exported three/four-column forms carrying origin and the parent's
    1-based data-row number.
    """
    rows = list(csv.reader(io.StringIO(_strip_bom(content))))
    if not rows:
        raise DatasetFormatError(["questions file is empty; expected header 'question,intent'"])
    header = [cell.strip() for cell in rows[0]]
    if header not in QUESTIONS_HEADERS:
        raise DatasetFormatError(
            [f"unexpected header {','.join(header)!r}; expected 'question,intent' "
             "(optionally with 'origin' and 'parent' columns)"]
        )

    known = set(intents)
    width = len(header)
    data_rows = rows[1:]
    problems: list[str] = []
    parsed: list[tuple[str, str, str, int | None]] = []
    for rownum, cells in enumerate(data_rows, start=1):
        if len(cells) != width:
            problems.append(f"row {rownum}: expected {width} columns, got {len(cells)}")
            continue
        text = cells[0].strip()
        label = cells[1].strip()
        origin = cells[2].strip() if width >= 3 else HUMAN
        parent_cell = cells[3].strip() if width >= 4 else ""
        row_ok = True
        if not text:
            problems.append(f"row {rownum}: empty question text")
            row_ok = False
        if label not in known:
            problems.append(f"row {rownum}: unknown intent label {label!r}")
            row_ok = False
        if origin not in (HUMAN, SYNTHETIC):
            problems.append(f"row {rownum}: unknown origin {origin!r}")
            row_ok = False
        parent_row: int | None = None
        if parent_cell:
            try:
                parent_row = int(parent_cell)
            except ValueError:
                problems.append(f"row {rownum}: parent must be a data-row number, got {parent_cell!r}")
                row_ok = False
            else:
                if not 1 <= parent_row <= len(data_rows):
                    problems.append(f"row {rownum}: parent row {parent_row} does not exist")
                    row_ok = False
        if row_ok:
            parsed.append((text, label, origin, parent_row))
    if problems:
        raise DatasetFormatError(problems)

    questions = []
    for rownum, (text, label, origin, parent_row) in enumerate(parsed, start=1):
        parent_id = f"q{parent_row}" if parent_row is not None else None
        questions.append(
            LabeledQuestion(
                id=f"q{rownum}", text=text, intent_name=label, origin=origin, parent_id=parent_id
            )
        )
    return questions


def parse_dataset(intents_text: str, contexts_text: str, questions_text: str) -> Dataset:
    """Parse the three file contents together; aggregates problems."""
    problems: list[str] = []
    names: list[str] = []
    contexts: dict[str, str] = {}
    questions: list[LabeledQuestion] = []
    try:
        names = parse_intents_file(intents_text)
    except DatasetFormatError as err:
        problems.extend(f"intents: {p}" for p in err.problems)
    if names:
        try:
            contexts = parse_contexts_file(contexts_text, names)
        except DatasetFormatError as err:
            problems.extend(f"contexts: {p}" for p in err.problems)
        try:
            questions = parse_questions_csv(questions_text, names)
        except DatasetFormatError as err:
            problems.extend(f"questions: {p}" for p in err.problems)
    if problems:
        raise DatasetFormatError(problems)
    intents = tuple(Intent(name=name, context=contexts[name]) for name in names)
    return Dataset(intents=intents, questions=tuple(questions))


def serialize_intents(dataset: Dataset) -> str:
    return "".join(f"{intent.name}\n" for intent in dataset.intents)


def serialize_contexts(dataset: Dataset) -> str:
    blocks = [f"# {intent.name}\n{intent.context}\n" for intent in dataset.intents]
    return "\n".join(blocks)


def serialize_questions(dataset: Dataset) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["question", "intent", "origin", "parent"])
    row_of = {question.id: row for row, question in enumerate(dataset.questions, start=1)}
    for question in dataset.questions:
        parent_cell = ""
        if question.parent_id is not None and question.parent_id in row_of:
            parent_cell = str(row_of[question.parent_id])
        writer.writerow([question.text, question.intent_name, question.origin, parent_cell])
    return buffer.getvalue()


def validate(dataset: Dataset) -> ValidationReport:
    """Enumerate every invariant violation; never raises.

    Duplicate question texts (after normalization) are reported as
    warnings, not errors: augmentation with dedup disabled produces them
    legally.
    """
    issues: list[ValidationIssue] = []
    seen_names: set[str] = set()
    for pos, intent in enumerate(dataset.intents):
        if intent.name in seen_names:
            issues.append(ValidationIssue(f"intent[{pos}]", f"duplicate intent name {intent.name!r}"))
        seen_names.add(intent.name)

    by_id: dict[str, LabeledQuestion] = {}
    seen_ids: set[str] = set()
    for question in dataset.questions:
        if question.id not in by_id:
            by_id[question.id] = question
    for pos, question in enumerate(dataset.questions):
        loc = f"question[{pos}]"
        if question.id in seen_ids:
            issues.append(ValidationIssue(loc, f"duplicate question id {question.id!r}"))
        seen_ids.add(question.id)
        if question.intent_name not in seen_names:
            issues.append(ValidationIssue(loc, f"unknown intent label {question.intent_name!r}"))
        if question.origin == HUMAN and question.parent_id is not None:
            issues.append(
                ValidationIssue(loc, "human-origin question must not have a parent", category="provenance")
            )
        if question.origin == SYNTHETIC:
            if question.parent_id is None:
                issues.append(ValidationIssue(loc, "synthetic question has no parent", category="provenance"))
            elif question.parent_id not in by_id:
                issues.append(
                    ValidationIssue(
                        loc,
                        f"synthetic question's parent {question.parent_id!r} does not exist",
                        category="provenance",
                    )
                )
            else:
                parent = by_id[question.parent_id]
                if parent.origin != HUMAN:
                    issues.append(
                        ValidationIssue(loc, f"parent {parent.id!r} is not human-origin", category="provenance")
                    )
                if parent.intent_name != question.intent_name:
                    issues.append(
                        ValidationIssue(
                            loc,
                            f"intent {question.intent_name!r} differs from parent's {parent.intent_name!r}",
                            category="provenance",
                        )
                    )

    seen_texts: dict[str, str] = {}
    for pos, question in enumerate(dataset.questions):
        norm = normalize_question_text(question.text)
        if norm in seen_texts:
            issues.append(
                ValidationIssue(
                    f"question[{pos}]",
                    f"text duplicates question {seen_texts[norm]!r} after normalization",
                    severity="warning",
                )
            )
        else:
            seen_texts[norm] = question.id
    return ValidationReport(tuple(issues))


def stratified_split(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic per-intent split of human questions.

    Each intent contributes ceil(train_fraction * n) of its human
    questions to train (clamped so both sides stay non-empty); synthetic
    questions always train, so validation measures human questions only.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    train_ids: set[str] = set()
    validation_ids: set[str] = set()
    for intent in dataset.intents:
        humans = [
            q for q in dataset.questions if q.intent_name == intent.name and q.origin == HUMAN
        ]
        if len(humans) < 2:
            raise ValueError(
                f"intent {intent.name!r} has {len(humans)} human question(s); need at least 2 to split"
            )
        rng = random.Random(f"{seed}:{intent.name}")
        order = list(humans)
        rng.shuffle(order)
        take = math.ceil(train_fraction * len(order))
        take = max(1, min(take, len(order) - 1))
        train_ids.update(q.id for q in order[:take])
        validation_ids.update(q.id for q in order[take:])
    train_ids.update(q.id for q in dataset.questions if q.origin == SYNTHETIC)

    train = Dataset(dataset.intents, tuple(q for q in dataset.questions if q.id in train_ids))
    validation = Dataset(
        dataset.intents, tuple(q for q in dataset.questions if q.id in validation_ids)
    )
    return train, validation


def semantically_equal(a: Dataset, b: Dataset) -> bool:
    """Equality on content: intent (name, context) pairs and question
    (text, label, origin, parent-position) tuples. Ids are opaque and
    excluded."""

    def shape(dataset: Dataset):
        position = {q.id: i for i, q in enumerate(dataset.questions)}
        return (
            [(i.name, i.context) for i in dataset.intents],
            [
                (q.text, q.intent_name, q.origin, position.get(q.parent_id))
                for q in dataset.questions
            ],
        )

    return shape(a) == shape(b)
