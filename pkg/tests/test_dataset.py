from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings

import strategies
from classbot.dataset import (
    Dataset,
    DatasetFormatError,
    Intent,
    LabeledQuestion,
    normalize_question_text,
    parse_contexts_file,
    parse_dataset,
    parse_intents_file,
    parse_questions_csv,
    semantically_equal,
    serialize_contexts,
    serialize_intents,
    serialize_questions,
    stratified_split,
    validate,
)
from helpers import make_random_dataset

EARTH_INTENTS = [
    "Patterns in Earth's Features",
    "Earth's Water",
    "Weathering and Erosion",
    "Interactions between Systems",
    "Impact on Humans",
]


class TestParseIntents:
    def test_five_intent_file(self):
        content = "\n".join(EARTH_INTENTS) + "\n"
        assert parse_intents_file(content) == EARTH_INTENTS

    def test_blank_lines_and_padding_skipped(self):
        assert parse_intents_file("A\n\n  B  \n") == ["A", "B"]

    def test_duplicate_reports_line_numbers(self):
        with pytest.raises(DatasetFormatError) as err:
            parse_intents_file("A\nA\n")
        assert "line 2" in str(err.value)
        assert "line 1" in str(err.value)

    def test_empty_file(self):
        with pytest.raises(DatasetFormatError, match="no non-blank lines"):
            parse_intents_file("\n  \n")

    def test_crlf_accepted(self):
        assert parse_intents_file("A\r\nB\r\n") == ["A", "B"]


class TestParseContexts:
    def test_two_records(self):
        parsed = parse_contexts_file("# A\nalpha text\n# B\nbeta text\n", ["A", "B"])
        assert parsed == {"A": "alpha text", "B": "beta text"}

    def test_missing_context(self):
        with pytest.raises(DatasetFormatError, match="'B' has no context"):
            parse_contexts_file("# A\nx\n", ["A", "B"])

    def test_unknown_intent_header(self):
        with pytest.raises(DatasetFormatError, match="unknown intent 'C'"):
            parse_contexts_file("# C\nx\n", ["A"])

    def test_content_before_first_header(self):
        with pytest.raises(DatasetFormatError, match="before the first"):
            parse_contexts_file("stray\n# A\nx\n", ["A"])

    def test_duplicate_header(self):
        with pytest.raises(DatasetFormatError, match="duplicate context"):
            parse_contexts_file("# A\nx\n# A\ny\n", ["A"])

    def test_empty_block(self):
        with pytest.raises(DatasetFormatError, match="empty context"):
            parse_contexts_file("# A\n\n# B\ny\n", ["A", "B"])

    def test_multiline_context_preserved(self):
        parsed = parse_contexts_file("# A\nline one\nline two\n", ["A"])
        assert parsed["A"] == "line one\nline two"


class TestParseQuestions:
    def test_basic_row(self):
        content = "question,intent\nWhat causes erosion?,Weathering and Erosion\n"
        questions = parse_questions_csv(content, EARTH_INTENTS)
        assert len(questions) == 1
        assert questions[0].text == "What causes erosion?"
        assert questions[0].intent_name == "Weathering and Erosion"
        assert questions[0].origin == "human"
        assert questions[0].parent_id is None

    def test_unknown_label(self):
        content = "question,intent\nHow deep is the ocean?,Chemistry\n"
        with pytest.raises(DatasetFormatError, match="unknown intent label 'Chemistry'"):
            parse_questions_csv(content, EARTH_INTENTS)

    def test_header_only(self):
        assert parse_questions_csv("question,intent\n", EARTH_INTENTS) == []

    def test_missing_header(self):
        with pytest.raises(DatasetFormatError, match="expected 'question,intent'"):
            parse_questions_csv("text,label\nx,A\n", ["A"])

    def test_wrong_column_count(self):
        with pytest.raises(DatasetFormatError, match="row 1: expected 2 columns"):
            parse_questions_csv("question,intent\nonly-one-cell\n", ["A"])

    def test_empty_question_text(self):
        with pytest.raises(DatasetFormatError, match="empty question text"):
            parse_questions_csv('question,intent\n"",A\n', ["A"])

    def test_quoted_comma_roundtrip(self):
        content = 'question,intent\n"One, two, three?",A\n'
        questions = parse_questions_csv(content, ["A"])
        assert questions[0].text == "One, two, three?"

    def test_origin_and_parent_columns(self):
        content = (
            "question,intent,origin,parent\n"
            "What is rain?,A,human,\n"
            "What could rain be?,A,synthetic,1\n"
        )
        questions = parse_questions_csv(content, ["A"])
        assert questions[1].origin == "synthetic"
        assert questions[1].parent_id == questions[0].id

    def test_parent_row_out_of_range(self):
        content = "question,intent,origin,parent\nWhat is rain?,A,synthetic,9\n"
        with pytest.raises(DatasetFormatError, match="parent row 9 does not exist"):
            parse_questions_csv(content, ["A"])

    def test_bad_origin(self):
        content = "question,intent,origin\nWhat is rain?,A,robot\n"
        with pytest.raises(DatasetFormatError, match="unknown origin 'robot'"):
            parse_questions_csv(content, ["A"])


class TestSerialization:
    def test_empty_questions_is_header_only(self):
        dataset = Dataset((Intent(name="A", context="x"),), ())
        assert serialize_questions(dataset) == "question,intent,origin,parent\n"

    def test_comma_field_quoted(self):
        dataset = Dataset(
            (Intent(name="A", context="x"),),
            (LabeledQuestion(id="q1", text="One, two", intent_name="A"),),
        )
        assert '"One, two"' in serialize_questions(dataset)

    def test_lf_line_endings(self):
        dataset = Dataset(
            (Intent(name="A", context="x"),),
            (LabeledQuestion(id="q1", text="hello", intent_name="A"),),
        )
        assert "\r" not in serialize_questions(dataset)
        assert "\r" not in serialize_intents(dataset)
        assert "\r" not in serialize_contexts(dataset)

    def _roundtrip(self, dataset: Dataset) -> Dataset:
        return parse_dataset(
            serialize_intents(dataset),
            serialize_contexts(dataset),
            serialize_questions(dataset),
        )

    def test_roundtrip_with_synthetic(self):
        dataset = Dataset(
            (Intent(name="A", context="alpha."), Intent(name="B", context="beta.\nmore beta.")),
            (
                LabeledQuestion(id="h1", text="What is alpha?", intent_name="A"),
                LabeledQuestion(
                    id="h1.s1",
                    text="what might alpha be",
                    intent_name="A",
                    origin="synthetic",
                    parent_id="h1",
                ),
                LabeledQuestion(id="h2", text='Say "beta", twice?', intent_name="B"),
            ),
        )
        again = self._roundtrip(dataset)
        assert semantically_equal(dataset, again)
        assert validate(again).ok

    @given(strategies.datasets())
    @settings(max_examples=150, deadline=None)
    def test_roundtrip_property(self, dataset):
        assert semantically_equal(dataset, self._roundtrip(dataset))

    def test_random_generator_roundtrips(self):
        rng = random.Random(42)
        for _ in range(50):
            dataset = make_random_dataset(rng)
            assert semantically_equal(dataset, self._roundtrip(dataset))


class TestConstruction:
    def test_intent_name_trimmed(self):
        assert Intent(name="  A  ", context="x").name == "A"

    def test_empty_context_rejected(self):
        with pytest.raises(ValueError, match="empty context"):
            Intent(name="A", context="   ")

    def test_multiline_name_rejected(self):
        with pytest.raises(ValueError, match="span lines"):
            Intent(name="A\nB", context="x")

    def test_header_like_context_line_rejected(self):
        with pytest.raises(ValueError, match="reserved"):
            Intent(name="A", context="fine\n# not fine")

    def test_unknown_origin_rejected(self):
        with pytest.raises(ValueError, match="unknown origin"):
            LabeledQuestion(id="q1", text="x", intent_name="A", origin="alien")


class TestValidate:
    def test_fixture_suites_are_clean(self, earth_dataset, ml_dataset):
        assert validate(earth_dataset).ok
        assert not validate(earth_dataset).issues
        assert validate(ml_dataset).ok

    def test_orphaned_synthetic_is_one_violation(self):
        dataset = Dataset(
            (Intent(name="A", context="x"),),
            (
                LabeledQuestion(
                    id="s1", text="orphan", intent_name="A", origin="synthetic", parent_id="nope"
                ),
            ),
        )
        report = validate(dataset)
        assert len(report.errors) == 1
        assert "does not exist" in report.errors[0].message

    def test_two_duplicate_names_and_bad_label_is_three_violations(self):
        dataset = Dataset(
            (
                Intent(name="A", context="x"),
                Intent(name="A", context="y"),
                Intent(name="B", context="z"),
                Intent(name="B", context="w"),
            ),
            (LabeledQuestion(id="q1", text="hello", intent_name="C"),),
        )
        report = validate(dataset)
        assert len(report.errors) == 3

    def test_synthetic_without_parent(self):
        dataset = Dataset(
            (Intent(name="A", context="x"),),
            (LabeledQuestion(id="s1", text="zzz", intent_name="A", origin="synthetic"),),
        )
        assert any("no parent" in i.message for i in validate(dataset).errors)

    def test_parent_intent_mismatch(self):
        dataset = Dataset(
            (Intent(name="A", context="x"), Intent(name="B", context="y")),
            (
                LabeledQuestion(id="h1", text="alpha", intent_name="A"),
                LabeledQuestion(
                    id="s1", text="beta", intent_name="B", origin="synthetic", parent_id="h1"
                ),
            ),
        )
        assert any("differs from parent" in i.message for i in validate(dataset).errors)

    def test_human_with_parent(self):
        dataset = Dataset(
            (Intent(name="A", context="x"),),
            (
                LabeledQuestion(id="h1", text="alpha", intent_name="A"),
                LabeledQuestion(id="h2", text="beta", intent_name="A", parent_id="h1"),
            ),
        )
        assert any("must not have a parent" in i.message for i in validate(dataset).errors)

    def test_duplicate_texts_warn_not_error(self):
        dataset = Dataset(
            (Intent(name="A", context="x"),),
            (
                LabeledQuestion(id="q1", text="What is rain?", intent_name="A"),
                LabeledQuestion(id="q2", text="what is RAIN", intent_name="A"),
            ),
        )
        report = validate(dataset)
        assert report.ok
        assert len(report.warnings) == 1

    def test_duplicate_question_ids(self):
        dataset = Dataset(
            (Intent(name="A", context="x"),),
            (
                LabeledQuestion(id="q1", text="one", intent_name="A"),
                LabeledQuestion(id="q1", text="two", intent_name="A"),
            ),
        )
        assert any("duplicate question id" in i.message for i in validate(dataset).errors)

    @given(strategies.datasets())
    @settings(max_examples=60, deadline=None)
    def test_generated_datasets_always_valid(self, dataset):
        assert validate(dataset).ok


class TestNormalization:
    @pytest.mark.parametrize(
        "left,right",
        [
            ("What is rain?", "what is rain"),
            ("  spaced   out  ", "spaced out"),
            ("Ends with dots...", "ends with dots"),
        ],
    )
    def test_equivalent(self, left, right):
        assert normalize_question_text(left) == normalize_question_text(right)

    def test_distinct(self):
        assert normalize_question_text("rain") != normalize_question_text("snow")


class TestStratifiedSplit:
    def _balanced(self, per_intent=10):
        intents = tuple(Intent(name=f"I{i}", context="ctx") for i in range(3))
        questions = tuple(
            LabeledQuestion(id=f"q{i}-{j}", text=f"text {i} {j}", intent_name=f"I{i}")
            for i in range(3)
            for j in range(per_intent)
        )
        return Dataset(intents, questions)

    def test_ceiling_rule(self):
        train, validation = stratified_split(self._balanced(10), 0.8, seed=0)
        for name in ("I0", "I1", "I2"):
            assert sum(1 for q in train.questions if q.intent_name == name) == 8
            assert sum(1 for q in validation.questions if q.intent_name == name) == 2

    def test_deterministic(self):
        dataset = self._balanced(10)
        a = stratified_split(dataset, 0.8, seed=5)
        b = stratified_split(dataset, 0.8, seed=5)
        assert [q.id for q in a[0].questions] == [q.id for q in b[0].questions]
        assert [q.id for q in a[1].questions] == [q.id for q in b[1].questions]

    def test_different_seeds_differ(self, earth_dataset):
        a = stratified_split(earth_dataset, 0.8, seed=1)
        b = stratified_split(earth_dataset, 0.8, seed=2)
        assert {q.id for q in a[1].questions} != {q.id for q in b[1].questions}

    def test_partition(self, earth_dataset):
        train, validation = stratified_split(earth_dataset, 0.8, seed=3)
        train_ids = {q.id for q in train.questions}
        validation_ids = {q.id for q in validation.questions}
        assert train_ids & validation_ids == set()
        assert train_ids | validation_ids == {q.id for q in earth_dataset.questions}

    def test_both_sides_nonempty_even_when_ceiling_saturates(self):
        train, validation = stratified_split(self._balanced(2), 0.8, seed=0)
        for name in ("I0", "I1", "I2"):
            assert sum(1 for q in train.questions if q.intent_name == name) == 1
            assert sum(1 for q in validation.questions if q.intent_name == name) == 1

    def test_synthetic_questions_always_train(self):
        base = self._balanced(4)
        synthetic = tuple(
            LabeledQuestion(
                id=f"{q.id}.s1",
                text=q.text + " again",
                intent_name=q.intent_name,
                origin="synthetic",
                parent_id=q.id,
            )
            for q in base.questions
        )
        dataset = Dataset(base.intents, base.questions + synthetic)
        train, validation = stratified_split(dataset, 0.5, seed=9)
        assert all(q.origin == "human" for q in validation.questions)
        assert {q.id for q in dataset.questions if q.origin == "synthetic"} <= {
            q.id for q in train.questions
        }

    def test_too_few_questions(self):
        dataset = Dataset(
            (Intent(name="A", context="x"),),
            (LabeledQuestion(id="q1", text="only one", intent_name="A"),),
        )
        with pytest.raises(ValueError, match="need at least 2"):
            stratified_split(dataset, 0.8, seed=0)

    def test_bad_fraction(self):
        with pytest.raises(ValueError, match="in \\(0, 1\\)"):
            stratified_split(self._balanced(), 1.0, seed=0)

    def test_fraction_ceiling_math(self):
        train, _ = stratified_split(self._balanced(10), 0.75, seed=0)
        per_intent = sum(1 for q in train.questions if q.intent_name == "I0")
        assert per_intent == math.ceil(0.75 * 10)
