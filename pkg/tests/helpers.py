"""Shared test utilities: dataset generators and payload scrubbing."""

from __future__ import annotations

import random

from classbot.dataset import Dataset, Intent, LabeledQuestion, parse_dataset
from classbot.project import bundled_suite_path

_WORDS = (
    "rock water wind cloud soil river mountain valley glacier storm sand "
    "wave tide lava crust plate magma delta canyon ridge trench basin "
    "erosion rain snow ice flood quake forest leaf root ocean lake stream"
).split()


def load_suite(name: str) -> Dataset:
    directory = bundled_suite_path(name)
    return parse_dataset(
        (directory / "sampleIntents.txt").read_text(encoding="utf-8"),
        (directory / "sampleContexts.txt").read_text(encoding="utf-8"),
        (directory / "sampleQuestions.csv").read_text(encoding="utf-8"),
    )


def make_separable_dataset(questions_per_intent: int = 10) -> Dataset:
    """3 intents with entirely disjoint vocabularies; linearly separable."""
    pools = {
        "rocks": ["granite", "basalt", "quartz", "mineral", "sediment", "crystal"],
        "water": ["ocean", "river", "lake", "glacier", "rain", "tide"],
        "plants": ["leaf", "root", "flower", "stem", "seed", "pollen"],
    }
    intents, questions = [], []
    counter = 0
    for name, pool in pools.items():
        intents.append(Intent(name=name, context=f"All about {name}: " + " ".join(pool) + "."))
        for i in range(questions_per_intent):
            counter += 1
            text = " ".join(pool[(i + offset) % len(pool)] for offset in range(3))
            questions.append(LabeledQuestion(id=f"q{counter}", text=text, intent_name=name))
    return Dataset(tuple(intents), tuple(questions))


def make_random_dataset(rng: random.Random, max_intents: int = 5, max_questions: int = 20) -> Dataset:
    """Random valid dataset: human questions plus synthetic children with
    correct parent links; texts exercise CSV quoting (commas, quotes)."""
    n_intents = rng.randint(1, max_intents)
    names = rng.sample(
        [f"{w.capitalize()} topic {i}" for i, w in enumerate(rng.sample(_WORDS, max_intents))],
        n_intents,
    )
    intents = []
    for name in names:
        sentences = []
        for _ in range(rng.randint(1, 3)):
            sentences.append(" ".join(rng.choices(_WORDS, k=rng.randint(3, 9))) + ".")
        intents.append(Intent(name=name, context=" ".join(sentences)))

    questions: list[LabeledQuestion] = []
    humans: list[LabeledQuestion] = []
    punctuation = ["?", "", ", right?", ' or "maybe"?']
    for i in range(rng.randint(0, max_questions)):
        text = " ".join(rng.choices(_WORDS, k=rng.randint(1, 7))) + rng.choice(punctuation)
        question = LabeledQuestion(
            id=f"q{i + 1}", text=text, intent_name=rng.choice(names), origin="human"
        )
        questions.append(question)
        humans.append(question)
    synthetic_count = 0
    for parent in list(humans):
        if rng.random() < 0.3:
            synthetic_count += 1
            questions.append(
                LabeledQuestion(
                    id=f"{parent.id}.s1",
                    text=parent.text + " indeed",
                    intent_name=parent.intent_name,
                    origin="synthetic",
                    parent_id=parent.id,
                )
            )
    return Dataset(tuple(intents), tuple(questions))


def strip_timing(payload):
    """Remove elapsed fields from a ChatResponse payload for comparisons."""
    if isinstance(payload, dict):
        return {k: strip_timing(v) for k, v in payload.items() if k != "elapsed_ms"}
    if isinstance(payload, list):
        return [strip_timing(item) for item in payload]
    return payload
