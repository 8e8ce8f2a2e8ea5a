#!/usr/bin/env python3
"""Run the whole pipeline on the bundled earth-science suite and narrate
each stage: import, augmentation, policy rules, training, evaluation,
and a few chat turns. Everything happens in a temporary directory.

Usage: python3 scripts/walkthrough.py [--epochs 200] [--seed 7]
"""

from __future__ import annotations

import argparse
import tempfile
from pathlib import Path

from classbot.augment import DictionarySubstitutionClient, augment_dataset
from classbot.classifier import TrainingConfig, evaluate, train
from classbot.dataset import stratified_split, validate
from classbot.pipeline import PipelineConfig, answer_question
from classbot.policy import PolicyRule, compile_rules
from classbot.project import Project, bundled_suite_path, complete_step, import_suite, save_project
from classbot.qa import SentenceOverlapClient, compare


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epochs", type=int, default=200)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    project = Project(name="walkthrough")
    import_suite(project, bundled_suite_path("earth_science"))
    report = validate(project.dataset)
    print(f"[1 data collection] {len(project.dataset.intents)} intents, "
          f"{len(project.dataset.questions)} questions, validation ok={report.ok}")

    dataset, augmentation_report = augment_dataset(
        project.dataset, project.augmentation_config, DictionarySubstitutionClient()
    )
    project.set_dataset(dataset)
    print(f"[2 data augmentation] +{augmentation_report.total_added} synthetic "
          f"questions (now {len(dataset.questions)})")
    sample = next(q for q in dataset.questions if q.origin == "synthetic")
    parent = dataset.question_by_id(sample.parent_id)
    print(f"    example: {parent.text!r} -> {sample.text!r}")

    project.set_rules([
        PolicyRule(id="login-help", keywords=("login",),
                   response="To log in, use your class username and password."),
    ])
    print(f"[3 policy filtering] {len(project.ruleset)} rule(s) compiled")

    config = TrainingConfig(epochs=args.epochs, learning_rate=0.1, seed=args.seed)
    model = train(project.dataset, config)
    project.set_model(model)
    print(f"[4 intent recognition] trained {config.epochs} epochs; "
          f"final loss {model.metrics[-1].loss:.4f}, "
          f"training accuracy {model.metrics[-1].accuracy:.3f}")

    train_split, validation_split = stratified_split(project.dataset, 0.8, seed=1)
    held_out = evaluate(train(train_split, config), validation_split)
    print(f"    held-out accuracy (0.8 split, seed 1): {held_out.accuracy:.3f}")

    questions = [
        "How do I login?",
        "What causes rocks to break apart?",
        "Where is most of Earth's fresh water found?",
    ]
    for text in questions:
        response = answer_question(
            text, project.ruleset, model, project.dataset, PipelineConfig(),
            generative_client=SentenceOverlapClient(),
        )
        project.record_chat_turn()
        intent = f" [{response.intent[0]} p={response.intent[1]:.2f}]" if response.intent else ""
        print(f"[5 extractive qa] {text!r} -> ({response.source}{intent}) {response.answer.text!r}")

    side_by_side = compare(
        "How does wind shape rocks?",
        project.dataset.context_for("Weathering and Erosion"),
        PipelineConfig().extractive_config,
        SentenceOverlapClient(),
    )
    print(f"[6 generative qa] extractive={side_by_side.extractive.text!r} "
          f"vs generative={side_by_side.generative.text!r}")

    for step in range(1, 8):
        complete_step(project, step)
    with tempfile.TemporaryDirectory() as tmp:
        directory = Path(tmp) / "walkthrough"
        save_project(project, directory)
        print(f"[7 deployment] all steps complete {sorted(project.step_progress)}; "
              f"project saved to {directory.name}/ "
              f"({', '.join(sorted(p.name for p in directory.iterdir()))})")


if __name__ == "__main__":
    main()
