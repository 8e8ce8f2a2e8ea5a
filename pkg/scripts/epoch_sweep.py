#!/usr/bin/env python3
"""Sweep the student-set epoch count and print train/validation accuracy
plus final loss on a bundled suite. Shows why the number of epochs is
the knob students get to turn.

Usage: python3 scripts/epoch_sweep.py [--suite earth_science] [--seed 1]
"""

from __future__ import annotations

import argparse

from classbot.augment import AugmentationConfig, DictionarySubstitutionClient, augment_dataset
from classbot.classifier import TrainingConfig, evaluate, train
from classbot.dataset import stratified_split
from classbot.project import BUNDLED_SUITES, Project, bundled_suite_path, import_suite

EPOCH_GRID = (0, 1, 5, 10, 25, 50, 100, 200, 400)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--suite", choices=BUNDLED_SUITES, default="earth_science")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--augment", action="store_true", help="backtranslate before splitting")
    args = parser.parse_args()

    project = Project(name="sweep")
    import_suite(project, bundled_suite_path(args.suite))
    dataset = project.dataset
    if args.augment:
        dataset, _ = augment_dataset(dataset, AugmentationConfig(), DictionarySubstitutionClient())
    train_split, validation_split = stratified_split(dataset, 0.8, seed=args.seed)
    print(f"suite={args.suite} questions={len(dataset.questions)} "
          f"train={len(train_split.questions)} validation={len(validation_split.questions)}")
    print(f"{'epochs':>7} {'loss':>10} {'train acc':>10} {'val acc':>10}")
    for epochs in EPOCH_GRID:
        config = TrainingConfig(epochs=epochs, learning_rate=0.1, seed=args.seed)
        model = train(train_split, config)
        loss = model.metrics[-1].loss if model.metrics else float("nan")
        train_accuracy = model.metrics[-1].accuracy if model.metrics else float("nan")
        validation_accuracy = evaluate(model, validation_split).accuracy
        print(f"{epochs:>7} {loss:>10.4f} {train_accuracy:>10.3f} {validation_accuracy:>10.3f}")


if __name__ == "__main__":
    main()
