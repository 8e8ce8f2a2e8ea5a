"""Project persistence and the 7-step workflow state machine.

A project directory holds the dataset in the three classroom file
formats plus a manifest (rules, configs, step state) and the trained
model artifact:

    <dir>/manifest.json
    <dir>/intents.txt
    <dir>/contexts.txt
    <dir>/questions.csv
    <dir>/model.bin        (only when a model has been trained)

Saves stage a complete copy and swap directories, so an interrupted
save leaves either the old or the new project on disk, never a mix.
A sibling <dir>.lock file serializes writers across processes.

Steps: 1 data collection, 2 data augmentation, 3 policy filtering,
4 intent recognition, 5 extractive question answering, 6 generative
question answering, 7 deployment. Completing step N requires step N-1,
plus the step's gate.
"""

from __future__ import annotations

import json
import os
import shutil
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from filelock import FileLock

from classbot.augment import AugmentationConfig
from classbot.classifier import IntentModel, deserialize_model, serialize_model
from classbot.dataset import (
    Dataset,
    DatasetFormatError,
    parse_dataset,
    parse_questions_csv,
    serialize_contexts,
    serialize_intents,
    serialize_questions,
    validate,
)
from classbot.errors import ClassbotError
from classbot.pipeline import PipelineConfig
from classbot.policy import PolicyRule, RuleSet, compile_rules, rules_from_dicts
from classbot.qa import ExtractiveConfig

PROJECT_FORMAT_VERSION = 1
STEP_COUNT = 7

STEP_TITLES = {
    1: "data collection",
    2: "data augmentation",
    3: "policy filtering",
    4: "intent recognition",
    5: "extractive question answering",
    6: "generative question answering",
    7: "deployment",
}

MANIFEST_NAME = "manifest.json"
INTENTS_NAME = "intents.txt"
CONTEXTS_NAME = "contexts.txt"
QUESTIONS_NAME = "questions.csv"
MODEL_NAME = "model.bin"

_SUITE_FILE_ALIASES = {
    INTENTS_NAME: ("intents.txt", "sampleIntents.txt"),
    CONTEXTS_NAME: ("contexts.txt", "sampleContexts.txt"),
    QUESTIONS_NAME: ("questions.csv", "sampleQuestions.csv"),
}

BUNDLED_SUITES = ("earth_science", "machine_learning")


class ProjectError(ClassbotError):
    pass


@dataclass
class Project:
    name: str
    dataset: Dataset = field(default_factory=Dataset)
    ruleset: RuleSet = field(default_factory=RuleSet)
    pipeline_config: PipelineConfig = field(default_factory=PipelineConfig)
    augmentation_config: AugmentationConfig = field(default_factory=AugmentationConfig)
    model: IntentModel | None = None
    step_progress: set[int] = field(default_factory=set)
    model_stale: bool = False
    chat_turns: int = 0
    format_version: int = PROJECT_FORMAT_VERSION
    load_problems: list[str] = field(default_factory=list)
    read_only: bool = False

    def set_dataset(self, dataset: Dataset) -> None:
        """Replace the dataset; the model goes stale when questions or the
        intent list change. Context-only edits never stale the model
        because contexts are looked up at answer time."""
        questions_changed = [
            (q.text, q.intent_name, q.origin) for q in self.dataset.questions
        ] != [(q.text, q.intent_name, q.origin) for q in dataset.questions]
        intents_changed = self.dataset.intent_names != dataset.intent_names
        self.dataset = dataset
        if self.model is not None and (questions_changed or intents_changed):
            self.model_stale = True

    def set_rules(self, rules: list[PolicyRule]) -> None:
        self.ruleset = compile_rules(rules)

    def set_model(self, model: IntentModel) -> None:
        self.model = model
        self.model_stale = False

    def record_chat_turn(self) -> None:
        self.chat_turns += 1


def mark_stale(project: Project) -> None:
    project.model_stale = True


def is_stale(project: Project) -> bool:
    return project.model_stale


def step_gate_problems(project: Project, step: int) -> list[str]:
    """Unsatisfied gate conditions for completing the given step (the
    prefix rule is checked separately)."""
    problems: list[str] = []
    if step == 1:
        report = validate(project.dataset)
        if not report.ok:
            problems.append(
                "dataset has validation errors: " + "; ".join(i.message for i in report.errors)
            )
        if len(project.dataset.intents) < 2:
            problems.append("at least 2 intents are required")
    elif step == 4:
        if project.model is None:
            problems.append("no trained model yet")
        elif project.model_stale:
            problems.append("model is stale; retrain required")
    elif step == 7:
        if project.chat_turns < 1:
            problems.append("no successful chat turn recorded yet")
    return problems


def next_step(project: Project) -> int | None:
    for step in range(1, STEP_COUNT + 1):
        if step not in project.step_progress:
            return step
    return None


def complete_step(project: Project, step: int) -> Project:
    if project.read_only:
        raise ProjectError("project was opened read-only; fix the reported problems first")
    if not 1 <= step <= STEP_COUNT:
        raise ProjectError(f"step must be 1..{STEP_COUNT}, got {step}")
    if step > 1 and (step - 1) not in project.step_progress:
        raise ProjectError(f"step {step} requires step {step - 1} to be completed first")
    problems = step_gate_problems(project, step)
    if problems:
        raise ProjectError(f"step {step} gate unsatisfied: " + "; ".join(problems))
    project.step_progress.add(step)
    return project


def _manifest_document(project: Project) -> dict:
    return {
        "format_version": project.format_version,
        "name": project.name,
        "rules": [rule.to_dict() for rule in project.ruleset.rules],
        "pipeline_config": project.pipeline_config.to_dict(),
        "augmentation_config": project.augmentation_config.to_dict(),
        "step_progress": sorted(project.step_progress),
        "model_stale": project.model_stale,
        "chat_turns": project.chat_turns,
        "has_model": project.model is not None,
    }


def pipeline_config_from_dict(doc: dict) -> PipelineConfig:
    extractive = doc.get("extractive_config", {})
    return PipelineConfig(
        qa_mode=doc.get("qa_mode", "extractive"),
        confidence_threshold=doc.get("confidence_threshold", 0.0),
        fallback_response=doc.get("fallback_response", ""),
        extractive_config=ExtractiveConfig(**extractive),
    )


def _lock_for(directory: Path) -> FileLock:
    return FileLock(str(directory) + ".lock")


def save_project(project: Project, directory: str | Path) -> None:
    """Write the whole project atomically (stage + directory swap)."""
    if project.read_only:
        raise ProjectError("project was opened read-only; refusing to save")
    directory = Path(directory)
    staging = directory.parent / (directory.name + ".staging")
    backup = directory.parent / (directory.name + ".backup")
    with _lock_for(directory):
        for leftover in (staging, backup):
            if leftover.exists():
                shutil.rmtree(leftover)
        staging.mkdir(parents=True)
        (staging / INTENTS_NAME).write_text(serialize_intents(project.dataset), encoding="utf-8")
        (staging / CONTEXTS_NAME).write_text(serialize_contexts(project.dataset), encoding="utf-8")
        (staging / QUESTIONS_NAME).write_text(serialize_questions(project.dataset), encoding="utf-8")
        if project.model is not None:
            (staging / MODEL_NAME).write_bytes(serialize_model(project.model))
        manifest = json.dumps(_manifest_document(project), ensure_ascii=False, indent=2)
        (staging / MANIFEST_NAME).write_text(manifest + "\n", encoding="utf-8")

        if directory.exists():
            os.rename(directory, backup)
        os.rename(staging, directory)
        if backup.exists():
            shutil.rmtree(backup)


def load_project(directory: str | Path) -> Project:
    """Load a project; invariant violations are reported on the returned
    project and open it read-only rather than failing the load."""
    directory = Path(directory)
    backup = directory.parent / (directory.name + ".backup")
    with _lock_for(directory):
        if not directory.exists() and backup.exists():
            # interrupted save: the backup is the last complete state
            os.rename(backup, directory)
        if not directory.exists():
            raise ProjectError(f"no project directory at {directory}")
        manifest_path = directory / MANIFEST_NAME
        if not manifest_path.exists():
            raise ProjectError(f"{directory} is not a project directory (missing {MANIFEST_NAME})")
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise ProjectError(f"manifest is not valid JSON: {err}") from err
        version = manifest.get("format_version")
        if version != PROJECT_FORMAT_VERSION:
            raise ProjectError(
                f"unsupported project format version {version!r}; this build reads "
                f"version {PROJECT_FORMAT_VERSION}"
            )

        for name in (INTENTS_NAME, CONTEXTS_NAME, QUESTIONS_NAME):
            if not (directory / name).exists():
                raise ProjectError(f"project is missing {name}")
        intents_text = (directory / INTENTS_NAME).read_text(encoding="utf-8")
        contexts_text = (directory / CONTEXTS_NAME).read_text(encoding="utf-8")
        questions_text = (directory / QUESTIONS_NAME).read_text(encoding="utf-8")
        try:
            if intents_text.strip():
                dataset = parse_dataset(intents_text, contexts_text, questions_text)
            else:
                # a fresh project: no intents yet, questions.csv is header-only
                parse_questions_csv(questions_text, [])
                dataset = Dataset()
        except DatasetFormatError as err:
            raise ProjectError("dataset files are unreadable: " + "; ".join(err.problems)) from err

        try:
            rules = rules_from_dicts(manifest.get("rules", []))
            ruleset = compile_rules(rules)
            pipeline_config = pipeline_config_from_dict(manifest.get("pipeline_config", {}))
            augmentation_config = AugmentationConfig(**manifest.get("augmentation_config", {}))
        except (ClassbotError, TypeError, ValueError) as err:
            raise ProjectError(f"manifest is malformed: {err}") from err

        model = None
        model_path = directory / MODEL_NAME
        if manifest.get("has_model") and model_path.exists():
            model = deserialize_model(model_path.read_bytes())

        project = Project(
            name=str(manifest.get("name", directory.name)),
            dataset=dataset,
            ruleset=ruleset,
            pipeline_config=pipeline_config,
            augmentation_config=augmentation_config,
            model=model,
            step_progress=set(int(s) for s in manifest.get("step_progress", [])),
            model_stale=bool(manifest.get("model_stale", False)),
            chat_turns=int(manifest.get("chat_turns", 0)),
        )

        problems: list[str] = []
        report = validate(dataset)
        for issue in report.errors:
            problems.append(f"dataset {issue.location}: {issue.message}")
        for step in sorted(project.step_progress):
            if step > 1 and (step - 1) not in project.step_progress:
                problems.append(f"step {step} is marked complete but step {step - 1} is not")
        if 4 in project.step_progress and project.model is None:
            problems.append("step 4 is marked complete but there is no model artifact")
        if manifest.get("has_model") and not model_path.exists():
            problems.append("manifest promises a model artifact but model.bin is missing")
        project.load_problems = problems
        project.read_only = bool(problems)
        return project


def _find_suite_file(suite_directory: Path, canonical: str) -> Path:
    for candidate in _SUITE_FILE_ALIASES[canonical]:
        path = suite_directory / candidate
        if path.exists():
            return path
    raise ProjectError(
        f"suite directory {suite_directory} is missing {canonical} "
        f"(accepted names: {', '.join(_SUITE_FILE_ALIASES[canonical])})"
    )


def bundled_suite_path(name: str) -> Path:
    if name not in BUNDLED_SUITES:
        raise ProjectError(f"unknown bundled suite {name!r}; available: {', '.join(BUNDLED_SUITES)}")
    return Path(str(resources.files("classbot") / "suites" / name))


def import_suite(project: Project, suite_directory: str | Path) -> Project:
    """Replace the project dataset with the suite's three files."""
    suite_directory = Path(suite_directory)
    if not suite_directory.is_dir():
        raise ProjectError(f"suite directory {suite_directory} does not exist")
    intents_path = _find_suite_file(suite_directory, INTENTS_NAME)
    contexts_path = _find_suite_file(suite_directory, CONTEXTS_NAME)
    questions_path = _find_suite_file(suite_directory, QUESTIONS_NAME)
    try:
        dataset = parse_dataset(
            intents_path.read_text(encoding="utf-8"),
            contexts_path.read_text(encoding="utf-8"),
            questions_path.read_text(encoding="utf-8"),
        )
    except DatasetFormatError as err:
        raise ProjectError("suite import failed: " + "; ".join(err.problems)) from err
    report = validate(dataset)
    if not report.ok:
        raise ProjectError(
            "suite import failed validation: " + "; ".join(i.message for i in report.errors)
        )
    project.set_dataset(dataset)
    if project.model is not None:
        project.model_stale = True
    return project
