"""Command-line driver.

Every service capability has a headless counterpart here, so a whole
project can be built, trained, evaluated, and chatted with from a shell
or a test without the HTTP layer. Commands operate on a project
directory (--project) except `projects` and `serve`, which take a data
root containing many projects.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from classbot.augment import AugmentationConfig, augment_dataset, make_translation_client
from classbot.classifier import TrainingConfig, evaluate, train
from classbot.dataset import (
    serialize_contexts,
    serialize_intents,
    serialize_questions,
    stratified_split,
    validate,
)
from classbot.errors import ClassbotError
from classbot.pipeline import answer_question
from classbot.policy import PolicyRule, compile_rules
from classbot.project import (
    MANIFEST_NAME,
    STEP_TITLES,
    Project,
    ProjectError,
    bundled_suite_path,
    complete_step,
    import_suite,
    load_project,
    next_step,
    save_project,
    step_gate_problems,
)
from classbot.qa import compare as qa_compare
from classbot.qa import make_generative_client

# every HTTP endpoint must have a CLI counterpart; tests enforce this map
ENDPOINT_CLI_COVERAGE: dict[tuple[str, str], str] = {
    ("POST", "/v1/projects"): "init",
    ("GET", "/v1/projects"): "projects",
    ("GET", "/v1/projects/{name}"): "projects",
    ("DELETE", "/v1/projects/{name}"): "projects",
    ("GET", "/v1/projects/{name}/dataset"): "validate",
    ("PUT", "/v1/projects/{name}/dataset"): "import",
    ("GET", "/v1/projects/{name}/dataset/{part}"): "export",
    ("PUT", "/v1/projects/{name}/dataset/{part}"): "import",
    ("GET", "/v1/projects/{name}/rules"): "rules",
    ("PUT", "/v1/projects/{name}/rules"): "rules",
    ("GET", "/v1/projects/{name}/config"): "config",
    ("PUT", "/v1/projects/{name}/config"): "config",
    ("POST", "/v1/projects/{name}/augment"): "augment",
    ("POST", "/v1/projects/{name}/train"): "train",
    ("GET", "/v1/jobs/{job_id}"): "train",
    ("POST", "/v1/projects/{name}/chat"): "ask",
    ("POST", "/v1/projects/{name}/compare"): "compare",
    ("GET", "/v1/projects/{name}/steps"): "steps",
    ("POST", "/v1/projects/{name}/steps/{step}/complete"): "steps",
}


def _emit(payload: dict, fmt: str, text_lines: list[str]) -> None:
    if fmt == "structured":
        print(json.dumps(payload, ensure_ascii=False))
    else:
        for line in text_lines:
            print(line)


def _load(args) -> Project:
    return load_project(args.project)


def cmd_init(args) -> int:
    directory = Path(args.project)
    if (directory / MANIFEST_NAME).exists():
        raise ProjectError(f"{directory} already contains a project")
    name = args.name or directory.name
    project = Project(name=name)
    save_project(project, directory)
    print(f"initialized project {name!r} at {directory}")
    return 0


def cmd_import(args) -> int:
    project = _load(args)
    source = Path(args.source)
    if not source.is_dir():
        source = bundled_suite_path(args.source)
    import_suite(project, source)
    save_project(project, args.project)
    report = validate(project.dataset)
    _emit(
        {
            "intents": project.dataset.intent_names,
            "question_count": len(project.dataset.questions),
            "validation": report.to_dict(),
        },
        args.format,
        [
            f"imported {len(project.dataset.questions)} questions across "
            f"{len(project.dataset.intents)} intents",
            "validation: ok" if report.ok else "validation: FAILED",
        ],
    )
    return 0


def cmd_export(args) -> int:
    project = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "intents.txt").write_text(serialize_intents(project.dataset), encoding="utf-8")
    (out / "contexts.txt").write_text(serialize_contexts(project.dataset), encoding="utf-8")
    (out / "questions.csv").write_text(serialize_questions(project.dataset), encoding="utf-8")
    print(f"exported dataset files to {out}")
    return 0


def cmd_validate(args) -> int:
    project = _load(args)
    report = validate(project.dataset)
    lines = ["validation: ok" if report.ok else "validation: FAILED"]
    for issue in report.errors:
        lines.append(f"  error {issue.location}: {issue.message}")
    for issue in report.warnings:
        lines.append(f"  warning {issue.location}: {issue.message}")
    _emit(report.to_dict(), args.format, lines)
    return 0 if report.ok else 1


def cmd_augment(args) -> int:
    project = _load(args)
    config = project.augmentation_config
    overrides = {}
    if args.pivot is not None:
        overrides["pivot_language"] = args.pivot
    if args.rounds is not None:
        overrides["rounds_per_question"] = args.rounds
    if args.cap is not None:
        overrides["max_synthetic_per_question"] = args.cap
    if args.no_dedup:
        overrides["dedup"] = False
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = replace(config, **overrides)
    client = make_translation_client(args.translation)
    dataset, report = augment_dataset(project.dataset, config, client)
    project.augmentation_config = config
    project.set_dataset(dataset)
    save_project(project, args.project)
    lines = [f"added {report.total_added} synthetic questions, dropped {report.total_dropped}"]
    for intent, counts in report.per_intent.items():
        lines.append(
            f"  {intent}: +{counts.added} "
            f"(duplicates {counts.dropped_duplicates}, cap {counts.dropped_cap})"
        )
    _emit(
        {"report": report.to_dict(), "question_count": len(dataset.questions)},
        args.format,
        lines,
    )
    return 0


def cmd_rules(args) -> int:
    project = _load(args)
    if args.action == "list":
        payload = {"rules": [rule.to_dict() for rule in project.ruleset.rules]}
        lines = [
            f"{rule.id}: [{', '.join(rule.keywords)}] ({rule.match_mode}) -> {rule.response}"
            for rule in project.ruleset.rules
        ] or ["(no rules)"]
        _emit(payload, args.format, lines)
        return 0
    if args.action == "clear":
        project.ruleset = compile_rules([])
        save_project(project, args.project)
        print("cleared all rules")
        return 0
    # add
    if not args.keyword or args.response is None:
        raise ClassbotError("rules add requires at least one --keyword and a --response")
    rule_id = args.id or f"rule{len(project.ruleset.rules) + 1}"
    new_rule = PolicyRule(
        id=rule_id,
        keywords=tuple(args.keyword),
        response=args.response,
        match_mode=args.mode,
    )
    project.ruleset = compile_rules(list(project.ruleset.rules) + [new_rule])
    save_project(project, args.project)
    print(f"added rule {rule_id!r}")
    return 0


def cmd_config(args) -> int:
    project = _load(args)
    if args.action == "set":
        # collect every change first: replace() re-validates, so partial
        # updates (threshold before fallback) would trip the invariants
        extractive_changes = {}
        if args.max_span_tokens is not None:
            extractive_changes["max_span_tokens"] = args.max_span_tokens
        if args.window_tokens is not None:
            extractive_changes["window_tokens"] = args.window_tokens
        if args.length_penalty is not None:
            extractive_changes["length_penalty"] = args.length_penalty
        pipeline_changes = {}
        if args.qa_mode is not None:
            pipeline_changes["qa_mode"] = args.qa_mode
        if args.threshold is not None:
            pipeline_changes["confidence_threshold"] = args.threshold
        if args.fallback is not None:
            pipeline_changes["fallback_response"] = args.fallback
        if extractive_changes:
            pipeline_changes["extractive_config"] = replace(
                project.pipeline_config.extractive_config, **extractive_changes
            )
        augmentation_changes = {}
        if args.pivot is not None:
            augmentation_changes["pivot_language"] = args.pivot
        if args.rounds is not None:
            augmentation_changes["rounds_per_question"] = args.rounds
        if args.cap is not None:
            augmentation_changes["max_synthetic_per_question"] = args.cap
        if args.dedup is not None:
            augmentation_changes["dedup"] = args.dedup == "on"
        if args.seed is not None:
            augmentation_changes["seed"] = args.seed
        if pipeline_changes:
            project.pipeline_config = replace(project.pipeline_config, **pipeline_changes)
        if augmentation_changes:
            project.augmentation_config = replace(
                project.augmentation_config, **augmentation_changes
            )
        save_project(project, args.project)
    payload = {
        "pipeline": project.pipeline_config.to_dict(),
        "augmentation": project.augmentation_config.to_dict(),
    }
    _emit(payload, args.format, [json.dumps(payload, ensure_ascii=False, indent=2)])
    return 0


def cmd_train(args) -> int:
    project = _load(args)
    config = TrainingConfig(
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        l2_penalty=args.l2,
        seed=args.seed,
    )
    model = train(project.dataset, config)
    project.set_model(model)
    save_project(project, args.project)
    final = model.metrics[-1] if model.metrics else None
    payload = {
        "epochs": config.epochs,
        "final_loss": final.loss if final else None,
        "final_accuracy": final.accuracy if final else None,
        "labels": list(model.label_order),
        "vocabulary_size": model.vocabulary.size,
    }
    lines = [f"trained {config.epochs} epochs on {len(project.dataset.questions)} questions"]
    if final:
        lines.append(f"final loss {final.loss:.6f}, training accuracy {final.accuracy:.4f}")
    _emit(payload, args.format, lines)
    return 0


def cmd_eval(args) -> int:
    project = _load(args)
    train_set, validation_set = stratified_split(project.dataset, args.split, args.seed)
    config = TrainingConfig(
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        l2_penalty=args.l2,
        seed=args.seed,
    )
    model = train(train_set, config)
    result = evaluate(model, validation_set)
    payload = result.to_dict()
    payload["train_questions"] = len(train_set.questions)
    payload["validation_questions"] = len(validation_set.questions)
    lines = [
        f"validation accuracy: {result.accuracy:.4f} "
        f"({len(validation_set.questions)} held-out questions)",
        "confusion matrix (rows = true intent, columns = predicted):",
    ]
    width = max(len(label) for label in result.labels)
    for i, label in enumerate(result.labels):
        row = " ".join(f"{int(n):4d}" for n in result.confusion[i])
        lines.append(f"  {label:<{width}} {row}")
    _emit(payload, args.format, lines)
    return 0


def _run_turn(project: Project, question: str, mode: str | None, generative_endpoint: str):
    if project.model is None:
        raise ProjectError("no model trained yet; run `classbot train` first")
    pipeline_config = project.pipeline_config
    if mode is not None:
        pipeline_config = replace(pipeline_config, qa_mode=mode)
    return answer_question(
        question,
        project.ruleset,
        project.model,
        project.dataset,
        pipeline_config,
        generative_client=make_generative_client(generative_endpoint),
        stale=project.model_stale,
    )


def _response_lines(response, show_trace: bool) -> list[str]:
    lines = [response.answer.text]
    detail = f"[source={response.source}"
    if response.intent is not None:
        detail += f" intent={response.intent[0]!r} p={response.intent[1]:.4f}"
    if response.stale:
        detail += " stale-model"
    lines.append(detail + "]")
    if show_trace:
        for record in response.trace:
            lines.append(f"  {record.stage}: {record.outputs} ({record.elapsed_ms:.2f} ms)")
    return lines


def cmd_ask(args) -> int:
    project = _load(args)
    response = _run_turn(project, args.question, args.mode, args.generative)
    project.record_chat_turn()
    save_project(project, args.project)
    _emit(response.to_dict(), args.format, _response_lines(response, args.trace))
    return 0


def cmd_compare(args) -> int:
    project = _load(args)
    if project.model is None:
        raise ProjectError("no model trained yet; run `classbot train` first")
    from classbot.classifier import predict

    ranked = predict(project.model, args.question)
    top_name, top_probability = ranked[0]
    comparison = qa_compare(
        args.question,
        project.dataset.context_for(top_name),
        project.pipeline_config.extractive_config,
        make_generative_client(args.generative),
    )
    payload = comparison.to_dict()
    payload["intent"] = {"name": top_name, "probability": top_probability}
    lines = [f"intent: {top_name} (p={top_probability:.4f})"]
    if comparison.extractive:
        lines.append(f"extractive: {comparison.extractive.text}")
    if comparison.extractive_error:
        lines.append(f"extractive error: {comparison.extractive_error}")
    if comparison.generative:
        lines.append(f"generative: {comparison.generative.text}")
    if comparison.generative_error:
        lines.append(f"generative error: {comparison.generative_error}")
    _emit(payload, args.format, lines)
    return 0


def cmd_chat(args) -> int:
    project = _load(args)
    if project.model is None:
        raise ProjectError("no model trained yet; run `classbot train` first")
    print("chat started; type 'exit' to leave")
    while True:
        try:
            question = input("you> ").strip()
        except EOFError:
            print()
            break
        if not question:
            continue
        if question.lower() in ("exit", "quit"):
            break
        try:
            response = _run_turn(project, question, args.mode, args.generative)
        except ClassbotError as err:
            print(f"error: {err}")
            continue
        project.record_chat_turn()
        for line in _response_lines(response, show_trace=False):
            print(f"bot> {line}")
    save_project(project, args.project)
    return 0


def cmd_steps(args) -> int:
    project = _load(args)
    if args.action == "complete":
        complete_step(project, args.step)
        save_project(project, args.project)
    payload = {
        "completed": sorted(project.step_progress),
        "next_step": next_step(project),
    }
    lines = []
    for step in range(1, 8):
        marker = "x" if step in project.step_progress else " "
        gates = ""
        if step == next_step(project):
            problems = step_gate_problems(project, step)
            if problems:
                gates = "  (blocked: " + "; ".join(problems) + ")"
        lines.append(f"  [{marker}] step {step}: {STEP_TITLES[step]}{gates}")
    _emit(payload, args.format, lines)
    return 0


def cmd_projects(args) -> int:
    root = Path(args.data_root)
    if args.action == "delete":
        if not args.name:
            raise ClassbotError("projects delete requires a project name")
        directory = root / args.name
        if not (directory / MANIFEST_NAME).exists():
            raise ProjectError(f"no project named {args.name!r} under {root}")
        import shutil

        shutil.rmtree(directory)
        print(f"deleted project {args.name!r}")
        return 0
    names = sorted(p.parent.name for p in root.glob(f"*/{MANIFEST_NAME}"))
    _emit({"projects": names}, args.format, names or ["(no projects)"])
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from classbot.service import ServiceConfig, create_app

    host, _, port = args.listen.rpartition(":")
    config = ServiceConfig(
        data_root=Path(args.data_root),
        translation_endpoint=args.translation,
        generative_endpoint=args.generative,
        epoch_throttle_seconds=args.epoch_throttle,
    )
    app = create_app(config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("text", "structured"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="classbot", description="classroom chatbot pipeline toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create an empty project directory")
    p.add_argument("--project", required=True)
    p.add_argument("--name")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("import", help="replace the dataset from a suite directory or bundled suite")
    p.add_argument("--project", required=True)
    p.add_argument("source", help="suite directory, or bundled name: earth_science, machine_learning")
    _add_format(p)
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("export", help="write the three dataset files to a directory")
    p.add_argument("--project", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("validate", help="report dataset invariant violations")
    p.add_argument("--project", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("augment", help="expand the dataset by backtranslation")
    p.add_argument("--project", required=True)
    p.add_argument("--pivot")
    p.add_argument("--rounds", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--no-dedup", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--translation", default="stub", help="'stub', 'identity', or a service URL")
    _add_format(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("rules", help="list, add, or clear keyword policy rules")
    p.add_argument("action", choices=("list", "add", "clear"))
    p.add_argument("--project", required=True)
    p.add_argument("--id")
    p.add_argument("--keyword", action="append", default=[])
    p.add_argument("--mode", choices=("any", "all"), default="any")
    p.add_argument("--response")
    _add_format(p)
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("config", help="show or set pipeline and augmentation configuration")
    p.add_argument("action", choices=("show", "set"))
    p.add_argument("--project", required=True)
    p.add_argument("--qa-mode", choices=("extractive", "generative"))
    p.add_argument("--threshold", type=float)
    p.add_argument("--fallback")
    p.add_argument("--max-span-tokens", type=int)
    p.add_argument("--window-tokens", type=int)
    p.add_argument("--length-penalty", type=float)
    p.add_argument("--pivot")
    p.add_argument("--rounds", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--dedup", choices=("on", "off"))
    p.add_argument("--seed", type=int)
    _add_format(p)
    p.set_defaults(func=cmd_config)

    p = sub.add_parser("train", help="train the intent classifier")
    p.add_argument("--project", required=True)
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    _add_format(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="hold-out evaluation via a stratified split")
    p.add_argument("--project", required=True)
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--l2", type=float, default=1e-4)
    _add_format(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ask", help="answer one question through the full pipeline")
    p.add_argument("--project", required=True)
    p.add_argument("question")
    p.add_argument("--mode", choices=("extractive", "generative"))
    p.add_argument("--trace", action="store_true")
    p.add_argument("--generative", default="stub", help="'stub' or a service URL")
    _add_format(p)
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("compare", help="extractive vs generative answers side by side")
    p.add_argument("--project", required=True)
    p.add_argument("question")
    p.add_argument("--generative", default="stub")
    _add_format(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("chat", help="interactive chat loop against a local project")
    p.add_argument("--project", required=True)
    p.add_argument("--mode", choices=("extractive", "generative"))
    p.add_argument("--generative", default="stub")
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("steps", help="show or complete workflow steps")
    p.add_argument("action", choices=("list", "complete"))
    p.add_argument("step", nargs="?", type=int)
    p.add_argument("--project", required=True)
    _add_format(p)
    p.set_defaults(func=cmd_steps)

    p = sub.add_parser("projects", help="list or delete projects under a data root")
    p.add_argument("action", choices=("list", "delete"))
    p.add_argument("name", nargs="?")
    p.add_argument("--data-root", default=os.environ.get("CLASSBOT_DATA_ROOT", "."))
    _add_format(p)
    p.set_defaults(func=cmd_projects)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--data-root", default=os.environ.get("CLASSBOT_DATA_ROOT", "."))
    p.add_argument("--listen", default=os.environ.get("CLASSBOT_LISTEN", "127.0.0.1:8000"))
    p.add_argument("--translation", default=os.environ.get("CLASSBOT_TRANSLATION", "stub"))
    p.add_argument("--generative", default=os.environ.get("CLASSBOT_GENERATIVE", "stub"))
    p.add_argument("--epoch-throttle", type=float, default=0.0)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "steps" and args.action == "complete" and args.step is None:
        parser.error("steps complete requires a step number")
    try:
        return args.func(args)
    except (ClassbotError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
