"""HTTP JSON API for projects, the 7-step workflow, training jobs, and chat.

All endpoints live under /v1. Mutations take a per-project lock and save
to disk before returning; training runs on a background thread and
publishes its model atomically on success, so chat turns that started
against the old model finish against the old model. One training job
may run per project at a time.

This is a classroom LAN tool: there is no authentication and no TLS.
Do not expose it to untrusted networks.
"""

from __future__ import annotations

import re
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from classbot.augment import (
    AugmentationConfig,
    AugmentationError,
    augment_dataset,
    make_translation_client,
)
from classbot.classifier import EpochMetrics, TrainingConfig, TrainingError, predict, train
from classbot.dataset import (
    DatasetFormatError,
    parse_dataset,
    serialize_contexts,
    serialize_intents,
    serialize_questions,
    validate,
)
from classbot.errors import ClassbotError
from classbot.pipeline import PipelineError, answer_question
from classbot.policy import PolicyRuleError, compile_rules, rules_from_dicts
from classbot.project import (
    MANIFEST_NAME,
    STEP_COUNT,
    STEP_TITLES,
    Project,
    ProjectError,
    complete_step,
    load_project,
    next_step,
    pipeline_config_from_dict,
    save_project,
    step_gate_problems,
)
from classbot.qa import compare as qa_compare
from classbot.qa import make_generative_client

_PROJECT_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,63}$")

JOB_QUEUED = "queued"
JOB_RUNNING = "running"
JOB_SUCCEEDED = "succeeded"
JOB_FAILED = "failed"


@dataclass(frozen=True)
class ServiceConfig:
    data_root: Path
    translation_endpoint: str = "stub"
    generative_endpoint: str = "stub"
    request_timeout: float = 10.0
    # slows each training epoch down; useful to watch the loss curve live
    epoch_throttle_seconds: float = 0.0


@dataclass
class ProjectHandle:
    project: Project
    directory: Path
    lock: threading.RLock = field(default_factory=threading.RLock)


class ProjectRegistry:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._handles: dict[str, ProjectHandle] = {}
        self._lock = threading.Lock()

    def _directory(self, name: str) -> Path:
        return self.root / name

    def create(self, name: str) -> ProjectHandle:
        if not _PROJECT_NAME_RE.match(name):
            raise HTTPException(400, {"error": f"invalid project name {name!r}"})
        with self._lock:
            if name in self._handles or self._directory(name).exists():
                raise HTTPException(409, {"error": f"project {name!r} already exists"})
            project = Project(name=name)
            handle = ProjectHandle(project=project, directory=self._directory(name))
            save_project(project, handle.directory)
            self._handles[name] = handle
            return handle

    def get(self, name: str) -> ProjectHandle:
        with self._lock:
            if name in self._handles:
                return self._handles[name]
            directory = self._directory(name)
            if not (directory / MANIFEST_NAME).exists():
                raise HTTPException(404, {"error": f"no project named {name!r}"})
            try:
                project = load_project(directory)
            except ClassbotError as err:
                raise HTTPException(409, {"error": str(err)}) from err
            handle = ProjectHandle(project=project, directory=directory)
            self._handles[name] = handle
            return handle

    def names(self) -> list[str]:
        found = {
            path.parent.name
            for path in self.root.glob(f"*/{MANIFEST_NAME}")
            if path.parent.is_dir()
        }
        with self._lock:
            found.update(self._handles)
        return sorted(found)

    def delete(self, name: str) -> None:
        import shutil

        handle = self.get(name)
        with handle.lock:
            with self._lock:
                self._handles.pop(name, None)
            if handle.directory.exists():
                shutil.rmtree(handle.directory)
            lockfile = Path(str(handle.directory) + ".lock")
            if lockfile.exists():
                lockfile.unlink()


@dataclass
class TrainingJob:
    job_id: str
    project: str
    total_epochs: int
    state: str = JOB_QUEUED
    completed_epochs: int = 0
    metrics: list[EpochMetrics] = field(default_factory=list)
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "project": self.project,
            "state": self.state,
            "progress": {
                "completed_epochs": self.completed_epochs,
                "total_epochs": self.total_epochs,
            },
            "metrics": [m.to_dict() for m in self.metrics],
            "error": self.error,
        }


class JobManager:
    def __init__(self, epoch_throttle_seconds: float = 0.0):
        self._jobs: dict[str, TrainingJob] = {}
        self._active: dict[str, str] = {}
        self._lock = threading.Lock()
        self.epoch_throttle_seconds = epoch_throttle_seconds

    def get(self, job_id: str) -> TrainingJob:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise HTTPException(404, {"error": f"no job {job_id!r}"})
        return job

    def start(self, handle: ProjectHandle, config: TrainingConfig) -> TrainingJob:
        with self._lock:
            active_id = self._active.get(handle.project.name)
            if active_id is not None and self._jobs[active_id].state in (JOB_QUEUED, JOB_RUNNING):
                raise HTTPException(
                    409,
                    {"error": f"project {handle.project.name!r} already has a running training job",
                     "job_id": active_id},
                )
            job = TrainingJob(
                job_id=uuid.uuid4().hex[:12],
                project=handle.project.name,
                total_epochs=config.epochs,
            )
            self._jobs[job.job_id] = job
            self._active[handle.project.name] = job.job_id
        thread = threading.Thread(target=self._run, args=(handle, config, job), daemon=True)
        thread.start()
        return job

    def _run(self, handle: ProjectHandle, config: TrainingConfig, job: TrainingJob) -> None:
        job.state = JOB_RUNNING
        try:
            with handle.lock:
                dataset = handle.project.dataset

            def on_epoch(record: EpochMetrics) -> None:
                with self._lock:
                    job.completed_epochs = record.epoch
                    job.metrics.append(record)
                if self.epoch_throttle_seconds > 0:
                    time.sleep(self.epoch_throttle_seconds)

            model = train(dataset, config, on_epoch=on_epoch)
            with handle.lock:
                handle.project.set_model(model)
                save_project(handle.project, handle.directory)
            job.state = JOB_SUCCEEDED
        except Exception as err:  # noqa: BLE001 - failures become the job's outcome
            job.error = str(err)
            job.state = JOB_FAILED


class CreateProjectRequest(BaseModel):
    name: str


class ContentRequest(BaseModel):
    content: str


class DatasetRequest(BaseModel):
    intents: str | None = None
    contexts: str | None = None
    questions: str | None = None


class RulesRequest(BaseModel):
    rules: list[dict]


class ConfigRequest(BaseModel):
    pipeline: dict | None = None
    augmentation: dict | None = None


class TrainRequest(BaseModel):
    epochs: int
    learning_rate: float = 0.1
    batch_size: int = 16
    l2_penalty: float = 1e-4
    seed: int = 0


class ChatRequest(BaseModel):
    question: str
    mode: str | None = None


class CompareRequest(BaseModel):
    question: str


def _project_info(project: Project) -> dict:
    return {
        "name": project.name,
        "intents": project.dataset.intent_names,
        "question_count": len(project.dataset.questions),
        "human_questions": sum(1 for q in project.dataset.questions if q.origin == "human"),
        "synthetic_questions": sum(1 for q in project.dataset.questions if q.origin == "synthetic"),
        "rule_count": len(project.ruleset),
        "model_trained": project.model is not None,
        "model_stale": project.model_stale,
        "chat_turns": project.chat_turns,
        "steps_completed": sorted(project.step_progress),
        "load_problems": project.load_problems,
        "read_only": project.read_only,
    }


def _steps_payload(project: Project) -> dict:
    steps = []
    for step in range(1, STEP_COUNT + 1):
        unlocked = step == 1 or (step - 1) in project.step_progress
        steps.append(
            {
                "step": step,
                "title": STEP_TITLES[step],
                "completed": step in project.step_progress,
                "unlocked": unlocked,
                "unsatisfied_gates": step_gate_problems(project, step) if unlocked else [],
            }
        )
    return {
        "completed": sorted(project.step_progress),
        "next_step": next_step(project),
        "steps": steps,
    }


def _dataset_summary(project: Project) -> dict:
    return {
        "intents": project.dataset.intent_names,
        "question_count": len(project.dataset.questions),
        "validation": validate(project.dataset).to_dict(),
    }


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="classbot", version="1.0")
    # the browser UI is served from a different port; this is an
    # unauthenticated classroom LAN tool, so all origins are allowed
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = ProjectRegistry(config.data_root)
    jobs = JobManager(epoch_throttle_seconds=config.epoch_throttle_seconds)
    translation_client = make_translation_client(
        config.translation_endpoint, timeout=config.request_timeout
    )
    generative_client = make_generative_client(
        config.generative_endpoint, timeout=config.request_timeout
    )
    app.state.registry = registry
    app.state.jobs = jobs

    def _save(handle: ProjectHandle) -> None:
        try:
            save_project(handle.project, handle.directory)
        except ProjectError as err:
            raise HTTPException(409, {"error": str(err)}) from err

    @app.post("/v1/projects", status_code=201)
    def create_project(request: CreateProjectRequest):
        handle = registry.create(request.name)
        return _project_info(handle.project)

    @app.get("/v1/projects")
    def list_projects():
        infos = []
        for name in registry.names():
            handle = registry.get(name)
            with handle.lock:
                infos.append(_project_info(handle.project))
        return {"projects": infos}

    @app.get("/v1/projects/{name}")
    def get_project(name: str):
        handle = registry.get(name)
        with handle.lock:
            return _project_info(handle.project)

    @app.delete("/v1/projects/{name}", status_code=204)
    def delete_project(name: str):
        handle = registry.get(name)
        with jobs._lock:
            active_id = jobs._active.get(name)
            if active_id and jobs._jobs[active_id].state in (JOB_QUEUED, JOB_RUNNING):
                raise HTTPException(409, {"error": "cannot delete while a training job is running"})
        registry.delete(name)

    @app.get("/v1/projects/{name}/dataset")
    def get_dataset(name: str):
        handle = registry.get(name)
        with handle.lock:
            return _dataset_summary(handle.project)

    @app.put("/v1/projects/{name}/dataset")
    def put_dataset(name: str, request: DatasetRequest):
        handle = registry.get(name)
        with handle.lock:
            project = handle.project
            intents_text = (
                request.intents if request.intents is not None else serialize_intents(project.dataset)
            )
            contexts_text = (
                request.contexts if request.contexts is not None else serialize_contexts(project.dataset)
            )
            questions_text = (
                request.questions
                if request.questions is not None
                else serialize_questions(project.dataset)
            )
            try:
                dataset = parse_dataset(intents_text, contexts_text, questions_text)
            except DatasetFormatError as err:
                raise HTTPException(400, {"error": "dataset rejected", "problems": err.problems})
            report = validate(dataset)
            if not report.ok:
                raise HTTPException(
                    400,
                    {"error": "dataset rejected",
                     "problems": [f"{i.location}: {i.message}" for i in report.errors]},
                )
            project.set_dataset(dataset)
            _save(handle)
            return _dataset_summary(project)

    @app.get("/v1/projects/{name}/dataset/{part}")
    def get_dataset_part(name: str, part: str):
        handle = registry.get(name)
        serializers = {
            "intents": serialize_intents,
            "contexts": serialize_contexts,
            "questions": serialize_questions,
        }
        if part not in serializers:
            raise HTTPException(404, {"error": f"unknown dataset part {part!r}"})
        with handle.lock:
            return {"content": serializers[part](handle.project.dataset)}

    @app.put("/v1/projects/{name}/dataset/{part}")
    def put_dataset_part(name: str, part: str, request: ContentRequest):
        if part not in ("intents", "contexts", "questions"):
            raise HTTPException(404, {"error": f"unknown dataset part {part!r}"})
        return put_dataset(name, DatasetRequest(**{part: request.content}))

    @app.get("/v1/projects/{name}/rules")
    def get_rules(name: str):
        handle = registry.get(name)
        with handle.lock:
            return {"rules": [rule.to_dict() for rule in handle.project.ruleset.rules]}

    @app.put("/v1/projects/{name}/rules")
    def put_rules(name: str, request: RulesRequest):
        handle = registry.get(name)
        with handle.lock:
            try:
                handle.project.ruleset = compile_rules(rules_from_dicts(request.rules))
            except PolicyRuleError as err:
                raise HTTPException(400, {"error": "rules rejected", "problems": err.problems})
            _save(handle)
            return {"rules": [rule.to_dict() for rule in handle.project.ruleset.rules]}

    @app.get("/v1/projects/{name}/config")
    def get_config(name: str):
        handle = registry.get(name)
        with handle.lock:
            return {
                "pipeline": handle.project.pipeline_config.to_dict(),
                "augmentation": handle.project.augmentation_config.to_dict(),
            }

    @app.put("/v1/projects/{name}/config")
    def put_config(name: str, request: ConfigRequest):
        handle = registry.get(name)
        with handle.lock:
            project = handle.project
            try:
                if request.pipeline is not None:
                    project.pipeline_config = pipeline_config_from_dict(request.pipeline)
                if request.augmentation is not None:
                    project.augmentation_config = AugmentationConfig(**request.augmentation)
            except (TypeError, ValueError) as err:
                raise HTTPException(400, {"error": f"config rejected: {err}"})
            _save(handle)
            return {
                "pipeline": project.pipeline_config.to_dict(),
                "augmentation": project.augmentation_config.to_dict(),
            }

    @app.post("/v1/projects/{name}/augment")
    def augment(name: str):
        handle = registry.get(name)
        with handle.lock:
            project = handle.project
            try:
                dataset, report = augment_dataset(
                    project.dataset, project.augmentation_config, translation_client
                )
            except AugmentationError as err:
                detail = {"error": str(err)}
                if err.partial_report is not None:
                    detail["partial_report"] = err.partial_report.to_dict()
                raise HTTPException(502, detail)
            project.set_dataset(dataset)
            _save(handle)
            return {
                "report": report.to_dict(),
                "question_count": len(project.dataset.questions),
                "validation": validate(project.dataset).to_dict(),
            }

    @app.post("/v1/projects/{name}/train", status_code=202)
    def start_training(name: str, request: TrainRequest):
        handle = registry.get(name)
        try:
            config = TrainingConfig(
                epochs=request.epochs,
                learning_rate=request.learning_rate,
                batch_size=request.batch_size,
                l2_penalty=request.l2_penalty,
                seed=request.seed,
            )
        except ValueError as err:
            raise HTTPException(400, {"error": str(err)})
        with handle.lock:
            if handle.project.read_only:
                raise HTTPException(409, {"error": "project was opened read-only"})
        job = jobs.start(handle, config)
        return {"job": job.to_dict()}

    @app.get("/v1/jobs/{job_id}")
    def get_job(job_id: str):
        return {"job": jobs.get(job_id).to_dict()}

    @app.post("/v1/projects/{name}/chat")
    def chat(name: str, request: ChatRequest):
        handle = registry.get(name)
        with handle.lock:
            project = handle.project
            if project.model is None:
                raise HTTPException(409, {"error": "no model trained yet"})
            model = project.model
            dataset = project.dataset
            ruleset = project.ruleset
            pipeline_config = project.pipeline_config
            stale = project.model_stale
        if request.mode is not None:
            try:
                pipeline_config = replace(pipeline_config, qa_mode=request.mode)
            except ValueError as err:
                raise HTTPException(400, {"error": str(err)})
        try:
            response = answer_question(
                request.question,
                ruleset,
                model,
                dataset,
                pipeline_config,
                generative_client=generative_client,
                stale=stale,
            )
        except PipelineError as err:
            status = 409 if "retrain" in str(err) else 502
            raise HTTPException(
                status, {"error": str(err), "trace": [r.to_dict() for r in err.trace]}
            )
        with handle.lock:
            handle.project.record_chat_turn()
            _save(handle)
        return response.to_dict()

    @app.post("/v1/projects/{name}/compare")
    def compare(name: str, request: CompareRequest):
        handle = registry.get(name)
        with handle.lock:
            project = handle.project
            if project.model is None:
                raise HTTPException(409, {"error": "no model trained yet"})
            model = project.model
            dataset = project.dataset
            extractive_config = project.pipeline_config.extractive_config
        if not request.question.strip():
            raise HTTPException(400, {"error": "question is empty"})
        if list(model.label_order) != dataset.intent_names:
            raise HTTPException(409, {"error": "model labels do not match intents; retrain required"})
        ranked = predict(model, request.question)
        top_name, top_probability = ranked[0]
        comparison = qa_compare(
            request.question, dataset.context_for(top_name), extractive_config, generative_client
        )
        payload = comparison.to_dict()
        payload["intent"] = {"name": top_name, "probability": top_probability}
        return payload

    @app.get("/v1/projects/{name}/steps")
    def get_steps(name: str):
        handle = registry.get(name)
        with handle.lock:
            return _steps_payload(handle.project)

    @app.post("/v1/projects/{name}/steps/{step}/complete")
    def post_complete_step(name: str, step: int):
        handle = registry.get(name)
        with handle.lock:
            try:
                complete_step(handle.project, step)
            except ProjectError as err:
                raise HTTPException(409, {"error": str(err)})
            _save(handle)
            return _steps_payload(handle.project)

    return app
