"""Chat-turn orchestration.

A question flows through the fixed stage order: keyword policy filter,
intent recognition, question answering. A policy hit short-circuits the
learned stages entirely; a top intent below the confidence threshold
returns the configured fallback instead of an answer. Every response
carries a per-stage trace so students can see exactly which stage
produced it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from classbot.classifier import ClassifierBackend, IntentModel, as_backend
from classbot.dataset import Dataset
from classbot.errors import ClassbotError
from classbot.policy import RuleSet, apply
from classbot.qa import (
    EXTRACTIVE,
    GENERATIVE,
    POLICY,
    Answer,
    ExtractiveConfig,
    GenerativeClient,
    QAEngineError,
    extract_answer,
    generate_answer,
)

STAGE_FILTER = "filter"
STAGE_INTENT = "intent"
STAGE_QA = "qa"

SOURCE_POLICY = "policy"
SOURCE_MODEL = "model"
SOURCE_FALLBACK = "fallback"

QA_MODES = (EXTRACTIVE, GENERATIVE)


class PipelineError(ClassbotError):
    def __init__(self, message: str, trace: tuple["StageRecord", ...] = ()):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class PipelineConfig:
    qa_mode: str = EXTRACTIVE
    confidence_threshold: float = 0.0
    fallback_response: str = ""
    extractive_config: ExtractiveConfig = field(default_factory=ExtractiveConfig)

    def __post_init__(self):
        if self.qa_mode not in QA_MODES:
            raise ValueError(f"qa_mode must be one of {QA_MODES}, got {self.qa_mode!r}")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must be in [0, 1]")
        if self.confidence_threshold > 0.0 and not self.fallback_response.strip():
            raise ValueError("fallback_response must be non-empty when the threshold is enabled")

    def to_dict(self) -> dict:
        return {
            "qa_mode": self.qa_mode,
            "confidence_threshold": self.confidence_threshold,
            "fallback_response": self.fallback_response,
            "extractive_config": self.extractive_config.to_dict(),
        }


@dataclass(frozen=True)
class StageRecord:
    stage: str
    inputs: str
    outputs: str
    elapsed_ms: float

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "elapsed_ms": self.elapsed_ms,
        }


@dataclass(frozen=True)
class ChatResponse:
    answer: Answer
    source: str
    intent: tuple[str, float] | None
    trace: tuple[StageRecord, ...]
    stale: bool = False

    def to_dict(self) -> dict:
        return {
            "answer": self.answer.to_dict(),
            "source": self.source,
            "intent": (
                {"name": self.intent[0], "probability": self.intent[1]} if self.intent else None
            ),
            "stale": self.stale,
            "trace": [record.to_dict() for record in self.trace],
        }


def _timed(stage: str, inputs: str, outputs: str, started: float) -> StageRecord:
    return StageRecord(
        stage=stage,
        inputs=inputs,
        outputs=outputs,
        elapsed_ms=(time.perf_counter() - started) * 1000.0,
    )


def answer_question(
    question_text: str,
    ruleset: RuleSet,
    classifier: IntentModel | ClassifierBackend,
    dataset: Dataset,
    config: PipelineConfig,
    generative_client: GenerativeClient | None = None,
    stale: bool = False,
) -> ChatResponse:
    """Run one chat turn through filter -> intent -> QA.

    The context handed to QA is looked up from the dataset at answer
    time, so context edits take effect without retraining.
    """
    if not question_text.strip():
        raise PipelineError("question is empty")
    backend = as_backend(classifier)
    if list(backend.labels) != dataset.intent_names:
        raise PipelineError(
            f"classifier labels {list(backend.labels)} do not match dataset intents "
            f"{dataset.intent_names}; retrain required"
        )

    trace: list[StageRecord] = []
    started = time.perf_counter()
    hit = apply(ruleset, question_text)
    trace.append(
        _timed(
            STAGE_FILTER,
            question_text,
            f"hit rule {hit.rule_id!r}" if hit else "no rule matched",
            started,
        )
    )
    if hit is not None:
        answer = Answer(text=hit.response, mode=POLICY, span=None, score=1.0, intent_name=None)
        return ChatResponse(
            answer=answer, source=SOURCE_POLICY, intent=None, trace=tuple(trace), stale=stale
        )

    started = time.perf_counter()
    ranked = backend.classify(question_text)
    top_name, top_probability = ranked[0]
    trace.append(
        _timed(
            STAGE_INTENT,
            question_text,
            f"{top_name} (p={top_probability:.4f})",
            started,
        )
    )
    if config.confidence_threshold > 0.0 and top_probability < config.confidence_threshold:
        answer = Answer(
            text=config.fallback_response, mode=POLICY, span=None, score=0.0, intent_name=None
        )
        return ChatResponse(
            answer=answer,
            source=SOURCE_FALLBACK,
            intent=(top_name, top_probability),
            trace=tuple(trace),
            stale=stale,
        )

    context = dataset.context_for(top_name)
    started = time.perf_counter()
    try:
        if config.qa_mode == EXTRACTIVE:
            answer = extract_answer(question_text, context, config.extractive_config)
        else:
            if generative_client is None:
                raise PipelineError("generative mode requires a generative client", tuple(trace))
            answer = generate_answer(question_text, context, generative_client)
    except QAEngineError as err:
        raise PipelineError(f"qa stage failed ({err.mode}): {err}", tuple(trace)) from err
    answer = replace(answer, intent_name=top_name)
    trace.append(_timed(STAGE_QA, question_text, answer.text, started))
    return ChatResponse(
        answer=answer,
        source=SOURCE_MODEL,
        intent=(top_name, top_probability),
        trace=tuple(trace),
        stale=stale,
    )
