"""Question answering against a single intent's context.

Extractive mode scores every token-aligned context span by lexical
overlap with the question: each distinct question term contributes its
idf weight (idf computed over the context's sentences) when it occurs
within window_tokens of the span, minus a per-token length penalty.
Answers are therefore always contiguous substrings of the context.

Generative mode delegates to a text-to-text client with the prompt
"question: {q} context: {c}". The bundled stub answers with the context
sentence sharing the most terms with the question, so the whole
pipeline runs offline.
"""

from __future__ import annotations

import math
import re
from bisect import bisect_left
from dataclasses import dataclass
from typing import Protocol

from classbot.classifier import tokenize
from classbot.errors import ClassbotError

EXTRACTIVE = "extractive"
GENERATIVE = "generative"
POLICY = "policy"

_SENTENCE_SPLIT_RE = re.compile(r"[.!?]+")
_TOKEN_WITH_OFFSETS_RE = re.compile(r"[^\W_]+", re.UNICODE)


class QAEngineError(ClassbotError):
    def __init__(self, message: str, mode: str | None = None):
        super().__init__(message)
        self.mode = mode


@dataclass(frozen=True)
class Answer:
    text: str
    mode: str
    span: tuple[int, int] | None = None
    score: float = 0.0
    intent_name: str | None = None

    def __post_init__(self):
        if self.mode == EXTRACTIVE and self.span is None:
            raise ValueError("extractive answers must carry a character span")
        if self.mode != EXTRACTIVE and self.span is not None:
            raise ValueError(f"{self.mode} answers must not carry a span")

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "mode": self.mode,
            "span": list(self.span) if self.span is not None else None,
            "score": self.score,
            "intent_name": self.intent_name,
        }


@dataclass(frozen=True)
class ExtractiveConfig:
    max_span_tokens: int = 30
    window_tokens: int = 20
    length_penalty: float = 0.05

    def __post_init__(self):
        if self.max_span_tokens < 1:
            raise ValueError("max_span_tokens must be >= 1")
        if self.window_tokens < 0:
            raise ValueError("window_tokens must be non-negative")
        if self.length_penalty < 0:
            raise ValueError("length_penalty must be non-negative")

    def to_dict(self) -> dict:
        return {
            "max_span_tokens": self.max_span_tokens,
            "window_tokens": self.window_tokens,
            "length_penalty": self.length_penalty,
        }


def context_term_idf(question: str, context: str) -> dict[str, float]:
    """idf weights for the question's distinct terms, computed over the
    context's sentences with idf(t) = ln((1+S)/(1+df(t))) + 1."""
    sentences = [s for s in _SENTENCE_SPLIT_RE.split(context) if s.strip()]
    sentence_terms = [set(tokenize(s)) for s in sentences]
    total = len(sentences)
    weights: dict[str, float] = {}
    for term in sorted(set(tokenize(question))):
        df = sum(1 for terms in sentence_terms if term in terms)
        weights[term] = math.log((1.0 + total) / (1.0 + df)) + 1.0
    return weights


def extract_answer(question: str, context: str, config: ExtractiveConfig = ExtractiveConfig()) -> Answer:
    """Best-scoring token-aligned span; ties go to the earliest start,
    then the shortest span. The returned span indexes the original
    context string exactly."""
    if not question.strip():
        raise QAEngineError("question is empty", mode=EXTRACTIVE)
    if not context.strip():
        raise QAEngineError("context is empty", mode=EXTRACTIVE)
    matches = list(_TOKEN_WITH_OFFSETS_RE.finditer(context))
    if not matches:
        raise QAEngineError("context has no tokens", mode=EXTRACTIVE)
    context_tokens = [m.group(0).lower() for m in matches]
    total = len(context_tokens)

    weights = context_term_idf(question, context)
    positions: dict[str, list[int]] = {}
    for position, token in enumerate(context_tokens):
        positions.setdefault(token, []).append(position)
    terms = [t for t in sorted(weights) if t in positions]

    window = config.window_tokens
    best_score = -math.inf
    best = (0, 1)
    for start in range(total):
        for length in range(1, min(config.max_span_tokens, total - start) + 1):
            low = start - window
            high = start + length - 1 + window
            score = 0.0
            for term in terms:
                occurrences = positions[term]
                i = bisect_left(occurrences, low)
                if i < len(occurrences) and occurrences[i] <= high:
                    score += weights[term]
            score -= config.length_penalty * length
            if score > best_score:
                best_score = score
                best = (start, length)
    start, length = best
    char_start = matches[start].start()
    char_end = matches[start + length - 1].end()
    return Answer(
        text=context[char_start:char_end],
        mode=EXTRACTIVE,
        span=(char_start, char_end),
        score=best_score,
    )


class GenerativeClient(Protocol):
    def complete(self, prompt: str) -> str: ...


def build_prompt(question: str, context: str) -> str:
    return f"question: {question} context: {context}"


@dataclass(frozen=True)
class SentenceOverlapClient:
    """Bundled deterministic stub: answers with the context sentence that
    shares the most distinct terms with the question (earliest wins)."""

    def complete(self, prompt: str) -> str:
        if not prompt.strip():
            raise QAEngineError("empty prompt", mode=GENERATIVE)
        question, context = _split_prompt(prompt)
        sentences = [s.strip() for s in _SENTENCE_SPLIT_RE.split(context) if s.strip()]
        if not sentences:
            return context.strip()
        question_terms = set(tokenize(question))
        best_sentence = sentences[0]
        best_overlap = -1
        for sentence in sentences:
            overlap = len(question_terms & set(tokenize(sentence)))
            if overlap > best_overlap:
                best_overlap = overlap
                best_sentence = sentence
        return best_sentence


def _split_prompt(prompt: str) -> tuple[str, str]:
    body = prompt[len("question: "):] if prompt.startswith("question: ") else prompt
    separator = " context: "
    cut = body.find(separator)
    if cut < 0:
        return body, ""
    return body[:cut], body[cut + len(separator):]


class HttpGenerativeClient:
    """Text-to-text inference over HTTP: request {prompt, max_length},
    response {text}."""

    def __init__(self, url: str, timeout: float = 30.0, max_length: int = 64):
        self.url = url
        self.timeout = timeout
        self.max_length = max_length

    def complete(self, prompt: str) -> str:
        import httpx

        try:
            response = httpx.post(
                self.url, json={"prompt": prompt, "max_length": self.max_length}, timeout=self.timeout
            )
            response.raise_for_status()
            payload = response.json()
        except httpx.HTTPError as err:
            raise QAEngineError(f"generative client request failed: {err}", mode=GENERATIVE) from err
        text = payload.get("text")
        if not isinstance(text, str):
            raise QAEngineError("generative service returned no text", mode=GENERATIVE)
        return text


def make_generative_client(endpoint: str, timeout: float = 30.0, max_length: int = 64) -> GenerativeClient:
    """"stub" selects the bundled sentence-overlap client; anything else is a URL."""
    if endpoint == "stub":
        return SentenceOverlapClient()
    return HttpGenerativeClient(endpoint, timeout=timeout, max_length=max_length)


def generate_answer(question: str, context: str, client: GenerativeClient) -> Answer:
    if not question.strip():
        raise QAEngineError("question is empty", mode=GENERATIVE)
    if not context.strip():
        raise QAEngineError("context is empty", mode=GENERATIVE)
    prompt = build_prompt(question, context)
    try:
        raw = client.complete(prompt)
    except QAEngineError:
        raise
    except ClassbotError as err:
        raise QAEngineError(f"generative client failed: {err}", mode=GENERATIVE) from err
    text = raw.strip()
    if not text:
        raise QAEngineError("generative client returned empty output", mode=GENERATIVE)
    return Answer(text=text, mode=GENERATIVE, span=None, score=0.0)


@dataclass(frozen=True)
class Comparison:
    extractive: Answer | None
    generative: Answer | None
    extractive_error: str | None = None
    generative_error: str | None = None

    def to_dict(self) -> dict:
        return {
            "extractive": self.extractive.to_dict() if self.extractive else None,
            "generative": self.generative.to_dict() if self.generative else None,
            "errors": {
                key: value
                for key, value in (
                    ("extractive", self.extractive_error),
                    ("generative", self.generative_error),
                )
                if value
            },
        }


def compare(
    question: str,
    context: str,
    extractive_config: ExtractiveConfig,
    client: GenerativeClient,
) -> Comparison:
    """Run both engines on identical inputs; one side failing does not
    hide the other's answer."""
    extractive = generative = None
    extractive_error = generative_error = None
    try:
        extractive = extract_answer(question, context, extractive_config)
    except QAEngineError as err:
        extractive_error = str(err)
    try:
        generative = generate_answer(question, context, client)
    except QAEngineError as err:
        generative_error = str(err)
    return Comparison(
        extractive=extractive,
        generative=generative,
        extractive_error=extractive_error,
        generative_error=generative_error,
    )
