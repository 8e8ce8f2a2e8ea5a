"""Trainable intent recognition.

The reference model is TF-IDF features into multinomial logistic
regression, minimized by minibatch gradient descent with a per-epoch
seeded shuffle. Everything is deterministic for a fixed seed: weights
start at zero and the objective is convex, so two runs with identical
inputs produce bit-identical models.

External classifiers (e.g. a transformer served elsewhere) plug in
through the ClassifierBackend protocol and must honor the same output
contract as predict(): ranked (label, probability) pairs summing to 1.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from classbot.dataset import Dataset, validate
from classbot.errors import ClassbotError

MODEL_FORMAT_VERSION = 1

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class TrainingError(ClassbotError):
    pass


class ModelFormatError(ClassbotError):
    pass


class BackendProtocolError(ClassbotError):
    """An external classifier backend broke the output contract."""


def tokenize(text: str) -> list[str]:
    """Lower-case and split on non-alphanumeric runs; drops empty tokens."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Vocabulary:
    """Token universe of a training set.

    index maps token -> dense column 0..V-1 in first-occurrence order;
    document_frequency counts the training questions containing each
    kept token.
    """

    index: dict[str, int]
    document_frequency: dict[str, int]
    document_count: int
    min_document_frequency: int = 1

    @property
    def size(self) -> int:
        return len(self.index)

    def tokens_in_order(self) -> list[str]:
        return sorted(self.index, key=self.index.get)

    def idf_vector(self) -> np.ndarray:
        """idf(t) = ln((1 + N) / (1 + df(t))) + 1 per column."""
        df = np.empty(self.size, dtype=np.float64)
        for token, column in self.index.items():
            df[column] = self.document_frequency[token]
        return np.log((1.0 + self.document_count) / (1.0 + df)) + 1.0


def build_vocabulary(texts: Sequence[str], min_document_frequency: int = 1) -> Vocabulary:
    if not texts:
        raise TrainingError("cannot build a vocabulary from an empty training set")
    document_frequency: dict[str, int] = {}
    first_seen: list[str] = []
    seen: set[str] = set()
    for text in texts:
        tokens = tokenize(text)
        for token in tokens:
            if token not in seen:
                seen.add(token)
                first_seen.append(token)
        for token in set(tokens):
            document_frequency[token] = document_frequency.get(token, 0) + 1
    kept = [t for t in first_seen if document_frequency[t] >= min_document_frequency]
    if not kept:
        raise TrainingError(
            f"vocabulary is empty after min_document_frequency={min_document_frequency} thresholding"
        )
    index = {token: column for column, token in enumerate(kept)}
    return Vocabulary(
        index=index,
        document_frequency={t: document_frequency[t] for t in kept},
        document_count=len(texts),
        min_document_frequency=min_document_frequency,
    )


def featurize(tokens: Sequence[str], vocabulary: Vocabulary, idf: np.ndarray | None = None) -> np.ndarray:
    """tf-idf vector, L2-normalized when nonzero; OOV tokens ignored."""
    if idf is None:
        idf = vocabulary.idf_vector()
    x = np.zeros(vocabulary.size, dtype=np.float64)
    for token in tokens:
        column = vocabulary.index.get(token)
        if column is not None:
            x[column] += 1.0
    x *= idf
    norm = np.linalg.norm(x)
    if norm > 0.0:
        x /= norm
    return x


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int
    learning_rate: float = 0.1
    batch_size: int = 16
    l2_penalty: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size <= 0:
            raise ValueError("batch_size must be positive")
        if self.l2_penalty < 0:
            raise ValueError("l2_penalty must be non-negative")

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "l2_penalty": self.l2_penalty,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    loss: float
    accuracy: float

    def to_dict(self) -> dict:
        return {"epoch": self.epoch, "loss": self.loss, "accuracy": self.accuracy}


@dataclass(frozen=True, eq=False)
class IntentModel:
    vocabulary: Vocabulary
    idf: np.ndarray
    weights: np.ndarray
    bias: np.ndarray
    label_order: tuple[str, ...]
    config: TrainingConfig
    metrics: tuple[EpochMetrics, ...] = ()

    def __post_init__(self):
        k, v = self.weights.shape
        if v != self.vocabulary.size or len(self.idf) != v:
            raise ModelFormatError("weight matrix width does not match the vocabulary")
        if k != len(self.label_order) or len(self.bias) != k:
            raise ModelFormatError("weight matrix height does not match the label order")


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _loss(weights: np.ndarray, bias: np.ndarray, x: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean cross-entropy plus (l2/2)·||W||²; bias unregularized."""
    z = x @ weights.T + bias
    zmax = z.max(axis=1)
    logsumexp = zmax + np.log(np.exp(z - zmax[:, None]).sum(axis=1))
    ce = float(np.mean(logsumexp - z[np.arange(len(y)), y]))
    return ce + 0.5 * l2 * float(np.sum(weights * weights))


def _gradients(
    weights: np.ndarray, bias: np.ndarray, x: np.ndarray, y: np.ndarray, l2: float
) -> tuple[np.ndarray, np.ndarray]:
    probabilities = _softmax(x @ weights.T + bias)
    probabilities[np.arange(len(y)), y] -= 1.0
    probabilities /= len(y)
    grad_w = probabilities.T @ x + l2 * weights
    grad_b = probabilities.sum(axis=0)
    return grad_w, grad_b


def _design_matrix(
    dataset: Dataset, min_document_frequency: int
) -> tuple[Vocabulary, np.ndarray, np.ndarray, np.ndarray, list[str]]:
    labels = dataset.intent_names
    vocabulary = build_vocabulary([q.text for q in dataset.questions], min_document_frequency)
    idf = vocabulary.idf_vector()
    x = np.stack([featurize(tokenize(q.text), vocabulary, idf) for q in dataset.questions])
    label_index = {name: i for i, name in enumerate(labels)}
    y = np.array([label_index[q.intent_name] for q in dataset.questions], dtype=np.intp)
    return vocabulary, idf, x, y, labels


def train(
    train_set: Dataset,
    config: TrainingConfig,
    min_document_frequency: int = 1,
    on_epoch: Callable[[EpochMetrics], None] | None = None,
) -> IntentModel:
    """Fit the multinomial model; deterministic for fixed inputs and seed."""
    # provenance-category issues are tolerated: a stratified training split
    # legitimately separates synthetic questions from their parents
    blocking = [i for i in validate(train_set).errors if i.category != "provenance"]
    if blocking:
        raise TrainingError(
            "training set fails validation: " + "; ".join(i.message for i in blocking)
        )
    if len(train_set.intents) < 2:
        raise TrainingError("training requires at least 2 intents")
    for intent in train_set.intents:
        if not any(q.intent_name == intent.name for q in train_set.questions):
            raise TrainingError(f"intent {intent.name!r} has no questions")

    vocabulary, idf, x, y, labels = _design_matrix(train_set, min_document_frequency)
    n = len(y)
    k = len(labels)
    weights = np.zeros((k, vocabulary.size), dtype=np.float64)
    bias = np.zeros(k, dtype=np.float64)
    rng = np.random.default_rng(config.seed)
    metrics: list[EpochMetrics] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            grad_w, grad_b = _gradients(weights, bias, x[batch], y[batch], config.l2_penalty)
            weights -= config.learning_rate * grad_w
            bias -= config.learning_rate * grad_b
        loss = _loss(weights, bias, x, y, config.l2_penalty)
        predictions = np.argmax(x @ weights.T + bias, axis=1)
        accuracy = float(np.mean(predictions == y))
        record = EpochMetrics(epoch=epoch, loss=loss, accuracy=accuracy)
        metrics.append(record)
        if on_epoch is not None:
            on_epoch(record)
    return IntentModel(
        vocabulary=vocabulary,
        idf=idf,
        weights=weights,
        bias=bias,
        label_order=tuple(labels),
        config=config,
        metrics=tuple(metrics),
    )


def predict(model: IntentModel, question_text: str) -> list[tuple[str, float]]:
    """Ranked (intent, probability); ties broken by label order."""
    x = featurize(tokenize(question_text), model.vocabulary, model.idf)
    p = _softmax(model.weights @ x + model.bias)
    order = sorted(range(len(p)), key=lambda i: (-p[i], i))
    return [(model.label_order[i], float(p[i])) for i in order]


@dataclass(frozen=True)
class EvaluationResult:
    accuracy: float
    confusion: np.ndarray
    labels: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "labels": list(self.labels),
            "confusion": self.confusion.tolist(),
        }


def evaluate(model: IntentModel, dataset: Dataset) -> EvaluationResult:
    if not dataset.questions:
        raise TrainingError("cannot evaluate on a dataset with no questions")
    label_index = {name: i for i, name in enumerate(model.label_order)}
    for question in dataset.questions:
        if question.intent_name not in label_index:
            raise TrainingError(f"dataset label {question.intent_name!r} unknown to the model")
    k = len(model.label_order)
    confusion = np.zeros((k, k), dtype=np.int64)
    for question in dataset.questions:
        predicted = predict(model, question.text)[0][0]
        confusion[label_index[question.intent_name], label_index[predicted]] += 1
    accuracy = float(np.trace(confusion) / confusion.sum())
    return EvaluationResult(accuracy=accuracy, confusion=confusion, labels=model.label_order)


class GradientCheckError(ClassbotError):
    pass


def gradient_check(
    train_set: Dataset,
    config: TrainingConfig,
    tolerance: float = 1e-4,
    points: int = 3,
    max_coordinates: int = 120,
    step: float = 1e-5,
) -> float:
    """Compare the analytic gradient with central finite differences.

    Evaluates the full objective at random parameter points, samples
    coordinates, and returns the maximum relative error seen. Raises
    only if the error exceeds tolerance, which indicates a broken
    gradient implementation.
    """
    if len(train_set.questions) > 50:
        raise TrainingError("gradient_check expects a small training set (<= 50 questions)")
    _, _, x, y, labels = _design_matrix(train_set, min_document_frequency=1)
    k, v = len(labels), x.shape[1]
    rng = np.random.default_rng(config.seed)
    worst = 0.0
    for _ in range(points):
        weights = rng.normal(0.0, 0.5, size=(k, v))
        bias = rng.normal(0.0, 0.5, size=k)
        grad_w, grad_b = _gradients(weights, bias, x, y, config.l2_penalty)
        flat_analytic = np.concatenate([grad_w.ravel(), grad_b])
        total = flat_analytic.size
        if total <= max_coordinates:
            coordinates = np.arange(total)
        else:
            coordinates = rng.choice(total, size=max_coordinates, replace=False)
        for coordinate in coordinates:
            theta_plus = np.concatenate([weights.ravel(), bias])
            theta_minus = theta_plus.copy()
            theta_plus[coordinate] += step
            theta_minus[coordinate] -= step
            loss_plus = _loss(
                theta_plus[: k * v].reshape(k, v), theta_plus[k * v :], x, y, config.l2_penalty
            )
            loss_minus = _loss(
                theta_minus[: k * v].reshape(k, v), theta_minus[k * v :], x, y, config.l2_penalty
            )
            numeric = (loss_plus - loss_minus) / (2.0 * step)
            analytic = flat_analytic[coordinate]
            error = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-3)
            worst = max(worst, error)
    if worst > tolerance:
        raise GradientCheckError(f"gradient mismatch: max relative error {worst:.3e} > {tolerance:g}")
    return worst


def serialize_model(model: IntentModel) -> bytes:
    tokens = model.vocabulary.tokens_in_order()
    document = {
        "format_version": MODEL_FORMAT_VERSION,
        "vocabulary": {
            "tokens": tokens,
            "document_frequency": [model.vocabulary.document_frequency[t] for t in tokens],
            "document_count": model.vocabulary.document_count,
            "min_document_frequency": model.vocabulary.min_document_frequency,
        },
        "idf": model.idf.tolist(),
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "label_order": list(model.label_order),
        "config": model.config.to_dict(),
        "metrics": [m.to_dict() for m in model.metrics],
    }
    return json.dumps(document, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def deserialize_model(payload: bytes) -> IntentModel:
    try:
        document = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise ModelFormatError(f"model artifact is not valid JSON: {err}") from err
    version = document.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format version {version!r}; this build reads version {MODEL_FORMAT_VERSION}"
        )
    try:
        vocab_doc = document["vocabulary"]
        tokens = list(vocab_doc["tokens"])
        df_values = list(vocab_doc["document_frequency"])
        if len(df_values) != len(tokens):
            raise ModelFormatError("document_frequency length does not match tokens")
        vocabulary = Vocabulary(
            index={token: i for i, token in enumerate(tokens)},
            document_frequency=dict(zip(tokens, df_values)),
            document_count=int(vocab_doc["document_count"]),
            min_document_frequency=int(vocab_doc["min_document_frequency"]),
        )
        idf = np.asarray(document["idf"], dtype=np.float64)
        weights = np.asarray(document["weights"], dtype=np.float64)
        bias = np.asarray(document["bias"], dtype=np.float64)
        label_order = tuple(document["label_order"])
        config = TrainingConfig(**document["config"])
        metrics = tuple(EpochMetrics(**m) for m in document["metrics"])
    except (KeyError, TypeError, ValueError) as err:
        raise ModelFormatError(f"model artifact is malformed: {err}") from err
    if weights.ndim != 2:
        raise ModelFormatError("weights must be a 2-d matrix")
    return IntentModel(
        vocabulary=vocabulary,
        idf=idf,
        weights=weights,
        bias=bias,
        label_order=label_order,
        config=config,
        metrics=metrics,
    )


class ClassifierBackend(Protocol):
    """Anything that classifies a question over a fixed label set."""

    @property
    def labels(self) -> tuple[str, ...]: ...

    def classify(self, question_text: str) -> list[tuple[str, float]]: ...


@dataclass(frozen=True, eq=False)
class ModelBackend:
    """The in-process reference model exposed through the backend contract."""

    model: IntentModel

    @property
    def labels(self) -> tuple[str, ...]:
        return self.model.label_order

    def classify(self, question_text: str) -> list[tuple[str, float]]:
        return predict(self.model, question_text)


@dataclass(frozen=True)
class FixedDistributionBackend:
    """Test/stub backend echoing one fixed distribution for every input."""

    label_names: tuple[str, ...]
    probabilities: tuple[float, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return self.label_names

    def classify(self, question_text: str) -> list[tuple[str, float]]:
        ranked = sorted(
            range(len(self.label_names)), key=lambda i: (-self.probabilities[i], i)
        )
        return [(self.label_names[i], float(self.probabilities[i])) for i in ranked]


class HttpClassifierBackend:
    """External classifier over HTTP: request {text}, response
    {labels: [...], probabilities: [...]}."""

    def __init__(self, url: str, labels: Sequence[str], timeout: float = 10.0):
        self.url = url
        self._labels = tuple(labels)
        self.timeout = timeout

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    def classify(self, question_text: str) -> list[tuple[str, float]]:
        import httpx

        try:
            response = httpx.post(self.url, json={"text": question_text}, timeout=self.timeout)
            response.raise_for_status()
            payload = response.json()
        except httpx.HTTPError as err:
            raise BackendProtocolError(f"classifier backend request failed: {err}") from err
        labels = payload.get("labels")
        probabilities = payload.get("probabilities")
        if not isinstance(labels, list) or not isinstance(probabilities, list):
            raise BackendProtocolError("backend response must carry 'labels' and 'probabilities' lists")
        if len(labels) != len(probabilities):
            raise BackendProtocolError("backend labels and probabilities differ in length")
        if set(labels) != set(self._labels):
            raise BackendProtocolError(
                f"backend label set {sorted(labels)} does not match the project intents {sorted(self._labels)}"
            )
        total = float(sum(probabilities))
        if any(p < 0 for p in probabilities) or abs(total - 1.0) > 1e-6:
            raise BackendProtocolError(f"backend probabilities are not normalized (sum={total!r})")
        index = {name: i for i, name in enumerate(self._labels)}
        pairs = list(zip(labels, (float(p) for p in probabilities)))
        pairs.sort(key=lambda item: (-item[1], index[item[0]]))
        return pairs


def as_backend(classifier: IntentModel | ClassifierBackend) -> ClassifierBackend:
    if isinstance(classifier, IntentModel):
        return ModelBackend(classifier)
    return classifier
