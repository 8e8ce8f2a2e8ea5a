"""Backtranslation augmentation.

Every human-origin question is round-tripped through a pivot language
(question -> pivot -> question) to produce a label-preserving
paraphrase. Translation itself is pluggable: the bundled dictionary
stub keeps the whole pipeline deterministic and offline, while
HttpTranslationClient talks to a real translation service with the wire
shape {text, source, target} -> {text}.

Synthetic questions are never re-augmented, so repeated runs cannot
drift away from the human-written inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from classbot.dataset import (
    HUMAN,
    SYNTHETIC,
    Dataset,
    LabeledQuestion,
    normalize_question_text,
    validate,
)
from classbot.errors import ClassbotError


class AugmentationError(ClassbotError):
    def __init__(self, message: str, partial_report: "AugmentationReport | None" = None):
        super().__init__(message)
        self.partial_report = partial_report


class TranslationClientError(ClassbotError):
    pass


@dataclass(frozen=True)
class AugmentationConfig:
    pivot_language: str = "fr"
    rounds_per_question: int = 1
    max_synthetic_per_question: int = 3
    dedup: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.rounds_per_question < 1:
            raise ValueError("rounds_per_question must be positive")
        if self.max_synthetic_per_question < 1:
            raise ValueError("max_synthetic_per_question must be positive")
        if self.rounds_per_question > self.max_synthetic_per_question:
            raise ValueError("rounds_per_question must not exceed max_synthetic_per_question")

    def to_dict(self) -> dict:
        return {
            "pivot_language": self.pivot_language,
            "rounds_per_question": self.rounds_per_question,
            "max_synthetic_per_question": self.max_synthetic_per_question,
            "dedup": self.dedup,
            "seed": self.seed,
        }


class TranslationClient(Protocol):
    def supported_pairs(self) -> set[tuple[str, str]] | None:
        """Language pairs this client can translate; None means unrestricted."""

    def translate(self, text: str, source_language: str, target_language: str) -> str: ...


@dataclass(frozen=True)
class IdentityTranslationClient:
    """Returns its input untouched; the degenerate stub used to test
    dedup behavior."""

    languages: tuple[str, ...] = ("en", "fr", "de", "es")

    def supported_pairs(self) -> set[tuple[str, str]]:
        return {(a, b) for a in self.languages for b in self.languages if a != b}

    def translate(self, text: str, source_language: str, target_language: str) -> str:
        if not text.strip():
            raise TranslationClientError("cannot translate empty text")
        return text


# Word-level substitution tables for the bundled stub. The en->fr hop
# maps selected English words to pivot tokens; the fr->en hop maps them
# back to a synonym, so the round trip paraphrases: "what causes rain"
# -> "what makes rain". Words absent from the tables pass through.
EN_TO_PIVOT: dict[str, str] = {
    "causes": "provoque",
    "cause": "provoquer",
    "makes": "rend",
    "make": "rendre",
    "happens": "arrive",
    "happen": "arriver",
    "large": "grand",
    "largest": "grandest",
    "big": "gros",
    "small": "petit",
    "smallest": "petitest",
    "quickly": "rapidement",
    "fast": "vite",
    "slowly": "lentement",
    "breaks": "casse",
    "break": "casser",
    "broken": "casse2",
    "found": "trouve",
    "find": "trouver",
    "mostly": "surtout",
    "mainly": "principalement",
    "shapes": "faconne",
    "shape": "faconner",
    "forms": "forme",
    "form": "former",
    "moves": "bouge",
    "move": "bouger",
    "changes": "change",
    "change": "changer",
    "helps": "aide",
    "help": "aider",
    "protect": "proteger",
    "protects": "protege",
    "important": "important",
    "different": "different",
    "begins": "commence",
    "begin": "commencer",
    "stored": "stocke",
    "store": "stocker",
    "covers": "couvre",
    "wears": "use",
    "carried": "porte",
    "carries": "portes",
    "carry": "porter",
    "people": "gens",
    "effects": "effets",
    "effect": "effet",
    "damage": "degats",
    "dangerous": "dangereux",
    "amount": "quantite",
    "mountains": "montagnes",
    "reduce": "reduire",
    "kinds": "sortes",
    "kind": "sorte",
    "live": "vivre",
    "formed": "forme2",
    "made": "fait",
    "located": "situe",
    "warning": "alerte",
    "needed": "necessaire",
    "need": "besoin",
}

PIVOT_TO_EN: dict[str, str] = {
    "provoque": "makes",
    "provoquer": "make",
    "rend": "creates",
    "rendre": "create",
    "arrive": "occurs",
    "arriver": "occur",
    "grand": "big",
    "grandest": "biggest",
    "gros": "large",
    "petit": "little",
    "petitest": "littlest",
    "rapidement": "fast",
    "vite": "quickly",
    "lentement": "gradually",
    "casse": "fractures",
    "casser": "fracture",
    "casse2": "fractured",
    "trouve": "located",
    "trouver": "locate",
    "surtout": "mainly",
    "principalement": "mostly",
    "faconne": "sculpts",
    "faconner": "sculpt",
    "forme": "creates",
    "former": "create",
    "bouge": "shifts",
    "bouger": "shift",
    "change": "alters",
    "changer": "alter",
    "aide": "aids",
    "aider": "aid",
    "proteger": "defend",
    "protege": "defends",
    "important": "significant",
    "different": "distinct",
    "commence": "starts",
    "commencer": "start",
    "stocke": "kept",
    "stocker": "keep",
    "couvre": "blankets",
    "use": "erodes",
    "porte": "transported",
    "portes": "transports",
    "porter": "transport",
    "gens": "humans",
    "effets": "impacts",
    "effet": "impact",
    "degats": "destruction",
    "dangereux": "hazardous",
    "quantite": "portion",
    "montagnes": "peaks",
    "reduire": "lessen",
    "sortes": "types",
    "sorte": "type",
    "vivre": "dwell",
    "forme2": "created",
    "fait": "built",
    "situe": "positioned",
    "alerte": "alarm",
    "necessaire": "required",
    "besoin": "requirement",
}

_EDGE_PUNCTUATION = ".,;:!?\"'()[]"


def _map_word(word: str, table: dict[str, str]) -> str:
    head_len = len(word) - len(word.lstrip(_EDGE_PUNCTUATION))
    tail_len = len(word.rstrip(_EDGE_PUNCTUATION))
    head, core, tail = word[:head_len], word[head_len:tail_len], word[tail_len:]
    if not core:
        return word
    replacement = table.get(core.lower())
    if replacement is None:
        return word
    if core[0].isupper():
        replacement = replacement[0].upper() + replacement[1:]
    return head + replacement + tail


@dataclass(frozen=True)
class DictionarySubstitutionClient:
    """The bundled deterministic stub: word-level table lookups, en<->pivot."""

    pivot_language: str = "fr"
    forward_table: dict[str, str] = field(default_factory=lambda: dict(EN_TO_PIVOT))
    back_table: dict[str, str] = field(default_factory=lambda: dict(PIVOT_TO_EN))

    def supported_pairs(self) -> set[tuple[str, str]]:
        return {("en", self.pivot_language), (self.pivot_language, "en")}

    def translate(self, text: str, source_language: str, target_language: str) -> str:
        if not text.strip():
            raise TranslationClientError("cannot translate empty text")
        pair = (source_language, target_language)
        if pair not in self.supported_pairs():
            raise TranslationClientError(f"unsupported language pair {source_language}->{target_language}")
        table = self.forward_table if pair == ("en", self.pivot_language) else self.back_table
        return " ".join(_map_word(word, table) for word in text.split())


class HttpTranslationClient:
    """Translation over HTTP: request {text, source, target}, response {text}."""

    def __init__(self, url: str, timeout: float = 10.0):
        self.url = url
        self.timeout = timeout

    def supported_pairs(self) -> None:
        return None

    def translate(self, text: str, source_language: str, target_language: str) -> str:
        import httpx

        if not text.strip():
            raise TranslationClientError("cannot translate empty text")
        try:
            response = httpx.post(
                self.url,
                json={"text": text, "source": source_language, "target": target_language},
                timeout=self.timeout,
            )
            response.raise_for_status()
            payload = response.json()
        except httpx.HTTPError as err:
            raise TranslationClientError(f"translation request failed: {err}") from err
        translated = payload.get("text")
        if not isinstance(translated, str) or not translated.strip():
            raise TranslationClientError("translation service returned no text")
        return translated


def make_translation_client(endpoint: str, timeout: float = 10.0) -> TranslationClient:
    """"stub" selects the bundled dictionary client; anything else is a URL."""
    if endpoint == "stub":
        return DictionarySubstitutionClient()
    if endpoint == "identity":
        return IdentityTranslationClient()
    return HttpTranslationClient(endpoint, timeout=timeout)


def backtranslate(
    question_text: str, client: TranslationClient, pivot: str = "fr", source: str = "en"
) -> str:
    """Round-trip one question through the pivot language, whitespace-normalized."""
    if not question_text.strip():
        raise ValueError("question text must be non-empty")
    pairs = client.supported_pairs()
    if pairs is not None:
        if (source, pivot) not in pairs or (pivot, source) not in pairs:
            raise AugmentationError(f"client does not support {source}<->{pivot} translation")
    try:
        pivoted = client.translate(question_text, source, pivot)
        restored = client.translate(pivoted, pivot, source)
    except TranslationClientError as err:
        raise AugmentationError(f"backtranslation failed for {question_text!r}: {err}") from err
    return " ".join(restored.split())


@dataclass
class IntentAugmentation:
    added: int = 0
    dropped_duplicates: int = 0
    dropped_cap: int = 0

    def to_dict(self) -> dict:
        return {
            "added": self.added,
            "dropped_duplicates": self.dropped_duplicates,
            "dropped_cap": self.dropped_cap,
        }


@dataclass
class AugmentationReport:
    per_intent: dict[str, IntentAugmentation] = field(default_factory=dict)

    def for_intent(self, name: str) -> IntentAugmentation:
        return self.per_intent.setdefault(name, IntentAugmentation())

    @property
    def total_added(self) -> int:
        return sum(c.added for c in self.per_intent.values())

    @property
    def total_dropped(self) -> int:
        return sum(c.dropped_duplicates + c.dropped_cap for c in self.per_intent.values())

    def to_dict(self) -> dict:
        return {
            "total_added": self.total_added,
            "total_dropped": self.total_dropped,
            "per_intent": {name: c.to_dict() for name, c in self.per_intent.items()},
        }


def augment_dataset(
    dataset: Dataset, config: AugmentationConfig, client: TranslationClient
) -> tuple[Dataset, AugmentationReport]:
    """Append up to rounds_per_question paraphrases per human question.

    Candidates matching any existing question text (case-insensitive,
    whitespace-normalized, terminal punctuation ignored) are dropped when
    dedup is on. Original questions are returned untouched, in order,
    ahead of the new synthetic rows.
    """
    report_in = validate(dataset)
    if not report_in.ok:
        raise AugmentationError(
            "dataset fails validation: " + "; ".join(i.message for i in report_in.errors)
        )
    report = AugmentationReport()
    seen_texts = {normalize_question_text(q.text) for q in dataset.questions}
    children = {q.id: 0 for q in dataset.questions}
    for question in dataset.questions:
        if question.origin == SYNTHETIC and question.parent_id in children:
            children[question.parent_id] += 1

    new_questions: list[LabeledQuestion] = []
    for question in dataset.questions:
        if question.origin != HUMAN:
            continue
        counts = report.for_intent(question.intent_name)
        for _ in range(config.rounds_per_question):
            if children[question.id] >= config.max_synthetic_per_question:
                counts.dropped_cap += 1
                continue
            try:
                candidate = backtranslate(question.text, client, config.pivot_language)
            except AugmentationError as err:
                raise AugmentationError(str(err), partial_report=report) from err
            if config.dedup and normalize_question_text(candidate) in seen_texts:
                counts.dropped_duplicates += 1
                continue
            children[question.id] += 1
            child = LabeledQuestion(
                id=f"{question.id}.s{children[question.id]}",
                text=candidate,
                intent_name=question.intent_name,
                origin=SYNTHETIC,
                parent_id=question.id,
            )
            new_questions.append(child)
            counts.added += 1
            seen_texts.add(normalize_question_text(candidate))
    augmented = Dataset(dataset.intents, dataset.questions + tuple(new_questions))
    return augmented, report
