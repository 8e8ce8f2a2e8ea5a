"""Keyword policy rules: the pre-model stage.

Rules map keyword matches to prewritten responses. Matching is
token-level (the question is tokenized exactly like the classifier
tokenizes it), so keyword "art" never fires inside "partner". The first
rule in list order that matches wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from classbot.classifier import tokenize
from classbot.errors import ClassbotError

MATCH_ANY = "any"
MATCH_ALL = "all"


class PolicyRuleError(ClassbotError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class PolicyRule:
    id: str
    keywords: tuple[str, ...]
    response: str
    match_mode: str = MATCH_ANY

    def __post_init__(self):
        object.__setattr__(self, "keywords", tuple(self.keywords))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "keywords": list(self.keywords),
            "match_mode": self.match_mode,
            "response": self.response,
        }


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[PolicyRule, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    def __len__(self) -> int:
        return len(self.rules)


@dataclass(frozen=True)
class PolicyHit:
    rule_id: str
    response: str


def compile_rules(rules: Sequence[PolicyRule]) -> RuleSet:
    """Validate and normalize rules; keywords are lower-cased, order kept."""
    problems: list[str] = []
    seen_ids: set[str] = set()
    compiled: list[PolicyRule] = []
    for position, rule in enumerate(rules):
        loc = f"rule[{position}]"
        if not rule.id:
            problems.append(f"{loc}: empty rule id")
        elif rule.id in seen_ids:
            problems.append(f"{loc}: duplicate rule id {rule.id!r}")
        seen_ids.add(rule.id)
        if not rule.keywords:
            problems.append(f"{loc}: rule has no keywords")
        if not rule.response.strip():
            problems.append(f"{loc}: empty response")
        if rule.match_mode not in (MATCH_ANY, MATCH_ALL):
            problems.append(f"{loc}: unknown match_mode {rule.match_mode!r}")
        normalized: list[str] = []
        for keyword in rule.keywords:
            tokens = tokenize(keyword)
            if len(tokens) != 1:
                problems.append(
                    f"{loc}: keyword {keyword!r} is not a single token ({len(tokens)} after tokenization)"
                )
            else:
                normalized.append(tokens[0])
        compiled.append(
            PolicyRule(
                id=rule.id,
                keywords=tuple(normalized),
                response=rule.response,
                match_mode=rule.match_mode,
            )
        )
    if problems:
        raise PolicyRuleError(problems)
    return RuleSet(tuple(compiled))


def apply(ruleset: RuleSet, question_text: str) -> PolicyHit | None:
    """First rule in order whose keywords match the question's tokens."""
    tokens = set(tokenize(question_text))
    for rule in ruleset.rules:
        keywords = set(rule.keywords)
        if rule.match_mode == MATCH_ALL:
            matched = keywords <= tokens
        else:
            matched = bool(keywords & tokens)
        if matched:
            return PolicyHit(rule_id=rule.id, response=rule.response)
    return None


def rules_from_dicts(documents: Sequence[dict]) -> list[PolicyRule]:
    rules = []
    for position, doc in enumerate(documents):
        try:
            rules.append(
                PolicyRule(
                    id=str(doc["id"]),
                    keywords=tuple(str(k) for k in doc["keywords"]),
                    response=str(doc["response"]),
                    match_mode=str(doc.get("match_mode", MATCH_ANY)),
                )
            )
        except (KeyError, TypeError) as err:
            raise PolicyRuleError([f"rule[{position}]: malformed rule document ({err})"]) from err
    return rules
