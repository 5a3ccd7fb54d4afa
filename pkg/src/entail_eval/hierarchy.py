"""Bidirectional entailment tests and placement in the answer hierarchy."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from entail_eval import prompts
from entail_eval.errors import ParseFailure
from entail_eval.gateway import ChatRequest, Gateway
from entail_eval.model import (
    BackendConfig,
    DirectionalEntailment,
    EntailmentLabel,
    EvalItem,
    HierarchyRank,
    Judgment,
    JudgePolicy,
    Source,
    Statement,
    rank_from_flags,
)
from entail_eval.statement import to_statement
from entail_eval.stats.text import strip_punctuation

_KEYWORDS = {label.value: label for label in EntailmentLabel}


@dataclass(frozen=True)
class LabelParse:
    raw: str
    label: EntailmentLabel
    transcript: Optional[str] = None


def parse_label(raw: str) -> EntailmentLabel:
    """Read a three-way label from a free-text reply.

    The reply is lowercased and stripped of punctuation. It is accepted if it
    is exactly one keyword, or if exactly one distinct keyword occurs in it.
    Anything else raises :class:`ParseFailure`; replies are never coerced to
    a default label.
    """
    cleaned = strip_punctuation(raw.lower()).strip()
    if cleaned in _KEYWORDS:
        return _KEYWORDS[cleaned]
    found = {w for w in re.findall(r"[a-z]+", cleaned) if w in _KEYWORDS}
    if len(found) == 1:
        return _KEYWORDS[found.pop()]
    if not found:
        raise ParseFailure("no entailment label in response", raw)
    raise ParseFailure(f"ambiguous entailment labels {sorted(found)}", raw)


def entailment_request(premise: str, hypothesis: str, config: BackendConfig) -> ChatRequest:
    return ChatRequest.single(
        prompts.fill(prompts.ENTAILMENT, premise=premise, hypothesis=hypothesis), config
    )


def entails(
    gateway: Gateway, premise: Statement, hypothesis: Statement, config: BackendConfig
) -> LabelParse:
    transcript = gateway.call(entailment_request(premise.text, hypothesis.text, config))
    return LabelParse(
        raw=transcript.response_text,
        label=parse_label(transcript.response_text),
        transcript=transcript.key,
    )


def aggregate(entailment: tuple[DirectionalEntailment, ...]) -> HierarchyRank:
    """Any-gold aggregation: the system answer is in A_sup (A_inf) if it entails
    (is entailed by) at least one gold statement."""
    in_sup = any(d.system_entails_gold.entails for d in entailment)
    in_inf = any(d.gold_entails_system.entails for d in entailment)
    return rank_from_flags(in_sup, in_inf)


@dataclass(frozen=True)
class Classification:
    gold_statements: tuple[Statement, ...]
    system_statement: Statement
    entailment: tuple[DirectionalEntailment, ...]
    rank: HierarchyRank

    @property
    def provenance(self) -> tuple[str, ...]:
        keys = [s.transcript for s in self.gold_statements + (self.system_statement,)]
        for d in self.entailment:
            keys.extend(d.transcripts)
        return tuple(k for k in keys if k)

    def entailing_gold(self) -> Optional[Statement]:
        """Gold statement used as premise for explanations.

        Among the golds that entail the system statement, the one with the
        smallest text, so the choice does not depend on gold order.
        """
        hits = [
            s for s, d in zip(self.gold_statements, self.entailment) if d.gold_entails_system.entails
        ]
        return min(hits, key=lambda s: s.text) if hits else None


def classify(gateway: Gateway, item: EvalItem, config: BackendConfig) -> Classification:
    """Convert all answers to statements and run both entailment directions per gold."""
    system = to_statement(
        gateway, item.question, item.system_answer, config, source=Source.SYSTEM, origin_item=item.id
    )
    golds = []
    directions = []
    for gold_answer in item.gold_answers:
        gold = to_statement(gateway, item.question, gold_answer, config, origin_item=item.id)
        forward = entails(gateway, gold, system, config)
        backward = entails(gateway, system, gold, config)
        golds.append(gold)
        directions.append(
            DirectionalEntailment(
                gold_entails_system=forward.label,
                system_entails_gold=backward.label,
                gold_answer=gold_answer,
                transcripts=(forward.transcript, backward.transcript),
            )
        )
    directions = tuple(directions)
    return Classification(tuple(golds), system, directions, aggregate(directions))


def judge(rank: HierarchyRank, policy: JudgePolicy) -> Judgment:
    return Judgment(correct=policy.accepts(rank), policy=policy, rank=rank)
