"""Aggregates over evaluated records, and (de)serialization of run reports.

All aggregate functions take per-item records only, so a report loaded from
disk can be re-aggregated and must reproduce the stored numbers.
"""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from entail_eval.errors import DegenerateSample, ValidationError
from entail_eval.lexical import lexical_match
from entail_eval.model import (
    DirectionalEntailment,
    EntailmentLabel,
    EvalItem,
    EvalRecord,
    HierarchyRank,
    InferenceExplanation,
    ItemFailure,
    Judgment,
    JudgePolicy,
    PartialScore,
    Scheme,
    Source,
    Statement,
)
from entail_eval.stats import (
    Contingency2x2,
    auroc,
    binary_f1_accuracy,
    brunner_munzel_one_sided,
    fisher_exact_one_tailed,
)

ORDERING_PAIRS = ((1, 2), (2, 3), (3, 4))
EXTRACTIVE_SYSTEMS = ("dpr-fid",)
POPULATIONS = ("rank3", "all")


# --- aggregates ---------------------------------------------------------------


def hierarchy_distribution(records: Sequence[EvalRecord], n_failed: int = 0) -> dict:
    counts = {str(int(r)): 0 for r in HierarchyRank}
    for rec in records:
        counts[str(int(rec.rank))] += 1
    counts["unevaluated"] = n_failed
    return counts


def _f1_block(pairs: list[tuple[bool, bool]]) -> dict:
    predicted = [p for p, _ in pairs]
    human = [h for _, h in pairs]
    f1, acc = binary_f1_accuracy(predicted, human)
    return {"f1": f1, "accuracy": acc, "n": len(pairs)}


def meta_evaluation(records: Sequence[EvalRecord], policies: Sequence[JudgePolicy]) -> dict:
    """F1/accuracy of each judging policy (and lexical match) against human judgments."""
    judged = [r for r in records if r.item.human_judgment is not None]
    if not judged:
        return {"skipped": "no human judgments"}
    evaluators: dict[str, Any] = {p.value: (lambda r, p=p: r.judgment(p).correct) for p in policies}
    evaluators["lexical_match"] = lambda r: lexical_match(r.item.system_answer, r.item.gold_answers)

    out = {}
    for name, predict in evaluators.items():
        by_system: dict[str, list] = defaultdict(list)
        overall = []
        for rec in judged:
            pair = (bool(predict(rec)), rec.item.human_judgment)
            overall.append(pair)
            by_system[rec.item.system_name].append(pair)
        out[name] = {
            "overall": _f1_block(overall),
            "by_system": {s: _f1_block(by_system[s]) for s in sorted(by_system)},
        }
    return out


def _in_population(rec: EvalRecord, population: str) -> bool:
    return population == "all" or rec.rank is HierarchyRank.INF_ONLY


def partial_marks(records: Sequence[EvalRecord], schemes: Sequence[Scheme], population: str) -> dict:
    """AUROC of each scheme's (oriented) scores in predicting human judgments."""
    if population not in POPULATIONS:
        raise ValidationError(f"population must be one of {POPULATIONS}")
    out: dict[str, Any] = {"population": population, "auroc": {}}
    for scheme in schemes:
        scores, labels = [], []
        for rec in records:
            s = rec.score(scheme)
            if s is None or rec.item.human_judgment is None or not _in_population(rec, population):
                continue
            scores.append(s.oriented)
            labels.append(rec.item.human_judgment)
        n_pos = sum(labels)
        n_neg = len(labels) - n_pos
        if n_pos == 0 or n_neg == 0:
            out["auroc"][scheme.value] = {
                "skipped": "both accepted and rejected answers are needed",
                "n_pos": n_pos,
                "n_neg": n_neg,
            }
        else:
            out["auroc"][scheme.value] = {
                "value": auroc(scores, labels),
                "n_pos": n_pos,
                "n_neg": n_neg,
            }
    return out


def _excluded(name: str, exclude: Iterable[str]) -> bool:
    return name.strip().lower() in {e.strip().lower() for e in exclude}


def ordering_tests(
    records: Sequence[EvalRecord],
    schemes: Sequence[Scheme] = (),
    exclude_systems: Sequence[str] = (),
) -> dict:
    """Fisher tests that each rank has more human-accepted answers than the next,
    and Brunner-Munzel tests that accepted rank-3 answers score higher."""
    judged = [
        r
        for r in records
        if r.item.human_judgment is not None and not _excluded(r.item.system_name, exclude_systems)
    ]
    out: dict[str, Any] = {"excluded_systems": sorted(exclude_systems), "n": len(judged)}
    if not judged:
        out["skipped"] = "no human judgments"
        return out

    counts = {int(r): [0, 0] for r in HierarchyRank}
    for rec in judged:
        counts[int(rec.rank)][0 if rec.item.human_judgment else 1] += 1

    fisher = {}
    for hi, lo in ORDERING_PAIRS:
        name = f"({hi})>({lo})"
        empty = [k for k in (hi, lo) if sum(counts[k]) == 0]
        if empty:
            fisher[name] = {"skipped": f"rank group {empty[0]} is empty"}
            continue
        table = Contingency2x2.from_rows([counts[hi], counts[lo]])
        res = fisher_exact_one_tailed(table)
        fisher[name] = {"table": table.as_rows(), "odds_ratio": res.statistic, "p_value": res.p_value}
    out["fisher"] = fisher

    bm = {}
    rank3 = [r for r in judged if r.rank is HierarchyRank.INF_ONLY]
    for scheme in schemes:
        accepted, rejected = [], []
        for rec in rank3:
            s = rec.score(scheme)
            if s is not None:
                (accepted if rec.item.human_judgment else rejected).append(s.oriented)
        if len(accepted) < 2 or len(rejected) < 2:
            bm[scheme.value] = {
                "skipped": "need at least two accepted and two rejected rank-3 answers",
                "n_accepted": len(accepted),
                "n_rejected": len(rejected),
            }
            continue
        try:
            res = brunner_munzel_one_sided(rejected, accepted)
        except DegenerateSample as exc:
            bm[scheme.value] = {"skipped": str(exc)}
            continue
        bm[scheme.value] = {
            "statistic": res.statistic,
            "p_value": res.p_value,
            "relative_effect": res.estimate,
            "n_accepted": len(accepted),
            "n_rejected": len(rejected),
        }
    out["brunner_munzel"] = bm
    return out


# --- report -------------------------------------------------------------------


@dataclass
class RunReport:
    records: list[EvalRecord]
    failures: list[ItemFailure]
    policies: tuple[JudgePolicy, ...]
    schemes: tuple[Scheme, ...] = ()
    population: str = "rank3"
    exclude_systems: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict)

    def aggregates(self) -> dict:
        return {
            "hierarchy": hierarchy_distribution(self.records, len(self.failures)),
            "meta_evaluation": meta_evaluation(self.records, self.policies),
            "partial_marks": partial_marks(self.records, self.schemes, self.population),
            "ordering": ordering_tests(self.records, self.schemes, self.exclude_systems),
        }

    def to_dict(self) -> dict:
        return {
            "metadata": {
                **self.metadata,
                "policies": [p.value for p in self.policies],
                "schemes": [s.value for s in self.schemes],
                "population": self.population,
                "exclude_systems": list(self.exclude_systems),
                "n_items": len(self.records) + len(self.failures),
                "n_evaluated": len(self.records),
                "n_failed": len(self.failures),
            },
            **self.aggregates(),
            "failures": [failure_to_dict(f) for f in self.failures],
            "records": [record_to_dict(r) for r in self.records],
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    def write_csv(self, path: str | Path) -> None:
        write_records_csv(self.records, self.failures, self.schemes, path)

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        meta = dict(data.get("metadata", {}))
        policies = tuple(JudgePolicy(p) for p in meta.pop("policies", ["union", "strict"]))
        schemes = tuple(Scheme(s) for s in meta.pop("schemes", []))
        population = meta.pop("population", "rank3")
        exclude = tuple(meta.pop("exclude_systems", []))
        for k in ("n_items", "n_evaluated", "n_failed"):
            meta.pop(k, None)
        return cls(
            records=[record_from_dict(r) for r in data.get("records", [])],
            failures=[failure_from_dict(f) for f in data.get("failures", [])],
            policies=policies,
            schemes=schemes,
            population=population,
            exclude_systems=exclude,
            metadata=meta,
        )

    @classmethod
    def load(cls, path: str | Path) -> "RunReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def round_sig(value: Any, digits: int = 6) -> Any:
    """Recursively round floats to ``digits`` significant digits.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``
    so the output stays valid JSON.
    """
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: round_sig(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_sig(v, digits) for v in value]
    return value


def dumps(data: Any) -> str:
    return json.dumps(round_sig(data), indent=2, ensure_ascii=False) + "\n"


def _statement_dict(s: Statement) -> dict:
    return {"text": s.text, "transcript": s.transcript}


def record_to_dict(rec: EvalRecord) -> dict:
    out = {
        "item": rec.item.to_dict(),
        "rank": int(rec.rank),
        "judgments": {j.policy.value: j.correct for j in rec.judgments},
        "lexical_match": lexical_match(rec.item.system_answer, rec.item.gold_answers),
        "system_statement": _statement_dict(rec.system_statement),
        "gold": [
            {
                "answer": d.gold_answer,
                "statement": _statement_dict(s),
                "gold_entails_system": d.gold_entails_system.value,
                "system_entails_gold": d.system_entails_gold.value,
                "transcripts": list(d.transcripts),
            }
            for s, d in zip(rec.gold_statements, rec.entailment)
        ],
        "partial_scores": {
            s.scheme.value: {"value": s.value, "transcripts": list(s.transcripts)}
            for s in rec.partial_scores
        },
        "explanation": None,
        "partial_failures": list(rec.partial_failures),
        "provenance": list(rec.provenance),
    }
    if rec.explanation is not None:
        e = rec.explanation
        out["explanation"] = {
            "raw_text": e.raw_text,
            "steps": list(e.steps),
            "info": e.info_count,
            "assumption": e.assumption_count,
            "warnings": list(e.warnings),
            "transcript": e.transcript,
        }
    return out


def _item_from_dict(d: dict) -> EvalItem:
    return EvalItem(
        id=d["id"],
        question=d["question"],
        gold_answers=d["gold_answers"],
        system_name=d["system_name"],
        system_answer=d["system_answer"],
        human_judgment=d.get("human_judgment"),
    )


def record_from_dict(d: dict) -> EvalRecord:
    item = _item_from_dict(d["item"])
    rank = HierarchyRank(d["rank"])
    gold_statements = tuple(
        Statement(g["statement"]["text"], Source.GOLD, item.id, g["statement"].get("transcript"))
        for g in d["gold"]
    )
    entailment = tuple(
        DirectionalEntailment(
            EntailmentLabel(g["gold_entails_system"]),
            EntailmentLabel(g["system_entails_gold"]),
            g["answer"],
            tuple(g.get("transcripts", ())),
        )
        for g in d["gold"]
    )
    explanation = None
    if d.get("explanation"):
        e = d["explanation"]
        explanation = InferenceExplanation(
            raw_text=e["raw_text"],
            steps=tuple(e["steps"]),
            info_count=e["info"],
            assumption_count=e["assumption"],
            warnings=tuple(e.get("warnings", ())),
            transcript=e.get("transcript"),
        )
    return EvalRecord(
        item=item,
        gold_statements=gold_statements,
        system_statement=Statement(
            d["system_statement"]["text"], Source.SYSTEM, item.id, d["system_statement"].get("transcript")
        ),
        entailment=entailment,
        rank=rank,
        judgments=tuple(
            Judgment(correct, JudgePolicy(p), rank) for p, correct in d["judgments"].items()
        ),
        partial_scores=tuple(
            PartialScore(Scheme(k), v["value"], tuple(v.get("transcripts", ())))
            for k, v in d.get("partial_scores", {}).items()
        ),
        explanation=explanation,
        partial_failures=tuple(d.get("partial_failures", ())),
        provenance=tuple(d.get("provenance", ())),
    )


def failure_to_dict(f: ItemFailure) -> dict:
    return {"item": f.item.to_dict(), "stage": f.stage, "error": f.error}


def failure_from_dict(d: dict) -> ItemFailure:
    return ItemFailure(_item_from_dict(d["item"]), d["stage"], d["error"])


def write_records_csv(
    records: Sequence[EvalRecord],
    failures: Sequence[ItemFailure],
    schemes: Sequence[Scheme],
    path: str | Path,
) -> None:
    policies = [p for p in JudgePolicy]
    header = ["id", "system_name", "human_judgment", "rank"]
    header += [f"{p.value}_correct" for p in policies]
    header += ["lexical_match"] + [s.value for s in schemes] + ["failure"]
    rows = []
    for rec in records:
        row = [rec.item.id, rec.item.system_name, rec.item.human_judgment, int(rec.rank)]
        for p in policies:
            j = rec.judgment(p)
            row.append("" if j is None else j.correct)
        row.append(lexical_match(rec.item.system_answer, rec.item.gold_answers))
        for s in schemes:
            score = rec.score(s)
            row.append("" if score is None else round_sig(float(score.value)))
        row.append("")
        rows.append((rec.item.key, row))
    for f in failures:
        row = [f.item.id, f.item.system_name, f.item.human_judgment, ""]
        row += [""] * (len(policies) + 1 + len(schemes))
        row.append(f"{f.stage}: {f.error}")
        rows.append((f.item.key, row))
    rows.sort(key=lambda kv: kv[0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(row for _, row in rows)
