"""Run orchestration: evaluate items, repeat across seeds, convert answers to statements."""

from __future__ import annotations

import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional, Sequence, TypeVar, Union

from entail_eval.errors import AuthError, ConfigError, EntailEvalError, RunAborted, ValidationError
from entail_eval.gateway import Gateway
from entail_eval.harness.report import POPULATIONS, RunReport, meta_evaluation
from entail_eval.hierarchy import classify, judge
from entail_eval.lexical import token_f1
from entail_eval.model import (
    EXPLANATION_SCHEMES,
    HEURISTIC_SCHEMES,
    BackendConfig,
    EvalItem,
    EvalRecord,
    HierarchyRank,
    ItemFailure,
    JudgePolicy,
    PartialScore,
    Scheme,
    Source,
)
from entail_eval.partial import (
    DEFAULT_WEIGHTS,
    SchemeWeights,
    explain,
    llm_score_direct,
    llm_score_from_explanation,
    score_heuristic,
)
from entail_eval.statement import statement_agreement, to_statement
from entail_eval.stats import cohen_kappa

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class RunOptions:
    policies: tuple[JudgePolicy, ...] = (JudgePolicy.UNION, JudgePolicy.STRICT)
    schemes: tuple[Scheme, ...] = ()
    # "rank3": partial marks and AUROC for rank-3 answers only; "all": also score
    # every answer with the schemes that need no explanation
    population: str = "rank3"
    explain_all_ranks: bool = False
    weights: SchemeWeights = DEFAULT_WEIGHTS
    workers: int = 8
    max_failure_rate: float = 0.10
    exclude_systems: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.policies:
            raise ConfigError("at least one judging policy is required")
        if self.population not in POPULATIONS:
            raise ConfigError(f"population must be one of {POPULATIONS}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0.0 <= self.max_failure_rate <= 1.0:
            raise ConfigError("max_failure_rate must lie in [0, 1]")


def _describe(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _dedupe(keys) -> tuple[str, ...]:
    return tuple(dict.fromkeys(k for k in keys if k))


def _partial_scores(
    gateway: Gateway, item: EvalItem, c, config: BackendConfig, options: RunOptions
) -> tuple[list[PartialScore], Optional[object], list[str]]:
    scores: list[PartialScore] = []
    failures: list[str] = []
    explanation = None
    wanted = set(options.schemes)
    rank = c.rank

    wants_expl = wanted & set(EXPLANATION_SCHEMES)
    if wants_expl and (rank is HierarchyRank.INF_ONLY or options.explain_all_ranks):
        premise = c.entailing_gold() or min(c.gold_statements, key=lambda s: s.text)
        try:
            explanation = explain(gateway, premise, c.system_statement, config)
            for scheme in HEURISTIC_SCHEMES:
                if scheme in wanted:
                    scores.append(score_heuristic(explanation, scheme, options.weights))
            if Scheme.LLM_SCORE_FROM_EXPLANATION in wanted:
                scores.append(
                    llm_score_from_explanation(gateway, premise, c.system_statement, explanation, config)
                )
        except AuthError:
            raise
        except EntailEvalError as exc:
            failures.append(f"explanation: {_describe(exc)}")
    elif rank is HierarchyRank.EQUIVALENT:
        # equivalent answers need no inference: zero penalty
        for scheme in HEURISTIC_SCHEMES:
            if scheme in wanted:
                scores.append(PartialScore(scheme, 0.0))

    if rank is HierarchyRank.INF_ONLY or options.population == "all":
        if Scheme.LLM_SCORE_DIRECT in wanted:
            try:
                scores.append(llm_score_direct(gateway, item, config))
            except AuthError:
                raise
            except EntailEvalError as exc:
                failures.append(f"llm_score: {_describe(exc)}")
        if Scheme.TOKEN_F1 in wanted:
            scores.append(PartialScore(Scheme.TOKEN_F1, token_f1(item.system_answer, item.gold_answers)))

    order = list(Scheme)
    scores.sort(key=lambda s: order.index(s.scheme))
    return scores, explanation, failures


def evaluate_item(
    gateway: Gateway, item: EvalItem, config: BackendConfig, options: RunOptions
) -> Union[EvalRecord, ItemFailure]:
    """Classify one item, judge it under each policy and attach partial marks.

    Failures are returned, not raised, except for credential errors.
    """
    try:
        c = classify(gateway, item, config)
    except AuthError:
        raise
    except EntailEvalError as exc:
        return ItemFailure(item, "classify", _describe(exc))

    scores, explanation, partial_failures = _partial_scores(gateway, item, c, config, options)
    provenance = list(c.provenance)
    for s in scores:
        provenance.extend(s.transcripts)
    return EvalRecord(
        item=item,
        gold_statements=c.gold_statements,
        system_statement=c.system_statement,
        entailment=c.entailment,
        rank=c.rank,
        judgments=tuple(judge(c.rank, p) for p in options.policies),
        partial_scores=tuple(scores),
        explanation=explanation,
        partial_failures=tuple(partial_failures),
        provenance=_dedupe(provenance),
    )


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    """Order-preserving map over a thread pool."""
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sort_items(items: Sequence[EvalItem]) -> list[EvalItem]:
    ordered = sorted(items, key=lambda it: it.key)
    for a, b in zip(ordered, ordered[1:]):
        if a.key == b.key:
            raise ValidationError(f"duplicate item id={a.id!r} system={a.system_name!r}")
    return ordered


def config_metadata(config: BackendConfig) -> dict:
    return {
        "backend_id": config.backend_id,
        "model_name": config.model_name,
        "seed": config.seed,
        "temperature": config.temperature,
        "max_tokens": config.max_tokens,
    }


def run_evaluate(
    items: Sequence[EvalItem],
    gateway: Gateway,
    config: BackendConfig,
    options: RunOptions = RunOptions(),
) -> RunReport:
    """Evaluate every item and assemble a report.

    Items are processed in ``(id, system_name)`` order whatever the input
    order or worker count, so a fixed cache gives byte-identical reports.
    Raises :class:`RunAborted` (carrying the report) if too many items fail.
    """
    ordered = sort_items(items)
    results = parallel_map(lambda it: evaluate_item(gateway, it, config, options), ordered, options.workers)
    records = [r for r in results if isinstance(r, EvalRecord)]
    failures = [r for r in results if isinstance(r, ItemFailure)]
    report = RunReport(
        records=records,
        failures=failures,
        policies=options.policies,
        schemes=options.schemes,
        population=options.population,
        exclude_systems=options.exclude_systems,
        metadata={
            "config": config_metadata(config),
            "replay_only": gateway.replay_only,
            "cache": {"hits": gateway.hits, "misses": gateway.misses},
        },
    )
    if ordered and len(failures) / len(ordered) > options.max_failure_rate:
        exc = RunAborted(
            f"{len(failures)} of {len(ordered)} items failed "
            f"(limit {options.max_failure_rate:.0%}); first: {failures[0].error}"
        )
        exc.report = report
        raise exc
    return report


def convert_items(
    items: Sequence[EvalItem], gateway: Gateway, config: BackendConfig, workers: int = 8
) -> list[dict]:
    """QA2D only: statements for each item's system answer and gold answers."""

    def one(item: EvalItem) -> dict:
        row = {"id": item.id, "system_name": item.system_name}
        try:
            row["system_statement"] = to_statement(
                gateway, item.question, item.system_answer, config, source=Source.SYSTEM, origin_item=item.id
            ).text
            row["gold_statements"] = [
                to_statement(gateway, item.question, g, config, origin_item=item.id).text
                for g in item.gold_answers
            ]
        except AuthError:
            raise
        except EntailEvalError as exc:
            row["error"] = _describe(exc)
        return row

    return parallel_map(one, sort_items(items), workers)


# --- reliability across seeds ----------------------------------------------------


def _statement_texts(records: Sequence[EvalRecord]) -> dict[tuple[str, str], str]:
    out = {}
    for rec in records:
        q = rec.item.question
        out[(q, rec.item.system_answer)] = rec.system_statement.text
        for gold, s in zip(rec.item.gold_answers, rec.gold_statements):
            out[(q, gold)] = s.text
    return out


def _pair_name(a: int, b: int) -> str:
    return f"{a} vs {b}"


def _mean_std(values: list[float]) -> dict:
    return {
        "mean": statistics.fmean(values),
        "std": statistics.stdev(values) if len(values) > 1 else 0.0,
    }


def run_reliability(
    items: Sequence[EvalItem],
    gateway: Gateway,
    config: BackendConfig,
    seeds: Sequence[int] = (0, 1, 2, 3),
    options: RunOptions = RunOptions(),
) -> dict:
    """Repeat classification once per seed and measure agreement between seeds.

    Only items classified successfully under every seed are compared.
    Standard deviations are sample standard deviations (n - 1).
    """
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ConfigError("reliability needs at least two seeds")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be distinct")
    classify_only = RunOptions(
        policies=options.policies,
        workers=options.workers,
        max_failure_rate=options.max_failure_rate,
    )

    per_seed: dict[int, dict] = {}
    failed: dict[str, int] = {}
    for seed in seeds:
        report = run_evaluate(items, gateway, config.with_seed(seed), classify_only)
        per_seed[seed] = {r.item.key: r for r in report.records}
        failed[str(seed)] = len(report.failures)

    common = sorted(set.intersection(*(set(v) for v in per_seed.values())))
    if not common:
        raise RunAborted("no item was classified under every seed")
    runs = {s: [per_seed[s][k] for k in common] for s in seeds}

    def labels(records: list[EvalRecord]) -> list[str]:
        out = []
        for rec in records:
            for d in rec.entailment:
                out.extend((d.gold_entails_system.value, d.system_entails_gold.value))
        return out

    statements = {s: _statement_texts(runs[s]) for s in seeds}
    shared = sorted(set.intersection(*(set(v) for v in statements.values())))

    entail_kappa, rank_kappa, qa2d_pairs = {}, {}, {}
    for a, b in combinations(seeds, 2):
        name = _pair_name(a, b)
        entail_kappa[name] = cohen_kappa(labels(runs[a]), labels(runs[b]))
        rank_kappa[name] = cohen_kappa([int(r.rank) for r in runs[a]], [int(r.rank) for r in runs[b]])
        bleu, exact = statement_agreement(
            [[statements[a][k] for k in shared], [statements[b][k] for k in shared]]
        )
        qa2d_pairs[name] = {"bleu": bleu, "exact_match": exact}

    block = {
        "seeds": seeds,
        "n_items": len(items),
        "n_common": len(common),
        "n_statements": len(shared),
        "failures_per_seed": failed,
        "entailment_kappa": entail_kappa,
        "hierarchy_kappa": rank_kappa,
        "qa2d": {
            "bleu": _mean_std([p["bleu"] for p in qa2d_pairs.values()]),
            "exact_match": _mean_std([p["exact_match"] for p in qa2d_pairs.values()]),
            "pairs": qa2d_pairs,
        },
    }

    evaluation = {}
    for policy in options.policies:
        f1s, accs = [], []
        for s in seeds:
            m = meta_evaluation(runs[s], (policy,))
            if "skipped" in m:
                break
            f1s.append(m[policy.value]["overall"]["f1"])
            accs.append(m[policy.value]["overall"]["accuracy"])
        else:
            evaluation[policy.value] = {
                "f1": {**_mean_std(f1s), "per_seed": dict(zip(map(str, seeds), f1s))},
                "accuracy": {**_mean_std(accs), "per_seed": dict(zip(map(str, seeds), accs))},
            }
    block["evaluation"] = evaluation or {"skipped": "no human judgments"}
    return block
