"""Command-line interface: ``entail-eval <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import yaml

from entail_eval.errors import ConfigError, EntailEvalError, RunAborted
from entail_eval.gateway import TranscriptCache, make_gateway
from entail_eval.harness.config import backend_config, load_config
from entail_eval.harness.dataset import FORMATS, ingest
from entail_eval.harness.pipeline import RunOptions, convert_items, run_evaluate, run_reliability
from entail_eval.harness.report import (
    EXTRACTIVE_SYSTEMS,
    POPULATIONS,
    RunReport,
    dumps,
    ordering_tests,
    round_sig,
)
from entail_eval.model import JudgePolicy, Scheme
from entail_eval.partial import SchemeWeights
from entail_eval.statement import statement_agreement
from entail_eval.stats import corpus_bleu, rouge

logger = logging.getLogger("entail_eval")

DEFAULTS: dict[str, Any] = {
    "format": "normalized",
    "workers": 8,
    "replay_only": False,
    "max_failure_rate": 0.10,
    "max_invalid_fraction": 0.10,
    "population": "rank3",
    "explain_all_ranks": False,
    "exclude_systems": [],
    "seeds": [0, 1, 2, 3],
}


# --- argument helpers -------------------------------------------------------------


def parse_policies(value: Optional[str | list]) -> tuple[JudgePolicy, ...]:
    if value is None or value == "both":
        return (JudgePolicy.UNION, JudgePolicy.STRICT)
    names = value if isinstance(value, list) else [value]
    try:
        return tuple(JudgePolicy(v.strip().lower()) for v in names)
    except ValueError as exc:
        raise ConfigError(f"unknown policy in {value!r}; use union, strict or both") from exc


def parse_schemes(value: Optional[str | list], default: str = "none") -> tuple[Scheme, ...]:
    if value is None:
        value = default
    if isinstance(value, str):
        if value.strip().lower() == "all":
            return tuple(Scheme)
        if value.strip().lower() in ("", "none"):
            return ()
        value = value.split(",")
    try:
        return tuple(dict.fromkeys(Scheme(v.strip().lower()) for v in value))
    except ValueError as exc:
        choices = ", ".join(s.value for s in Scheme)
        raise ConfigError(f"unknown scheme in {value!r}; choose from {choices}, all") from exc


def parse_ints(value: str | list) -> list[int]:
    if isinstance(value, list):
        return [int(v) for v in value]
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {value!r}") from exc


def parse_weights(value: Optional[str | list]) -> SchemeWeights:
    if value is None:
        return SchemeWeights()
    parts = value if isinstance(value, list) else value.split(",")
    if len(parts) != 3:
        raise ConfigError("weight override needs STEP,INFO,ASSUMPTION")
    step, info, assumption = (float(p) for p in parts)
    return SchemeWeights(step, info, assumption)


def _dataset_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data")
    g.add_argument("--dataset", help="input dataset path")
    g.add_argument("--format", choices=FORMATS, help="dataset format (default: normalized)")
    g.add_argument("--field-map", help="YAML/JSON field map for the evouna importer")
    g.add_argument("--gold-separator", help="split string gold answers on this separator")
    g.add_argument("--max-invalid-fraction", type=float)


def _backend_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("backend")
    g.add_argument("--config", help="YAML config file; flags override its values")
    g.add_argument("--backend", dest="backend_id", help="backend id (default: openai)")
    g.add_argument("--model", dest="model_name")
    g.add_argument("--endpoint")
    g.add_argument("--seed", type=int)
    g.add_argument("--temperature", type=float)
    g.add_argument("--max-tokens", type=int)
    g.add_argument("--cache", help="transcript cache (JSONL)")
    g.add_argument("--replay-only", action="store_true", default=None,
                   help="never call the backend; fail items missing from the cache")
    g.add_argument("--workers", type=int, help="parallel items (default: 8)")
    g.add_argument("--max-failure-rate", type=float)


def _run_args(p: argparse.ArgumentParser, schemes_default: str) -> None:
    g = p.add_argument_group("evaluation")
    g.add_argument("--policy", choices=("union", "strict", "both"), help="default: both")
    g.add_argument("--schemes", help=f"comma list, 'all' or 'none' (default: {schemes_default})")
    g.add_argument("--population", choices=POPULATIONS,
                   help="items used for partial-mark AUROC (default: rank3)")
    g.add_argument("--explain-all-ranks", action="store_true", default=None,
                   help="generate explanations for every rank, not only rank 3")
    g.add_argument("--override-weights", metavar="STEP,INFO,ASSUMPTION",
                   help="replace the 10,3,5 penalty weights")
    _exclusion_args(p)


def _exclusion_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--exclude-system", action="append", dest="exclude_system",
                   help="leave a system out of the ordering tests (repeatable)")
    p.add_argument("--exclude-extractive", action="store_true",
                   help=f"exclude extractive systems ({', '.join(EXTRACTIVE_SYSTEMS)})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entail-eval",
        description="Entailment-based evaluation of open-domain QA answers.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="rewrite answers as declarative statements (QA2D)")
    _dataset_args(p)
    _backend_args(p)
    p.add_argument("--out", help="JSONL output (default: stdout)")

    p = sub.add_parser("evaluate", help="place answers in the hierarchy and judge them")
    _dataset_args(p)
    _backend_args(p)
    _run_args(p, "none")
    p.add_argument("--out", help="report JSON (default: stdout)")
    p.add_argument("--csv", help="also write per-item rows as CSV")

    p = sub.add_parser("partial", help="partial marks study: scores, AUROC, intra-rank tests")
    _dataset_args(p)
    _backend_args(p)
    _run_args(p, "all")
    p.add_argument("--out", help="output JSON (default: stdout)")
    p.add_argument("--report-out", help="also write the full run report here")

    p = sub.add_parser("reliability", help="agreement of the pipeline across seeds")
    _dataset_args(p)
    _backend_args(p)
    p.add_argument("--seeds", help="comma list (default: 0,1,2,3)")
    p.add_argument("--policy", choices=("union", "strict", "both"))
    p.add_argument("--out")

    p = sub.add_parser("ordering", help="Fisher / Brunner-Munzel tests of the hierarchy order")
    p.add_argument("--report", help="existing report JSON; otherwise evaluate --dataset")
    _dataset_args(p)
    _backend_args(p)
    _run_args(p, "none")
    p.add_argument("--out")

    p = sub.add_parser("metrics", help="statistics on existing reports or statement files")
    msub = p.add_subparsers(dest="metric", required=True)
    for name in ("bleu", "rouge"):
        m = msub.add_parser(name, help=f"{name.upper()} of candidates against references")
        m.add_argument("--candidates", required=True, help="text file, one statement per line")
        m.add_argument("--references", required=True, help="text file, one statement per line")
    m = msub.add_parser("agreement", help="pairwise BLEU and exact-match rate across runs")
    m.add_argument("runs", nargs="+", help="two or more statement files, one statement per line")
    m = msub.add_parser("report", help="recompute aggregates from a report's records")
    m.add_argument("--report", required=True)
    m.add_argument("--check", action="store_true", help="fail if stored aggregates differ")
    for m in msub.choices.values():
        m.add_argument("--out")

    p = sub.add_parser("cache", help="move transcripts in and out of a cache")
    csub = p.add_subparsers(dest="cache_command", required=True)
    for name in ("export", "import"):
        c = csub.add_parser(name)
        c.add_argument("--cache", required=True, help="cache JSONL")
        c.add_argument("--file", required=True, help="transcript file to write/read")
    return parser


# --- settings ---------------------------------------------------------------------


class Settings:
    """CLI flags layered over the config file over built-in defaults."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        cfg = load_config(getattr(args, "config", None))
        self.file_backend = cfg["backend"]
        self.file_run = cfg["run"]

    def get(self, name: str, flag: Optional[str] = None) -> Any:
        value = getattr(self.args, flag or name, None)
        if value is not None:
            return value
        if name in self.file_run:
            return self.file_run[name]
        return DEFAULTS.get(name)

    def backend(self):
        a = self.args
        return backend_config(
            self.file_backend,
            {
                "backend_id": a.backend_id,
                "model_name": a.model_name,
                "endpoint": a.endpoint,
                "seed": a.seed,
                "temperature": a.temperature,
                "max_tokens": a.max_tokens,
            },
        )

    def gateway(self, config):
        return make_gateway(
            config,
            self.get("cache"),
            replay_only=bool(self.get("replay_only")),
            max_concurrency=int(self.get("workers")),
        )

    def items(self):
        path = self.get("dataset")
        if not path:
            raise ConfigError("--dataset is required")
        field_map = None
        fm = self.get("field_map")
        if isinstance(fm, dict):
            field_map = fm
        elif fm:
            field_map = yaml.safe_load(Path(fm).read_text(encoding="utf-8"))
        result = ingest(
            path,
            self.get("format"),
            field_map=field_map,
            gold_separator=self.get("gold_separator"),
            max_invalid_fraction=float(self.get("max_invalid_fraction")),
        )
        if result.errors:
            print(f"warning: skipped {len(result.errors)} invalid records", file=sys.stderr)
        return result.items

    def exclusions(self) -> tuple[str, ...]:
        names = list(self.get("exclude_systems", "exclude_system") or [])
        if getattr(self.args, "exclude_extractive", False):
            names.extend(EXTRACTIVE_SYSTEMS)
        return tuple(dict.fromkeys(names))

    def options(self, schemes_default: str = "none") -> RunOptions:
        return RunOptions(
            policies=parse_policies(self.get("policies", "policy")),
            schemes=parse_schemes(self.get("schemes"), schemes_default),
            population=self.get("population"),
            explain_all_ranks=bool(self.get("explain_all_ranks")),
            weights=parse_weights(self.get("weights", "override_weights")),
            workers=int(self.get("workers")),
            max_failure_rate=float(self.get("max_failure_rate")),
            exclude_systems=self.exclusions(),
        )


def emit(data: Any, out: Optional[str]) -> None:
    text = data if isinstance(data, str) else dumps(data)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _summary(report: RunReport) -> str:
    h = report.aggregates()["hierarchy"]
    ranks = ", ".join(f"({k}) {h[k]}" for k in ("1", "2", "3", "4"))
    return f"evaluated {len(report.records)} items, {len(report.failures)} failed; ranks {ranks}"


# --- commands -----------------------------------------------------------------------


def cmd_convert(args) -> int:
    s = Settings(args)
    config = s.backend()
    rows = convert_items(s.items(), s.gateway(config), config, int(s.get("workers")))
    emit("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), args.out)
    return 0


def _evaluate(s: Settings, schemes_default: str) -> RunReport:
    config = s.backend()
    return run_evaluate(s.items(), s.gateway(config), config, s.options(schemes_default))


def cmd_evaluate(args) -> int:
    s = Settings(args)
    report = _evaluate(s, "none")
    emit(report.to_json(), args.out)
    if args.csv:
        report.write_csv(args.csv)
    if args.out:
        print(_summary(report))
    return 0


def cmd_partial(args) -> int:
    s = Settings(args)
    report = _evaluate(s, "all")
    if args.report_out:
        report.write(args.report_out)
    agg = report.aggregates()
    emit(
        {
            "partial_marks": agg["partial_marks"],
            "brunner_munzel": agg["ordering"].get("brunner_munzel", {}),
            "hierarchy": agg["hierarchy"],
        },
        args.out,
    )
    return 0


def cmd_reliability(args) -> int:
    s = Settings(args)
    config = s.backend()
    options = RunOptions(
        policies=parse_policies(s.get("policies", "policy")),
        workers=int(s.get("workers")),
        max_failure_rate=float(s.get("max_failure_rate")),
    )
    block = run_reliability(s.items(), s.gateway(config), config, parse_ints(s.get("seeds")), options)
    emit(block, args.out)
    return 0


def cmd_ordering(args) -> int:
    s = Settings(args)
    if args.report:
        report = RunReport.load(args.report)
        schemes = parse_schemes(s.get("schemes"), ",".join(x.value for x in report.schemes) or "none")
    else:
        report = _evaluate(s, "none")
        schemes = report.schemes
    emit(ordering_tests(report.records, schemes, s.exclusions()), args.out)
    return 0


def _lines(path: str) -> list[str]:
    return [line.rstrip("\n") for line in Path(path).read_text(encoding="utf-8").splitlines()]


def cmd_metrics(args) -> int:
    if args.metric == "bleu":
        emit({"bleu": corpus_bleu(_lines(args.candidates), _lines(args.references))}, args.out)
    elif args.metric == "rouge":
        cands, refs = _lines(args.candidates), _lines(args.references)
        if len(cands) != len(refs):
            raise ConfigError("candidate and reference files differ in length")
        out = {}
        for variant in ("r1", "r2", "rl"):
            prf = [rouge(c, r, variant) for c, r in zip(cands, refs)]
            out[variant] = {
                k: sum(x[i] for x in prf) / len(prf) for i, k in enumerate(("precision", "recall", "f1"))
            }
        emit(out, args.out)
    elif args.metric == "agreement":
        bleu, exact = statement_agreement([_lines(p) for p in args.runs])
        emit({"bleu": bleu, "exact_match": exact, "runs": len(args.runs)}, args.out)
    elif args.metric == "report":
        stored = json.loads(Path(args.report).read_text(encoding="utf-8"))
        report = RunReport.from_dict(stored)
        recomputed = round_sig(report.aggregates())
        emit(recomputed, args.out)
        if args.check:
            diffs = [k for k, v in recomputed.items() if stored.get(k) != v]
            if diffs:
                print(f"aggregates differ from stored report: {', '.join(diffs)}", file=sys.stderr)
                return 1
    return 0


def cmd_cache(args) -> int:
    cache = TranscriptCache(args.cache)
    if args.cache_command == "export":
        n = cache.export(args.file)
        print(f"exported {n} transcripts to {args.file}")
    else:
        n = cache.import_file(args.file)
        print(f"imported {n} new transcripts into {args.cache} ({len(cache)} total)")
    return 0


COMMANDS = {
    "convert": cmd_convert,
    "evaluate": cmd_evaluate,
    "partial": cmd_partial,
    "reliability": cmd_reliability,
    "ordering": cmd_ordering,
    "metrics": cmd_metrics,
    "cache": cmd_cache,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except RunAborted as exc:
        report = getattr(exc, "report", None)
        out = getattr(args, "out", None)
        if report is not None and out and args.command == "evaluate":
            report.write(out)
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EntailEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
