"""Dataset ingestion, run orchestration, reports and the command line."""

from entail_eval.harness.dataset import IngestResult, ingest
from entail_eval.harness.pipeline import (
    RunOptions,
    convert_items,
    evaluate_item,
    run_evaluate,
    run_reliability,
)
from entail_eval.harness.report import RunReport, ordering_tests

run_ordering_tests = ordering_tests

__all__ = [
    "IngestResult",
    "RunOptions",
    "RunReport",
    "convert_items",
    "evaluate_item",
    "ingest",
    "ordering_tests",
    "run_evaluate",
    "run_ordering_tests",
    "run_reliability",
]
