"""Pure statistics used for meta-evaluation and reliability checks."""

from entail_eval.stats.auroc import auroc
from entail_eval.stats.classification import binary_f1_accuracy, cohen_kappa
from entail_eval.stats.significance import (
    Contingency2x2,
    TestResult,
    brunner_munzel_one_sided,
    fisher_exact_one_tailed,
    odds_ratio,
)
from entail_eval.stats.text import corpus_bleu, rouge, tokenize

__all__ = [
    "Contingency2x2",
    "TestResult",
    "auroc",
    "binary_f1_accuracy",
    "brunner_munzel_one_sided",
    "cohen_kappa",
    "corpus_bleu",
    "fisher_exact_one_tailed",
    "odds_ratio",
    "rouge",
    "tokenize",
]
