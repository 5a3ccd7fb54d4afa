import itertools

import pytest

from entail_eval.errors import ValidationError
from entail_eval.model import (
    BackendConfig,
    EntailmentLabel,
    EvalItem,
    HierarchyRank,
    InferenceExplanation,
    Judgment,
    JudgePolicy,
    PartialScore,
    Scheme,
    Statement,
    Source,
    rank_from_flags,
)


@pytest.mark.parametrize(
    "in_sup,in_inf,rank",
    [(True, False, 1), (True, True, 2), (False, True, 3), (False, False, 4)],
)
def test_rank_from_flags(in_sup, in_inf, rank):
    r = rank_from_flags(in_sup, in_inf)
    assert r == rank
    assert (r.in_sup, r.in_inf) == (in_sup, in_inf)


def test_rank_from_flags_is_bijection():
    ranks = {rank_from_flags(a, b) for a, b in itertools.product([True, False], repeat=2)}
    assert ranks == set(HierarchyRank)


@pytest.mark.parametrize("rank", list(HierarchyRank))
def test_policy_definitions(rank):
    assert JudgePolicy.UNION.accepts(rank) == (rank != 4)
    assert JudgePolicy.STRICT.accepts(rank) == (rank in (1, 2))


def test_judgment_must_match_policy():
    Judgment(True, JudgePolicy.UNION, HierarchyRank.INF_ONLY)
    with pytest.raises(ValidationError):
        Judgment(True, JudgePolicy.STRICT, HierarchyRank.INF_ONLY)


def test_label_projection():
    assert EntailmentLabel.ENTAILMENT.entails
    assert not EntailmentLabel.NEUTRAL.entails
    assert not EntailmentLabel.CONTRADICTION.entails


class TestEvalItem:
    def test_valid(self):
        item = EvalItem("q1", "who?", ["Cyrus"], "sys", "Cyrus", True)
        assert item.gold_answers == ("Cyrus",)
        assert item.key == ("q1", "sys")

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"question": "  "},
            {"system_answer": ""},
            {"gold_answers": []},
            {"gold_answers": ["ok", " "]},
            {"human_judgment": "yes"},
        ],
    )
    def test_invalid(self, kwargs):
        base = dict(id="q1", question="who?", gold_answers=["Cyrus"], system_name="s", system_answer="a")
        base.update(kwargs)
        with pytest.raises(ValidationError):
            EvalItem(**base)


def test_statement_requires_text():
    with pytest.raises(ValidationError):
        Statement("  ", Source.GOLD, "q1")


def test_explanation_counts_must_match_raw_text():
    raw = "1. a [[INFO]]\n2. b"
    InferenceExplanation(raw, ("a [[INFO]]", "b"), 1, 0)
    with pytest.raises(ValidationError):
        InferenceExplanation(raw, ("a", "b"), 0, 0)
    with pytest.raises(ValidationError):
        InferenceExplanation("nothing", (), 0, 0)


@pytest.mark.parametrize(
    "scheme,value,ok",
    [
        (Scheme.CIA, -33, True),
        (Scheme.IA, 0, True),
        (Scheme.C, 5, False),
        (Scheme.LLM_SCORE_DIRECT, 5, True),
        (Scheme.LLM_SCORE_DIRECT, 0, False),
        (Scheme.LLM_SCORE_FROM_EXPLANATION, 6, False),
        (Scheme.TOKEN_F1, 0.5, True),
        (Scheme.TOKEN_F1, 1.5, False),
    ],
)
def test_partial_score_ranges(scheme, value, ok):
    if ok:
        PartialScore(scheme, value)
    else:
        with pytest.raises(ValidationError):
            PartialScore(scheme, value)


def test_oriented_scores():
    assert PartialScore(Scheme.LLM_SCORE_FROM_EXPLANATION, 2).oriented == -2
    assert PartialScore(Scheme.LLM_SCORE_DIRECT, 2).oriented == 2
    assert PartialScore(Scheme.CIA, -33).oriented == -33


def test_backend_defaults():
    cfg = BackendConfig()
    assert (cfg.seed, cfg.temperature, cfg.max_tokens) == (42, 0.0, 300)
    assert cfg.model_name == "gpt-3.5-turbo-1106"
    with pytest.raises(ValidationError):
        BackendConfig(temperature=-0.1)
    with pytest.raises(ValidationError):
        BackendConfig(max_tokens=0)
