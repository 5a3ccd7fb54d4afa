"""Scripted model responses for the bundled fixture and for offline tests.

Running this file regenerates ``fixtures/items.jsonl`` and
``fixtures/transcripts.jsonl`` (the replay cache, recorded with the default
backend settings, seed 42).
"""

from __future__ import annotations

import json
import re
from dataclasses import replace
from pathlib import Path

from entail_eval import prompts
from entail_eval.gateway import ChatRequest, FunctionBackend, Gateway, TranscriptCache
from entail_eval.model import BackendConfig, EvalItem

FIXTURES = Path(__file__).parent / "fixtures"
ITEMS_PATH = FIXTURES / "items.jsonl"
CACHE_PATH = FIXTURES / "transcripts.jsonl"
RECORDED_AT = "2024-01-01T00:00:00+00:00"

Q_OAK = "where is the tv show the curse of oak island filmed"
Q_FE = "where is fe best absorbed in the body"
Q_CYRUS = "who wrote the first declaration of human rights"
Q_TITANIC = "when did the titanic sink"

ITEMS = [
    EvalItem("q1", Q_OAK, ("Oak Island",), "InstructGPT",
             "on Oak Island, a small island off the coast of Nova Scotia, Canada", True),
    EvalItem("q1", Q_OAK, ("Oak Island",), "ChatGPT", "Nova Scotia, Canada", True),
    EvalItem("q1", Q_OAK, ("Oak Island",), "GPT-4", "Oak Island", True),
    EvalItem("q1", Q_OAK, ("Oak Island",), "BingChat", "The show is filmed in Los Angeles.", False),
    EvalItem("q2", Q_FE, ("in the duodenum",), "InstructGPT",
             "Iron is best absorbed in the small intestine.", True),
    EvalItem("q2", Q_FE, ("in the duodenum",), "GPT-4", "the stomach", False),
    EvalItem("q3", Q_CYRUS, ("Cyrus", "Cyrus the Great"), "ChatGPT", "Cyrus the Great, king of Persia", True),
    EvalItem("q3", Q_CYRUS, ("Cyrus", "Cyrus the Great"), "BingChat", "an ancient Persian king", False),
    EvalItem("q4", Q_TITANIC, ("April 15, 1912",), "InstructGPT", "1912", True),
    EvalItem("q4", Q_TITANIC, ("April 15, 1912",), "ChatGPT", "in the 20th century", False),
]

OAK_GOLD = "The TV show the Curse of Oak Island is filmed on Oak Island."
OAK_NS = "The TV show the Curse of Oak Island is filmed in Nova Scotia, Canada."
FE_GOLD = "Fe is best absorbed in the body in the duodenum."
FE_SYS = "Iron is best absorbed in the small intestine."

STATEMENTS = {
    (Q_OAK, "Oak Island"): OAK_GOLD,
    (Q_OAK, "on Oak Island, a small island off the coast of Nova Scotia, Canada"):
        "The TV show the Curse of Oak Island is filmed on Oak Island, a small island off the coast "
        "of Nova Scotia, Canada.",
    (Q_OAK, "Nova Scotia, Canada"): OAK_NS,
    (Q_OAK, "The show is filmed in Los Angeles."):
        "The TV show the Curse of Oak Island is filmed in Los Angeles.",
    (Q_FE, "in the duodenum"): FE_GOLD,
    (Q_FE, "Iron is best absorbed in the small intestine."): FE_SYS,
    (Q_FE, "the stomach"): "Fe is best absorbed in the body in the stomach.",
    (Q_CYRUS, "Cyrus"): "Cyrus wrote the first declaration of human rights",
    (Q_CYRUS, "Cyrus the Great"): "Cyrus the Great wrote the first declaration of human rights.",
    (Q_CYRUS, "Cyrus the Great, king of Persia"):
        "Cyrus the Great, king of Persia, wrote the first declaration of human rights.",
    (Q_CYRUS, "an ancient Persian king"):
        "An ancient Persian king wrote the first declaration of human rights.",
    (Q_TITANIC, "April 15, 1912"): "The Titanic sank on April 15, 1912.",
    (Q_TITANIC, "1912"): "The Titanic sank in 1912.",
    (Q_TITANIC, "in the 20th century"): "The Titanic sank in the 20th century.",
}


def _s(question: str, answer: str) -> str:
    return STATEMENTS[(question, answer)]


# (premise, hypothesis) -> raw reply; replies vary in form on purpose
LABELS = {
    (OAK_GOLD, _s(Q_OAK, "on Oak Island, a small island off the coast of Nova Scotia, Canada")): "neutral",
    (_s(Q_OAK, "on Oak Island, a small island off the coast of Nova Scotia, Canada"), OAK_GOLD): "entailment",
    (OAK_GOLD, OAK_NS): "Entailment",
    (OAK_NS, OAK_GOLD): "neutral",
    (OAK_GOLD, OAK_GOLD): "entailment",
    (OAK_GOLD, _s(Q_OAK, "The show is filmed in Los Angeles.")): "contradiction",
    (_s(Q_OAK, "The show is filmed in Los Angeles."), OAK_GOLD): "Contradiction.",
    (FE_GOLD, FE_SYS): "entailment",
    (FE_SYS, FE_GOLD): "Neutral.",
    (FE_GOLD, _s(Q_FE, "the stomach")): "contradiction",
    (_s(Q_FE, "the stomach"), FE_GOLD): "contradiction",
    (_s(Q_CYRUS, "Cyrus"), _s(Q_CYRUS, "Cyrus the Great, king of Persia")): "neutral",
    (_s(Q_CYRUS, "Cyrus the Great, king of Persia"), _s(Q_CYRUS, "Cyrus")): "entailment",
    (_s(Q_CYRUS, "Cyrus the Great"), _s(Q_CYRUS, "Cyrus the Great, king of Persia")): "neutral",
    (_s(Q_CYRUS, "Cyrus the Great, king of Persia"), _s(Q_CYRUS, "Cyrus the Great")): "“entailment”",
    (_s(Q_CYRUS, "Cyrus"), _s(Q_CYRUS, "an ancient Persian king")): "neutral",
    (_s(Q_CYRUS, "an ancient Persian king"), _s(Q_CYRUS, "Cyrus")): "neutral",
    (_s(Q_CYRUS, "Cyrus the Great"), _s(Q_CYRUS, "an ancient Persian king")): "The answer is entailment.",
    (_s(Q_CYRUS, "an ancient Persian king"), _s(Q_CYRUS, "Cyrus the Great")): "neutral",
    (_s(Q_TITANIC, "April 15, 1912"), _s(Q_TITANIC, "1912")): "entailment",
    (_s(Q_TITANIC, "1912"), _s(Q_TITANIC, "April 15, 1912")): "neutral",
    (_s(Q_TITANIC, "April 15, 1912"), _s(Q_TITANIC, "in the 20th century")): "entailment",
    (_s(Q_TITANIC, "in the 20th century"), _s(Q_TITANIC, "April 15, 1912")): "neutral",
}

OAK_EXPLANATION = (
    "1. The TV show the Curse of Oak Island is filmed on Oak Island. (Given in S1)\n"
    "2. Oak Island is located in Nova Scotia, Canada. [[INFO]]\n"
    "3. Therefore, the TV show the Curse of Oak Island is filmed in Nova Scotia, Canada. "
    "(Combining steps 1 and 2)"
)

# (s1, s2) -> (explanation, difficulty reply)
EXPLANATIONS = {
    (OAK_GOLD, OAK_NS): (OAK_EXPLANATION, "2"),
    (FE_GOLD, FE_SYS): (
        "1. Fe is best absorbed in the body in the duodenum. (Given in S1)\n"
        "2. Fe is the chemical symbol for iron. [[INFO]]\n"
        "3. The duodenum is the first part of the small intestine. [[INFO]]\n"
        "4. Therefore, iron is best absorbed in the small intestine. (Combining steps 1, 2 and 3)",
        "3",
    ),
    (_s(Q_CYRUS, "Cyrus the Great"), _s(Q_CYRUS, "an ancient Persian king")): (
        "1. Cyrus the Great wrote the first declaration of human rights. (Given in S1)\n"
        "2. Cyrus the Great was a king of Persia. [[INFO]]\n"
        "3. Persia is an ancient empire. [[INFO]]\n"
        "4. A king of an ancient empire is an ancient king. [[ASSUMPTION]]\n"
        "5. Therefore, an ancient Persian king wrote the first declaration of human rights.",
        "4",
    ),
    (_s(Q_TITANIC, "April 15, 1912"), _s(Q_TITANIC, "1912")): (
        "1. The Titanic sank on April 15, 1912. (Given in S1)\n"
        "2. Therefore, the Titanic sank in 1912.",
        "1",
    ),
    (_s(Q_TITANIC, "April 15, 1912"), _s(Q_TITANIC, "in the 20th century")): (
        "1. The Titanic sank on April 15, 1912. (Given in S1)\n"
        "2. The year 1912 is in the 20th century. [[INFO]]\n"
        "3. Dates are given in the Gregorian calendar. [[ASSUMPTION]]\n"
        "4. Therefore, the Titanic sank in the 20th century.",
        "Score: 4",
    ),
}

# (question, system answer) -> direct 1-5 rating reply
DIRECT = {
    (Q_OAK, "on Oak Island, a small island off the coast of Nova Scotia, Canada"): "5",
    (Q_OAK, "Nova Scotia, Canada"): "4",
    (Q_OAK, "Oak Island"): "5",
    (Q_OAK, "The show is filmed in Los Angeles."): "1: The AI-generated answer is completely wrong.",
    (Q_FE, "Iron is best absorbed in the small intestine."): "4",
    (Q_FE, "the stomach"): "1",
    (Q_CYRUS, "Cyrus the Great, king of Persia"): "5",
    (Q_CYRUS, "an ancient Persian king"): "2",
    (Q_TITANIC, "1912"): "5",
    (Q_TITANIC, "in the 20th century"): "2",
}


def template_regex(template: str) -> re.Pattern:
    parts = re.split(r"(\{[a-z0-9_ ]+\})", template)
    out = []
    for part in parts:
        if re.fullmatch(r"\{[a-z0-9_ ]+\}", part):
            name = part[1:-1].replace(" ", "_")
            out.append(f"(?P<{name}>.*?)")
        else:
            out.append(re.escape(part))
    return re.compile("".join(out) + r"\Z", re.S)


QA2D_RE = template_regex(prompts.QA2D)
ENTAIL_RE = template_regex(prompts.ENTAILMENT)
EXPLAIN_RE = template_regex(prompts.EXPLAIN)
DIRECT_RE = template_regex(prompts.SCORE_DIRECT)


class Responder:
    """Answer requests from lookup tables; unknown requests raise KeyError.

    ``overrides`` maps (kind, key) to a replacement reply, for tests that need
    one response changed.
    """

    def __init__(self, overrides: dict | None = None):
        self.overrides = overrides or {}
        self.calls = 0

    def _lookup(self, kind, key, table):
        if (kind, key) in self.overrides:
            return self.overrides[(kind, key)]
        return table[key]

    def __call__(self, request: ChatRequest) -> str:
        self.calls += 1
        first = request.messages[0].content
        if len(request.messages) == 3 and request.messages[2].content == prompts.RATE_EXPLANATION:
            m = EXPLAIN_RE.match(first)
            key = (m["s1"], m["s2"])
            return self._lookup("rate", key, {k: v[1] for k, v in EXPLANATIONS.items()})
        if m := QA2D_RE.match(first):
            return self._lookup("qa2d", (m["question"], m["answer"]), STATEMENTS)
        if m := ENTAIL_RE.match(first):
            return self._lookup("label", (m["premise"], m["hypothesis"]), LABELS)
        if m := EXPLAIN_RE.match(first):
            key = (m["s1"], m["s2"])
            return self._lookup("explain", key, {k: v[0] for k, v in EXPLANATIONS.items()})
        if m := DIRECT_RE.match(first):
            return self._lookup("direct", (m["question"], m["system_answer"]), DIRECT)
        raise KeyError(f"unscripted request: {first[:80]!r}")


def scripted_gateway(overrides: dict | None = None, cache: TranscriptCache | None = None) -> Gateway:
    return Gateway(FunctionBackend(Responder(overrides)), cache or TranscriptCache())


SYNTH_GOLD = "G"


def synthetic_item(n: int, rank: int, accepted, steps: int = 2, system: str = "sys") -> EvalItem:
    """Item whose system answer spells out the rank and explanation length it should get."""
    return EvalItem(f"s{n:03d}", "synthetic?", (SYNTH_GOLD,), system, f"r{rank} k{steps} #{n}", accepted)


def label_gateway(forward, backward) -> Gateway:
    """QA2D echoes the answer. Entailment returns ``forward`` when the premise
    is the gold statement "G" and ``backward`` otherwise."""

    def fn(request: ChatRequest) -> str:
        text = request.messages[0].content
        if m := QA2D_RE.match(text):
            return m["answer"]
        m = ENTAIL_RE.match(text)
        return (forward if m["premise"] == SYNTH_GOLD else backward).value

    return Gateway(FunctionBackend(fn))


def synthetic_gateway(flips=frozenset()) -> Gateway:
    """QA2D echoes the answer; labels, explanations and scores follow the answer text.

    ``flips`` holds (seed, answer) pairs whose gold->system label is inverted
    under that seed.
    """

    def fn(request: ChatRequest) -> str:
        first = request.messages[0].content
        if m := QA2D_RE.match(first):
            return m["answer"]
        if m := ENTAIL_RE.match(first):
            forward = m["premise"] == SYNTH_GOLD
            answer = m["hypothesis"] if forward else m["premise"]
            rank = int(answer[1])
            holds = rank in (2, 3) if forward else rank in (1, 2)
            if forward and (request.config.seed, answer) in flips:
                holds = not holds
            return "entailment" if holds else "neutral"
        if len(request.messages) == 3:
            return "1"
        if m := EXPLAIN_RE.match(first):
            steps = int(m["s2"].split()[1][1:])
            return "\n".join(f"{i + 1}. step" for i in range(steps))
        return "3"

    return Gateway(FunctionBackend(fn))


def build_fixtures() -> None:
    from entail_eval.harness.pipeline import RunOptions, run_evaluate
    from entail_eval.model import Scheme

    FIXTURES.mkdir(exist_ok=True)
    with open(ITEMS_PATH, "w", encoding="utf-8") as fh:
        for item in ITEMS:
            fh.write(json.dumps(item.to_dict(), ensure_ascii=False) + "\n")

    gateway = scripted_gateway()
    run_evaluate(
        ITEMS,
        gateway,
        BackendConfig(),
        RunOptions(schemes=tuple(Scheme), population="all", workers=1),
    )
    fixed = TranscriptCache()
    for key in gateway.cache.keys():
        fixed.put(replace(gateway.cache.get(key), created_at=RECORDED_AT))
    n = fixed.export(CACHE_PATH)
    print(f"wrote {len(ITEMS)} items and {n} transcripts to {FIXTURES}")


if __name__ == "__main__":
    build_fixtures()
