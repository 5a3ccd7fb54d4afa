"""Prompt templates.

Placeholders are written ``{name}`` and are substituted in a single pass by
:func:`fill`, so braces inside substituted values are left untouched.
"""

from __future__ import annotations

import re

QA2D = (
    "Convert a question answer pair to a declarative statement, following these two examples:\n"
    "Q: where is the tv show the curse of oak island filmed\n"
    "A: Oak Island\n"
    "S: The TV show the Curse of Oak Island is filmed on Oak Island.\n"
    "\n"
    "Q: who wrote the first declaration of human rights\n"
    "A: Cyrus\n"
    "S: Cyrus wrote the first declaration of human rights\n"
    "\n"
    "Do not provide explanations. Provide the statement only. "
    "Follow the above examples and convert this pair:\n"
    "Q: {question}\n"
    "A: {answer}\n"
    "S:"
)

ENTAILMENT = (
    "Please identify whether the premise entails or contradicts the hypothesis in the "
    "following premise and hypothesis. The answer should be exact “entailment”, "
    "“contradiction”, or “neutral”. Provide only the answer from the three "
    "options. Do not provide explanations.\n"
    "\n"
    "Premise: {premise}\n"
    "Hypothesis: {hypothesis}\n"
    "\n"
    "Is it entailment, contradiction, or neutral?"
)

EXPLAIN = (
    "We have two statements S1 (the premise) and S2 (the hypothesis). S1 entails S2.\n"
    "\n"
    "S1: {s1}\n"
    "S2: {s2}\n"
    "Now, list the reasoning process step by step to show how S2 can be deduced from S1.\n"
    "List the steps as numbered statements, starting from 1.\n"
    "If a step involves information not mentioned in S1 and S2, append [[INFO]] after the step.\n"
    "If an assumption must be made to deduce S2 from S1, append [[ASSUMPTION]] after the step.\n"
    "Provide the reasoning steps only. Do not include any other information."
)

RATE_EXPLANATION = (
    "Based on the reasoning steps, rate how hard it is to deduce S2 from S1.\n"
    "1: Very easy\n"
    "2: Easy\n"
    "3: Neither easy nor hard\n"
    "4: Hard\n"
    "5: Very hard\n"
    "Consider how many assumptions are needed, how much information is needed, "
    "and how much reasoning is needed.\n"
    "Return a number from 1 to 5 only. Do not include any other information."
)

SCORE_DIRECT = (
    "Here is a question, a set of golden answers (split with /), an AI-generated answer. "
    "Can you judge whether the AI-generated answer is correct according to the question "
    "and golden answers? Simply give a score from 1 to 5.\n"
    "1: The AI-generated answer is completely wrong.\n"
    "2: The AI-generated answer is mostly wrong.\n"
    "3: The AI-generated answer is neither wrong nor right.\n"
    "4: The AI-generated answer is mostly right.\n"
    "5: The AI-generated answer is completely right.\n"
    "\n"
    "Question: {question}\n"
    "Golden answers: {golden answer}\n"
    "AI answer: {system answer}"
)

_PLACEHOLDER = re.compile(r"\{([a-z0-9_ ]+)\}")


def placeholders(template: str) -> list[str]:
    return _PLACEHOLDER.findall(template)


def fill(template: str, **values: str) -> str:
    """Substitute each placeholder exactly once.

    Keyword names map to placeholders with underscores read as spaces, so
    ``golden_answer=`` fills ``{golden answer}``.
    """
    wanted = {name.replace("_", " "): str(v) for name, v in values.items()}
    names = [n.replace("_", " ") for n in placeholders(template)]
    if sorted(names) != sorted(set(names)):
        raise ValueError("template repeats a placeholder")
    if set(names) != set(wanted):
        raise ValueError(f"template expects {sorted(names)}, got {sorted(wanted)}")
    return _PLACEHOLDER.sub(lambda m: wanted[m.group(1).replace("_", " ")], template)
