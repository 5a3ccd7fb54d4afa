"""Reading evaluation items from the normalized JSONL format or an EVOUNA-style export."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional

from entail_eval.errors import DatasetError, ValidationError
from entail_eval.model import EvalItem

logger = logging.getLogger(__name__)

FORMATS = ("normalized", "evouna")
REQUIRED_FIELDS = ("id", "question", "gold_answers", "system_name", "system_answer")

_TRUE = {"true", "yes", "y", "1", "correct"}
_FALSE = {"false", "no", "n", "0", "incorrect", "wrong"}


@dataclass
class IngestResult:
    items: list[EvalItem]
    errors: list[str] = field(default_factory=list)


def coerce_judgment(value: Any) -> Optional[bool]:
    if value is None or isinstance(value, bool):
        return value
    if isinstance(value, (int, float)) and value in (0, 1):
        return bool(value)
    if isinstance(value, str):
        v = value.strip().lower()
        if v in _TRUE:
            return True
        if v in _FALSE:
            return False
        if v == "":
            return None
    raise ValidationError(f"cannot read human judgment from {value!r}")


def split_golds(value: Any, separator: Optional[str]) -> list[str]:
    if isinstance(value, str):
        parts = value.split(separator) if separator else [value]
    elif isinstance(value, (list, tuple)):
        parts = []
        for v in value:
            if not isinstance(v, str):
                raise ValidationError("gold answers must be strings")
            parts.extend(v.split(separator) if separator else [v])
    else:
        raise ValidationError("gold_answers must be a string or a list of strings")
    return [p.strip() for p in parts if p.strip()]


def _records(path: Path) -> Iterator[tuple[int, Any]]:
    """Yield (line or index, parsed object). Accepts JSONL or one JSON array."""
    text = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("["):
        for i, obj in enumerate(json.loads(text), start=1):
            yield i, obj
        return
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            yield line_no, json.loads(line)
        except json.JSONDecodeError as exc:
            yield line_no, exc


def _normalized(path: Path, separator: Optional[str]) -> Iterator[tuple[str, Any]]:
    for line_no, obj in _records(path):
        where = f"line {line_no}"
        if isinstance(obj, Exception):
            yield where, ValidationError(f"invalid JSON: {obj}")
            continue
        if not isinstance(obj, dict):
            yield where, ValidationError("record is not a JSON object")
            continue
        missing = [f for f in REQUIRED_FIELDS if f not in obj]
        if missing:
            yield where, ValidationError(f"missing field '{missing[0]}'")
            continue
        try:
            yield where, EvalItem(
                id=str(obj["id"]),
                question=_str(obj, "question"),
                gold_answers=split_golds(obj["gold_answers"], separator),
                system_name=_str(obj, "system_name"),
                system_answer=_str(obj, "system_answer"),
                human_judgment=coerce_judgment(obj.get("human_judgment")),
            )
        except ValidationError as exc:
            yield where, exc


def _str(obj: dict, name: str) -> str:
    value = obj[name]
    if not isinstance(value, str):
        raise ValidationError(f"field '{name}' must be a string")
    return value


def _evouna(path: Path, field_map: dict) -> Iterator[tuple[str, Any]]:
    systems = field_map.get("systems")
    if not systems or not isinstance(systems, dict):
        raise DatasetError("the EVOUNA importer needs a field map with a 'systems' mapping")
    q_field = field_map.get("question", "question")
    gold_field = field_map.get("gold", "golden_answer")
    id_field = field_map.get("id")
    separator = field_map.get("gold_separator", "/")

    for index, obj in _records(path):
        base = f"record {index}"
        if isinstance(obj, Exception) or not isinstance(obj, dict):
            yield base, ValidationError("record is not a JSON object")
            continue
        item_id = str(obj[id_field]) if id_field and id_field in obj else f"q{index}"
        for system_name, cols in systems.items():
            where = f"{base} ({system_name})"
            if isinstance(cols, str):
                cols = {"answer": cols}
            try:
                for needed in (q_field, gold_field, cols["answer"]):
                    if needed not in obj:
                        raise ValidationError(f"missing field '{needed}'")
                judgment_col = cols.get("judgment")
                yield where, EvalItem(
                    id=item_id,
                    question=_str(obj, q_field),
                    gold_answers=split_golds(obj[gold_field], separator),
                    system_name=str(system_name),
                    system_answer=_str(obj, cols["answer"]),
                    human_judgment=coerce_judgment(obj.get(judgment_col)) if judgment_col else None,
                )
            except ValidationError as exc:
                yield where, exc


def ingest(
    path: str | Path,
    fmt: str = "normalized",
    *,
    field_map: Optional[dict] = None,
    gold_separator: Optional[str] = None,
    max_invalid_fraction: float = 0.10,
) -> IngestResult:
    """Load and validate items.

    Invalid lines and duplicate ``(id, system_name)`` pairs are collected as
    errors. If more than ``max_invalid_fraction`` of the records are invalid
    the whole load fails with :class:`DatasetError`.
    """
    path = Path(path)
    if fmt == "normalized":
        source = _normalized(path, gold_separator)
    elif fmt == "evouna":
        source = _evouna(path, field_map or {})
    else:
        raise DatasetError(f"unknown dataset format {fmt!r}; expected one of {FORMATS}")

    items: list[EvalItem] = []
    errors: list[str] = []
    seen: set[tuple[str, str]] = set()
    total = 0
    for where, result in source:
        total += 1
        if isinstance(result, Exception):
            errors.append(f"{path.name} {where}: {result}")
            continue
        if result.key in seen:
            errors.append(
                f"{path.name} {where}: duplicate item id={result.id!r} system={result.system_name!r}"
            )
            continue
        seen.add(result.key)
        items.append(result)

    if total == 0:
        raise DatasetError(f"{path} contains no records")
    if errors and len(errors) / total > max_invalid_fraction:
        raise DatasetError(
            f"{len(errors)} of {total} records in {path} are invalid "
            f"(limit {max_invalid_fraction:.0%}); first: {errors[0]}",
            errors,
        )
    for err in errors:
        logger.warning("skipping %s", err)
    return IngestResult(items, errors)


def write_items(items: list[EvalItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_dict(), ensure_ascii=False) + "\n")
