"""Linearization schemes and the generation parser.

A scheme turns a labeled post into one input/output text pair.  The input
is always "Post: {text} {first question}"; the output interleaves answers
with the remaining questions and contains the hate-speech answer exactly
once.  Subtask answer alphabets:

    OFF, HS   Yes | No
    GD        Group | Individual | None
    GI        comma-separated canonical group ids, or None
    IMPL      implied-stereotype text, or None

Parsing inverts the grammar by scanning the scheme's question markers left
to right (case-insensitive, leftmost, non-overlapping).  When a marker is
missing, the answer under scan is delimited by the next marker that can
still be found, everything from the missing marker on is dropped, and the
prediction is flagged invalid; downstream scoring treats a missing HS
answer as "No" and reports the invalid rate separately.  The parser is
total: it never raises on generated text.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

from fewhate.corpus.records import PostRecord, Source, TargetType


class Subtask(Enum):
    OFF = "OFF"
    GD = "GD"
    GI = "GI"
    IMPL = "IMPL"
    HS = "HS"


class Variant(Enum):
    BASELINE = "Baseline"
    MINIMAL_DECOMPOSITION = "MinimalDecomposition"
    FULL_SUBTASKS = "FullSubtasks"
    WITH_IMPLICATION = "WithImplication"


# Question strings are fixed verbatim; the GD question reads "Target
# implication?" even though the answer is the target category.
QUESTIONS = {
    Subtask.OFF: "Offensive?",
    Subtask.GD: "Target implication?",
    Subtask.GI: "Targeted minorities?",
    Subtask.IMPL: "Implied stereotype?",
    Subtask.HS: "Hate speech?",
}

DEFAULT_FULL_ORDER = (Subtask.OFF, Subtask.GD, Subtask.GI, Subtask.HS)

_REQUIRED_FIELDS = {
    Variant.BASELINE: {Subtask.HS},
    Variant.MINIMAL_DECOMPOSITION: {Subtask.OFF, Subtask.GD, Subtask.HS},
    Variant.FULL_SUBTASKS: {Subtask.OFF, Subtask.GD, Subtask.GI, Subtask.HS},
    Variant.WITH_IMPLICATION: {Subtask.OFF, Subtask.GD, Subtask.GI, Subtask.IMPL, Subtask.HS},
}

_WS_RE = re.compile(r"\s+")


class SchemeError(ValueError):
    pass


@dataclass
class SchemeConfig:
    variant: Variant
    field_order: tuple[Subtask, ...]
    prompt_table: dict[Subtask, str] = field(default_factory=lambda: dict(QUESTIONS))

    def __post_init__(self) -> None:
        self.field_order = tuple(self.field_order)
        if self.field_order.count(Subtask.HS) != 1:
            raise SchemeError("HS must appear exactly once")
        required = _REQUIRED_FIELDS[self.variant]
        if set(self.field_order) != required or len(self.field_order) != len(required):
            raise SchemeError(
                f"{self.variant.value} order must be a permutation of "
                f"{sorted(f.value for f in required)}, got {self.field_order}")
        if self.variant is Variant.WITH_IMPLICATION:
            order = self.field_order
            if order.index(Subtask.IMPL) + 1 != order.index(Subtask.HS):
                raise SchemeError("IMPL must sit immediately before HS")
        missing = [f for f in self.field_order if f not in self.prompt_table]
        if missing:
            raise SchemeError(f"prompt table lacks questions for {missing}")

    def fingerprint(self) -> str:
        tags = {
            Variant.BASELINE: "baseline",
            Variant.MINIMAL_DECOMPOSITION: "minimal",
            Variant.FULL_SUBTASKS: "full",
            Variant.WITH_IMPLICATION: "implication",
        }
        return f"{tags[self.variant]}:{'-'.join(f.value for f in self.field_order)}"


def baseline() -> SchemeConfig:
    return SchemeConfig(Variant.BASELINE, (Subtask.HS,))


def minimal() -> SchemeConfig:
    return SchemeConfig(Variant.MINIMAL_DECOMPOSITION, (Subtask.OFF, Subtask.GD, Subtask.HS))


def full_subtasks(order: tuple[Subtask, ...] = DEFAULT_FULL_ORDER) -> SchemeConfig:
    return SchemeConfig(Variant.FULL_SUBTASKS, order)


def with_implication() -> SchemeConfig:
    return SchemeConfig(
        Variant.WITH_IMPLICATION,
        (Subtask.OFF, Subtask.GD, Subtask.GI, Subtask.IMPL, Subtask.HS))


def enumerate_order_variants() -> list[SchemeConfig]:
    """The five studied positions of the HS answer among the subtasks."""
    orders = [
        (Subtask.OFF, Subtask.GD, Subtask.GI, Subtask.HS),
        (Subtask.OFF, Subtask.GD, Subtask.HS, Subtask.GI),
        (Subtask.OFF, Subtask.HS, Subtask.GD, Subtask.GI),
        (Subtask.HS, Subtask.OFF, Subtask.GD, Subtask.GI),
        (Subtask.GD, Subtask.GI, Subtask.OFF, Subtask.HS),
    ]
    return [full_subtasks(order) for order in orders]


def all_variants() -> list[SchemeConfig]:
    """Baseline, minimal, the five full orders, and the implication scheme."""
    return [baseline(), minimal(), *enumerate_order_variants(), with_implication()]


@dataclass
class LinearizedExample:
    id: str
    input: str
    output: str
    scheme: str

    def to_json(self) -> dict:
        return {"id": self.id, "input": self.input, "output": self.output}


@dataclass
class ParsedPrediction:
    offensive: bool | None = None
    target_type: TargetType | None = None
    groups: list[str] = field(default_factory=list)
    implication: str | None = None
    hs: bool | None = None
    valid: bool = False
    raw: str = ""


def _yesno(value: bool) -> str:
    return "Yes" if value else "No"


def _answer(record: PostRecord, task: Subtask, strict: bool) -> str:
    if task is Subtask.HS:
        return _yesno(record.hs)
    if task is Subtask.OFF:
        if record.offensive is None:
            if strict:
                raise SchemeError(f"{record.id}: no offensiveness label for OFF")
            return _yesno(record.hs)
        return _yesno(record.offensive)
    if task is Subtask.GD:
        if record.target_type is None:
            if strict:
                raise SchemeError(f"{record.id}: no target annotation for GD")
            return (TargetType.GROUP if record.hs else TargetType.NONE).value
        return record.target_type.value
    if task is Subtask.GI:
        if strict and record.source is not Source.SBIC:
            raise SchemeError(
                f"{record.id}: GI demands group annotations; {record.source.value} "
                "records have none (decomposed training is SBIC-only)")
        return ", ".join(record.groups) if record.groups else "None"
    if task is Subtask.IMPL:
        if strict and record.source is not Source.SBIC:
            raise SchemeError(f"{record.id}: IMPL demands stereotype annotations")
        return record.implication if record.implication else "None"
    raise SchemeError(f"unknown subtask {task}")


def linearize_input(text: str, config: SchemeConfig) -> str:
    first_question = config.prompt_table[config.field_order[0]]
    return f"Post: {text} {first_question}"


def render_output(answers: dict[Subtask, str], config: SchemeConfig) -> str:
    parts = [answers[config.field_order[0]]]
    for task in config.field_order[1:]:
        parts.append(config.prompt_table[task])
        parts.append(answers[task])
    return " ".join(parts)


def linearize(record: PostRecord, config: SchemeConfig, strict: bool = True) -> LinearizedExample:
    """Emit the input/output pair for a record under a scheme.

    Strict mode (training data) fails when the record lacks a field the
    scheme demands; non-strict fills unannotated subtasks consistently
    with the record's hs label, which is what mock generators echo.
    """
    answers = {task: _answer(record, task, strict) for task in config.field_order}
    return LinearizedExample(
        id=record.id,
        input=linearize_input(record.text, config),
        output=render_output(answers, config),
        scheme=config.fingerprint(),
    )


_YESNO_VALUES = {"yes": True, "no": False}
_TARGET_VALUES = {t.value.lower(): t for t in TargetType}


def _parse_answer(span: str, task: Subtask, parsed: ParsedPrediction) -> bool:
    """Normalize one answer span into the prediction; False when it fails."""
    text = span.strip()
    if not text:
        return False
    lowered = text.lower()
    if task in (Subtask.OFF, Subtask.HS):
        if lowered not in _YESNO_VALUES:
            return False
        value = _YESNO_VALUES[lowered]
        if task is Subtask.OFF:
            parsed.offensive = value
        else:
            parsed.hs = value
        return True
    if task is Subtask.GD:
        if lowered not in _TARGET_VALUES:
            return False
        parsed.target_type = _TARGET_VALUES[lowered]
        return True
    if task is Subtask.GI:
        if lowered == "none":
            parsed.groups = []
            return True
        groups = [_WS_RE.sub(" ", g.strip().lower()) for g in text.split(",")]
        groups = [g for g in groups if g]
        if not groups:
            return False
        parsed.groups = groups
        return True
    if task is Subtask.IMPL:
        parsed.implication = None if lowered == "none" else text
        return True
    return False


def parse(generation: str, config: SchemeConfig) -> ParsedPrediction:
    """Recover structured answers from a raw generation.

    Markers are searched case-insensitively, leftmost first, in scheme
    order.  On the first missing marker the current answer is closed at
    the next marker still findable and all later fields are dropped.
    """
    parsed = ParsedPrediction(raw=generation)
    order = config.field_order
    haystack = generation.lower()

    spans: list[tuple[Subtask, str]] = []
    structure_ok = True
    pos = 0
    answer_start = 0
    for i in range(1, len(order)):
        marker = config.prompt_table[order[i]].lower()
        found = haystack.find(marker, pos)
        if found < 0:
            structure_ok = False
            # close the answer under scan at the next findable marker
            boundary = len(generation)
            for later in order[i + 1:]:
                alt = haystack.find(config.prompt_table[later].lower(), pos)
                if alt >= 0:
                    boundary = alt
                    break
            spans.append((order[i - 1], generation[answer_start:boundary]))
            break
        spans.append((order[i - 1], generation[answer_start:found]))
        pos = found + len(marker)
        answer_start = pos
    else:
        spans.append((order[-1], generation[answer_start:]))

    # evaluate every span: fields that normalize are retained even when an
    # earlier one fails
    flags = [_parse_answer(span, task, parsed) for task, span in spans]
    parsed.valid = structure_ok and all(flags) and len(spans) == len(order)
    return parsed


def write_pairs(examples: Iterable[LinearizedExample], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(json.dumps(ex.to_json(), ensure_ascii=False) + "\n")
            n += 1
    return n


def write_adapter_inputs(rows: Iterable[tuple[str, str]], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for row_id, text in rows:
            f.write(json.dumps({"id": row_id, "input": text}, ensure_ascii=False) + "\n")
            n += 1
    return n


def write_generations(rows: Iterable[tuple[str, str]], path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for row_id, text in rows:
            f.write(json.dumps({"id": row_id, "generation": text}, ensure_ascii=False) + "\n")
            n += 1
    return n


def read_pairs(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def read_generations(path: str | Path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                obj = json.loads(line)
                out[obj["id"]] = obj["generation"]
    return out
