"""Canonical post records and the corpus file format.

Every corpus (SBIC, HateXplain, HS18, Ethos) is normalized into PostRecord.
The on-disk form is one JSON object per line with exactly these fields:

    id, text, offensive, target_type, groups, implication, hs, source, split

`offensive`, `target_type` and `implication` are null for corpora that do
not annotate them; `groups` is always a JSON array.  A record is hate
speech when it is offensive and targets a group, so `hs` implies
`offensive` wherever both are known.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable


class TargetType(Enum):
    GROUP = "Group"
    INDIVIDUAL = "Individual"
    NONE = "None"


class Source(Enum):
    SBIC = "SBIC"
    HATEXPLAIN = "HateXplain"
    HS18 = "HS18"
    ETHOS = "Ethos"


class Split(Enum):
    TRAIN_POOL = "TrainPool"
    VAL_POOL = "ValPool"
    TEST = "Test"


@dataclass
class PostRecord:
    """One annotated post with derived binary hate-speech label."""

    id: str
    text: str
    offensive: bool | None
    target_type: TargetType | None
    groups: list[str]
    implication: str | None
    hs: bool
    source: Source
    split: Split

    def validate(self) -> list[str]:
        """Return invariant violations (empty list when consistent)."""
        problems = []
        if self.hs and self.offensive is False:
            problems.append(f"{self.id}: hs record marked not offensive")
        if self.source is Source.SBIC:
            expected_hs = bool(self.offensive) and self.target_type is TargetType.GROUP
            if self.hs != expected_hs:
                problems.append(f"{self.id}: hs does not match offensive/target_type")
            if self.target_type not in (TargetType.NONE, None) and not self.offensive:
                problems.append(f"{self.id}: targeted but not offensive")
            if (self.target_type is TargetType.GROUP) != bool(self.groups):
                problems.append(f"{self.id}: groups/target_type mismatch")
        return problems

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "offensive": self.offensive,
            "target_type": self.target_type.value if self.target_type else None,
            "groups": list(self.groups),
            "implication": self.implication,
            "hs": self.hs,
            "source": self.source.value,
            "split": self.split.value,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PostRecord":
        return cls(
            id=obj["id"],
            text=obj["text"],
            offensive=obj["offensive"],
            target_type=TargetType(obj["target_type"]) if obj["target_type"] else None,
            groups=list(obj["groups"]),
            implication=obj["implication"],
            hs=obj["hs"],
            source=Source(obj["source"]),
            split=Split(obj["split"]),
        )


_SPLIT_RE = re.compile(r"[;,]")
_WS_RE = re.compile(r"\s+")
_alias_table: dict[str, str] | None = None


def _aliases() -> dict[str, str]:
    # Curated surface-variant merges (e.g. "black people" -> "black folks");
    # shipped as package data so strata stay stable across runs.
    global _alias_table
    if _alias_table is None:
        raw = resources.files("fewhate.data").joinpath("group_aliases.json").read_text("utf-8")
        _alias_table = json.loads(raw)["aliases"]
    return _alias_table


def canonicalize_group(raw: str) -> list[str]:
    """Split a free-text minority mention into canonical group ids.

    Splits on commas/semicolons, lowercases, trims and collapses internal
    whitespace, applies the alias table, drops empties and duplicates.
    Deterministic; order of first appearance is preserved.
    """
    out: list[str] = []
    seen: set[str] = set()
    for token in _SPLIT_RE.split(raw or ""):
        norm = _WS_RE.sub(" ", token.strip().lower())
        if not norm:
            continue
        norm = _aliases().get(norm, norm)
        if norm not in seen:
            seen.add(norm)
            out.append(norm)
    return out


def write_corpus(records: Iterable[PostRecord], path: str | Path) -> int:
    """Write records as line-delimited JSON; returns the record count."""
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=True) + "\n")
            n += 1
    return n


def read_corpus(path: str | Path) -> list[PostRecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(PostRecord.from_json(json.loads(line)))
    return records
