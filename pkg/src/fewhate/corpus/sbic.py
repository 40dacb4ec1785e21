"""SBIC ingestion: per-annotator rows to one labeled record per post.

Input is a CSV with one row per (post, annotator).  Expected columns
(official release headers are accepted as aliases):

    post_id            (HITId)
    text               (post)
    offensive_score    (offensiveYN)   one of 0, 0.5, 1
    who_target_score   (whoTarget)     in [0, 1], empty unless offensive
    target_minorities  (targetMinority)
    target_stereotype  (targetStereotype)

Label derivation per post:
    offensive    mean offensive_score >= 0.5
    target_type  Group when offensive and mean who_target_score >= 0.5
                 (over annotators that supplied one), Individual when
                 offensive otherwise, None when not offensive
    groups       canonicalized union of minorities named by group-marking
                 annotators (who_target_score >= 0.5), sorted; cleared
                 unless target_type is Group
    implication  most frequent nonempty stereotype, lexicographic tie-break
    hs           offensive and target_type is Group
"""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path

from fewhate.corpus.records import PostRecord, Source, Split, TargetType, canonicalize_group

OFFENSIVE_SCORES = (0.0, 0.5, 1.0)

_COLUMN_ALIASES = {
    "post_id": ("post_id", "HITId"),
    "text": ("text", "post"),
    "offensive_score": ("offensive_score", "offensiveYN"),
    "who_target_score": ("who_target_score", "whoTarget"),
    "target_minorities": ("target_minorities", "targetMinority"),
    "target_stereotype": ("target_stereotype", "targetStereotype"),
}


class SbicFormatError(ValueError):
    pass


@dataclass
class RawSbicAnnotation:
    """One annotator's judgment of one post."""

    post_id: str
    text: str
    offensive_score: float
    who_target_score: float | None
    target_minorities: list[str]
    target_stereotype: str


def _resolve_columns(header: list[str], path: str | Path) -> dict[str, str]:
    resolved = {}
    for canonical, candidates in _COLUMN_ALIASES.items():
        for name in candidates:
            if name in header:
                resolved[canonical] = name
                break
        else:
            raise SbicFormatError(f"{path}: missing required column {canonical!r} "
                                  f"(accepted headers: {', '.join(candidates)})")
    return resolved


def load_sbic(path: str | Path) -> list[RawSbicAnnotation]:
    """Load per-annotator rows; fails with the row number on bad scores."""
    annotations = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise SbicFormatError(f"{path}: empty file")
        cols = _resolve_columns(list(reader.fieldnames), path)
        for lineno, row in enumerate(reader, start=2):
            raw_off = (row[cols["offensive_score"]] or "").strip()
            try:
                off = float(raw_off)
            except ValueError:
                raise SbicFormatError(f"{path}:{lineno}: unparseable offensive_score {raw_off!r}")
            if off not in OFFENSIVE_SCORES:
                raise SbicFormatError(f"{path}:{lineno}: offensive_score {off} not in {{0, 0.5, 1}}")
            raw_who = (row[cols["who_target_score"]] or "").strip()
            who: float | None = None
            if raw_who:
                try:
                    who = float(raw_who)
                except ValueError:
                    raise SbicFormatError(f"{path}:{lineno}: unparseable who_target_score {raw_who!r}")
                if not 0.0 <= who <= 1.0:
                    raise SbicFormatError(f"{path}:{lineno}: who_target_score {who} outside [0, 1]")
            if off == 0.0:
                who = None  # target judgments only apply to offensive posts
            minorities_cell = (row[cols["target_minorities"]] or "").strip()
            annotations.append(RawSbicAnnotation(
                post_id=(row[cols["post_id"]] or "").strip(),
                text=row[cols["text"]] or "",
                offensive_score=off,
                who_target_score=who,
                target_minorities=[minorities_cell] if minorities_cell else [],
                target_stereotype=(row[cols["target_stereotype"]] or "").strip(),
            ))
    return annotations


def aggregate_sbic(
    annotations: list[RawSbicAnnotation],
    split: Split = Split.TRAIN_POOL,
) -> tuple[list[PostRecord], list[str]]:
    """Aggregate annotator rows into one PostRecord per post.

    Returns (records, warnings).  Output is ordered by post id and does not
    depend on annotation order.  Warnings flag offensive posts with no
    target judgments (resolved as Individual) and group-targeted posts with
    no named minority (downgraded to Individual so labels stay consistent).
    """
    by_post: dict[str, list[RawSbicAnnotation]] = defaultdict(list)
    for ann in annotations:
        by_post[ann.post_id].append(ann)

    records = []
    warnings = []
    for post_id in sorted(by_post):
        group = by_post[post_id]
        text = min(a.text for a in group)
        offensive = sum(a.offensive_score for a in group) / len(group) >= 0.5

        who_scores = [a.who_target_score for a in group if a.who_target_score is not None]
        if not offensive:
            target_type = TargetType.NONE
        elif not who_scores:
            target_type = TargetType.INDIVIDUAL
            warnings.append(f"{post_id}: offensive but no target judgments; kept Individual")
        elif sum(who_scores) / len(who_scores) >= 0.5:
            target_type = TargetType.GROUP
        else:
            target_type = TargetType.INDIVIDUAL

        groups: list[str] = []
        if target_type is TargetType.GROUP:
            seen = set()
            for ann in group:
                if ann.who_target_score is not None and ann.who_target_score >= 0.5:
                    for raw in ann.target_minorities:
                        for gid in canonicalize_group(raw):
                            if gid not in seen:
                                seen.add(gid)
                                groups.append(gid)
            groups.sort()
            if not groups:
                target_type = TargetType.INDIVIDUAL
                warnings.append(f"{post_id}: group-targeted but no minority named; downgraded to Individual")

        stereotypes = Counter(a.target_stereotype for a in group if a.target_stereotype)
        implication = None
        if stereotypes:
            top = max(stereotypes.values())
            implication = min(s for s, n in stereotypes.items() if n == top)

        hs = offensive and target_type is TargetType.GROUP
        records.append(PostRecord(
            id=post_id, text=text, offensive=offensive, target_type=target_type,
            groups=groups, implication=implication, hs=hs,
            source=Source.SBIC, split=split,
        ))
    return records, warnings
