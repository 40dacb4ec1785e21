"""Loaders for the three out-of-distribution evaluation corpora.

Each loader consumes the corpus' official release format and produces
PostRecords with split=Test.  Only the fields a corpus annotates are
populated; the rest stay null.

HateXplain  dataset.json (post_id -> {post_tokens, annotators:[{label}]})
            plus optional post_id_divisions.json to select a split.
            Majority label: hatespeech -> hs; offensive -> offensive only;
            normal -> neither.  No majority counts as a tie and is scored
            non-hateful (configurable: offensive_as_hs).
HS18        annotations_metadata.csv with file_id/label columns and an
            optional directory of one-sentence text files.  Labels hate and
            noHate map to hs true/false; anything else (relation, skip,
            idk/skip) is excluded and counted.
Ethos       semicolon-delimited CSV with comment;isHate where isHate is a
            real-valued score in [0, 1]; hs when score >= 0.5.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from pathlib import Path

from fewhate.corpus.records import PostRecord, Source, Split

HS18_LABELS = ("hate", "noHate")


class OodFormatError(ValueError):
    pass


def load_hatexplain(
    dataset_path: str | Path,
    divisions_path: str | Path | None = None,
    split: str = "test",
    offensive_as_hs: bool = False,
) -> tuple[list[PostRecord], int]:
    """Load HateXplain; returns (records, tie_count)."""
    with open(dataset_path, encoding="utf-8") as f:
        data = json.load(f)
    keep: set[str] | None = None
    if divisions_path is not None:
        with open(divisions_path, encoding="utf-8") as f:
            divisions = json.load(f)
        if split not in divisions:
            raise OodFormatError(f"{divisions_path}: no {split!r} division "
                                 f"(has {sorted(divisions)})")
        keep = set(divisions[split])

    records = []
    ties = 0
    for post_id in sorted(data):
        if keep is not None and post_id not in keep:
            continue
        entry = data[post_id]
        labels = Counter(a["label"] for a in entry["annotators"])
        top = labels.most_common()
        majority = top[0][0] if len(top) == 1 or top[0][1] > top[1][1] else None
        if majority is None:
            ties += 1
        hateful = majority == "hatespeech"
        offensive_majority = majority == "offensive"
        hs = hateful or (offensive_as_hs and offensive_majority)
        records.append(PostRecord(
            id=post_id,
            text=" ".join(entry["post_tokens"]),
            offensive=hs or offensive_majority,
            target_type=None,
            groups=[],
            implication=None,
            hs=hs,
            source=Source.HATEXPLAIN,
            split=Split.TEST,
        ))
    return records, ties


def load_hs18(
    metadata_path: str | Path,
    files_dir: str | Path | None = None,
) -> tuple[list[PostRecord], dict[str, int]]:
    """Load HS18 sentences; returns (records, excluded-label counts)."""
    records = []
    excluded: Counter[str] = Counter()
    with open(metadata_path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or "file_id" not in reader.fieldnames \
                or "label" not in reader.fieldnames:
            raise OodFormatError(f"{metadata_path}: expected file_id and label columns")
        for row in reader:
            label = (row["label"] or "").strip()
            if label not in HS18_LABELS:
                excluded[label] += 1
                continue
            file_id = row["file_id"].strip()
            text = ""
            if files_dir is not None:
                text = Path(files_dir, f"{file_id}.txt").read_text("utf-8").strip()
            records.append(PostRecord(
                id=file_id,
                text=text,
                offensive=None,
                target_type=None,
                groups=[],
                implication=None,
                hs=label == "hate",
                source=Source.HS18,
                split=Split.TEST,
            ))
    return records, dict(excluded)


def load_ethos(path: str | Path) -> list[PostRecord]:
    """Load the Ethos binary file; fails on scores outside [0, 1]."""
    records = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter=";")
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["comment", "isHate"]:
            raise OodFormatError(f"{path}: expected 'comment;isHate' header, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            # a comment containing ';' spills into extra cells; the score is last
            text = ";".join(row[:-1])
            try:
                score = float(row[-1])
            except ValueError:
                raise OodFormatError(f"{path}:{lineno}: unparseable isHate score {row[-1]!r}")
            if not 0.0 <= score <= 1.0:
                raise OodFormatError(f"{path}:{lineno}: isHate score {score} outside [0, 1]")
            records.append(PostRecord(
                id=f"ethos-{lineno - 2:04d}",
                text=text,
                offensive=None,
                target_type=None,
                groups=[],
                implication=None,
                hs=score >= 0.5,
                source=Source.ETHOS,
                split=Split.TEST,
            ))
    return records
