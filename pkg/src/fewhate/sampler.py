"""Seeded, nested, quota-stratified few-shot splits.

A split of size n holds exactly n/4 inoffensive posts, n/4 offensive but
non-hateful posts, and n/2 hateful posts.  The hateful budget is spread
evenly over group buckets (a post's bucket is its first canonical group):
buckets are visited round-robin in lexicographic order, with a seeded
shuffle inside each bucket.  An exhausted bucket drops out of the rotation
and is recorded, so remaining buckets keep the <=1 count spread.

Splits nest: the member list of size n is a strict prefix of the member
list of size 2n for the same pool and seed.  This holds because every
stratum is shuffled once per (pool, seed) and larger sizes only extend the
picks.  Ids are sorted before shuffling, so membership depends only on the
pool's content, not its file order.

Each extension block appends picks in stratum order: inoffensive, then
offensive non-hateful, then hateful (in rotation order).
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from fewhate import rng
from fewhate.corpus.records import PostRecord, Split

SIZES = (16, 32, 64, 128, 256, 512, 1024)

STRATUM_INOFFENSIVE = "inoffensive"
STRATUM_OFFENSIVE = "offensive_non_hs"
STRATUM_HS = "hs"


class QuotaError(ValueError):
    pass


def quota_for(size: int) -> dict[str, int]:
    if size % 4:
        raise QuotaError(f"size {size} not divisible by 4")
    return {
        STRATUM_INOFFENSIVE: size // 4,
        STRATUM_OFFENSIVE: size // 4,
        STRATUM_HS: size // 2,
    }


def stratum_of(record: PostRecord) -> str:
    if record.hs:
        return STRATUM_HS
    if record.offensive:
        return STRATUM_OFFENSIVE
    return STRATUM_INOFFENSIVE


def bucket_of(record: PostRecord) -> str:
    """Primary-group bucket: the first canonical group id."""
    return record.groups[0] if record.groups else ""


@dataclass
class FewShotSplit:
    seed: int
    size: int
    member_ids: list[str]
    quota: dict[str, int]

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "size": self.size,
            "member_ids": list(self.member_ids),
            "quota": dict(self.quota),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FewShotSplit":
        return cls(seed=obj["seed"], size=obj["size"],
                   member_ids=list(obj["member_ids"]), quota=dict(obj["quota"]))


@dataclass
class QuotaReport:
    size: int
    stratum_counts: dict[str, int]
    bucket_counts: dict[str, int]
    exhausted_buckets: list[str] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "stratum_counts": dict(self.stratum_counts),
            "bucket_counts": dict(self.bucket_counts),
            "exhausted_buckets": list(self.exhausted_buckets),
            "violations": list(self.violations),
        }


def _eligible(pool: list[PostRecord]) -> list[PostRecord]:
    # Test-split records never enter few-shot sets; records without an
    # offensiveness label cannot be stratified.
    return [r for r in pool if r.split is not Split.TEST and r.offensive is not None]


class _RoundRobin:
    """Cycles over lexicographically sorted, seeded-shuffled group buckets."""

    def __init__(self, buckets: dict[str, list[str]], generator) -> None:
        self.keys = sorted(buckets)
        self.queues = {k: rng.shuffled(sorted(buckets[k]), generator) for k in self.keys}
        self.cursors = {k: 0 for k in self.keys}
        self.exhausted: list[str] = []
        self._pos = 0

    def remaining(self) -> int:
        return sum(len(self.queues[k]) - self.cursors[k] for k in self.keys)

    def take(self, n: int) -> list[str]:
        out: list[str] = []
        active = [k for k in self.keys if self.cursors[k] < len(self.queues[k])]
        while len(out) < n:
            if not active:
                raise QuotaError(f"hs bucket rotation exhausted with {n - len(out)} picks left")
            index = self._pos % len(active)
            key = active[index]
            out.append(self.queues[key][self.cursors[key]])
            self.cursors[key] += 1
            if self.cursors[key] == len(self.queues[key]):
                self.exhausted.append(key)
                active.pop(index)
                # the element that followed the removed bucket now sits at
                # its index, so the rotation resumes exactly where it was
                self._pos = index % max(len(active), 1)
            else:
                self._pos = (index + 1) % len(active)
        return out


def _check_sizes(sizes: list[int]) -> list[int]:
    if not sizes:
        raise QuotaError("no sizes requested")
    ordered = sorted(sizes)
    for s in ordered:
        if s not in SIZES:
            raise QuotaError(f"size {s} not in the supported set {SIZES}")
    for a, b in zip(ordered, ordered[1:]):
        if b != 2 * a:
            raise QuotaError(f"sizes must double: {a} -> {b}")
    return ordered


def _build(pool: list[PostRecord], sizes: list[int], generator, seed: int) -> dict[int, FewShotSplit]:
    strata: dict[str, list[str]] = {STRATUM_INOFFENSIVE: [], STRATUM_OFFENSIVE: []}
    hs_buckets: dict[str, list[str]] = defaultdict(list)
    for record in pool:
        s = stratum_of(record)
        if s == STRATUM_HS:
            hs_buckets[bucket_of(record)].append(record.id)
        else:
            strata[s].append(record.id)

    inoffensive = rng.shuffled(sorted(strata[STRATUM_INOFFENSIVE]), generator)
    offensive = rng.shuffled(sorted(strata[STRATUM_OFFENSIVE]), generator)
    rotation = _RoundRobin(hs_buckets, generator)

    splits: dict[int, FewShotSplit] = {}
    members: list[str] = []
    taken = {STRATUM_INOFFENSIVE: 0, STRATUM_OFFENSIVE: 0, STRATUM_HS: 0}
    for size in sizes:
        quota = quota_for(size)
        for stratum, supply in ((STRATUM_INOFFENSIVE, inoffensive),
                                (STRATUM_OFFENSIVE, offensive)):
            need = quota[stratum] - taken[stratum]
            if taken[stratum] + need > len(supply):
                shortfall = taken[stratum] + need - len(supply)
                raise QuotaError(f"stratum {stratum}: short {shortfall} records for size {size}")
            members.extend(supply[taken[stratum]:taken[stratum] + need])
            taken[stratum] += need
        need_hs = quota[STRATUM_HS] - taken[STRATUM_HS]
        if need_hs > rotation.remaining():
            shortfall = need_hs - rotation.remaining()
            raise QuotaError(f"stratum {STRATUM_HS}: short {shortfall} records for size {size}")
        members.extend(rotation.take(need_hs))
        taken[STRATUM_HS] += need_hs
        splits[size] = FewShotSplit(seed=seed, size=size,
                                    member_ids=list(members), quota=quota)
    return splits


def build_nested_splits(pool: list[PostRecord], sizes: list[int], seed: int) -> dict[int, FewShotSplit]:
    """Build one split per size, nested smallest to largest."""
    ordered = _check_sizes(sizes)
    eligible = _eligible(pool)
    return _build(eligible, ordered, rng.stream(rng.TRAIN_STREAM, seed), seed)


def build_validation(
    pool: list[PostRecord],
    size: int,
    seed: int,
    exclude: FewShotSplit | None = None,
) -> FewShotSplit:
    """Build a validation split with the training stratification.

    Disjoint from the excluded (training) split and from test-split
    records.  Drawn from its own stream, so it never collides with the
    training split even when both come from one pool.
    """
    _check_sizes([size])
    excluded_ids = set(exclude.member_ids) if exclude else set()
    eligible = [r for r in _eligible(pool) if r.id not in excluded_ids]
    return _build(eligible, [size], rng.stream(rng.VAL_STREAM, seed, size), seed)[size]


def verify_quotas(split: FewShotSplit, pool: list[PostRecord]) -> QuotaReport:
    """Recompute strata from pool labels and list every violation."""
    by_id = {r.id: r for r in pool}
    report = QuotaReport(size=split.size, stratum_counts={
        STRATUM_INOFFENSIVE: 0, STRATUM_OFFENSIVE: 0, STRATUM_HS: 0,
    }, bucket_counts={})

    if len(split.member_ids) != split.size:
        report.violations.append(
            f"split has {len(split.member_ids)} members, expected {split.size}")
    if len(set(split.member_ids)) != len(split.member_ids):
        report.violations.append("duplicate member ids")

    for member in split.member_ids:
        record = by_id.get(member)
        if record is None:
            report.violations.append(f"unknown member id {member}")
            continue
        s = stratum_of(record)
        report.stratum_counts[s] += 1
        if s == STRATUM_HS:
            b = bucket_of(record)
            report.bucket_counts[b] = report.bucket_counts.get(b, 0) + 1

    for stratum, expected in quota_for(split.size).items():
        got = report.stratum_counts[stratum]
        if got != expected:
            report.violations.append(f"stratum {stratum}: {got} members, quota {expected}")

    pool_buckets: dict[str, int] = defaultdict(int)
    for record in pool:
        if stratum_of(record) == STRATUM_HS:
            pool_buckets[bucket_of(record)] += 1
    report.exhausted_buckets = sorted(
        b for b, n in report.bucket_counts.items() if n == pool_buckets.get(b, 0))
    balanced = {b: report.bucket_counts.get(b, 0)
                for b in pool_buckets if b not in report.exhausted_buckets}
    if balanced:
        lo, hi = min(balanced.values()), max(balanced.values())
        if hi - lo > 1:
            report.violations.append(
                f"hs bucket counts spread {hi - lo} > 1 over non-exhausted buckets")
    return report


def write_manifest(split: FewShotSplit, report: QuotaReport, path: str | Path) -> None:
    payload = {**split.to_json(), "report": report.to_json()}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")


def read_manifest(path: str | Path) -> FewShotSplit:
    return FewShotSplit.from_json(json.loads(Path(path).read_text("utf-8")))
