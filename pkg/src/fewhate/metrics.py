"""Evaluation metrics: binary F1, subtask scores, error percentages,
Welch's t-test, and cross-run robustness aggregation.

Scoring policy for imperfect generations: a prediction missing its HS
answer counts as "No", a missing offensiveness answer counts as "No", and
a missing target category counts as "None".  The invalid rate is reported
alongside every bundle so the effect of that policy stays visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.special import stdtr

from fewhate.corpus.records import PostRecord, TargetType
from fewhate.scheme import ParsedPrediction, SchemeConfig, Subtask

ALPHA = 0.05

GD_CLASSES = (TargetType.GROUP, TargetType.INDIVIDUAL, TargetType.NONE)


class MetricsError(ValueError):
    pass


@dataclass
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def fp_pct(self) -> float:
        return 100.0 * self.fp / self.total if self.total else 0.0

    @property
    def fn_pct(self) -> float:
        return 100.0 * self.fn / self.total if self.total else 0.0


@dataclass
class GdScores:
    group_f1: float
    macro_f1: float


@dataclass
class MetricBundle:
    f1_hs: float
    fp_pct: float
    fn_pct: float
    invalid_rate: float
    f1_off: float | None = None
    gd_scores: GdScores | None = None

    def to_json(self) -> dict:
        return {
            "f1_hs": self.f1_hs,
            "fp_pct": self.fp_pct,
            "fn_pct": self.fn_pct,
            "invalid_rate": self.invalid_rate,
            "f1_off": self.f1_off,
            "gd_group_f1": self.gd_scores.group_f1 if self.gd_scores else None,
            "gd_macro_f1": self.gd_scores.macro_f1 if self.gd_scores else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MetricBundle":
        gd = None
        if obj.get("gd_group_f1") is not None:
            gd = GdScores(group_f1=obj["gd_group_f1"], macro_f1=obj["gd_macro_f1"])
        return cls(f1_hs=obj["f1_hs"], fp_pct=obj["fp_pct"], fn_pct=obj["fn_pct"],
                   invalid_rate=obj["invalid_rate"], f1_off=obj.get("f1_off"), gd_scores=gd)


@dataclass
class TTestResult:
    t: float
    df: float
    p: float
    significant: bool
    degenerate: bool = False

    def to_json(self) -> dict:
        return {"t": self.t, "df": self.df, "p": self.p,
                "significant": self.significant, "degenerate": self.degenerate}


def _check_lengths(preds: Sequence, golds: Sequence) -> None:
    if len(preds) != len(golds):
        raise MetricsError(f"length mismatch: {len(preds)} predictions vs {len(golds)} golds")
    if not golds:
        raise MetricsError("empty inputs")


def confusion(preds: Sequence[bool], golds: Sequence[bool]) -> ConfusionCounts:
    _check_lengths(preds, golds)
    tp = fp = fn = tn = 0
    for p, g in zip(preds, golds):
        if p and g:
            tp += 1
        elif p and not g:
            fp += 1
        elif not p and g:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def binary_f1(preds: Sequence[bool], golds: Sequence[bool]) -> float:
    """F1 on the positive class; 0 when there are no true or predicted positives."""
    c = confusion(preds, golds)
    denominator = 2 * c.tp + c.fp + c.fn
    return 2 * c.tp / denominator if denominator else 0.0


def _macro_f1(preds: Sequence[TargetType], golds: Sequence[TargetType]) -> float:
    scores = []
    for cls in GD_CLASSES:
        p = [x is cls for x in preds]
        g = [x is cls for x in golds]
        tp = sum(1 for a, b in zip(p, g) if a and b)
        fp = sum(1 for a, b in zip(p, g) if a and not b)
        fn = sum(1 for a, b in zip(p, g) if not a and b)
        denominator = 2 * tp + fp + fn
        scores.append(2 * tp / denominator if denominator else 0.0)
    return sum(scores) / len(GD_CLASSES)


def hs_predictions(parsed: Sequence[ParsedPrediction]) -> list[bool]:
    """HS answers with the missing-answer policy applied."""
    return [bool(p.hs) for p in parsed]


def invalid_rate(parsed: Sequence[ParsedPrediction]) -> float:
    if not parsed:
        raise MetricsError("empty inputs")
    return sum(1 for p in parsed if not p.valid) / len(parsed)


def subtask_scores(
    parsed: Sequence[ParsedPrediction],
    golds: Sequence[PostRecord],
    config: SchemeConfig,
) -> tuple[float | None, GdScores | None]:
    """Per-subtask scores for decomposed schemes; (None, None) for baseline.

    Offensiveness is binary F1 on the offensive answer; target detection is
    reported both as binary F1 with Group positive and as macro-F1 over the
    three categories.
    """
    _check_lengths(parsed, golds)
    f1_off = None
    gd = None
    if Subtask.OFF in config.field_order:
        preds = [bool(p.offensive) for p in parsed]
        truth = [bool(g.offensive) for g in golds]
        f1_off = binary_f1(preds, truth)
    if Subtask.GD in config.field_order:
        preds_t = [p.target_type if p.target_type is not None else TargetType.NONE
                   for p in parsed]
        truth_t = [g.target_type if g.target_type is not None else TargetType.NONE
                   for g in golds]
        group_f1 = binary_f1([p is TargetType.GROUP for p in preds_t],
                             [t is TargetType.GROUP for t in truth_t])
        gd = GdScores(group_f1=group_f1, macro_f1=_macro_f1(preds_t, truth_t))
    return f1_off, gd


def evaluate(
    parsed: Sequence[ParsedPrediction],
    golds: Sequence[PostRecord],
    config: SchemeConfig,
    with_subtasks: bool = True,
) -> MetricBundle:
    """Assemble the full metric bundle for one scored set."""
    _check_lengths(parsed, golds)
    preds = hs_predictions(parsed)
    truth = [g.hs for g in golds]
    c = confusion(preds, truth)
    f1_off = gd = None
    if with_subtasks:
        f1_off, gd = subtask_scores(parsed, golds, config)
    return MetricBundle(
        f1_hs=binary_f1(preds, truth),
        fp_pct=c.fp_pct,
        fn_pct=c.fn_pct,
        invalid_rate=invalid_rate(parsed),
        f1_off=f1_off,
        gd_scores=gd,
    )


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs)


def _sample_variance(xs: Sequence[float]) -> float:
    m = _mean(xs)
    return sum((x - m) ** 2 for x in xs) / (len(xs) - 1)


def welch_t(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sided Welch's t-test with Welch-Satterthwaite degrees of freedom.

    Degenerate inputs (both variances zero) yield p=1 when the means agree
    and a flagged p=0 otherwise.
    """
    if len(a) < 2 or len(b) < 2:
        raise MetricsError("each sample needs at least 2 observations")
    ma, mb = _mean(a), _mean(b)
    va, vb = _sample_variance(a), _sample_variance(b)
    if va == 0.0 and vb == 0.0:
        if ma == mb:
            return TTestResult(t=0.0, df=float(len(a) + len(b) - 2), p=1.0,
                               significant=False, degenerate=True)
        t = math.inf if ma > mb else -math.inf
        return TTestResult(t=t, df=float(len(a) + len(b) - 2), p=0.0,
                           significant=True, degenerate=True)
    se2 = va / len(a) + vb / len(b)
    t = (ma - mb) / math.sqrt(se2)
    df = se2 ** 2 / ((va / len(a)) ** 2 / (len(a) - 1) + (vb / len(b)) ** 2 / (len(b) - 1))
    p = float(2.0 * stdtr(df, -abs(t)))
    return TTestResult(t=t, df=df, p=p, significant=p < ALPHA)


def robustness_std(
    results: dict[tuple[int, str], float],
    axis: str = "hyperparams",
) -> float:
    """Mean over seeds of the score standard deviation across configs.

    `results` maps (seed, hyperparameter-config id) to a validation score.
    Every seed must cover the same config grid with at least two configs.
    axis="seeds" transposes the aggregation: std across seeds per config,
    averaged over configs.
    """
    if axis not in ("hyperparams", "seeds"):
        raise MetricsError(f"unknown axis {axis!r}")
    seeds = sorted({k[0] for k in results})
    configs = sorted({k[1] for k in results})
    missing = [(s, c) for s in seeds for c in configs if (s, c) not in results]
    if missing:
        raise MetricsError(f"missing cells: {missing}")
    if axis == "hyperparams":
        if len(configs) < 2:
            raise MetricsError("need at least 2 hyperparameter configs per seed")
        stds = [math.sqrt(_sample_variance([results[(s, c)] for c in configs])) for s in seeds]
    else:
        if len(seeds) < 2:
            raise MetricsError("need at least 2 seeds per config")
        stds = [math.sqrt(_sample_variance([results[(s, c)] for s in seeds])) for c in configs]
    return _mean(stds)
