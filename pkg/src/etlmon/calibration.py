"""Threshold calibration for embedding predicates.

Two procedures:

* F1-optimal: exhaustively score every observed distance as a candidate
  threshold (prediction rule: distance <= threshold) and keep the candidate
  with the best F1 against ground-truth labels, smallest value on ties.

* Split-conformal: per demonstration, the nonconformity score is the largest
  distance over ground-truth-positive frames (the hardest frame a usable
  threshold must still cover).  The threshold is the k-th smallest score
  with k = ceil((1-alpha)(n+1)); under exchangeability a fresh demonstration
  is fully covered (perfect recall) with probability at least 1-alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .embeddings import (
    Aggregation,
    Comparison,
    DistanceFn,
    EmbeddingPredicate,
    TargetSet,
    trace_scores,
)
from .errors import (
    EmptyCalibrationSet,
    EmptyScores,
    InvalidAlpha,
    NoPositives,
    NoPositiveTimestep,
    UnsupportedComparison,
)
from .semantics import as_trace

DEFAULT_ALPHA = 0.10


class CalibrationMethod(Enum):
    F1_OPTIMAL = "f1"
    CONFORMAL = "cp"


@dataclass(frozen=True)
class CalibrationSample:
    """One labeled frame: distance to the target set, ground-truth truth value."""

    distance: float
    label: bool

    def __post_init__(self):
        d = float(self.distance)
        if not math.isfinite(d) or d < 0:
            raise ValueError(f"distance must be finite and >= 0, got {d}")
        object.__setattr__(self, "distance", d)
        object.__setattr__(self, "label", bool(self.label))


@dataclass(frozen=True)
class Demonstration:
    """A trace paired with per-frame ground-truth labels for one proposition."""

    trace: np.ndarray
    gt_labels: np.ndarray

    def __post_init__(self):
        trace = as_trace(self.trace)
        labels = np.asarray(self.gt_labels, dtype=bool)
        if labels.shape != (trace.shape[0],):
            raise ValueError(
                f"labels shape {labels.shape} does not match trace length {trace.shape[0]}"
            )
        object.__setattr__(self, "trace", trace)
        object.__setattr__(self, "gt_labels", labels)


@dataclass(frozen=True)
class CalibrationResult:
    epsilon: float
    method: CalibrationMethod
    alpha: float | None = None
    n_cal: int = 0
    achieved_f1: float | None = None
    score_index: int | None = None  # 1-based order-statistic rank for conformal
    degenerate: bool = False  # conformal rank exceeded the sample count
    diagnostics: dict = field(default_factory=dict)


def f1_score_at(distances: np.ndarray, labels: np.ndarray, epsilon: float) -> float:
    """F1 of the rule `distance <= epsilon` against the labels."""
    pred = distances <= epsilon
    tp = int(np.sum(pred & labels))
    fp = int(np.sum(pred & ~labels))
    fn = int(np.sum(~pred & labels))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def f1_optimal_threshold(samples: Sequence[CalibrationSample]) -> CalibrationResult:
    """Best-F1 threshold over the observed distances; smallest maximizer wins ties."""
    if len(samples) == 0:
        raise EmptyCalibrationSet("no calibration samples")
    distances = np.asarray([s.distance for s in samples])
    labels = np.asarray([s.label for s in samples], dtype=bool)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise NoPositives("calibration set has no positive labels")

    order = np.argsort(distances, kind="stable")
    d_sorted = distances[order]
    pos_cum = np.cumsum(labels[order])
    # evaluate each distinct observed distance at its rightmost occurrence so
    # that `distance <= candidate` covers duplicates
    last_idx = np.flatnonzero(np.r_[d_sorted[1:] != d_sorted[:-1], True])
    best_eps, best_f1 = None, -1.0
    for j in last_idx:
        tp = int(pos_cum[j])
        fp = int(j + 1 - tp)
        fn = n_pos - tp
        f1 = 2 * tp / (2 * tp + fp + fn)
        if f1 > best_f1:  # candidates scan in increasing order, ties keep the smallest
            best_f1 = f1
            best_eps = float(d_sorted[j])
    return CalibrationResult(
        epsilon=best_eps,
        method=CalibrationMethod.F1_OPTIMAL,
        n_cal=len(samples),
        achieved_f1=best_f1,
        diagnostics={"n_positive": n_pos, "n_candidates": int(len(last_idx))},
    )


def demonstration_scores(
    demo: Demonstration, target: TargetSet, fn: DistanceFn, agg: Aggregation
) -> np.ndarray:
    probe = EmbeddingPredicate(
        name="__score__", target=target.name, distance=fn, epsilon=0.0,
        comparison=Comparison.LE, aggregation=agg,
    )
    return trace_scores(probe, demo.trace, target)


def conformal_score(
    demo: Demonstration, target: TargetSet, fn: DistanceFn, agg: Aggregation
) -> float:
    """Largest distance over the demonstration's ground-truth-positive frames."""
    if not demo.gt_labels.any():
        raise NoPositiveTimestep("demonstration has no ground-truth positive frame")
    scores = demonstration_scores(demo, target, fn, agg)
    return float(scores[demo.gt_labels].max())


def conformal_rank(n_cal: int, alpha: float) -> int:
    """k = ceil((1-alpha)(n_cal+1)), computed in exact decimal arithmetic.

    Float rounding would misplace exact multiples: with alpha=0.1 and
    n_cal=9, (1-0.1)*10 evaluates to 9.000000000000002 and a naive ceil
    returns 10 instead of 9.  The shortest decimal form of alpha is taken
    as the intended value.
    """
    frac_alpha = Fraction(repr(float(alpha)))
    return math.ceil((1 - frac_alpha) * (n_cal + 1))


def conformal_threshold(scores: Sequence[float], alpha: float) -> CalibrationResult:
    """k-th smallest calibration score; +inf (degenerate) when k exceeds n_cal."""
    if not 0 < alpha < 1:
        raise InvalidAlpha(f"alpha must be in (0, 1), got {alpha}")
    arr = np.asarray(list(scores), dtype=np.float64)
    if arr.size == 0:
        raise EmptyScores("no calibration scores")
    n_cal = int(arr.size)
    k = conformal_rank(n_cal, alpha)
    if k > n_cal:
        return CalibrationResult(
            epsilon=math.inf,
            method=CalibrationMethod.CONFORMAL,
            alpha=float(alpha),
            n_cal=n_cal,
            score_index=k,
            degenerate=True,
            diagnostics={"reason": f"rank {k} exceeds the {n_cal} available scores"},
        )
    eps = float(np.sort(arr)[k - 1])
    return CalibrationResult(
        epsilon=eps,
        method=CalibrationMethod.CONFORMAL,
        alpha=float(alpha),
        n_cal=n_cal,
        score_index=k,
    )


def calibrate_predicate(
    pred: EmbeddingPredicate,
    target: TargetSet,
    demos: Sequence[Demonstration],
    method: CalibrationMethod,
    alpha: float = DEFAULT_ALPHA,
) -> CalibrationResult:
    """Calibrate one <=/< predicate from labeled demonstrations."""
    if not pred.comparison.upper_bound:
        raise UnsupportedComparison(
            f"predicate {pred.name!r} uses {pred.comparison.value!r}; thresholds are "
            "calibrated for <=/< predicates only"
        )
    if len(demos) == 0:
        raise EmptyCalibrationSet("no demonstrations")
    if method is CalibrationMethod.F1_OPTIMAL:
        samples = []
        for demo in demos:
            scores = demonstration_scores(demo, target, pred.distance, pred.aggregation)
            samples.extend(
                CalibrationSample(float(s), bool(y)) for s, y in zip(scores, demo.gt_labels)
            )
        return f1_optimal_threshold(samples)
    scores = [conformal_score(d, target, pred.distance, pred.aggregation) for d in demos]
    return conformal_threshold(scores, alpha)


@dataclass(frozen=True)
class CoverageReport:
    """Monte-Carlo estimate of the per-demonstration perfect-recall rate."""

    coverage: float
    lower_bound: float  # (1-alpha) minus three binomial standard errors
    trials: int
    n_cal: int
    alpha: float

    @property
    def passed(self) -> bool:
        return self.coverage >= self.lower_bound


def verify_recall_guarantee(
    make_demo: Callable[[np.random.Generator], Demonstration],
    n_cal: int,
    alpha: float,
    trials: int,
    target: TargetSet,
    fn: DistanceFn = DistanceFn.L2,
    agg: Aggregation = Aggregation.MIN,
    seed: int = 0,
) -> CoverageReport:
    """Empirically check the conformal recall guarantee on an i.i.d. generator.

    Each trial draws n_cal calibration demonstrations plus one test
    demonstration, calibrates, and records whether every positive frame of
    the test demonstration scores at or below the threshold (equivalently,
    whether its own hardest-positive score is covered).
    """
    rng = np.random.default_rng(seed)
    covered = 0
    for _ in range(trials):
        scores = [conformal_score(make_demo(rng), target, fn, agg) for _ in range(n_cal)]
        result = conformal_threshold(scores, alpha)
        test_score = conformal_score(make_demo(rng), target, fn, agg)
        if test_score <= result.epsilon:
            covered += 1
    coverage = covered / trials
    target_rate = 1.0 - alpha
    margin = 3.0 * math.sqrt(target_rate * alpha / trials)
    return CoverageReport(
        coverage=coverage,
        lower_bound=target_rate - margin,
        trials=trials,
        n_cal=n_cal,
        alpha=alpha,
    )
