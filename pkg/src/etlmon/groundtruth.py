"""Ground-truth monitors and agreement metrics.

A ground-truth monitor evaluates a temporal formula whose atoms are named
Boolean propositions (state-level facts recorded alongside a trace) with
the same per-prefix semantics as the embedding monitor.  Agreement metrics
compare the two verdict streams: precision/recall/F1 on the +1 class and
raw agreement, pooled over all frames of all traces (micro-averaged), or
over one final verdict per episode.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import formula as F
from .errors import LengthMismatch, UnknownProposition
from .monitor import OnlineMonitor
from .semantics import INF_SENTINEL


class GroundTruthTrace:
    """Per-frame Boolean valuations for a set of named propositions."""

    def __init__(self, valuations: Mapping[str, Sequence[bool]]):
        if not valuations:
            raise ValueError("at least one proposition required")
        self._tables = {k: np.asarray(v, dtype=bool) for k, v in valuations.items()}
        lengths = {v.shape for v in self._tables.values()}
        if len(lengths) > 1:
            raise LengthMismatch(f"propositions have mixed lengths {sorted(lengths)}")
        self.length = next(iter(self._tables.values())).shape[0]
        if self.length == 0:
            raise ValueError("empty ground-truth trace")

    @property
    def propositions(self) -> tuple[str, ...]:
        return tuple(self._tables)

    def table(self, name: str) -> np.ndarray:
        if name not in self._tables:
            raise UnknownProposition(f"unknown proposition {name!r}")
        return self._tables[name]

    def __len__(self) -> int:
        return self.length


def gt_monitor(omega: F.Formula, gt: GroundTruthTrace, sentinel: float = INF_SENTINEL) -> np.ndarray:
    """Per-prefix +1/-1 verdicts of omega over the proposition tables.

    Propositions enter the shared monitor engine as +1/-1 leaf values, whose
    robustness sign coincides with Boolean satisfaction on every prefix.
    """
    names = F.predicate_names(omega)
    for name in names:
        gt.table(name)
    mon = OnlineMonitor(omega, spec=None, sentinel=sentinel)
    for t in range(len(gt)):
        leaves = {name: (1.0 if gt.table(name)[t] else -1.0) for name in names}
        mon.step_leaves(leaves)
    return mon.verdicts


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    agreement: float
    scope: str  # "frames" | "episodes"
    ordering_accuracy: float | None = None
    counts: dict = field(default_factory=dict)  # tp/fp/fn/tn on the +1 class


def _confusion(pred: np.ndarray, truth: np.ndarray) -> tuple[int, int, int, int]:
    p = pred == 1
    t = truth == 1
    tp = int(np.sum(p & t))
    fp = int(np.sum(p & ~t))
    fn = int(np.sum(~p & t))
    tn = int(np.sum(~p & ~t))
    return tp, fp, fn, tn


def metrics_from_verdicts(
    predicted: Sequence[np.ndarray], truth: Sequence[np.ndarray], scope: str = "frames"
) -> MetricsReport:
    """Micro-averaged agreement metrics; +1 is the positive class.

    With no predicted and no actual positives, precision and recall are 1.0
    (the degenerate all-negative case is perfect agreement); otherwise an
    empty denominator yields 0.0.
    """
    if len(predicted) != len(truth):
        raise LengthMismatch(f"{len(predicted)} predicted traces vs {len(truth)} truth traces")
    tp = fp = fn = tn = 0
    for i, (p, t) in enumerate(zip(predicted, truth)):
        p = np.asarray(p)
        t = np.asarray(t)
        if p.shape != t.shape:
            raise LengthMismatch(f"trace {i}: {p.shape} vs {t.shape}")
        a, b, c, d = _confusion(p, t)
        tp += a
        fp += b
        fn += c
        tn += d
    total = tp + fp + fn + tn
    if tp + fp + fn == 0:
        precision = recall = 1.0
    else:
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    agreement = (tp + tn) / total if total else 1.0
    return MetricsReport(
        precision=precision,
        recall=recall,
        f1=f1,
        agreement=agreement,
        scope=scope,
        counts={"tp": tp, "fp": fp, "fn": fn, "tn": tn},
    )


def frame_metrics(
    etl_verdicts: Sequence[np.ndarray], gt_verdicts: Sequence[np.ndarray]
) -> MetricsReport:
    return metrics_from_verdicts(etl_verdicts, gt_verdicts, scope="frames")


def episode_metrics(
    etl_verdicts: Sequence[np.ndarray], gt_verdicts: Sequence[np.ndarray]
) -> MetricsReport:
    """One verdict per episode: the monitor output at the final prefix."""
    final_pred = [np.asarray(v)[-1:] for v in etl_verdicts]
    final_truth = [np.asarray(v)[-1:] for v in gt_verdicts]
    return metrics_from_verdicts(final_pred, final_truth, scope="episodes")


def first_satisfaction(truth: np.ndarray) -> int | None:
    """Index of the first frame where a Boolean signal holds, if any."""
    idx = np.flatnonzero(np.asarray(truth, dtype=bool))
    return int(idx[0]) if idx.size else None


def _order_signature(first_sat: Mapping[str, int | None]) -> tuple:
    detected = sorted(
        ((t, name) for name, t in first_sat.items() if t is not None),
    )
    return tuple(name for _, name in detected), frozenset(
        name for name, t in first_sat.items() if t is None
    )


def ordering_accuracy(
    etl_first_sat: Sequence[Mapping[str, int | None]],
    gt_first_sat: Sequence[Mapping[str, int | None]],
) -> float:
    """Fraction of episodes whose subgoal detection order matches ground truth.

    Order is compared as the sequence of detected subgoals sorted by first
    detection time plus the set of undetected ones; exact times do not matter.
    """
    if len(etl_first_sat) != len(gt_first_sat):
        raise LengthMismatch(
            f"{len(etl_first_sat)} episodes vs {len(gt_first_sat)} ground-truth episodes"
        )
    if len(etl_first_sat) == 0:
        warnings.warn("ordering accuracy over zero episodes is vacuously 1.0")
        return 1.0
    hits = sum(
        _order_signature(e) == _order_signature(g)
        for e, g in zip(etl_first_sat, gt_first_sat)
    )
    return hits / len(etl_first_sat)
