"""Embeddings, target sets, distance functions, and embedding predicates.

An embedding is a fixed-dimension vector of finite reals.  A predicate over
embeddings aggregates the distances from an observed embedding to a named
set of target embeddings and compares the result against a threshold.

All distance reductions go through the same batched code path so that
scalar and vectorized evaluations produce bit-identical values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyTargetSet,
    NegativeEpsilon,
    ZeroVector,
)


def as_embedding(values) -> np.ndarray:
    """Validate and convert one embedding to a float64 vector."""
    z = np.asarray(values, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise DimensionMismatch(f"embedding must be a nonempty 1-d vector, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("embedding entries must be finite")
    return z


def as_embedding_matrix(rows) -> np.ndarray:
    """Stack embeddings into an (n, dim) matrix, enforcing a uniform dimension."""
    if isinstance(rows, np.ndarray) and rows.ndim == 2:
        mat = rows.astype(np.float64, copy=False)
    else:
        vecs = [as_embedding(r) for r in rows]
        if not vecs:
            raise EmptyTargetSet("no embeddings given")
        dims = {v.shape[0] for v in vecs}
        if len(dims) > 1:
            raise DimensionMismatch(f"embeddings have mixed dimensions {sorted(dims)}")
        mat = np.stack(vecs)
    if mat.size == 0:
        raise EmptyTargetSet("no embeddings given")
    if not np.all(np.isfinite(mat)):
        raise ValueError("embedding entries must be finite")
    return mat


@dataclass(frozen=True)
class TargetSet:
    """A named, nonempty set of equal-dimension target embeddings."""

    name: str
    embeddings: np.ndarray  # (n, dim)

    def __post_init__(self):
        mat = as_embedding_matrix(self.embeddings)
        mat.setflags(write=False)
        object.__setattr__(self, "embeddings", mat)

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    def __len__(self) -> int:
        return self.embeddings.shape[0]


class DistanceFn(Enum):
    L2 = "l2"
    COSINE = "cosine"


class Aggregation(Enum):
    MIN = "min"
    MAX = "max"


class Comparison(Enum):
    LE = "<="
    LT = "<"
    GE = ">="
    GT = ">"

    def holds(self, score: float, epsilon: float) -> bool:
        if self is Comparison.LE:
            return score <= epsilon
        if self is Comparison.LT:
            return score < epsilon
        if self is Comparison.GE:
            return score >= epsilon
        return score > epsilon

    @property
    def upper_bound(self) -> bool:
        """True for <=/<, i.e. satisfaction means the score is small."""
        return self in (Comparison.LE, Comparison.LT)


def pairwise_distances(fn: DistanceFn, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Distance matrix between rows of X (n, dim) and rows of Y (m, dim)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if fn is DistanceFn.L2:
        diff = X[:, None, :] - Y[None, :, :]
        return np.sqrt((diff * diff).sum(axis=-1))
    # cosine distance 1 - <x,y>/(|x||y|), undefined for zero vectors
    nx = np.sqrt((X * X).sum(axis=-1))
    ny = np.sqrt((Y * Y).sum(axis=-1))
    if np.any(nx == 0.0) or np.any(ny == 0.0):
        raise ZeroVector("cosine distance undefined for zero-norm vectors")
    inner = (X[:, None, :] * Y[None, :, :]).sum(axis=-1)
    d = 1.0 - inner / (nx[:, None] * ny[None, :])
    return np.maximum(d, 0.0)


def distance(fn: DistanceFn, x, y) -> float:
    """Distance between two embeddings."""
    x = as_embedding(x)
    y = as_embedding(y)
    return float(pairwise_distances(fn, x[None, :], y[None, :])[0, 0])


@dataclass(frozen=True)
class EmbeddingPredicate:
    """Predicate `agg(d(z, targets)) <cmp> epsilon` over a named target set.

    `target` is an alias resolved against loaded target sets at bind time;
    predicates themselves stay immutable and shareable.
    """

    name: str
    target: str
    distance: DistanceFn
    epsilon: float
    comparison: Comparison
    aggregation: Aggregation

    def __post_init__(self):
        eps = float(self.epsilon)
        if np.isnan(eps):
            raise ValueError(f"predicate {self.name}: epsilon must not be NaN")
        if eps < 0.0:
            raise NegativeEpsilon(f"predicate {self.name}: epsilon must be >= 0, got {eps}")
        # +inf is tolerated: it is the degenerate always-satisfied threshold
        # produced by conformal calibration when k exceeds the sample count.
        object.__setattr__(self, "epsilon", eps)

    def with_epsilon(self, epsilon: float) -> "EmbeddingPredicate":
        return EmbeddingPredicate(
            self.name, self.target, self.distance, epsilon, self.comparison, self.aggregation
        )


def trace_scores(ap: EmbeddingPredicate, trace: np.ndarray, targets: TargetSet) -> np.ndarray:
    """Aggregated distance from every trace frame to the target set."""
    trace = np.atleast_2d(np.asarray(trace, dtype=np.float64))
    if len(targets) == 0:
        raise EmptyTargetSet(f"predicate {ap.name}: empty target set {targets.name}")
    dists = pairwise_distances(ap.distance, trace, targets.embeddings)
    if ap.aggregation is Aggregation.MIN:
        return dists.min(axis=1)
    return dists.max(axis=1)


def predicate_score(ap: EmbeddingPredicate, z, targets: TargetSet) -> float:
    """Aggregated distance from a single embedding to the target set."""
    z = as_embedding(z)
    return float(trace_scores(ap, z[None, :], targets)[0])


def predicate_holds(ap: EmbeddingPredicate, z, targets: TargetSet) -> bool:
    return ap.comparison.holds(predicate_score(ap, z, targets), ap.epsilon)


def save_target_set(ts: TargetSet, path) -> None:
    doc = {"name": ts.name, "embeddings": [[float(v) for v in row] for row in ts.embeddings]}
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def load_target_set(path) -> TargetSet:
    doc = json.loads(Path(path).read_text())
    return TargetSet(doc["name"], doc["embeddings"])
