"""Boolean satisfaction and quantitative robustness over finite traces.

Satisfaction uses strong finite-trace closure: the existential witness of
`a U b` must occur inside the trace.  Robustness over the window [i, K]:

    rho(ap, i)   =  eps - score(i)   for <=/< predicates
                    score(i) - eps   for >=/> predicates
    rho(!f, i)   = -rho(f, i)
    rho(f&g, i)  = min(rho(f,i), rho(g,i))
    rho(G f, i)  = min over k in [i,K] of rho(f, k)
    rho(F f, i)  = max over k in [i,K] of rho(f, k)
    rho(aUb, i)  = max over j in [i,K] of
                       min(rho(b,j), min over k in [i,j) of rho(a,k))

The empty inner minimum (j == i) is plus infinity, represented by a large
sentinel so that all arithmetic stays in ordinary floats.  Robustness of
the constant true is the sentinel itself; combinations with any finite
operand clamp it away.  Only min/max/negation touch the values, so every
evaluation order yields bit-identical results.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from . import formula as F
from .binding import BoundSpec
from .errors import IndexOutOfRange, UnknownProposition

INF_SENTINEL = 1e18


def as_trace(values) -> np.ndarray:
    """Validate a trace as an (T+1, dim) float64 matrix."""
    trace = np.asarray(values, dtype=np.float64)
    if trace.ndim == 1:
        trace = trace[:, None]
    if trace.ndim != 2 or trace.shape[0] == 0:
        raise IndexOutOfRange(f"trace must be a nonempty (steps, dim) array, got {trace.shape}")
    if not np.all(np.isfinite(trace)):
        raise ValueError("trace entries must be finite")
    return trace


# --- profile evaluators over leaf tables -----------------------------------
#
# Both evaluators return the value of the formula at *every* start index
# i in [0, K], where K is the last index of the supplied leaf arrays.


def bool_profile(f: F.Formula, truth: Mapping[str, np.ndarray]) -> np.ndarray:
    n = len(next(iter(truth.values()))) if truth else 0
    return _bool_profile(f, truth, n)


def _bool_profile(f, truth, n) -> np.ndarray:
    if isinstance(f, F.Pred):
        if f.name not in truth:
            raise UnknownProposition(f"no valuation for {f.name!r}")
        return np.asarray(truth[f.name], dtype=bool)
    if isinstance(f, F.TrueConst):
        return np.ones(n, dtype=bool)
    if isinstance(f, F.FalseConst):
        return np.zeros(n, dtype=bool)
    if isinstance(f, F.Not):
        return ~_bool_profile(f.child, truth, n)
    if isinstance(f, F.And):
        return _bool_profile(f.left, truth, n) & _bool_profile(f.right, truth, n)
    if isinstance(f, F.Or):
        return _bool_profile(f.left, truth, n) | _bool_profile(f.right, truth, n)
    if isinstance(f, F.Eventually):
        x = _bool_profile(f.child, truth, n)
        return np.logical_or.accumulate(x[::-1])[::-1]
    if isinstance(f, F.Always):
        x = _bool_profile(f.child, truth, n)
        return np.logical_and.accumulate(x[::-1])[::-1]
    if isinstance(f, F.Until):
        a = _bool_profile(f.left, truth, n).tolist()
        b = _bool_profile(f.right, truth, n).tolist()
        out = [False] * n
        acc = False
        for i in range(n - 1, -1, -1):
            acc = b[i] or (a[i] and acc)
            out[i] = acc
        return np.asarray(out, dtype=bool)
    raise TypeError(f"not a formula: {f!r}")


def rho_profile(
    f: F.Formula, leaves: Mapping[str, np.ndarray], sentinel: float = INF_SENTINEL
) -> np.ndarray:
    n = len(next(iter(leaves.values()))) if leaves else 0
    return _rho_profile(f, leaves, n, sentinel)


def _rho_profile(f, leaves, n, sentinel) -> np.ndarray:
    if isinstance(f, F.Pred):
        if f.name not in leaves:
            raise UnknownProposition(f"no robustness values for {f.name!r}")
        return np.asarray(leaves[f.name], dtype=np.float64)
    if isinstance(f, F.TrueConst):
        return np.full(n, sentinel)
    if isinstance(f, F.FalseConst):
        return np.full(n, -sentinel)
    if isinstance(f, F.Not):
        return -_rho_profile(f.child, leaves, n, sentinel)
    if isinstance(f, F.And):
        return np.minimum(
            _rho_profile(f.left, leaves, n, sentinel),
            _rho_profile(f.right, leaves, n, sentinel),
        )
    if isinstance(f, F.Or):
        return np.maximum(
            _rho_profile(f.left, leaves, n, sentinel),
            _rho_profile(f.right, leaves, n, sentinel),
        )
    if isinstance(f, F.Eventually):
        x = _rho_profile(f.child, leaves, n, sentinel)
        return np.maximum.accumulate(x[::-1])[::-1]
    if isinstance(f, F.Always):
        x = _rho_profile(f.child, leaves, n, sentinel)
        return np.minimum.accumulate(x[::-1])[::-1]
    if isinstance(f, F.Until):
        a = _rho_profile(f.left, leaves, n, sentinel).tolist()
        b = _rho_profile(f.right, leaves, n, sentinel).tolist()
        # backward recurrence: R(i) = max(b_i, min(a_i, R(i+1)));
        # expands to the sup over witnesses j of min(b_j, prefix-min of a)
        out = [0.0] * n
        acc = -sentinel
        for i in range(n - 1, -1, -1):
            inner = a[i] if a[i] < acc else acc
            acc = b[i] if b[i] > inner else inner
            out[i] = acc
        return np.asarray(out, dtype=np.float64)
    raise TypeError(f"not a formula: {f!r}")


# --- public operations over embedding traces ---------------------------------


def sat(f: F.Formula, trace, i: int, spec: BoundSpec) -> bool:
    """Boolean satisfaction at time index i with horizon fixed at trace end."""
    trace = as_trace(trace)
    T = trace.shape[0] - 1
    if not 0 <= i <= T:
        raise IndexOutOfRange(f"index {i} outside trace [0, {T}]")
    truth = spec.truth_leaves(F.predicate_names(f), trace)
    return bool(bool_profile(f, truth)[i]) if truth else bool(_bool_profile(f, {}, T + 1)[i])


def robustness(
    f: F.Formula,
    trace,
    i: int,
    K: int,
    spec: BoundSpec,
    sentinel: float = INF_SENTINEL,
) -> float:
    """Quantitative satisfaction margin of f at index i over the window [i, K]."""
    trace = as_trace(trace)
    T = trace.shape[0] - 1
    if not 0 <= i <= K <= T:
        raise IndexOutOfRange(f"need 0 <= i <= K <= T, got i={i}, K={K}, T={T}")
    window = trace[: K + 1]
    leaves = spec.rho_leaves(F.predicate_names(f), window)
    if leaves:
        return float(rho_profile(f, leaves, sentinel)[i])
    return float(_rho_profile(f, {}, K + 1, sentinel)[i])
