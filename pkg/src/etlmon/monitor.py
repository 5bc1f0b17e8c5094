"""Per-prefix verdict monitors.

A monitor turns a growing trace into a sequence of +1/-1 verdicts, one per
prefix: verdict at step i is the sign of the robustness of the formula
evaluated at time 0 with the horizon clamped to i (sign(0) = +1, so a zero
margin counts as satisfied).

`monitor_offline` is the reference: it recomputes robustness from scratch
for every prefix.  `OnlineMonitor` is the incremental engine: temporal
operators whose arguments contain no further temporal operator maintain
running aggregates (min/max for G/F, a candidate frontier for U) in O(1)
amortized per step; nested temporal subformulas fall back to per-prefix
recomputation over the buffered values.  Equality with the reference is
exact because all aggregation is min/max/negation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import formula as F
from .binding import BoundSpec
from .embeddings import as_embedding, trace_scores
from .errors import DimensionMismatch
from .semantics import INF_SENTINEL, as_trace, rho_profile


def sign(x: float) -> int:
    """Verdict sign convention: zero robustness counts as satisfied."""
    return 1 if x >= 0 else -1


@dataclass(frozen=True)
class MonitorTrace:
    """Per-prefix verdicts (+1/-1) and the robustness values behind them."""

    verdicts: np.ndarray
    robustness: np.ndarray

    def __len__(self) -> int:
        return len(self.verdicts)


def monitor_offline(
    f: F.Formula, trace, spec: BoundSpec, sentinel: float = INF_SENTINEL
) -> MonitorTrace:
    """Naive reference monitor: per prefix i, robustness at time 0, horizon i."""
    trace = as_trace(trace)
    names = F.predicate_names(f)
    leaves = spec.rho_leaves(names, trace)
    n = trace.shape[0]
    rhos = np.empty(n)
    for t in range(n):
        window = {k: v[: t + 1] for k, v in leaves.items()}
        rhos[t] = rho_profile(f, window, sentinel)[0] if names else _const_rho(f, t + 1, sentinel)
    verdicts = np.where(rhos >= 0, 1, -1).astype(np.int64)
    return MonitorTrace(verdicts, rhos)


def _const_rho(f: F.Formula, n: int, sentinel: float) -> float:
    return float(_profile_no_leaves(f, n, sentinel)[0])


def _profile_no_leaves(f, n, sentinel):
    from .semantics import _rho_profile

    return _rho_profile(f, {}, n, sentinel)


# --- incremental engine -------------------------------------------------------


def _frame_eval(g: F.Formula, sentinel: float) -> Callable[[Mapping[str, list], int], float]:
    """Compile a temporal-free formula to an evaluator over buffered leaves."""
    if isinstance(g, F.Pred):
        name = g.name
        return lambda L, t: L[name][t]
    if isinstance(g, F.TrueConst):
        return lambda L, t: sentinel
    if isinstance(g, F.FalseConst):
        return lambda L, t: -sentinel
    if isinstance(g, F.Not):
        child = _frame_eval(g.child, sentinel)
        return lambda L, t: -child(L, t)
    if isinstance(g, F.And):
        a, b = _frame_eval(g.left, sentinel), _frame_eval(g.right, sentinel)
        return lambda L, t: min(a(L, t), b(L, t))
    if isinstance(g, F.Or):
        a, b = _frame_eval(g.left, sentinel), _frame_eval(g.right, sentinel)
        return lambda L, t: max(a(L, t), b(L, t))
    raise TypeError(f"not temporal-free: {g!r}")


class _Node:
    def update(self, L: Mapping[str, list], t: int) -> None:
        raise NotImplementedError

    def value(self) -> float:
        raise NotImplementedError


class _Frozen(_Node):
    """Temporal-free subterm needed only at time 0; fixed after the first frame."""

    def __init__(self, g: F.Formula, sentinel: float):
        self._eval = _frame_eval(g, sentinel)
        self._value = 0.0

    def update(self, L, t):
        if t == 0:
            self._value = self._eval(L, 0)

    def value(self):
        return self._value


class _Running(_Node):
    """G (min) or F (max) over a temporal-free child: running aggregate."""

    def __init__(self, child: F.Formula, is_min: bool, sentinel: float):
        self._eval = _frame_eval(child, sentinel)
        self._is_min = is_min
        self._value = sentinel if is_min else -sentinel

    def update(self, L, t):
        v = self._eval(L, t)
        if self._is_min:
            if v < self._value:
                self._value = v
        elif v > self._value:
            self._value = v

    def value(self):
        return self._value


class _UntilFrontier(_Node):
    """Until over temporal-free children.

    Maintains prefix_min = min of the left argument over [0, t) and
    best = max over witnesses j <= t of min(right(j), prefix_min(j)).
    """

    def __init__(self, left: F.Formula, right: F.Formula, sentinel: float):
        self._left = _frame_eval(left, sentinel)
        self._right = _frame_eval(right, sentinel)
        self._prefix_min = sentinel
        self._best = -sentinel

    def update(self, L, t):
        candidate = self._right(L, t)
        if self._prefix_min < candidate:
            candidate = self._prefix_min
        if candidate > self._best:
            self._best = candidate
        a = self._left(L, t)
        if a < self._prefix_min:
            self._prefix_min = a

    def value(self):
        return self._best


class _Recompute(_Node):
    """Nested temporal subformula: per-prefix recomputation over the buffer."""

    def __init__(self, g: F.Formula, sentinel: float):
        self._g = g
        self._sentinel = sentinel
        self._names = F.predicate_names(g)
        self._value = 0.0

    def update(self, L, t):
        window = {k: np.asarray(L[k][: t + 1]) for k in self._names}
        if window:
            self._value = float(rho_profile(self._g, window, self._sentinel)[0])
        else:
            self._value = float(_profile_no_leaves(self._g, t + 1, self._sentinel)[0])

    def value(self):
        return self._value


class _PropNode(_Node):
    def __init__(self, op: str, children: list[_Node]):
        self._op = op
        self._children = children

    def update(self, L, t):
        for c in self._children:
            c.update(L, t)

    def value(self):
        if self._op == "not":
            return -self._children[0].value()
        a = self._children[0].value()
        b = self._children[1].value()
        return min(a, b) if self._op == "and" else max(a, b)


def _build(f: F.Formula, sentinel: float) -> _Node:
    if F.is_temporal_free(f):
        return _Frozen(f, sentinel)
    if isinstance(f, F.Not):
        return _PropNode("not", [_build(f.child, sentinel)])
    if isinstance(f, F.And):
        return _PropNode("and", [_build(f.left, sentinel), _build(f.right, sentinel)])
    if isinstance(f, F.Or):
        return _PropNode("or", [_build(f.left, sentinel), _build(f.right, sentinel)])
    if isinstance(f, F.Always) and F.is_temporal_free(f.child):
        return _Running(f.child, is_min=True, sentinel=sentinel)
    if isinstance(f, F.Eventually) and F.is_temporal_free(f.child):
        return _Running(f.child, is_min=False, sentinel=sentinel)
    if isinstance(f, F.Until) and F.is_temporal_free(f.left) and F.is_temporal_free(f.right):
        return _UntilFrontier(f.left, f.right, sentinel)
    return _Recompute(f, sentinel)


class OnlineMonitor:
    """Streaming monitor: feed one embedding per step, read one verdict back."""

    def __init__(self, f: F.Formula, spec: BoundSpec | None = None, sentinel: float = INF_SENTINEL):
        self.formula = f
        self.spec = spec
        self.sentinel = sentinel
        self._names = F.predicate_names(f)
        if spec is not None:
            for name in self._names:
                spec.target_of(name)  # fail fast on unresolved predicates
        self._leaves: dict[str, list[float]] = {name: [] for name in self._names}
        self._root = _build(f, sentinel)
        self.steps_seen = 0
        self._verdicts: list[int] = []
        self._rhos: list[float] = []

    def step(self, z) -> tuple[int, float]:
        """Consume one embedding; return the verdict and robustness for the new prefix."""
        if self.spec is None:
            raise ValueError("monitor constructed without a bound spec; use step_leaves")
        z = as_embedding(z)
        values = {}
        for name in self._names:
            pred = self.spec.predicates[name]
            ts = self.spec.target_of(name)
            if z.shape[0] != ts.dim:
                raise DimensionMismatch(
                    f"frame dim {z.shape[0]} != target set {ts.name!r} dim {ts.dim}"
                )
            score = float(trace_scores(pred, z[None, :], ts)[0])
            values[name] = pred.epsilon - score if pred.comparison.upper_bound else score - pred.epsilon
        return self.step_leaves(values)

    def step_leaves(self, leaf_rho: Mapping[str, float]) -> tuple[int, float]:
        """Advance one step from precomputed per-predicate robustness values."""
        for name in self._names:
            self._leaves[name].append(float(leaf_rho[name]))
        t = self.steps_seen
        self.steps_seen += 1
        self._root.update(self._leaves, t)
        rho = float(self._root.value())
        verdict = sign(rho)
        self._verdicts.append(verdict)
        self._rhos.append(rho)
        return verdict, rho

    @property
    def verdicts(self) -> np.ndarray:
        return np.asarray(self._verdicts, dtype=np.int64)

    @property
    def robustness(self) -> np.ndarray:
        return np.asarray(self._rhos)

    def result(self) -> MonitorTrace:
        return MonitorTrace(self.verdicts, self.robustness)


def monitor_step(state: OnlineMonitor, z) -> tuple[OnlineMonitor, int, float]:
    """Functional wrapper over OnlineMonitor.step (state is advanced in place)."""
    verdict, rho = state.step(z)
    return state, verdict, rho


def monitor_online(f: F.Formula, trace, spec: BoundSpec, sentinel: float = INF_SENTINEL) -> MonitorTrace:
    """Run the incremental engine over a whole trace."""
    trace = as_trace(trace)
    mon = OnlineMonitor(f, spec, sentinel)
    for frame in trace:
        mon.step(frame)
    return mon.result()
