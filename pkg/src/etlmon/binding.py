"""Binding of parsed documents to loaded target sets.

A parsed predicate names its target set by alias; binding resolves every
alias once against target-set files (paths relative to the spec file) and
yields an immutable lookup used by the evaluators and monitors.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .dsl import SpecDocument
from .embeddings import EmbeddingPredicate, TargetSet, load_target_set, trace_scores
from .errors import UnknownTargetAlias


@dataclass(frozen=True)
class BoundSpec:
    """Predicates together with their resolved target sets."""

    predicates: Mapping[str, EmbeddingPredicate]
    targets: Mapping[str, TargetSet]

    def __post_init__(self):
        object.__setattr__(self, "predicates", MappingProxyType(dict(self.predicates)))
        object.__setattr__(self, "targets", MappingProxyType(dict(self.targets)))
        for pred in self.predicates.values():
            if pred.target not in self.targets:
                raise UnknownTargetAlias(
                    f"predicate {pred.name!r} references unknown target alias {pred.target!r}"
                )

    def target_of(self, pred_name: str) -> TargetSet:
        return self.targets[self.predicates[pred_name].target]

    def scores(self, pred_name: str, trace: np.ndarray) -> np.ndarray:
        """Per-frame aggregated distances for one predicate."""
        pred = self.predicates[pred_name]
        return trace_scores(pred, trace, self.targets[pred.target])

    def rho_leaves(self, pred_names, trace: np.ndarray) -> dict[str, np.ndarray]:
        """Per-frame predicate robustness (eps - score for <=/<, score - eps otherwise)."""
        out = {}
        for name in pred_names:
            pred = self.predicates[name]
            s = self.scores(name, trace)
            out[name] = pred.epsilon - s if pred.comparison.upper_bound else s - pred.epsilon
        return out

    def truth_leaves(self, pred_names, trace: np.ndarray) -> dict[str, np.ndarray]:
        """Per-frame Boolean predicate satisfaction."""
        out = {}
        for name in pred_names:
            pred = self.predicates[name]
            s = self.scores(name, trace)
            if pred.comparison.value == "<=":
                out[name] = s <= pred.epsilon
            elif pred.comparison.value == "<":
                out[name] = s < pred.epsilon
            elif pred.comparison.value == ">=":
                out[name] = s >= pred.epsilon
            else:
                out[name] = s > pred.epsilon
        return out

    def with_calibrated(self, epsilons: Mapping[str, float]) -> "BoundSpec":
        """Copy with per-predicate thresholds replaced by calibrated values."""
        preds = dict(self.predicates)
        for name, eps in epsilons.items():
            preds[name] = preds[name].with_epsilon(eps)
        return BoundSpec(preds, self.targets)


def bind(doc: SpecDocument, base_dir) -> BoundSpec:
    """Load every imported target-set file and resolve predicate aliases."""
    base = Path(base_dir)
    targets = {alias: load_target_set(base / path) for alias, path in doc.target_imports}
    return BoundSpec(doc.predicates, targets)
