"""Formula AST for temporal specifications over embedding predicates.

Surface operators: predicate atoms, the constants true/false, negation,
conjunction, disjunction, until, eventually (F), and always (G).  The
core fragment is {Pred, True, Not, And, Until}; `desugar` rewrites the
rest into it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Pred:
    name: str


@dataclass(frozen=True)
class TrueConst:
    pass


@dataclass(frozen=True)
class FalseConst:
    pass


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Until:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Eventually:
    child: "Formula"


@dataclass(frozen=True)
class Always:
    child: "Formula"


Formula = Union[Pred, TrueConst, FalseConst, Not, And, Or, Until, Eventually, Always]

TRUE = TrueConst()
FALSE = FalseConst()


def desugar(f: Formula) -> Formula:
    """Rewrite to the core fragment {Pred, True, Not, And, Until}.

    F p      -> true U p
    G p      -> !(true U !p)
    a | b    -> !(!a & !b)
    false    -> !true
    """
    if isinstance(f, (Pred, TrueConst)):
        return f
    if isinstance(f, FalseConst):
        return Not(TRUE)
    if isinstance(f, Not):
        return Not(desugar(f.child))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Or):
        return Not(And(Not(desugar(f.left)), Not(desugar(f.right))))
    if isinstance(f, Until):
        return Until(desugar(f.left), desugar(f.right))
    if isinstance(f, Eventually):
        return Until(TRUE, desugar(f.child))
    if isinstance(f, Always):
        return Not(Until(TRUE, Not(desugar(f.child))))
    raise TypeError(f"not a formula: {f!r}")


def predicate_names(f: Formula) -> tuple[str, ...]:
    """Distinct predicate names in first-occurrence (left-to-right) order."""
    seen: dict[str, None] = {}

    def walk(g: Formula) -> None:
        if isinstance(g, Pred):
            seen.setdefault(g.name, None)
        elif isinstance(g, (Not, Eventually, Always)):
            walk(g.child)
        elif isinstance(g, (And, Or, Until)):
            walk(g.left)
            walk(g.right)

    walk(f)
    return tuple(seen)


def is_temporal_free(f: Formula) -> bool:
    """True when the formula contains no U/F/G operator."""
    if isinstance(f, (Pred, TrueConst, FalseConst)):
        return True
    if isinstance(f, Not):
        return is_temporal_free(f.child)
    if isinstance(f, (And, Or)):
        return is_temporal_free(f.left) and is_temporal_free(f.right)
    return False


# Precedence levels, loosest to tightest: U, |, &, prefix !/F/G, atoms.
_PREC_UNTIL = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_UNARY = 4
_PREC_ATOM = 5


def pretty(f: Formula) -> str:
    """Canonical text form; `parse` of the output reproduces the AST."""
    return _pretty(f, 0)


def _pretty(f: Formula, parent_prec: int) -> str:
    if isinstance(f, Pred):
        return f.name
    if isinstance(f, TrueConst):
        return "true"
    if isinstance(f, FalseConst):
        return "false"
    if isinstance(f, Not):
        return _wrap(f"!{_pretty(f.child, _PREC_UNARY)}", _PREC_UNARY, parent_prec)
    if isinstance(f, Eventually):
        return _wrap(f"F {_pretty(f.child, _PREC_UNARY)}", _PREC_UNARY, parent_prec)
    if isinstance(f, Always):
        return _wrap(f"G {_pretty(f.child, _PREC_UNARY)}", _PREC_UNARY, parent_prec)
    if isinstance(f, And):
        # left-assoc chain: left child may render at the same level
        s = f"{_pretty(f.left, _PREC_AND)} & {_pretty(f.right, _PREC_AND + 1)}"
        return _wrap(s, _PREC_AND, parent_prec)
    if isinstance(f, Or):
        s = f"{_pretty(f.left, _PREC_OR)} | {_pretty(f.right, _PREC_OR + 1)}"
        return _wrap(s, _PREC_OR, parent_prec)
    if isinstance(f, Until):
        # right-associative
        s = f"{_pretty(f.left, _PREC_UNTIL + 1)} U {_pretty(f.right, _PREC_UNTIL)}"
        return _wrap(s, _PREC_UNTIL, parent_prec)
    raise TypeError(f"not a formula: {f!r}")


def _wrap(s: str, prec: int, parent_prec: int) -> str:
    return f"({s})" if prec < parent_prec else s
