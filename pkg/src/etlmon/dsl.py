"""Text DSL for specification documents.

A document is a sequence of statements::

    targets goals_A = "targets/goal_A.json";
    pred near_A = dist(l2, goals_A, min) <= 0.409;
    spec hold = G near_A;

Comments run from ``#`` to end of line.  Formula precedence, loosest to
tightest: U (right-associative), ``|``, ``&``, then prefix ``!``/``F``/``G``.
``U``, ``F`` and ``G`` are reserved words and cannot be used as identifiers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from . import formula as F
from .embeddings import Aggregation, Comparison, DistanceFn, EmbeddingPredicate
from .errors import (
    DuplicateName,
    NegativeEpsilon,
    SpecSyntaxError,
    UnknownPredicate,
    UnknownTargetAlias,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>-?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<op><=|>=|<|>|=|;|\(|\)|,|!|&|\|)
    """,
    re.VERBOSE,
)

_KEYWORDS = {
    "targets",
    "pred",
    "spec",
    "dist",
    "l2",
    "cosine",
    "min",
    "max",
    "true",
    "false",
    "U",
    "F",
    "G",
}


@dataclass(frozen=True)
class Token:
    kind: str  # 'number' | 'ident' | 'string' | 'op' | keyword itself | 'eof'
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SpecSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "ident" and value in _KEYWORDS:
            tokens.append(Token(value, value, line, col))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class SpecDocument:
    """Parsed specification: target imports, predicates, and named formulas."""

    target_imports: list[tuple[str, str]] = field(default_factory=list)
    predicates: dict[str, EmbeddingPredicate] = field(default_factory=dict)
    specs: dict[str, F.Formula] = field(default_factory=dict)

    @property
    def target_aliases(self) -> dict[str, str]:
        return dict(self.target_imports)


_DISTANCES = {"l2": DistanceFn.L2, "cosine": DistanceFn.COSINE}
_AGGREGATIONS = {"min": Aggregation.MIN, "max": Aggregation.MAX}
_COMPARISONS = {"<=": Comparison.LE, "<": Comparison.LT, ">=": Comparison.GE, ">": Comparison.GT}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind and not (tok.kind == "op" and tok.value == kind):
            raise SpecSyntaxError(f"expected {kind!r}, found {tok.value!r}", tok.line, tok.col)
        return self.next()

    def error(self, message: str) -> SpecSyntaxError:
        tok = self.peek()
        return SpecSyntaxError(message, tok.line, tok.col)

    # --- statements ---

    def document(self) -> SpecDocument:
        doc = SpecDocument()
        pending_specs: list[tuple[str, F.Formula, Token]] = []
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "targets":
                self.next()
                name = self.expect("ident").value
                self.expect("=")
                path = self.expect("string").value[1:-1]
                self.expect(";")
                if name in doc.target_aliases:
                    raise DuplicateName(f"duplicate target alias {name!r}")
                doc.target_imports.append((name, path))
            elif tok.kind == "pred":
                self.next()
                name = self.expect("ident").value
                self.expect("=")
                pred = self.predicate_decl(name)
                self.expect(";")
                if name in doc.predicates:
                    raise DuplicateName(f"duplicate predicate {name!r}")
                doc.predicates[name] = pred
            elif tok.kind == "spec":
                self.next()
                name_tok = self.expect("ident")
                self.expect("=")
                f = self.formula()
                self.expect(";")
                if any(n == name_tok.value for n, _, _ in pending_specs):
                    raise DuplicateName(f"duplicate spec {name_tok.value!r}")
                pending_specs.append((name_tok.value, f, name_tok))
            else:
                raise self.error(f"expected a statement, found {tok.value!r}")
        # predicates may be declared after the specs that use them
        for name, f, _tok in pending_specs:
            for pname in F.predicate_names(f):
                if pname not in doc.predicates:
                    raise UnknownPredicate(f"spec {name!r} references unknown predicate {pname!r}")
            doc.specs[name] = f
        aliases = doc.target_aliases
        for pred in doc.predicates.values():
            if pred.target not in aliases:
                raise UnknownTargetAlias(
                    f"predicate {pred.name!r} references unknown target alias {pred.target!r}"
                )
        return doc

    def predicate_decl(self, name: str) -> EmbeddingPredicate:
        self.expect("dist")
        self.expect("(")
        fn_tok = self.next()
        if fn_tok.kind not in _DISTANCES:
            raise SpecSyntaxError("expected 'l2' or 'cosine'", fn_tok.line, fn_tok.col)
        self.expect(",")
        alias = self.expect("ident").value
        self.expect(",")
        agg_tok = self.next()
        if agg_tok.kind not in _AGGREGATIONS:
            raise SpecSyntaxError("expected 'min' or 'max'", agg_tok.line, agg_tok.col)
        self.expect(")")
        cmp_tok = self.next()
        if cmp_tok.kind != "op" or cmp_tok.value not in _COMPARISONS:
            raise SpecSyntaxError("expected a comparison (<=, <, >=, >)", cmp_tok.line, cmp_tok.col)
        num_tok = self.expect("number")
        epsilon = float(num_tok.value)
        if epsilon < 0:
            raise NegativeEpsilon(f"predicate {name!r}: threshold must be >= 0, got {epsilon}")
        return EmbeddingPredicate(
            name=name,
            target=alias,
            distance=_DISTANCES[fn_tok.kind],
            epsilon=epsilon,
            comparison=_COMPARISONS[cmp_tok.value],
            aggregation=_AGGREGATIONS[agg_tok.kind],
        )

    # --- formulas (precedence climbing) ---

    def formula(self) -> F.Formula:
        return self.until()

    def until(self) -> F.Formula:
        left = self.or_()
        if self.peek().kind == "U":
            self.next()
            right = self.until()  # right-associative
            return F.Until(left, right)
        return left

    def or_(self) -> F.Formula:
        node = self.and_()
        while self.peek().kind == "op" and self.peek().value == "|":
            self.next()
            node = F.Or(node, self.and_())
        return node

    def and_(self) -> F.Formula:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().value == "&":
            self.next()
            node = F.And(node, self.unary())
        return node

    def unary(self) -> F.Formula:
        tok = self.peek()
        if tok.kind == "op" and tok.value == "!":
            self.next()
            return F.Not(self.unary())
        if tok.kind == "F":
            self.next()
            return F.Eventually(self.unary())
        if tok.kind == "G":
            self.next()
            return F.Always(self.unary())
        return self.atom()

    def atom(self) -> F.Formula:
        tok = self.peek()
        if tok.kind == "true":
            self.next()
            return F.TRUE
        if tok.kind == "false":
            self.next()
            return F.FALSE
        if tok.kind == "ident":
            self.next()
            return F.Pred(tok.value)
        if tok.kind == "op" and tok.value == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        raise self.error(f"expected a formula atom, found {tok.value!r}")


def parse(source_text: str) -> SpecDocument:
    """Parse a specification document; raises SpecSyntaxError with position."""
    return _Parser(_tokenize(source_text)).document()


def parse_formula(text: str, predicates: Mapping[str, EmbeddingPredicate] | None = None) -> F.Formula:
    """Parse a bare formula; optionally check predicate references."""
    parser = _Parser(_tokenize(text))
    f = parser.formula()
    tok = parser.peek()
    if tok.kind != "eof":
        raise SpecSyntaxError(f"trailing input {tok.value!r}", tok.line, tok.col)
    if predicates is not None:
        for name in F.predicate_names(f):
            if name not in predicates:
                raise UnknownPredicate(f"unknown predicate {name!r}")
    return f


def pretty_document(doc: SpecDocument) -> str:
    """Canonical text form of a document; parse(pretty_document(d)) == d."""
    lines = []
    for alias, path in doc.target_imports:
        lines.append(f'targets {alias} = "{path}";')
    for pred in doc.predicates.values():
        lines.append(
            f"pred {pred.name} = dist({pred.distance.value}, {pred.target}, "
            f"{pred.aggregation.value}) {pred.comparison.value} {pred.epsilon!r};"
        )
    for name, f in doc.specs.items():
        lines.append(f"spec {name} = {F.pretty(f)};")
    return "\n".join(lines) + ("\n" if lines else "")
