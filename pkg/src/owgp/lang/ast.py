"""Denoting expressions, terms and goal fluents.

All nodes are frozen dataclasses so they can sit inside the planner's
subgoal sets.  Source positions are carried for error messages but are
ignored by equality and hashing.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Mapping, Optional, Union

Pos = Optional[tuple[int, int]]


def _pos():
    return field(default=None, compare=False, hash=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    """An anchor or a named constant; always a rigid designator."""

    name: str
    pos: Pos = _pos()

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Skolem:
    """Placeholder for an object that has not been found yet."""

    id: int
    pos: Pos = _pos()

    @property
    def name(self) -> str:
        return f"Sk{self.id}"

    def __str__(self):
        return self.name


Term = Union[Var, Const, Skolem]


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Lambda:
    var: str
    body: "Expr"
    pos: Pos = _pos()


Expr = Union[Rel, And, Or, Exists, Lambda]


# Fluents ------------------------------------------------------------------

@dataclass(frozen=True)
class Den:
    """Den(expr, term): ``term`` is denoted by the lambda ``expr``."""

    expr: Lambda
    term: Term


@dataclass(frozen=True)
class BBool:
    """B(phi, p) for a ground relation or a Den fluent."""

    phi: Union[Rel, Den]
    p: float


@dataclass(frozen=True)
class KRD:
    term: Term


@dataclass(frozen=True)
class BContents:
    region: str
    p: float


@dataclass(frozen=True)
class ExistsInRegion:
    expr: Lambda
    region: str
    p: float


@dataclass(frozen=True)
class BCont:
    """B(phi, mu, Sigma, Delta, p) over the Gaussian quantity ``dim`` of ``term``."""

    term: Term
    dim: str
    mu: tuple
    sigma: tuple
    delta: tuple
    p: float


@dataclass(frozen=True)
class GoalFormula:
    variables: tuple[str, ...]
    fluents: tuple


# Variable handling ----------------------------------------------------------

def free_vars(expr, bound: frozenset = frozenset()) -> set[str]:
    if isinstance(expr, Rel):
        return {a.name for a in expr.args if isinstance(a, Var) and a.name not in bound}
    if isinstance(expr, (And, Or)):
        return free_vars(expr.left, bound) | free_vars(expr.right, bound)
    if isinstance(expr, (Exists, Lambda)):
        return free_vars(expr.body, bound | {expr.var})
    raise TypeError(f"not an expression: {expr!r}")


def substitute(expr, sigma: Mapping[str, Term]):
    """Apply ``sigma`` to the free variables of ``expr`` only."""
    if not sigma:
        return expr
    if isinstance(expr, Rel):
        args = tuple(sigma.get(a.name, a) if isinstance(a, Var) else a for a in expr.args)
        return expr if args == expr.args else replace(expr, args=args)
    if isinstance(expr, (And, Or)):
        left, right = substitute(expr.left, sigma), substitute(expr.right, sigma)
        if left is expr.left and right is expr.right:
            return expr
        return replace(expr, left=left, right=right)
    if isinstance(expr, (Exists, Lambda)):
        inner = {k: v for k, v in sigma.items() if k != expr.var}
        body = substitute(expr.body, inner)
        return expr if body is expr.body else replace(expr, body=body)
    raise TypeError(f"not an expression: {expr!r}")


def bind_terms(node, mapping: Mapping):
    """Replace terms at fluent level (never inside lambda bodies)."""
    if not mapping:
        return node
    if isinstance(node, (Var, Const, Skolem)):
        return mapping.get(node, node)
    if isinstance(node, Lambda):
        return node
    if isinstance(node, tuple):
        return tuple(bind_terms(x, mapping) for x in node)
    if isinstance(node, frozenset):
        return frozenset(bind_terms(x, mapping) for x in node)
    if hasattr(node, "__dataclass_fields__"):
        changes = {}
        for f in fields(node):
            if not f.compare:
                continue
            old = getattr(node, f.name)
            new = bind_terms(old, mapping)
            if new is not old and new != old:
                changes[f.name] = new
        return replace(node, **changes) if changes else node
    return node


def terms_of(node) -> set:
    """Fluent-level terms of ``node``."""
    out: set = set()
    if isinstance(node, (Var, Const, Skolem)):
        out.add(node)
    elif isinstance(node, Lambda):
        pass
    elif isinstance(node, (tuple, frozenset)):
        for x in node:
            out |= terms_of(x)
    elif hasattr(node, "__dataclass_fields__"):
        for f in fields(node):
            if f.compare:
                out |= terms_of(getattr(node, f.name))
    return out


def alpha_rename(expr: Lambda, new_var: str) -> Lambda:
    """Rename the lambda variable; ``new_var`` must not occur in the body."""
    return Lambda(new_var, substitute(expr.body, {expr.var: Var(new_var)}))
