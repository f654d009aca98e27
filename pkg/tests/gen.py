"""Random beliefs, expressions and ground domains for the property tests."""
from __future__ import annotations

import math

import numpy as np

from conftest import make_belief, make_object
from owgp.geometry import Region
from owgp.lang.ast import And, Const, Exists, Or, Rel, Var
from owgp.planner.strips import GroundAction

UNARY = ("can", "box", "green", "red", "blue", "heavy", "true")
REGIONS = (Region("t1", (-0.5, 0.5, 0.7), (0.5, 1.5, 1.0), (0, -0.1, math.pi / 2)),
           Region("t2", (1.0, -0.5, 0.7), (2.0, 0.5, 1.0), (0.4, 0, 0)))


def random_belief(rng: np.random.Generator, n_objects: int):
    objs = []
    for i in range(1, n_objects + 1):
        p = float(rng.uniform(0.01, 0.99))
        objs.append(make_object(
            f"_o{i}_", types={"can": p, "box": 1 - p},
            pose=(rng.uniform(-1, 2), rng.uniform(-1, 2), rng.uniform(0.6, 1.1), rng.uniform(-3, 3)),
            pose_std=tuple(rng.uniform(0.01, 0.6, 4)),
            color=(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)),
            color_std=tuple(rng.uniform(0.01, 0.4, 3)),
            grams=float(rng.uniform(50, 900)), sigma=float(rng.uniform(0.05, 1.5)),
            w=float(rng.uniform(0.5, 1.0))))
    return make_belief(objs, REGIONS)


def random_expr(rng: np.random.Generator, depth: int, anchors, bound=(), fresh=None):
    """A closed expression body over ``anchors`` with nesting at most ``depth``."""
    fresh = fresh if fresh is not None else iter(f"v{i}" for i in range(10 ** 6))
    terms = [Var(v) for v in bound] + [Const(a) for a in anchors]
    if depth <= 1 or rng.random() < 0.3:
        t = terms[int(rng.integers(len(terms)))]
        if rng.random() < 0.2:
            return Rel(("on", "in")[int(rng.integers(2))], (t, Const(REGIONS[int(rng.integers(2))].name)))
        return Rel(UNARY[int(rng.integers(len(UNARY)))], (t,))
    kind = int(rng.integers(3))
    if kind == 2:
        v = next(fresh)
        return Exists(v, random_expr(rng, depth - 1, anchors, bound + (v,), fresh))
    node = And if kind == 0 else Or
    return node(random_expr(rng, depth - 1, anchors, bound, fresh),
                random_expr(rng, depth - 1, anchors, bound, fresh))


def expr_depth(e) -> int:
    if isinstance(e, Rel):
        return 1
    if isinstance(e, Exists):
        return 1 + expr_depth(e.body)
    return 1 + max(expr_depth(e.left), expr_depth(e.right))


def random_domain(rng: np.random.Generator, n_objects: int, n_rules: int):
    """A small ground STRIPS domain over ``n_objects`` objects.

    Atoms are properties of objects; costs are multiples of 1/8 so sums are
    exact in floating point and ties compare equal.
    """
    objs = [f"o{i}" for i in range(n_objects)]
    preds = ("p", "q", "r")
    atoms = [(pr, o) for pr in preds for o in objs]
    init = frozenset(a for a in atoms if rng.random() < 0.35)
    actions = []
    for k in range(n_rules):
        pick = lambda n: frozenset(atoms[i] for i in rng.choice(len(atoms), size=n, replace=False))
        pre = pick(int(rng.integers(0, 3)))
        add = pick(int(rng.integers(1, 3)))
        delete = pick(int(rng.integers(0, 2))) - add
        cost = float(rng.integers(1, 17)) / 8.0
        actions.append(GroundAction(f"a{k}", (objs[k % n_objects],), pre, add, delete, cost))
    goal = frozenset(atoms[i] for i in rng.choice(len(atoms), size=int(rng.integers(1, 4)), replace=False))
    return init, goal, actions
