"""Probabilities of ground relations under a belief state.

Color and pose queries treat the stored covariance as diagonal: each axis
contributes an independent 1-D Gaussian mass and the masses multiply.
"""
from __future__ import annotations

import math
from typing import Sequence

from .distributions import BeliefError
from .state import HEAVY, SPATIAL_RELATIONS, TRUE_RELATION, BeliefState, ColorBox, ObjectBelief

_SQRT2 = math.sqrt(2.0)
_HUE_WRAPS = range(-3, 4)


def norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / _SQRT2)


def norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / _SQRT2)


def std_interval(a: float, b: float) -> float:
    """P(a <= Z <= b) for a standard normal, accurate in both tails."""
    if b <= a:
        return 0.0
    if a > 0.0:
        return max(0.0, norm_sf(a) - norm_sf(b))
    return max(0.0, norm_cdf(b) - norm_cdf(a))


def interval_prob(mu: float, sigma: float, lo: float, hi: float) -> float:
    if sigma <= 0.0:
        return 1.0 if lo <= mu <= hi else 0.0
    return std_interval((lo - mu) / sigma, (hi - mu) / sigma)


def truncated_interval_prob(mu, sigma, lo, hi, a=0.0, b=1.0) -> float:
    """Mass of [lo, hi] under N(mu, sigma^2) truncated to [a, b]."""
    lo, hi = max(lo, a), min(hi, b)
    if hi <= lo:
        return 0.0
    z = interval_prob(mu, sigma, a, b)
    if z <= 0.0:
        return 1.0 if lo <= min(max(mu, a), b) <= hi else 0.0
    return min(1.0, interval_prob(mu, sigma, lo, hi) / z)


def wrapped_interval_prob(mu: float, sigma: float, lo: float, hi: float) -> float:
    """Mass of the arc [lo, hi] under a normal wrapped onto the unit circle."""
    if sigma <= 0.0:
        return 1.0 if lo <= mu <= hi else 0.0
    return min(1.0, sum(interval_prob(mu, sigma, lo + k, hi + k) for k in _HUE_WRAPS))


def color_box_prob(ob: ObjectBelief, box: ColorBox) -> float:
    mean, std = ob.color_d.mean, ob.color_d.std
    hue = min(1.0, sum(wrapped_interval_prob(mean[0], std[0], a, b) for a, b in box.hue))
    sat = truncated_interval_prob(mean[1], std[1], *box.sat)
    val = truncated_interval_prob(mean[2], std[2], *box.val)
    return hue * sat * val


def heavy_prob(ob: ObjectBelief, threshold_grams: float) -> float:
    w = ob.weight_d
    return norm_sf((math.log(threshold_grams) - w.mu) / w.sigma)


def region_mass(ob: ObjectBelief, lo, hi, axes) -> float:
    mean, std = ob.pose_d.mean, ob.pose_d.std
    p = 1.0
    for i in axes:
        p *= interval_prob(mean[i], std[i], lo[i], hi[i])
    return p


def prob_ground_relation(belief: BeliefState, rel: str, args: Sequence[str]) -> float:
    """b(R(c1..cn)): probability of a ground relation in ``belief``.

    Every value is scaled by the object's detection weight.
    """
    rel = rel.lower()
    vocab = belief.vocab
    arity = vocab.arity(rel)
    if len(args) != arity:
        raise BeliefError(f"{rel} expects {arity} argument(s), got {len(args)}")
    ob = belief.obj(args[0])
    w = ob.detection_weight
    if rel in SPATIAL_RELATIONS:
        region = belief.region(args[1])
        if belief.held == ob.anchor:
            return 0.0
        axes = (0, 1) if rel == "on" else (0, 1, 2)
        return w * region_mass(ob, region.lo, region.hi, axes)
    if rel == TRUE_RELATION:
        return w
    if rel == HEAVY:
        return w * heavy_prob(ob, vocab.heavy_grams)
    if rel in vocab.colors:
        return w * color_box_prob(ob, vocab.colors[rel])
    return w * ob.type_d[rel]


def top_color(belief: BeliefState, anchor: str) -> str:
    ob = belief.obj(anchor)
    names = sorted(belief.vocab.colors)
    if not names:
        return ""
    return max(names, key=lambda c: color_box_prob(ob, belief.vocab.colors[c]))
