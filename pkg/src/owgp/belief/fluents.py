"""Belief fluents over Boolean and Gaussian quantities."""
from __future__ import annotations

import numpy as np

from .distributions import BeliefError, cov_dominates
from .state import BeliefState

GAUSSIAN_DIMS = ("pose", "color", "weight")


def gaussian_quantity(belief: BeliefState, anchor: str, dim: str):
    """Mean, covariance and mixture weight of a Gaussian-believed quantity."""
    ob = belief.obj(anchor)
    if dim == "pose":
        return ob.pose_d.mean, ob.pose_d.cov, ob.detection_weight
    if dim == "color":
        return ob.color_d.mean, ob.color_d.cov, ob.detection_weight
    if dim == "weight":
        w = ob.weight_d
        return np.array([w.mu]), np.array([[w.sigma ** 2]]), ob.detection_weight
    raise BeliefError(f"{dim!r} is not a Gaussian-believed quantity")


def holds_cont_fluent(belief: BeliefState, phi: tuple[str, str], mu, sigma, delta, p) -> bool:
    """B(phi, mu, Sigma, Delta, p) on the quantity ``phi = (anchor, dim)``.

    The last clause compares p against the mixture weight exactly as the
    fluent is defined: ``p >= P_b``.
    """
    mean, cov, weight = gaussian_quantity(belief, *phi)
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    close = bool(np.all(np.abs(mu - mean) <= delta))
    return close and cov_dominates(cov, sigma) and p >= weight


def holds_bool_fluent(belief: BeliefState, phi, p: float) -> bool:
    """B(phi, p): P_b(phi) >= p, ``phi`` being anything :func:`fluent_prob` knows."""
    from ..lang.evaluate import fluent_prob

    return fluent_prob(phi, belief) >= p
