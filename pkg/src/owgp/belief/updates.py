"""Bayesian measurement updates and detection-to-object association."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..geometry import wrap_angle, wrap_half
from .distributions import (
    BeliefError,
    ColorDistribution,
    PoseDistribution,
    TypeDistribution,
    WeightDistribution,
)
from .state import BeliefState, ObjectBelief, ObservationNoiseModel

DEFAULT_GATE = 3.0


@dataclass(frozen=True, eq=False)
class Detection:
    """One typed, colored pose reading from the camera."""

    type: str
    pose: np.ndarray
    hsv: np.ndarray

    def __post_init__(self):
        pose = np.array(self.pose, dtype=float)
        hsv = np.array(self.hsv, dtype=float)
        if pose.shape != (4,) or hsv.shape != (3,) or not np.all(np.isfinite(pose)):
            raise BeliefError("detection needs a finite 4-D pose and an HSV triple")
        pose.setflags(write=False)
        hsv.setflags(write=False)
        object.__setattr__(self, "pose", pose)
        object.__setattr__(self, "hsv", hsv)

    def as_dict(self) -> dict:
        return {"type": self.type, "pose": [float(v) for v in self.pose],
                "hsv": [float(v) for v in self.hsv]}


def kalman_update(mean, cov, z, r, circular=None):
    """Identity-measurement Kalman update.

    ``circular`` maps an index to its innovation wrapping function.
    Returns the posterior mean and a symmetrised posterior covariance.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    innov = np.asarray(z, dtype=float) - mean
    for i, wrap in (circular or {}).items():
        innov[i] = wrap(innov[i])
    s = cov + np.asarray(r, dtype=float)
    try:
        gain = np.linalg.solve(s.T, cov.T).T
    except np.linalg.LinAlgError as exc:
        raise BeliefError("singular innovation covariance") from exc
    if not np.all(np.isfinite(gain)):
        raise BeliefError("singular innovation covariance")
    post_mean = mean + gain @ innov
    i_k = np.eye(len(mean)) - gain
    post_cov = i_k @ cov @ i_k.T + gain @ np.asarray(r, dtype=float) @ gain.T
    post_cov = (post_cov + post_cov.T) / 2.0
    return post_mean, post_cov


def update_type(belief: BeliefState, anchor: str, observed_type: str,
                noise: ObservationNoiseModel) -> BeliefState:
    ob = belief.obj(anchor)
    like = noise.likelihood(observed_type)
    post = {t: ob.type_d[t] * like.get(t, 0.0) for t in ob.type_d.probs}
    total = sum(post.values())
    if total <= 0.0:
        raise BeliefError(f"observation {observed_type!r} impossible under the prior")
    type_d = TypeDistribution({t: p / total for t, p in post.items()})
    return belief.with_object(replace(ob, type_d=type_d))


def update_pose(belief: BeliefState, anchor: str, observed_pose, noise: ObservationNoiseModel) -> BeliefState:
    ob = belief.obj(anchor)
    mean, cov = kalman_update(ob.pose_d.mean, ob.pose_d.cov, observed_pose, noise.pose_obs_cov,
                              circular={3: wrap_angle})
    return belief.with_object(replace(ob, pose_d=PoseDistribution(mean, cov)))


def update_color(belief: BeliefState, anchor: str, observed_hsv, noise: ObservationNoiseModel) -> BeliefState:
    ob = belief.obj(anchor)
    mean, cov = kalman_update(ob.color_d.mean, ob.color_d.cov, observed_hsv, noise.color_obs_cov,
                              circular={0: wrap_half})
    return belief.with_object(replace(ob, color_d=ColorDistribution(mean, cov)))


def update_weight(belief: BeliefState, anchor: str, observed_grams: float,
                  noise: ObservationNoiseModel) -> BeliefState:
    if not observed_grams > 0.0:
        raise BeliefError("weight observations must be positive")
    ob = belief.obj(anchor)
    prior = ob.weight_d
    var0, r = prior.sigma ** 2, noise.weight_obs_sigma ** 2
    gain = var0 / (var0 + r)
    mu = prior.mu + gain * (math.log(observed_grams) - prior.mu)
    var = (1.0 - gain) * var0
    return belief.with_object(replace(ob, weight_d=WeightDistribution(mu, math.sqrt(var))))


def raise_existence(belief: BeliefState, anchor: str) -> BeliefState:
    ob = belief.obj(anchor)
    w = 1.0 - (1.0 - ob.detection_weight) * belief.vocab.redetection_factor
    return belief.with_object(replace(ob, detection_weight=min(1.0, w)))


def mahalanobis_xyz(ob: ObjectBelief, pose, noise: ObservationNoiseModel) -> float:
    s = ob.pose_d.cov[:3, :3] + noise.pose_obs_cov[:3, :3]
    d = np.asarray(pose[:3], dtype=float) - ob.pose_d.mean[:3]
    try:
        return float(math.sqrt(max(0.0, d @ np.linalg.solve(s, d))))
    except np.linalg.LinAlgError:
        return math.inf


def associate_detection(belief: BeliefState, detection: Detection, noise: ObservationNoiseModel,
                        gate: float = DEFAULT_GATE) -> tuple[BeliefState, str, bool]:
    """Fold a detection into the closest gated object or start a new one."""
    best: Optional[str] = None
    best_d = math.inf
    for anchor in belief.anchors():
        if anchor == belief.held:
            continue
        d = mahalanobis_xyz(belief.objects[anchor], detection.pose, noise)
        if d < best_d:
            best, best_d = anchor, d
    if best is not None and best_d <= gate:
        b = update_type(belief, best, detection.type, noise)
        b = update_pose(b, best, detection.pose, noise)
        b = update_color(b, best, detection.hsv, noise)
        b = raise_existence(b, best)
        return b, best, False

    belief, anchor = belief.fresh_anchor()
    vocab = belief.vocab
    uniform = {t: 1.0 / len(vocab.types) for t in vocab.types}
    like = noise.likelihood(detection.type)
    type_d = TypeDistribution.over(vocab.types, {t: uniform[t] * like.get(t, 0.0) for t in vocab.types})
    ob = ObjectBelief(
        anchor=anchor,
        type_d=type_d,
        pose_d=PoseDistribution(detection.pose, noise.pose_obs_cov),
        color_d=ColorDistribution(detection.hsv, noise.color_obs_cov),
        weight_d=vocab.weight_prior(),
        detection_weight=vocab.new_detection_weight,
    )
    return belief.with_object(ob), anchor, True


def update_region_confidence(belief: BeliefState, region: str, coverage: float) -> BeliefState:
    c = belief.confidence(region)
    coverage = min(1.0, max(0.0, coverage))
    conf = dict(belief.region_confidence)
    conf[region] = 1.0 - (1.0 - c) * (1.0 - coverage)
    return replace(belief, region_confidence=conf)


def exists_in_region_prob(belief: BeliefState, expr, region: str) -> float:
    """Chance that an object matching ``expr`` is still undiscovered in ``region``.

    The configured prior is per region; ``expr`` is accepted for the
    fluent's signature but does not change the prior.
    """
    c = belief.confidence(region)
    prior = float(belief.region_priors.get(region, 0.0))
    return min(1.0, max(0.0, prior * (1.0 - c)))


def set_pose(belief: BeliefState, anchor: str, mean, std) -> BeliefState:
    ob = belief.obj(anchor)
    return belief.with_object(replace(ob, pose_d=PoseDistribution.from_std(mean, std)))


def inflate_pose(belief: BeliefState, anchor: str, factor: float) -> BeliefState:
    ob = belief.obj(anchor)
    return belief.with_object(replace(ob, pose_d=PoseDistribution(ob.pose_d.mean, ob.pose_d.cov * factor)))
