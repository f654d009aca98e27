"""Per-property distribution families used in object beliefs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..geometry import wrap_angle, wrap_unit

PSD_TOL = 1e-9


class BeliefError(ValueError):
    pass


def _frozen_array(a, shape) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.shape != shape:
        raise BeliefError(f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise BeliefError("non-finite entries")
    arr.setflags(write=False)
    return arr


def _check_cov(cov: np.ndarray):
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise BeliefError("covariance is not symmetric")
    if np.linalg.eigvalsh(cov).min() < -PSD_TOL:
        raise BeliefError("covariance is not positive semi-definite")


def is_psd(m: np.ndarray, tol: float = PSD_TOL) -> bool:
    m = np.asarray(m, dtype=float)
    return bool(np.linalg.eigvalsh((m + m.T) / 2.0).min() >= -tol)


def cov_dominates(s1, s2) -> bool:
    """S1 <= S2 in the Loewner order: every equi-probability ellipsoid of
    S1 fits inside the matching ellipsoid of S2."""
    s1 = np.atleast_2d(np.asarray(s1, dtype=float))
    s2 = np.atleast_2d(np.asarray(s2, dtype=float))
    if s1.shape != s2.shape:
        raise BeliefError(f"dimension mismatch: {s1.shape} vs {s2.shape}")
    return is_psd(s2 - s1)


@dataclass(frozen=True)
class TypeDistribution:
    """Multinoulli over the scenario's type set."""

    probs: Mapping[str, float]

    def __post_init__(self):
        probs = {str(k): float(v) for k, v in self.probs.items()}
        if any(p < 0.0 or p > 1.0 for p in probs.values()):
            raise BeliefError("type probabilities must lie in [0, 1]")
        if abs(sum(probs.values()) - 1.0) > 1e-9:
            raise BeliefError(f"type probabilities sum to {sum(probs.values())}")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def over(cls, types, probs: Mapping[str, float]) -> "TypeDistribution":
        full = {t: 0.0 for t in types}
        for k, v in probs.items():
            if k not in full:
                raise BeliefError(f"unknown type {k!r}")
            full[k] = float(v)
        total = sum(full.values())
        if total <= 0.0:
            raise BeliefError("type distribution has no mass")
        return cls({k: v / total for k, v in full.items()})

    def __getitem__(self, name: str) -> float:
        return self.probs.get(name, 0.0)

    def map(self) -> str:
        return max(sorted(self.probs), key=lambda k: self.probs[k])


class _GaussianBase:
    mean: np.ndarray
    cov: np.ndarray

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return np.array_equal(self.mean, other.mean) and np.array_equal(self.cov, other.cov)

    def __hash__(self):
        return hash((type(self).__name__, self.mean.tobytes(), self.cov.tobytes()))

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))


@dataclass(frozen=True, eq=False)
class PoseDistribution(_GaussianBase):
    """Gaussian over (x, y, z, theta); theta mean lives in (-pi, pi]."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        if mean.shape == (4,):
            mean[3] = wrap_angle(mean[3])
        object.__setattr__(self, "mean", _frozen_array(mean, (4,)))
        object.__setattr__(self, "cov", _frozen_array(self.cov, (4, 4)))
        _check_cov(self.cov)

    @classmethod
    def from_std(cls, mean, std) -> "PoseDistribution":
        return cls(mean, np.diag(np.square(np.asarray(std, dtype=float))))


@dataclass(frozen=True, eq=False)
class ColorDistribution(_GaussianBase):
    """Gaussian in HSV truncated to the unit box; hue is circular."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        if mean.shape == (3,):
            mean[0] = wrap_unit(mean[0])
            mean[1:] = np.clip(mean[1:], 0.0, 1.0)
        object.__setattr__(self, "mean", _frozen_array(mean, (3,)))
        object.__setattr__(self, "cov", _frozen_array(self.cov, (3, 3)))
        _check_cov(self.cov)

    @classmethod
    def from_std(cls, mean, std) -> "ColorDistribution":
        return cls(mean, np.diag(np.square(np.asarray(std, dtype=float))))


@dataclass(frozen=True)
class WeightDistribution:
    """Gaussian over log-grams."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0) or not math.isfinite(self.sigma):
            raise BeliefError("weight sigma must be positive")
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))

    @classmethod
    def grams(cls, grams: float, sigma: float) -> "WeightDistribution":
        return cls(math.log(grams), sigma)

    @property
    def median_grams(self) -> float:
        return math.exp(self.mu)
