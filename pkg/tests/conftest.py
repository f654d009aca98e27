import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from owgp.belief import (
    BeliefState,
    ColorDistribution,
    ObjectBelief,
    ObservationNoiseModel,
    PoseDistribution,
    TypeDistribution,
    Vocabulary,
    WeightDistribution,
)
from owgp.geometry import Region

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def make_object(anchor, types=None, pose=(0.0, 0.0, 0.76, 0.0), pose_std=(0.05, 0.05, 0.02, 0.1),
                color=(0.33, 0.7, 0.6), color_std=(0.05, 0.1, 0.1), grams=250.0, sigma=1.0, w=1.0):
    types = types or {"can": 0.5, "box": 0.5}
    return ObjectBelief(anchor, TypeDistribution(types), PoseDistribution.from_std(pose, pose_std),
                        ColorDistribution.from_std(color, color_std),
                        WeightDistribution(math.log(grams), sigma), w)


def make_belief(objects=(), regions=(), types=("can", "box"), held=None, confidence=None, priors=None,
                base=(0.0, 0.0, 0.0)):
    vocab = Vocabulary(tuple(types))
    regs = {r.name: r for r in regions}
    return BeliefState(
        {o.anchor: o for o in objects},
        PoseDistribution.from_std((base[0], base[1], 0.0, base[2]), (0.01,) * 4),
        vocab, regs,
        confidence if confidence is not None else {r: 1.0 for r in regs},
        priors if priors is not None else {r: 0.0 for r in regs},
        held,
    )


@pytest.fixture
def table():
    return Region("table", (-0.5, 0.5, 0.7), (0.5, 1.5, 1.0), (0.0, -0.1, math.pi / 2))


@pytest.fixture
def noise():
    return ObservationNoiseModel.diagonal(("can", "box"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance verdicts, filled in by test_acceptance and printed at the end of the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
