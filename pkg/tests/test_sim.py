import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from owgp.belief import ObservationNoiseModel
from owgp.geometry import Region, SensorModel
from owgp.sim import (
    Action,
    ActionFailed,
    Detections,
    Null,
    Simulator,
    Weight,
    WorldObject,
    WorldState,
    observe_look,
    step,
)

TABLE = Region("table", (-0.5, 0.5, 0.7), (0.5, 1.5, 1.0), (0.0, 0.0, math.pi / 2))
SIDE = Region("side", (1.0, -0.3, 0.7), (1.4, 0.3, 1.0), (0.4, 0.0, 0.0))


def world(objects, base=(0.0, 0.0, math.pi / 2), noise=None, held=None, seed=0):
    noise = noise or ObservationNoiseModel.diagonal(("can", "box"))
    objs = {o.id: o for o in objects}
    return WorldState(objs, base, {"table": TABLE, "side": SIDE}, noise, SensorModel(), held,
                      np.random.Generator(np.random.PCG64(seed)))


def can(id_, x, y, grams=100.0, hsv=(0.33, 0.8, 0.6), type_="can"):
    return WorldObject(id_, type_, (x, y, 0.76, 0.0), hsv, grams, "table")


def exact_noise():
    return ObservationNoiseModel.diagonal(("can", "box"), accuracy=1.0, pose_std=(0, 0, 0, 0),
                                          color_std=(0, 0, 0), false_negative_rate=0.0)


def test_action_validation():
    with pytest.raises(ValueError):
        Action("Fly")
    with pytest.raises(ValueError):
        Action("MoveBase")
    with pytest.raises(ValueError):
        Action("Place", point=(0, 0))


def test_empty_wedge():
    w = world([can("c", 0.0, 1.0)], base=(0.0, 0.0, -math.pi / 2))
    assert observe_look(w).items == ()


def test_noiseless_single_detection():
    w = world([can("c", 0.1, 1.0)], noise=exact_noise())
    (det,) = observe_look(w).items
    assert det.type == "can"
    assert np.allclose(det.pose, (0.1, 1.0, 0.76, 0.0))
    assert np.allclose(det.hsv, (0.33, 0.8, 0.6))


def test_collinear_far_object_hidden():
    w = world([can("near", 0.0, 0.8), can("far", 0.0, 1.4)], noise=exact_noise())
    dets = observe_look(w).items
    assert len(dets) == 1 and np.allclose(dets[0].pose[:2], (0.0, 0.8))


def test_look_excludes_out_of_view():
    w = world([can("front", 0.0, 1.0), can("side", 1.2, 0.0)], noise=exact_noise())
    _, obs = step(w, Action("Look"))
    assert len(obs.items) == 1


def test_weight_band_matches_lognormal_quantiles():
    """Fraction of weighings inside [90, 111] g agrees with the log-normal oracle."""
    n = 2000
    inside = 0
    for seed in range(n):
        w = world([can("b", 0.0, 0.6, grams=100.0)], seed=seed)
        _, obs = step(w, Action("Pick", point=(0.0, 0.6)))
        inside += 90.0 <= obs.grams <= 111.0
    sigma = 0.05
    p = stats.norm.cdf(math.log(111 / 100) / sigma) - stats.norm.cdf(math.log(90 / 100) / sigma)
    se = math.sqrt(p * (1 - p) / n)
    assert abs(inside / n - p) <= 3 * se


def test_pick_and_place_dynamics():
    w = world([can("c", 0.0, 0.6, grams=300.0)])
    w1, obs = step(w, Action("Pick", point=(0.02, 0.61)))
    assert isinstance(obs, Weight) and w1.held == "c"
    assert w.held is None  # pure step
    w2, obs = step(w1, Action("Place", point=(0.2, 0.7), region="table"))
    assert isinstance(obs, Null) and w2.held is None
    assert TABLE.contains(w2.objects["c"].pose)
    assert w2.region_of("c") == "table"


def test_failures():
    w = world([can("c", 0.0, 1.4)])
    _, obs = step(w, Action("Pick", point=(0.0, 1.4)))
    assert isinstance(obs, ActionFailed)  # out of reach
    _, obs = step(w, Action("Pick", point=(-0.4, 0.6)))
    assert isinstance(obs, ActionFailed)  # nothing there
    _, obs = step(w, Action("Place", point=(0.0, 0.6), region="table"))
    assert isinstance(obs, ActionFailed)  # nothing held
    _, obs = step(w, Action("Weigh"))
    assert isinstance(obs, ActionFailed)
    _, obs = step(w, Action("LookAtRegion", region="nowhere"))
    assert isinstance(obs, ActionFailed)
    behind = world([can("c", 0.0, 0.6)], base=(0.0, 0.0, -math.pi / 2))
    _, obs = step(behind, Action("Pick", point=(0.0, 0.6)))
    assert isinstance(obs, ActionFailed)  # not in view


def test_look_at_region_reports_coverage():
    w = world([can("c", 0.0, 1.0)], base=(0.0, 0.2, math.pi / 2))
    _, obs = step(w, Action("LookAtRegion", region="table"))
    assert isinstance(obs, Detections) and obs.region == "table" and 0.0 < obs.coverage <= 1.0


ACTIONS = st.sampled_from([
    Action("Look"), Action("LookAtRegion", region="table"), Action("Pick", point=(0.0, 0.6)),
    Action("Pick", point=(0.2, 0.9)), Action("Place", point=(0.3, 0.7), region="table"),
    Action("Weigh"), Action("MoveBase", pose=(0.0, 0.0, math.pi / 2)),
    Action("MoveBase", pose=(0.4, 0.0, 0.0)), Action("Place", point=(1.2, 0.0), region="side"),
])


@given(st.lists(ACTIONS, max_size=12), st.integers(0, 1000))
def test_conservation_and_determinism(actions, seed):
    objs = [can("a", 0.0, 0.6), can("b", 0.2, 0.9, grams=500.0)]
    s1, s2 = Simulator(world(objs), seed), Simulator(world(objs), seed)
    for a in actions:
        o1, o2 = s1.step(a), s2.step(a)
        assert repr(o1) == repr(o2)
        assert set(s1.world.objects) == {"a", "b"}
        if isinstance(o1, Detections) and s1.world.held is not None:
            assert len(o1.items) <= 1  # only the unheld object can show up
    assert len(s1.log) == len(actions)


def test_held_object_never_detected():
    w = world([can("a", 0.0, 0.6)], noise=exact_noise())
    w, _ = step(w, Action("Pick", point=(0.0, 0.6)))
    for _ in range(5):
        w, obs = step(w, Action("Look"))
        assert obs.items == ()


def test_noise_calibration():
    noise = ObservationNoiseModel.diagonal(("can", "box"), accuracy=0.9, false_negative_rate=0.0)
    w = world([can("a", 0.0, 1.0)], noise=noise, seed=3)
    n = 10_000
    errs, hits = [], 0
    for _ in range(n):
        (det,) = observe_look(w).items
        errs.append(det.pose - w.objects["a"].pose)
        hits += det.type == "can"
    emp = np.cov(np.array(errs).T)
    assert np.allclose(np.diag(emp), np.diag(noise.pose_obs_cov), rtol=0.1)
    se = math.sqrt(0.9 * 0.1 / n)
    assert abs(hits / n - 0.9) <= 3 * se
