import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adhfric.contact import ContactPair
from adhfric.friction import (ContactPointState, Status, frictionless_reset, return_map,
                              sliding_criterion, trial_traction)
from adhfric.geometry import BSplineSurface, RigidLine, closest_point_projection
from adhfric.laws import DI, AdhesionParams, slide_threshold_DI

LINE = RigidLine([0.0, 0.0], [0.0, 1.0])


def _state(xi_s, status=Status.STICK):
    return ContactPointState(xi_s=xi_s, status=status, anchor_valid=True)


def test_zero_elastic_gap_gives_zero_trial():
    pr = closest_point_projection([0.3, 0.2], LINE)
    t, moved = trial_traction(_state(pr.xi), pr, 50.0, LINE)
    assert not moved
    np.testing.assert_array_equal(t, [0.0, 0.0])


def test_linear_spring_trial():
    pr = closest_point_projection([0.0, 0.2], LINE)
    # anchor 0.01 behind the foot point along the line
    t, _ = trial_traction(_state(pr.xi - 0.01), pr, 100.0, LINE)
    assert np.linalg.norm(t) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("tt, ts, f", [([0.0, 0.0], 1.0, -1.0), ([1.0, 0.0], 1.0, 0.0),
                                       ([1.5, 0.0], 1.0, 0.5)])
def test_sliding_criterion(tt, ts, f):
    assert sliding_criterion(np.array(tt), ts) == pytest.approx(f, abs=1e-15)


def test_stick_branch_keeps_trial():
    pr = closest_point_projection([0.0, 0.2], LINE)
    up = return_map(_state(pr.xi - 0.005), pr, 1.0, 100.0, LINE)
    assert up.branch == Status.STICK and up.dgamma == 0.0
    assert np.linalg.norm(up.t_t) == pytest.approx(0.5, rel=1e-12)


def test_slide_branch_radial_return():
    pr = closest_point_projection([0.0, 0.2], LINE)
    tt, _ = trial_traction(_state(pr.xi - 0.015), pr, 100.0, LINE)
    up = return_map(_state(pr.xi - 0.015), pr, 1.0, 100.0, LINE)
    assert up.branch == Status.SLIDE
    assert up.dgamma == pytest.approx(0.005, rel=1e-12)
    assert np.linalg.norm(up.t_t) == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(up.t_t / np.linalg.norm(up.t_t), tt / np.linalg.norm(tt))


def test_zero_threshold_gives_zero_traction():
    pr = closest_point_projection([0.0, 0.2], LINE)
    up = return_map(_state(pr.xi - 0.3), pr, 0.0, 100.0, LINE)
    np.testing.assert_allclose(up.t_t, 0.0, atol=1e-15)


def test_frictionless_reset_snaps_anchor():
    pr = closest_point_projection([0.7, 0.2], LINE)
    up = frictionless_reset(_state(3.0, Status.FRICTIONLESS_SLIDE), pr)
    assert up.xi_s == pr.xi
    # re-entry starts sticking from the snapped anchor
    again = return_map(_state(up.xi_s), pr, 1.0, 100.0, LINE)
    assert again.branch == Status.STICK and np.all(again.t_t == 0.0)


def test_return_map_rejects_far_points():
    pr = closest_point_projection([0.7, 0.2], LINE)
    with pytest.raises(ValueError):
        return_map(ContactPointState(status=Status.FAR), pr, 1.0, 100.0, LINE)


def test_anchor_outside_domain_is_reanchored():
    seg = RigidLine([0.0, 0.0], [0.0, 1.0], bounds=(-1.0, 1.0))
    pr = closest_point_projection([0.5, 0.2], seg)
    up = return_map(_state(5.0), pr, 1.0, 100.0, seg)
    assert up.reanchored and up.xi_s == pr.xi


def test_kernel_matches_reference():
    ap = AdhesionParams(0.05, 0.4)
    n = 8
    X = np.column_stack([np.linspace(0.0, 4.0, n), np.full(n, 1.02 * ap.g_eq)])
    di = DI.from_mu(1.0, ap)
    pair = ContactPair(BSplineSurface(np.arange(n)), LINE, ap, di, eps_t=50.0)
    pair.initialize(X, X)
    x = X.copy()
    x[:, 0] += np.linspace(0.0, 0.004, n)
    pair.evaluate(x, X, np.zeros(2 * n), frozen=False)
    hp = pair.passes[0]
    seen = set()
    for p in range(hp.n_points):
        pr = closest_point_projection(hp.kN[p] @ x[hp.kn[p]], LINE)
        up = return_map(_state(hp.xi_s[p]), pr, float(slide_threshold_DI(pr.g_n, di)), 50.0, LINE)
        assert int(up.branch) == hp.last.status[p]
        np.testing.assert_allclose(hp.last.t[p], up.t_t, rtol=1e-12, atol=1e-15)
        seen.add(int(up.branch))
    assert seen == {int(Status.STICK), int(Status.SLIDE)}


trial = st.tuples(st.floats(-3.0, 3.0), st.floats(0.01, 2.0), st.floats(1.0, 500.0))


@given(trial)
def test_radial_return_property(args):
    d, t_slide, eps = args
    pr = closest_point_projection([0.0, 0.1], LINE)
    s = _state(pr.xi - d)
    tt, _ = trial_traction(s, pr, eps, LINE)
    up = return_map(s, pr, t_slide, eps, LINE)
    f = sliding_criterion(tt, t_slide)
    if f >= 0:
        assert np.linalg.norm(up.t_t - tt) == pytest.approx(f, rel=1e-9, abs=1e-12)
        assert np.linalg.norm(up.t_t) == pytest.approx(t_slide, rel=1e-12)
    else:
        np.testing.assert_array_equal(up.t_t, tt)
    assert np.linalg.norm(up.t_t) <= t_slide * (1 + 1e-12)


@given(trial)
def test_dissipation_non_negative(args):
    d, t_slide, eps = args
    pr = closest_point_projection([0.0, 0.1], LINE)
    s = _state(pr.xi - d)
    up = return_map(s, pr, t_slide, eps, LINE)
    assert up.dgamma >= 0.0
    # slip increment is aligned with the returned traction
    assert up.dgamma * float(up.t_t @ up.n_t) >= 0.0
    # the anchor moves towards the foot point, never past it
    assert abs(pr.xi - up.xi_s) <= abs(pr.xi - s.xi_s) + 1e-12
