import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adhfric.laws import (DI, EA, AdhesionParams, DomainError, derive_characteristics,
                          equivalent_mu_DI, in_contact_area, normal_traction,
                          normal_traction_derivative, params_from_macroscopic, slide_threshold_DI,
                          slide_threshold_DI_derivative, slide_threshold_EA,
                          slide_threshold_EA_derivative)

STRIP = AdhesionParams(0.05, 0.4)


def test_characteristics_unit_normalization():
    c = derive_characteristics(2 * math.pi, 1.0)
    p = AdhesionParams(2 * math.pi, 1.0)
    assert p.T0 == pytest.approx(1.0, rel=1e-15)
    assert c["T_max"] == pytest.approx(2 * math.sqrt(5) / 9, rel=1e-15)


def test_strip_parameters_frozen():
    # normalized strip set-up: E = 1, L0 = 1, A_H = 0.05, r0 = 0.4
    c = derive_characteristics(0.05, 0.4)
    assert c["g_eq"] == pytest.approx(0.25470928778926827, rel=1e-12)
    assert c["g_max"] == pytest.approx(0.305889796532692, rel=1e-12)
    assert c["T_max"] == pytest.approx(0.06178494300496328, rel=1e-12)
    assert c["W_adh"] == pytest.approx(0.015332415716508245, rel=1e-12)


def test_doubling_work_of_adhesion_doubles_r0():
    a = AdhesionParams.from_macroscopic(0.165, 0.0135)
    b = AdhesionParams.from_macroscopic(0.165, 0.027)
    assert b.r0 == pytest.approx(2 * a.r0, rel=1e-14)


@pytest.mark.parametrize("bad", [(0.0, 0.4), (0.05, -1.0)])
def test_characteristics_domain(bad):
    with pytest.raises(DomainError):
        derive_characteristics(*bad)


def test_traction_at_characteristic_gaps():
    p = STRIP
    assert abs(normal_traction(p.g_eq, p)) < 1e-14
    assert normal_traction(p.g_max, p) == pytest.approx(-p.T_max, rel=1e-13)
    assert abs(normal_traction_derivative(p.g_max, p)) < 1e-12


def test_traction_integrates_to_work_of_adhesion():
    from scipy.integrate import quad
    p = AdhesionParams(0.05, 0.4, g_far=1e4)
    W, _ = quad(lambda g: normal_traction(g, p), p.g_eq, p.g_far, limit=400, points=[1, 10, 100])
    # analytic tail beyond g_far: A_H / (12 pi g_far^2)
    W -= p.A_H / (12 * math.pi * p.g_far**2)
    assert -W == pytest.approx(p.W_adh, rel=1e-8)


def test_default_cutoff_tail_is_small():
    from scipy.integrate import quad
    p = STRIP
    W, _ = quad(lambda g: normal_traction(g, p), p.g_eq, p.g_far, limit=200)
    assert -W == pytest.approx(p.W_adh, rel=1e-2)


def test_regularized_branch_is_linear():
    p = STRIP
    s = normal_traction_derivative(p.g_reg, p)
    for g in (p.g_reg - 0.05, p.g_reg - 0.5, -1.0):
        assert normal_traction_derivative(g, p) == pytest.approx(s, rel=1e-12)
        assert normal_traction(g, p) == pytest.approx(
            normal_traction(p.g_reg, p) + s * (g - p.g_reg), rel=1e-12)


def test_nonadhesive_switch_cuts_attraction():
    p = AdhesionParams(0.05, 0.4, adhesive=False)
    assert normal_traction(p.g_max, p) == 0.0
    assert normal_traction(0.9 * p.g_eq, p) == pytest.approx(
        normal_traction(0.9 * p.g_eq, STRIP), rel=1e-14)


def _fd(f, g, h=1e-7):
    return (f(g + h) - f(g - h)) / (2 * h)


def test_traction_derivative_fd(rng):
    p = STRIP
    for g in rng.uniform(0.6 * p.g_eq, 6 * p.r0, 20):
        fd = _fd(lambda v: normal_traction(v, p), g)
        an = normal_traction_derivative(g, p)
        assert abs(an - fd) <= 1e-6 * max(abs(an), 1e-3 * p.T_max / p.r0)


def test_DI_threshold_values():
    di = DI.from_mu(0.5, STRIP, g_cut=1.1 * STRIP.r0)
    assert slide_threshold_DI(di.g_cut, di) == pytest.approx(di.tau / 2, rel=1e-14)
    assert slide_threshold_DI(-50.0, di) == pytest.approx(di.tau, rel=1e-14)
    assert slide_threshold_DI(50.0, di) < 1e-300


def test_DI_derivative_fd(rng):
    di = DI.from_mu(0.5, STRIP)
    for g in rng.uniform(0.5 * STRIP.g_eq, 2 * STRIP.g_max, 20):
        fd = _fd(lambda v: slide_threshold_DI(v, di), g)
        an = slide_threshold_DI_derivative(g, di)
        assert abs(an - fd) <= 1e-6 * max(abs(an), 1e-3 * di.tau * di.k)


def test_EA_threshold_values():
    ea = EA(0.2, s_cut=1.0)
    assert slide_threshold_EA(ea.g_cut(STRIP), 1.0, ea, STRIP) == pytest.approx(0.0, abs=1e-15)
    assert slide_threshold_EA(STRIP.g_eq, 1.0, ea, STRIP) == pytest.approx(0.2 * STRIP.T_max,
                                                                          rel=1e-12)
    assert slide_threshold_EA(1.2 * STRIP.g_max, 1.0, ea, STRIP) == 0.0


def test_EA_derivative_fd(rng):
    ea = EA(0.3, s_cut=0.5)
    for g in rng.uniform(0.5 * STRIP.g_eq, ea.g_cut(STRIP) * 0.999, 20):
        for J in (1.0, 1.05):
            fd = _fd(lambda v: slide_threshold_EA(v, J, ea, STRIP), g)
            an = slide_threshold_EA_derivative(g, J, ea, STRIP)
            assert abs(an - fd) <= 1e-6 * max(abs(an), 1e-6)


def test_EA_s_cut_bounds():
    with pytest.raises(DomainError):
        EA(0.1, s_cut=-0.5)
    EA(0.1, s_cut=-0.01)


def test_equivalent_mu_limits():
    p = STRIP
    assert equivalent_mu_DI(0.01, p.g_max, p) == pytest.approx(0.01, rel=1e-12)
    assert equivalent_mu_DI(0.01, p.g_eq * (1 + 1e-9), p) < 1e-9
    with pytest.raises(DomainError):
        equivalent_mu_DI(0.01, 2 * p.g_max, p)


def test_contact_area_boundary():
    p = STRIP
    assert in_contact_area(p.g_eq, p)
    assert not in_contact_area(2 * p.g_max, p)
    assert not in_contact_area(p.g_area, p)


@given(st.floats(1e-3, 10.0), st.floats(0.05, 5.0))
def test_macroscopic_round_trip(A_H, r0):
    c = derive_characteristics(A_H, r0)
    A2, r2 = params_from_macroscopic(c["T_max"], c["W_adh"])
    assert A2 == pytest.approx(A_H, rel=1e-10)
    assert r2 == pytest.approx(r0, rel=1e-10)


@given(st.floats(0.0, 5.0))
def test_traction_bounded_by_T_max(t):
    p = STRIP
    g = p.g_eq + t
    assert normal_traction(g, p) >= -p.T_max * (1 + 1e-12)


@given(st.floats(-2.0, 4.0))
def test_DI_threshold_in_range(g):
    di = DI.from_mu(1.0, STRIP)
    v = slide_threshold_DI(g, di)
    assert 0.0 <= v <= di.tau
    assert slide_threshold_DI_derivative(g, di) <= 0.0
