import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adhfric.geometry import (BSplineSurface, DegenerateGeometryError, RigidCircle, RigidLine,
                              SingularCurvatureError, bspline2_basis, closest_point_projection,
                              curvature_corrected_metric, evaluate_basis, surface_stretch)


def line_nodes(n, length=2.0):
    return np.column_stack([np.linspace(0.0, length, n), np.zeros(n)])


def arc_nodes(n, R=1.0, a0=0.2, a1=2.9):
    t = np.linspace(a0, a1, n)
    return np.column_stack([R * np.cos(t), R * np.sin(t)])


def test_flat_bspline_basis():
    s = BSplineSurface([0, 1, 2])
    b = evaluate_basis(s, 0.5, line_nodes(3))
    np.testing.assert_allclose(b.x, [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(b.a_co, [2.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(b.a_contra, [0.5, 0.0], atol=1e-15)
    # normal lies to the right of the traversal direction
    np.testing.assert_allclose(b.normal, [0.0, -1.0], atol=1e-15)
    assert b.metric * b.inv_metric == pytest.approx(1.0)


def test_rigid_line_basis():
    s = RigidLine([0.0, 0.0], [0.0, 1.0])
    b = evaluate_basis(s, 0.5)
    np.testing.assert_allclose(np.abs(b.a_co), [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(b.normal, [0.0, 1.0], atol=1e-15)


def test_rigid_circle_normal_radial():
    c = RigidCircle([0.0, 0.0], 1.0)
    for t in np.linspace(-3.0, 3.0, 13):
        b = evaluate_basis(c, t)
        assert b.normal @ b.x / np.linalg.norm(b.x) == pytest.approx(1.0, abs=1e-14)


def test_bspline_arc_normal_outward():
    x = arc_nodes(40)  # counter-clockwise, so the right-hand normal points outward
    s = BSplineSurface(np.arange(40))
    for v in np.linspace(0.5, 37.5, 9):
        b = evaluate_basis(s, v, x)
        assert b.normal @ b.x / np.linalg.norm(b.x) == pytest.approx(1.0, abs=1e-3)


def test_projection_on_plane():
    p = closest_point_projection([3.2, 0.7], RigidLine([0.0, 0.0], [0.0, 1.0]))
    np.testing.assert_allclose(p.x_p, [3.2, 0.0], atol=1e-14)
    assert p.g_n == pytest.approx(0.7, abs=1e-14)


def test_projection_on_circle():
    c = RigidCircle([1.0, -1.0], 2.0)
    d = 0.35
    xk = np.array([1.0, -1.0]) + (2.0 + d) * np.array([math.cos(0.4), math.sin(0.4)])
    p = closest_point_projection(xk, c)
    assert p.g_n == pytest.approx(d, abs=1e-12)
    ray = (p.x_p - [1.0, -1.0]) / 2.0
    np.testing.assert_allclose(ray, [math.cos(0.4), math.sin(0.4)], atol=1e-12)


def test_stretch_identity_and_uniform():
    X = line_nodes(6)
    s = BSplineSurface(np.arange(6))
    for v in (0.3, 1.7, 3.9):
        assert surface_stretch(evaluate_basis(s, v, X, X)) == pytest.approx(1.0, abs=1e-15)
        b = evaluate_basis(s, v, 1.001 * X, X)
        assert surface_stretch(b) == pytest.approx(1.001, rel=1e-13)


def test_curvature_corrected_metric_reductions():
    X = line_nodes(5)
    s = BSplineSurface(np.arange(5))
    b = evaluate_basis(s, 1.3, X)
    assert curvature_corrected_metric(b, 0.4) == pytest.approx(b.inv_metric, rel=1e-14)
    c = evaluate_basis(BSplineSurface(np.arange(30)), 11.2, arc_nodes(30))
    assert curvature_corrected_metric(c, 0.0) == pytest.approx(c.inv_metric, rel=1e-14)


def test_focal_gap_raises():
    c = RigidCircle([0.0, 0.0], 1.0)
    b = evaluate_basis(c, 0.3)
    # inward normal offset by the radius reaches the centre of curvature
    g = b.metric / float(b.normal @ b.curvature)
    with pytest.raises(SingularCurvatureError):
        curvature_corrected_metric(b, g)


def test_degenerate_tangent():
    x = np.zeros((3, 2))
    with pytest.raises(DegenerateGeometryError):
        evaluate_basis(BSplineSurface([0, 1, 2]), 0.5, x)
    with pytest.raises(DegenerateGeometryError):
        BSplineSurface([0, 1])


@given(st.floats(0.0, 7.0), st.integers(1, 7))
def test_bspline_partition_of_unity(xi, m):
    xi = min(xi, float(m))
    N, dN, ddN = np.empty(3), np.empty(3), np.empty(3)
    bspline2_basis(xi, m, N, dN, ddN)
    assert N.sum() == pytest.approx(1.0, abs=1e-14)
    assert dN.sum() == pytest.approx(0.0, abs=1e-13)
    assert np.all(N >= -1e-15)


@given(st.floats(0.3, 2.8), st.floats(-0.3, 0.3))
def test_projection_orthogonality(angle, offset):
    x = arc_nodes(30, R=2.0)
    s = BSplineSurface(np.arange(30))
    xk = (2.0 + offset) * np.array([math.cos(angle), math.sin(angle)])
    p = closest_point_projection(xk, s, x)
    if p.clamped:
        return
    t = p.basis.a_co / np.linalg.norm(p.basis.a_co)
    assert abs(p.g_n_vec @ t) <= 1e-10
    assert abs(abs(p.g_n) - np.linalg.norm(p.g_n_vec)) <= 1e-12
    assert np.sign(p.g_n) == np.sign(offset) or abs(offset) < 1e-2


@given(st.floats(-1.0, 1.0), st.floats(0.01, 3.0), st.floats(0.5, 2.0))
def test_rigid_line_gap_invariance(shift, height, scale):
    # translating along the line never changes the gap
    line = RigidLine([0.0, 0.0], [0.0, 1.0])
    g1 = closest_point_projection([shift, height], line).g_n
    g2 = closest_point_projection([shift * scale + 5.0, height], line).g_n
    assert g1 == pytest.approx(height, abs=1e-14)
    assert g2 == pytest.approx(g1, abs=1e-14)
