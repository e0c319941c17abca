import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from adhfric.fem import (NEARLY_INCOMPRESSIBLE, STANDARD, BulkOperator, ElementInversionError,
                         GlobalSystem, Material, Mesh, MeshError, assemble_and_solve,
                         element_force_and_stiffness, neo_hookean_stress_and_tangent,
                         strain_energy_density)
from adhfric.model import Model
from adhfric.scenarios.meshing import rectangle
from adhfric.solver import LoadProgram, Stage, run

MAT = Material(1.0, 0.3, STANDARD)
UNIT_Q1 = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
UNIT_Q2 = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.0], [1.0, 0.5],
                    [0.5, 1.0], [0.0, 0.5], [0.5, 0.5]])


def _rotation(a):
    return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])


def test_reference_state_is_stress_free():
    P, _ = neo_hookean_stress_and_tangent(np.eye(2), MAT)
    assert np.abs(P).max() < 1e-15


def test_rotation_is_stress_free():
    # P = R S with S = 0 under a pure rotation
    P, _ = neo_hookean_stress_and_tangent(_rotation(1.1), MAT)
    assert np.abs(P).max() < 1e-14


def test_stress_tangent_fd(rng):
    for _ in range(10):
        F = np.eye(2) + 0.2 * rng.standard_normal((2, 2))
        if np.linalg.det(F) < 0.3:
            continue
        P, A = neo_hookean_stress_and_tangent(F, MAT)
        Afd = np.zeros_like(A)
        h = 1e-7
        for k in range(2):
            for L in range(2):
                dF = np.zeros((2, 2))
                dF[k, L] = h
                Afd[:, :, k, L] = (neo_hookean_stress_and_tangent(F + dF, MAT)[0]
                                   - neo_hookean_stress_and_tangent(F - dF, MAT)[0]) / (2 * h)
        assert np.linalg.norm(A - Afd) <= 1e-6 * np.linalg.norm(A)


def test_stress_is_energy_gradient(rng):
    F = np.eye(2) + 0.15 * rng.standard_normal((2, 2))
    P, _ = neo_hookean_stress_and_tangent(F, MAT)
    h = 1e-7
    for k in range(2):
        for L in range(2):
            dF = np.zeros((2, 2))
            dF[k, L] = h
            fd = (strain_energy_density(F + dF, MAT) - strain_energy_density(F - dF, MAT)) / (2 * h)
            assert fd == pytest.approx(P[k, L], rel=1e-6, abs=1e-9)


def test_inverted_gradient_raises():
    with pytest.raises(ElementInversionError):
        neo_hookean_stress_and_tangent(np.diag([1.0, -0.5]), MAT)


@pytest.mark.parametrize("X, etype", [(UNIT_Q1, "Q1"), (UNIT_Q2, "Q2")])
@pytest.mark.parametrize("variant", [STANDARD, NEARLY_INCOMPRESSIBLE])
def test_element_force_is_energy_gradient(X, etype, variant, rng):
    m = Material(1.0, 0.45, variant)
    u = 0.05 * rng.standard_normal(X.shape)
    f, K = element_force_and_stiffness(X, u, m, etype)
    mesh = Mesh(X, np.arange(len(X))[None, :], etype)
    op = BulkOperator(mesh, m)
    h = 1e-6
    fd = np.zeros(f.size)
    Kfd = np.zeros_like(K)
    for j in range(f.size):
        up = u.ravel().copy()
        up[j] += h
        um = u.ravel().copy()
        um[j] -= h
        fd[j] = (op.energy(up.reshape(-1, 2)) - op.energy(um.reshape(-1, 2))) / (2 * h)
        Kfd[:, j] = (element_force_and_stiffness(X, up.reshape(-1, 2), m, etype)[0]
                     - element_force_and_stiffness(X, um.reshape(-1, 2), m, etype)[0]) / (2 * h)
    assert np.linalg.norm(f - fd) <= 1e-6 * np.linalg.norm(f)
    assert np.linalg.norm(K - Kfd) <= 1e-6 * np.linalg.norm(K)
    assert np.abs(K - K.T).max() <= 1e-10 * np.abs(K).max()


@given(st.floats(-5.0, 5.0), st.floats(-5.0, 5.0), st.floats(-3.0, 3.0))
def test_rigid_motion_gives_zero_force(tx, ty, angle):
    X = UNIT_Q2
    x = X @ _rotation(angle).T + [tx, ty]
    f, _ = element_force_and_stiffness(X, x - X, MAT, "Q2")
    assert np.abs(f).max() < 1e-12


def test_jacobian_check():
    bad = UNIT_Q1[[0, 2, 1, 3]]
    with pytest.raises(MeshError):
        Mesh(bad, np.array([[0, 1, 2, 3]]), "Q1").check_jacobians()
    with pytest.raises(MeshError):
        Mesh(UNIT_Q1, np.array([[0, 1, 2]]), "Q1")


def test_mesh_file_round_trip(tmp_path):
    m = rectangle(0.0, 0.0, 3.0, 1.0, 3, 2, "Q2")
    m.write(tmp_path / "m.txt")
    r = Mesh.read(tmp_path / "m.txt")
    np.testing.assert_array_equal(r.nodes, m.nodes)
    np.testing.assert_array_equal(r.elements, m.elements)
    assert set(r.sets) == set(m.sets)
    for k in m.sets:
        np.testing.assert_array_equal(r.sets[k].nodes, m.sets[k].nodes)


def test_zero_residual_gives_zero_increment():
    s = GlobalSystem(4)
    s.add_matrix([0, 1, 2, 3], [0, 1, 2, 3], [1.0, 1.0, 1.0, 1.0])
    np.testing.assert_array_equal(assemble_and_solve(s), np.zeros(4))


def _uniaxial_stretch(lam_x, m):
    # plane strain, lateral edge traction free: P_yy(lam_x, lam_y) = 0
    def pyy(ly):
        return neo_hookean_stress_and_tangent(np.diag([lam_x, ly]), m)[0][1, 1]
    ly = brentq(pyy, 0.3, 1.5)
    return ly, neo_hookean_stress_and_tangent(np.diag([lam_x, ly]), m)[0][0, 0]


def test_single_element_stretch_ramp():
    model = Model()
    model.add_body(Mesh(UNIT_Q1, np.array([[0, 1, 2, 3]]), "Q1"), MAT)
    stretch = 0.3
    program = LoadProgram([Stage({0: 0.0, 1: 0.0, 6: 0.0, 2: stretch, 4: stretch}, n_steps=6)])
    traj, rep = run(program, model)
    assert rep.converged
    for st_ in traj:
        lx = 1.0 + st_.u[2]
        ly, Pxx = _uniaxial_stretch(lx, MAT)
        assert 1.0 + st_.u[5] == pytest.approx(ly, rel=1e-9)
        assert st_.f_int[2] + st_.f_int[4] == pytest.approx(Pxx, rel=1e-9)
