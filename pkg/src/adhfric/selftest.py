"""Fast closed-form checks run by ``adhfric selftest``.

Each check returns None on success and raises ``AssertionError`` otherwise.
They exercise the public API on cases whose answer is known exactly, so a
broken install or a miscompiled kernel shows up in a few seconds.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .fem.material import STANDARD, Material, neo_hookean_stress_and_tangent
from .fem.mesh import Mesh
from .friction import ContactPointState, Status, return_map, sliding_criterion
from .geometry import RigidCircle, RigidLine, closest_point_projection
from .laws import (DI, EA, AdhesionParams, derive_characteristics, equivalent_mu_DI,
                   in_contact_area, normal_traction, normal_traction_derivative,
                   slide_threshold_DI, slide_threshold_EA)
from .model import Model
from .scenarios.fits import fit_beta, fit_eta, fit_quadratic_xi
from .solver import LoadProgram, Stage, run


def _close(a, b, tol=1e-12):
    assert abs(a - b) <= tol * max(1.0, abs(b)), f"{a!r} != {b!r}"


def check_characteristics():
    c = derive_characteristics(2 * math.pi, 1.0)
    _close(c["T_max"], 2 * math.sqrt(5) / 9)
    p1 = AdhesionParams.from_macroscopic(0.2, 0.01)
    p2 = AdhesionParams.from_macroscopic(0.2, 0.02)
    _close(p2.r0, 2 * p1.r0)


def check_normal_law():
    p = AdhesionParams(0.05, 0.4)
    _close(normal_traction(p.g_eq, p), 0.0, 1e-12)
    assert abs(normal_traction_derivative(p.g_max, p)) < 1e-10
    _close(normal_traction(p.g_max, p), -p.T_max, 1e-12)
    assert bool(in_contact_area(p.g_eq, p)) and not bool(in_contact_area(2 * p.g_max, p))
    assert not bool(in_contact_area(p.g_area, p))


def check_sliding_laws():
    p = AdhesionParams(0.05, 0.4)
    di = DI.from_mu(1.0, p)
    _close(slide_threshold_DI(di.g_cut, di), di.tau / 2)
    _close(slide_threshold_DI(-1e3, di), di.tau)
    assert slide_threshold_DI(1e3, di) < 1e-300
    ea = EA(0.3)
    _close(slide_threshold_EA(p.g_eq, 1.0, ea, p), 0.3 * p.T_max, 1e-12)
    _close(slide_threshold_EA(ea.g_cut(p), 1.0, ea, p), 0.0, 1e-12)
    _close(equivalent_mu_DI(0.3, p.g_max, p), 0.3)


def check_projection():
    line = RigidLine([0.0, 0.0], [0.0, 1.0])
    pr = closest_point_projection([3.2, 0.7], line)
    _close(pr.g_n, 0.7)
    assert np.allclose(pr.x_p, [3.2, 0.0], atol=1e-14)
    circ = RigidCircle([1.0, -2.0], 1.5)
    pr = closest_point_projection([1.0 + 2.0 * 0.6, -2.0 + 2.0 * 0.8], circ)
    _close(pr.g_n, 0.5)


def check_return_map():
    _close(sliding_criterion(np.array([1.5, 0.0]), 1.0), 0.5)
    line = RigidLine([0.0, 0.0], [0.0, 1.0])
    state = ContactPointState(xi_s=-0.015, status=Status.STICK, anchor_valid=True)
    pr = closest_point_projection([0.0, 0.1], line)
    up = return_map(state, pr, 1.0, 100.0, line)
    _close(up.dgamma, 0.005)
    _close(float(np.linalg.norm(up.t_t)), 1.0)
    assert up.branch == Status.SLIDE


def check_material():
    m = Material(1.0, 0.3, STANDARD)
    S, _ = neo_hookean_stress_and_tangent(np.eye(2), m)
    assert np.abs(S).max() < 1e-14
    c, s = math.cos(0.7), math.sin(0.7)
    S, _ = neo_hookean_stress_and_tangent(np.array([[c, -s], [s, c]]), m)
    assert np.abs(S).max() < 1e-13


def check_zero_load():
    mesh = Mesh(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
                np.array([[0, 1, 2, 3]]), "Q1")
    model = Model()
    model.add_body(mesh, Material(1.0, 0.3, STANDARD))
    program = LoadProgram([Stage({0: 0.0, 1: 0.0, 3: 0.0}, n_steps=3)])
    traj, rep = run(program, model)
    assert rep.converged and len(traj) == 3
    assert all(np.all(st.u == 0.0) for st in traj)
    assert rep.iterations == [1, 1, 1]


def check_fits():
    F = np.linspace(0.0, 0.5, 8)
    q = fit_quadratic_xi(10.0 - 3.0 * F**2, F)
    _close(q.xi, 3.0, 1e-10)
    _close(fit_quadratic_xi(np.full(6, 4.0), F[:6]).xi, 0.0)
    L0 = np.array([5.0, 7.0, 9.0, 12.0])
    _close(fit_beta(L0, 2.0 * L0**-4.0).exponent, -4.0, 1e-10)
    Ft = np.linspace(0.1, 0.5, 6)
    _close(fit_eta(10.0 * (1 - 0.2 * Ft**2), Ft, 10.0, min_reduction=0.0).exponent, 2.0, 1e-10)


CHECKS: dict[str, Callable[[], None]] = {
    "characteristic parameters": check_characteristics,
    "normal traction law": check_normal_law,
    "sliding thresholds": check_sliding_laws,
    "closest-point projection": check_projection,
    "return map": check_return_map,
    "hyperelastic stress": check_material,
    "zero-load program": check_zero_load,
    "shear fits": check_fits,
}


def run_selftest(echo: Callable[[str], None] = print) -> bool:
    ok = True
    for name, fn in CHECKS.items():
        try:
            fn()
            echo(f"PASS {name}")
        except Exception as exc:  # noqa: BLE001 - every failure is reported
            ok = False
            echo(f"FAIL {name}: {type(exc).__name__}: {exc}")
    return ok
