"""Predictor-corrector update of the tangential traction at one contact point.

These functions mirror, at the Python level, the branch logic executed inside
the contact assembly kernel (``contact._point_kernel``). They are the
reference used by the unit tests; the kernel is checked against them.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .geometry import Projection, Surface, evaluate_basis

EPS_T_DEFAULT = 50.0


class Status(enum.IntEnum):
    FAR = 0
    FRICTIONLESS_SLIDE = 1
    STICK = 2
    SLIDE = 3


@dataclass
class ContactPointState:
    """Committed history of one contact quadrature point."""

    xi_s: float = 0.0
    status: Status = Status.FAR
    t_t_last: np.ndarray = None
    dgamma_last: float = 0.0
    frozen: bool = False
    anchor_valid: bool = False

    def __post_init__(self):
        if self.t_t_last is None:
            self.t_t_last = np.zeros(2)
        if self.dgamma_last < 0:
            raise ValueError("slip increment must be non-negative")


@dataclass
class TangentialUpdate:
    t_t: np.ndarray
    xi_s: float
    dgamma: float
    branch: Status
    n_t: np.ndarray
    reanchored: bool = False


def _in_domain(surface: Surface, xi: float) -> bool:
    lo, hi = surface.domain
    return lo <= xi <= hi


def trial_traction(state: ContactPointState, proj: Projection, eps_t: float,
                   surface: Surface, x=None, X=None) -> tuple[np.ndarray, bool]:
    """Elastic trial traction ``eps_t (x(xi_p) - x(xi_s))`` on the current surface.

    Returns the traction and a flag that is True when the anchor was outside
    the surface domain and has been moved to the foot point.
    """
    if eps_t <= 0:
        raise ValueError("eps_t must be positive")
    if not _in_domain(surface, state.xi_s):
        return np.zeros(2), True
    xs = evaluate_basis(surface, state.xi_s, x, X).x
    return eps_t * (proj.x_p - xs), False


def sliding_criterion(t_trial, t_slide: float) -> float:
    if t_slide < 0:
        raise ValueError("t_slide must be non-negative")
    return float(np.linalg.norm(t_trial)) - t_slide


def frictionless_reset(state: ContactPointState, proj: Projection) -> TangentialUpdate:
    """Zero traction with the anchor snapped to the current foot point."""
    return TangentialUpdate(t_t=np.zeros(2), xi_s=proj.xi, dgamma=0.0,
                            branch=Status.FRICTIONLESS_SLIDE, n_t=np.zeros(2))


def return_map(state: ContactPointState, proj: Projection, t_slide: float, eps_t: float,
               surface: Surface, x=None, X=None) -> TangentialUpdate:
    """Radial return of the trial traction onto ``|t| = t_slide``.

    On the slide branch the anchor moves by ``dgamma (n_t . a^1)`` with the
    contravariant tangent taken at the foot point.
    """
    if state.status == Status.FAR:
        raise ValueError("return_map called on a far point")
    tt, moved = trial_traction(state, proj, eps_t, surface, x, X)
    if moved:
        upd = frictionless_reset(state, proj)
        upd.reanchored = True
        return upd
    f = sliding_criterion(tt, t_slide)
    if f < 0:
        norm = np.linalg.norm(tt)
        nt = tt / norm if norm > 0 else np.zeros(2)
        return TangentialUpdate(t_t=tt, xi_s=state.xi_s, dgamma=0.0, branch=Status.STICK, n_t=nt)
    norm = float(np.linalg.norm(tt))
    if norm == 0.0:
        return frictionless_reset(state, proj)
    nt = tt / norm
    dgamma = f / eps_t
    xi_new = state.xi_s + dgamma * float(nt @ proj.basis.a_contra)
    reanchored = False
    if not _in_domain(surface, xi_new):
        xi_new = proj.xi
        reanchored = True
    return TangentialUpdate(t_t=tt - eps_t * dgamma * nt, xi_s=xi_new, dgamma=dgamma,
                            branch=Status.SLIDE, n_t=nt, reanchored=reanchored)
