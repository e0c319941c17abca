"""Least-squares fits of contact-length reduction under shear."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


class FitError(ValueError):
    pass


@dataclass
class QuadraticFit:
    L_c0: float
    xi: float
    r2: float
    n: int


@dataclass
class PowerFit:
    exponent: float
    prefactor: float
    r2: float
    n: int


def fit_quadratic_xi(L_c, F_t) -> QuadraticFit:
    """Fit ``L_c = L_c0 - xi F_t^2``; needs at least 5 samples."""
    L = np.asarray(L_c, dtype=float)
    F = np.asarray(F_t, dtype=float)
    if L.size < 5 or L.size != F.size:
        raise FitError("need at least 5 (L_c, F_t) samples")
    A = np.column_stack([np.ones_like(F), -F**2])
    if np.linalg.matrix_rank(A) < 2:
        if np.ptp(L) == 0:
            return QuadraticFit(float(L[0]), 0.0, 1.0, L.size)
        raise FitError("degenerate shear series")
    coef, *_ = np.linalg.lstsq(A, L, rcond=None)
    pred = A @ coef
    ss_tot = float(np.sum((L - L.mean()) ** 2))
    ss_res = float(np.sum((L - pred) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return QuadraticFit(float(coef[0]), float(coef[1]), r2, L.size)


def fit_power_law(x, y, min_points: int = 3) -> PowerFit:
    """Fit ``y = c x^p`` by linear least squares in log-log space.

    Non-positive samples are dropped with a warning.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0)
    if not np.all(ok):
        log.warning("dropping %d non-positive samples from power-law fit", int((~ok).sum()))
    x, y = x[ok], y[ok]
    if x.size < min_points:
        raise FitError(f"need at least {min_points} positive samples")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise FitError("all abscissae equal")
    p, c = np.polyfit(lx, ly, 1)
    pred = p * lx + c
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum((ly - pred) ** 2)) / ss_tot
    return PowerFit(float(p), float(np.exp(c)), r2, x.size)


def fit_beta(L_c0, xi) -> PowerFit:
    """``xi ~ L_c0^beta`` over loads (at least 3)."""
    return fit_power_law(L_c0, xi, min_points=3)


def fit_eta(L_c, F_t, L_c0: float, min_reduction: float = 0.01) -> PowerFit:
    """``1 - L_c / L_c0 ~ F_t^eta`` for one load (at least 5 points).

    Samples whose relative reduction is below ``min_reduction`` are left
    out: there the reduction is comparable to the resolution of the
    measured contact length and dominates the log-log slope.
    """
    L = np.asarray(L_c, dtype=float)
    F = np.asarray(F_t, dtype=float)
    d = 1.0 - L / L_c0
    keep = d >= min_reduction
    return fit_power_law(F[keep], d[keep], min_points=5)


def fit_power_exponents(L_c0s, xis, series) -> tuple[float, list[float]]:
    """(beta over loads, eta per load) from per-load ``(L_c, F_t, L_c0)`` series."""
    beta = fit_beta(L_c0s, xis).exponent
    return beta, [fit_eta(L, F, L0).exponent for L, F, L0 in series]
