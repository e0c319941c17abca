"""Pointwise interface laws: Lennard-Jones normal traction and the DI / EA
sliding thresholds.

All quantities are in normalized units (Young's modulus and the unit length
scaled to one). The scalar kernels at the bottom are shared with the contact
assembly kernels; the public functions accept scalars or arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import njit

FIFTEEN_SIXTH = 15.0 ** (1.0 / 6.0)
FIVE_SIXTH = 5.0 ** (1.0 / 6.0)

# law codes used by the numeric kernels
FRICTIONLESS = 0
DI_LAW = 1
EA_LAW = 2


class DomainError(ValueError):
    pass


def derive_characteristics(A_H: float, r0: float) -> dict[str, float]:
    """Closed-form characteristics of the integrated LJ traction law.

    Returns a dict with keys ``g_eq``, ``T_max``, ``g_max``, ``W_adh``.
    """
    if not (A_H > 0 and r0 > 0):
        raise DomainError("A_H and r0 must be positive")
    return {
        "g_eq": r0 / FIFTEEN_SIXTH,
        "T_max": math.sqrt(5.0) * A_H / (9.0 * math.pi * r0**3),
        "g_max": r0 / FIVE_SIXTH,
        "W_adh": 15.0 ** (1.0 / 3.0) * A_H / (16.0 * math.pi * r0**2),
    }


def params_from_macroscopic(T_max: float, W_adh: float) -> tuple[float, float]:
    """Invert (T_max, W_adh) to the LJ parameters (A_H, r0)."""
    if not (T_max > 0 and W_adh > 0):
        raise DomainError("T_max and W_adh must be positive")
    r0 = (W_adh / T_max) * 16.0 * math.sqrt(5.0) / (9.0 * 15.0 ** (1.0 / 3.0))
    A_H = T_max * 9.0 * math.pi * r0**3 / math.sqrt(5.0)
    return A_H, r0


@dataclass(frozen=True)
class AdhesionParams:
    """LJ adhesion parameters plus the gaps used by the contact algorithm.

    ``g_reg`` defaults to ``g_eq``, ``g_area`` to ``g_max`` and ``g_far`` to
    ``10 r0`` (the traction there is below 1e-3 T_max). ``adhesive=False``
    zeroes the traction for gaps above ``g_eq`` and keeps only repulsion.
    """

    A_H: float
    r0: float
    g_reg: float | None = None
    g_area: float | None = None
    g_far: float | None = None
    adhesive: bool = True
    _c: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        c = derive_characteristics(self.A_H, self.r0)
        object.__setattr__(self, "_c", c)
        if self.g_reg is None:
            object.__setattr__(self, "g_reg", c["g_eq"])
        if self.g_area is None:
            object.__setattr__(self, "g_area", c["g_max"])
        if self.g_far is None:
            object.__setattr__(self, "g_far", 10.0 * self.r0)
        if self.g_reg > c["g_eq"] * (1 + 1e-14):
            raise DomainError("g_reg must not exceed g_eq")
        if not (c["g_eq"] < c["g_max"] < self.g_far):
            raise DomainError("g_far must exceed g_max")

    @classmethod
    def from_macroscopic(cls, T_max: float, W_adh: float, **kw) -> "AdhesionParams":
        A_H, r0 = params_from_macroscopic(T_max, W_adh)
        return cls(A_H, r0, **kw)

    @property
    def T0(self) -> float:
        return self.A_H / (2.0 * math.pi * self.r0**3)

    @property
    def g_eq(self) -> float:
        return self._c["g_eq"]

    @property
    def g_max(self) -> float:
        return self._c["g_max"]

    @property
    def T_max(self) -> float:
        return self._c["T_max"]

    @property
    def W_adh(self) -> float:
        return self._c["W_adh"]

    def pack(self) -> np.ndarray:
        """Flat parameter vector consumed by the numeric kernels."""
        return np.array([self.A_H, self.r0, self.g_reg, self.g_far,
                         1.0 if self.adhesive else 0.0, self.g_eq])


@dataclass(frozen=True)
class Frictionless:
    def pack(self, adhesion: AdhesionParams, eps_t: float) -> np.ndarray:
        return np.array([FRICTIONLESS, 0.0, 0.0, 0.0, 0.0, eps_t])


@dataclass(frozen=True)
class DI:
    """Distance-independent sliding law with logistic regularization.

    ``tau`` is the sliding traction per current area.
    """

    tau: float
    g_cut: float
    k: float

    def __post_init__(self):
        if not (self.tau > 0 and self.k > 0):
            raise DomainError("DI law needs tau > 0 and k > 0")

    @classmethod
    def from_mu(cls, mu: float, adhesion: AdhesionParams, g_cut: float | None = None,
                k: float | None = None) -> "DI":
        """``tau = mu * T_max``; defaults ``g_cut = g_max`` and ``k = 80 / r0``."""
        return cls(tau=mu * adhesion.T_max,
                   g_cut=adhesion.g_max if g_cut is None else g_cut,
                   k=80.0 / adhesion.r0 if k is None else k)

    def pack(self, adhesion: AdhesionParams, eps_t: float) -> np.ndarray:
        return np.array([DI_LAW, self.tau, self.g_cut, self.k, 0.0, eps_t])


@dataclass(frozen=True)
class EA:
    """Extended-Amontons sliding law, formulated per reference area."""

    mu: float
    s_cut: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError("EA law needs mu > 0")
        if not (-0.01 <= self.s_cut <= 1.0):
            raise DomainError("s_cut must lie in [-0.01, 1]")

    def g_cut(self, adhesion: AdhesionParams) -> float:
        return self.s_cut * adhesion.g_max + (1.0 - self.s_cut) * adhesion.g_eq

    def pack(self, adhesion: AdhesionParams, eps_t: float) -> np.ndarray:
        return np.array([EA_LAW, 0.0, self.g_cut(adhesion), 0.0, self.mu, eps_t])


FrictionLaw = Frictionless | DI | EA


# ---------------------------------------------------------------------------
# scalar kernels


@njit
def _lj(g, A_H, r0):
    s3 = (r0 / g) ** 3
    return A_H / (2.0 * math.pi * r0**3) * (s3 * s3 * s3 / 45.0 - s3 / 3.0)


@njit
def _dlj(g, A_H, r0):
    s = r0 / g
    s4 = s**4
    return -A_H / (2.0 * math.pi * r0**4) * (s4 * s4 * s * s / 5.0 - s4)


@njit
def tn_kernel(g, ap):
    """Regularized normal traction; ``ap`` from ``AdhesionParams.pack``."""
    A_H, r0, g_reg, g_far, adhesive, g_eq = ap[0], ap[1], ap[2], ap[3], ap[4], ap[5]
    if g > g_far:
        return 0.0
    if adhesive < 0.5 and g > g_eq:
        return 0.0
    if g < g_reg:
        return _lj(g_reg, A_H, r0) + _dlj(g_reg, A_H, r0) * (g - g_reg)
    return _lj(g, A_H, r0)


@njit
def dtn_kernel(g, ap):
    A_H, r0, g_reg, g_far, adhesive, g_eq = ap[0], ap[1], ap[2], ap[3], ap[4], ap[5]
    if g > g_far:
        return 0.0
    if adhesive < 0.5 and g > g_eq:
        return 0.0
    if g < g_reg:
        return _dlj(g_reg, A_H, r0)
    return _dlj(g, A_H, r0)


@njit
def di_kernel(g, tau, g_cut, k):
    """Logistic DI threshold and its derivative w.r.t. the gap."""
    z = k * (g - g_cut)
    if z >= 0.0:
        e = math.exp(-z)
        s = e / (1.0 + e)
    else:
        s = 1.0 / (1.0 + math.exp(z))
    return tau * s, -tau * k * s * (1.0 - s)


@njit
def ea_kernel(g, J, mu, g_cut, ap):
    """EA threshold per reference area, and its partials w.r.t. gap and J."""
    if g >= g_cut:
        return 0.0, 0.0, 0.0
    t = mu / J * (tn_kernel(g, ap) - tn_kernel(g_cut, ap))
    return t, mu / J * dtn_kernel(g, ap), -t / J


# ---------------------------------------------------------------------------
# public API


def _map(fn, g, *args):
    g_arr = np.asarray(g, dtype=float)
    out = np.array([fn(float(v), *args) for v in g_arr.ravel()]).reshape(g_arr.shape)
    return out if out.ndim else float(out)


def normal_traction(g_n, p: AdhesionParams):
    """T_n(g_n) per reference area; positive means repulsive."""
    return _map(tn_kernel, g_n, p.pack())


def normal_traction_derivative(g_n, p: AdhesionParams):
    return _map(dtn_kernel, g_n, p.pack())


def slide_threshold_DI(g_n, law: DI):
    return _map(lambda g: di_kernel(g, law.tau, law.g_cut, law.k)[0], g_n)


def slide_threshold_DI_derivative(g_n, law: DI):
    return _map(lambda g: di_kernel(g, law.tau, law.g_cut, law.k)[1], g_n)


def slide_threshold_EA(g_n, J_cl: float, law: EA, p: AdhesionParams):
    ap = p.pack()
    return _map(lambda g: ea_kernel(g, J_cl, law.mu, law.g_cut(p), ap)[0], g_n)


def slide_threshold_EA_derivative(g_n, J_cl: float, law: EA, p: AdhesionParams):
    ap = p.pack()
    return _map(lambda g: ea_kernel(g, J_cl, law.mu, law.g_cut(p), ap)[1], g_n)


def equivalent_mu_DI(mu_EA: float, g_cut: float, p: AdhesionParams) -> float:
    """DI friction parameter matching EA on an interface held at g_eq."""
    if not (p.g_eq < g_cut <= p.g_max * (1 + 1e-14)):
        raise DomainError(f"g_cut={g_cut} outside (g_eq, g_max]")
    return mu_EA * abs(normal_traction(g_cut, p)) / p.T_max


def in_contact_area(g_n, p: AdhesionParams):
    return np.asarray(g_n) < p.g_area
