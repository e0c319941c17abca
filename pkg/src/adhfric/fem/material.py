"""Compressible Neo-Hookean material in plane strain."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

STANDARD = "standard_compressible"
NEARLY_INCOMPRESSIBLE = "nearly_incompressible_reduced_dilatation"


class ElementInversionError(RuntimeError):
    def __init__(self, element: int, detF: float = float("nan")):
        super().__init__(f"element {element} inverted (det F = {detF:.3g})")
        self.element = element


@dataclass(frozen=True)
class Material:
    E: float
    nu: float
    variant: str = STANDARD

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError("E must be positive")
        if not 0 <= self.nu < 0.5:
            raise ValueError("nu must lie in [0, 0.5)")
        if self.variant not in (STANDARD, NEARLY_INCOMPRESSIBLE):
            raise ValueError(f"unknown material variant {self.variant!r}")

    @property
    def mu(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def lam(self) -> float:
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))


def strain_energy_density(F: np.ndarray, m: Material) -> float:
    """psi = mu/2 (I1 - 3) - mu ln J + lam/2 (ln J)^2, out-of-plane stretch 1."""
    J = float(np.linalg.det(F))
    if J <= 0:
        raise ElementInversionError(-1, J)
    lnJ = math.log(J)
    return 0.5 * m.mu * (float(np.sum(F * F)) + 1.0 - 3.0) - m.mu * lnJ + 0.5 * m.lam * lnJ**2


def neo_hookean_stress_and_tangent(F: np.ndarray, m: Material) -> tuple[np.ndarray, np.ndarray]:
    """First Piola-Kirchhoff stress P (2, 2) and tangent dP/dF (2, 2, 2, 2)."""
    F = np.asarray(F, dtype=float)
    J = float(np.linalg.det(F))
    if J <= 0:
        raise ElementInversionError(-1, J)
    Fi = np.linalg.inv(F)
    lnJ = math.log(J)
    P = m.mu * F + (m.lam * lnJ - m.mu) * Fi.T
    I = np.eye(2)
    A = (m.mu * np.einsum("ik,JL->iJkL", I, I)
         + m.lam * np.einsum("Ji,Lk->iJkL", Fi, Fi)
         - (m.lam * lnJ - m.mu) * np.einsum("Jk,Li->iJkL", Fi, Fi))
    return P, A
