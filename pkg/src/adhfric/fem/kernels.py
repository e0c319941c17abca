"""Element-level internal force, stiffness and strain energy.

Two implementations with identical results: a numba kernel looping over
elements and Gauss points, and a vectorized numpy path used when numba is
disabled (``ADHFRIC_DISABLE_NUMBA=1``). The stored energy is split into the
shear part ``mu/2 (I1 - 3) - mu ln J`` and the dilatational part
``lam/2 (ln J)^2`` so that the latter can be integrated with a reduced rule.
"""
from __future__ import annotations

import math

import numpy as np

from .._accel import USE_NUMBA, njit


@njit
def _gp_contrib(dN, ue, w, cmu, clam, fe, Ke):
    nen = dN.shape[0]
    F00 = 1.0
    F01 = 0.0
    F10 = 0.0
    F11 = 1.0
    for a in range(nen):
        F00 += ue[a, 0] * dN[a, 0]
        F01 += ue[a, 0] * dN[a, 1]
        F10 += ue[a, 1] * dN[a, 0]
        F11 += ue[a, 1] * dN[a, 1]
    J = F00 * F11 - F01 * F10
    if J <= 0.0:
        return 0.0, J
    lnJ = math.log(J)
    F = np.empty((2, 2))
    F[0, 0] = F00
    F[0, 1] = F01
    F[1, 0] = F10
    F[1, 1] = F11
    Fi = np.empty((2, 2))
    Fi[0, 0] = F11 / J
    Fi[0, 1] = -F01 / J
    Fi[1, 0] = -F10 / J
    Fi[1, 1] = F00 / J
    c = clam * lnJ - cmu
    P = np.empty((2, 2))
    for i in range(2):
        for I in range(2):
            P[i, I] = cmu * F[i, I] + c * Fi[I, i]
    A = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for I in range(2):
            for k in range(2):
                for L in range(2):
                    v = clam * Fi[I, i] * Fi[L, k] - c * Fi[I, k] * Fi[L, i]
                    if i == k and I == L:
                        v += cmu
                    A[i, I, k, L] = v
    for a in range(nen):
        for i in range(2):
            fe[2 * a + i] += w * (P[i, 0] * dN[a, 0] + P[i, 1] * dN[a, 1])
    for a in range(nen):
        for i in range(2):
            for b in range(nen):
                for k in range(2):
                    s = 0.0
                    for I in range(2):
                        for L in range(2):
                            s += dN[a, I] * A[i, I, k, L] * dN[b, L]
                    Ke[2 * a + i, 2 * b + k] += w * s
    I1 = F00 * F00 + F01 * F01 + F10 * F10 + F11 * F11 + 1.0
    psi = 0.5 * cmu * (I1 - 3.0) - cmu * lnJ + 0.5 * clam * lnJ * lnJ
    return w * psi, J


@njit
def bulk_kernel_numba(conn, u, dNdX, wdet, dNdXv, wdetv, mu, lam, split, fe, Ke, energy):
    """Fill ``fe (ne, 2 nen)``, ``Ke (ne, 2 nen, 2 nen)``, ``energy (ne,)``.

    Returns the first inverted element id, or -1.
    """
    ne, nen = conn.shape
    ue = np.empty((nen, 2))
    bad = -1
    for e in range(ne):
        for a in range(nen):
            ue[a, 0] = u[conn[e, a], 0]
            ue[a, 1] = u[conn[e, a], 1]
        fe[e, :] = 0.0
        Ke[e, :, :] = 0.0
        en = 0.0
        clam_full = 0.0 if split else lam
        for g in range(dNdX.shape[1]):
            de, J = _gp_contrib(dNdX[e, g], ue, wdet[e, g], mu, clam_full, fe[e], Ke[e])
            en += de
            if J <= 0.0 and bad < 0:
                bad = e
        if split:
            for g in range(dNdXv.shape[1]):
                de, J = _gp_contrib(dNdXv[e, g], ue, wdetv[e, g], 0.0, lam, fe[e], Ke[e])
                en += de
                if J <= 0.0 and bad < 0:
                    bad = e
        energy[e] = en
    return bad


def _numpy_rule(ue, dN, w, cmu, clam, fe, Ke):
    """Vectorized contribution of one Gauss point across all elements."""
    F = np.eye(2) + np.einsum("eai,eaJ->eiJ", ue, dN)
    J = F[:, 0, 0] * F[:, 1, 1] - F[:, 0, 1] * F[:, 1, 0]
    ok = J > 0
    Js = np.where(ok, J, 1.0)
    Fi = np.empty_like(F)
    Fi[:, 0, 0] = F[:, 1, 1] / Js
    Fi[:, 0, 1] = -F[:, 0, 1] / Js
    Fi[:, 1, 0] = -F[:, 1, 0] / Js
    Fi[:, 1, 1] = F[:, 0, 0] / Js
    lnJ = np.log(Js)
    c = clam * lnJ - cmu
    P = cmu * F + c[:, None, None] * np.transpose(Fi, (0, 2, 1))
    I = np.eye(2)
    A = (cmu * np.einsum("ik,JL->iJkL", I, I)[None]
         + clam * np.einsum("eJi,eLk->eiJkL", Fi, Fi)
         - c[:, None, None, None, None] * np.einsum("eJk,eLi->eiJkL", Fi, Fi))
    ne, nen = dN.shape[:2]
    fe += (w[:, None, None] * np.einsum("eiJ,eaJ->eai", P, dN)).reshape(ne, 2 * nen)
    Ke += (w[:, None, None, None, None]
           * np.einsum("eaI,eiIkL,ebL->eaibk", dN, A, dN)).reshape(ne, 2 * nen, 2 * nen)
    I1 = np.einsum("eiJ,eiJ->e", F, F) + 1.0
    psi = 0.5 * cmu * (I1 - 3.0) - cmu * lnJ + 0.5 * clam * lnJ**2
    return w * psi, ok


def bulk_kernel_numpy(conn, u, dNdX, wdet, dNdXv, wdetv, mu, lam, split, fe, Ke, energy):
    ue = u[conn]
    fe[:] = 0.0
    Ke[:] = 0.0
    energy[:] = 0.0
    ok_all = np.ones(len(conn), dtype=bool)
    clam_full = 0.0 if split else lam
    for g in range(dNdX.shape[1]):
        en, ok = _numpy_rule(ue, dNdX[:, g], wdet[:, g], mu, clam_full, fe, Ke)
        energy += en
        ok_all &= ok
    if split:
        for g in range(dNdXv.shape[1]):
            en, ok = _numpy_rule(ue, dNdXv[:, g], wdetv[:, g], 0.0, lam, fe, Ke)
            energy += en
            ok_all &= ok
    bad = np.flatnonzero(~ok_all)
    return int(bad[0]) if bad.size else -1


bulk_kernel = bulk_kernel_numba if USE_NUMBA else bulk_kernel_numpy
