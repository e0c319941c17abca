"""Randomized two-body contact patches for finite-difference tangent checks."""
import numpy as np

from adhfric.contact import FAR, SLIDE, STICK, ContactPair, two_half_pass
from adhfric.geometry import BSplineSurface
from adhfric.laws import DI, EA, AdhesionParams

ADH = AdhesionParams(0.05, 0.4)

CASES = {
    "adhesion-only": (None, None, 0.0),
    "DI stick": (DI.from_mu(0.5, ADH), STICK, 1e-4),
    "DI slide": (DI.from_mu(0.5, ADH), SLIDE, 0.08),
    "EA stick": (EA(0.3, 0.8), STICK, 1e-4),
    "EA slide": (EA(0.3, 0.8), SLIDE, 0.08),
}


def _block(x0, y0, w, h, nx):
    xs = np.linspace(x0, x0 + w, nx + 1)
    return np.array([[x, y] for y in (y0, y0 + h) for x in xs])


def make_patch(case: str, rng, nx: int = 2, gap_scale: float = 1.05):
    """Two bodies of ``nx`` elements each facing across a gap near g_eq.

    Returns (pair, x, X, branch) with the contact history initialized on a
    jittered configuration and ``x`` sheared by the case's offset.
    """
    law, branch, shift = CASES[case]
    Xa = _block(0.0, -1.0, 2.0, 1.0, nx)
    Xb = _block(0.25, gap_scale * ADH.g_eq, 2.0, 1.0, nx)
    X = np.vstack([Xa, Xb])
    off = len(Xa)
    top = np.arange(nx + 1, 2 * nx + 2)[::-1]
    bottom = np.arange(nx + 1) + off
    pair = ContactPair(BSplineSurface(top), BSplineSurface(bottom), ADH, law, eps_t=50.0)
    x0 = X + rng.normal(scale=0.01, size=X.shape)
    pair.initialize(x0, X)
    x = x0.copy()
    x[off:, 0] += shift
    # keep the stick cases inside the elastic range of the tangential spring
    x += rng.normal(scale=1e-4 if branch == STICK else 3e-3, size=X.shape)
    return pair, x, X, branch


def fd_tangent_error(pair, x, X, branch, h: float = 1e-7) -> tuple[float, np.ndarray]:
    """(relative Frobenius error, statuses) of the global contact tangent."""
    ndof = X.size
    f, K = two_half_pass([pair], x, X, ndof, frozen=False)
    frozen = branch is not None
    if frozen:
        for hp in pair.passes:
            hp.status = hp.last.status.copy()
    status = np.concatenate([hp.last.status for hp in pair.passes])
    Kfd = np.zeros((ndof, ndof))
    for j in range(ndof):
        xp = x.ravel().copy()
        xp[j] += h
        xm = x.ravel().copy()
        xm[j] -= h
        fp, _ = two_half_pass([pair], xp.reshape(-1, 2), X, ndof, frozen=frozen)
        fm, _ = two_half_pass([pair], xm.reshape(-1, 2), X, ndof, frozen=frozen)
        Kfd[:, j] = (fp - fm) / (2 * h)
    err = np.linalg.norm(K.toarray() - Kfd) / np.linalg.norm(Kfd)
    return float(err), status


def active(status) -> np.ndarray:
    return status[status != FAR]
