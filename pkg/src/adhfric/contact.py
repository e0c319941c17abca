"""Two-half-pass contact: forces, consistent tangents and active-set state.

Each half-pass integrates the interface traction over one smooth surface
(``k``) using the closest-point projection onto the opposite surface
(``l``). No action-reaction balancing happens between the two passes. A
rigid counter-surface produces a single pass; if it rides on a pseudo-node
(rigid plate) that node receives the reaction of the pass.

Per quadrature point the traction is ``q = (T_n / J_l) n - c t`` with
``c = J_k`` for the DI law (traction per current area) and ``c = 1``
otherwise, and the nodal force is ``f = -int N_k^T q dA_k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._accel import njit
from .friction import EPS_T_DEFAULT, Status
from .geometry import (BSPLINE, PROJ_OK, BSplineSurface, Surface, project_kernel, surf_eval)
from .laws import (DI_LAW, EA_LAW, FRICTIONLESS, DI, EA, AdhesionParams, Frictionless,
                   di_kernel, dtn_kernel, ea_kernel, tn_kernel)

FAR = int(Status.FAR)
FRICTIONLESS_SLIDE = int(Status.FRICTIONLESS_SLIDE)
STICK = int(Status.STICK)
SLIDE = int(Status.SLIDE)

PART_NORMAL = 1
PART_TANGENTIAL = 2
PART_ALL = 3

NLMAX = 6           # l-surface nodes per point (foot point plus anchor)
NCOL = 2 + 2 * NLMAX
ENTRIES_PER_POINT = 8 * (6 + 2 * NLMAX)


@njit
def _add_node(nodes, count, nd):
    for i in range(count):
        if nodes[i] == nd:
            return i, count
    nodes[count] = nd
    return count, count + 1


@njit
def contact_pass_kernel(kn, kN, kdN, kw, stype, ctrl, geo, pnode, x, X, ap, lp,
                        use_stretch, parts, frozen, mask, status_in, xi_s_in, anchor_in,
                        f_out, rows, cols, vals,
                        status_out, g_out, xip_out, xis_out, t_out, ts_out, dgam_out):
    """Loop over the contact points of one half-pass.

    Forces are added into the global vector ``f_out``; stiffness entries are
    written as COO triplets and their count is returned.
    """
    npts = kn.shape[0]
    g_far = ap[3]
    law = int(lp[0])
    tau, g_cut, kreg, mu, eps = lp[1], lp[2], lp[3], lp[4], lp[5]
    react = stype != BSPLINE and pnode >= 0
    out = np.empty(12)
    pn = np.empty(6, dtype=np.int64)
    pN = np.empty(6)
    pdN = np.empty(6)
    sn = np.empty(6, dtype=np.int64)
    sN = np.empty(6)
    sdN = np.empty(6)
    L = np.empty(NLMAX, dtype=np.int64)
    dxi = np.empty(NCOL)
    dg = np.empty(NCOL)
    dan = np.empty(NCOL)
    dJ = np.empty(NCOL)
    dts = np.empty(NCOL)
    dtt = np.empty((2, NCOL))
    dt = np.empty((2, NCOL))
    dq = np.empty((2, NCOL))
    xk = np.empty(2)
    nnz = 0
    for p in range(npts):
        status_out[p] = FAR
        g_out[p] = np.inf
        xip_out[p] = xi_s_in[p]
        xis_out[p] = xi_s_in[p]
        t_out[p, 0] = 0.0
        t_out[p, 1] = 0.0
        ts_out[p] = 0.0
        dgam_out[p] = 0.0
        if not mask[p]:
            continue
        if frozen and status_in[p] == FAR:
            continue
        # k-surface point
        xk[0] = 0.0
        xk[1] = 0.0
        akx = 0.0
        aky = 0.0
        Akx = 0.0
        Aky = 0.0
        for a in range(3):
            nd = kn[p, a]
            xk[0] += kN[p, a] * x[nd, 0]
            xk[1] += kN[p, a] * x[nd, 1]
            akx += kdN[p, a] * x[nd, 0]
            aky += kdN[p, a] * x[nd, 1]
            Akx += kdN[p, a] * X[nd, 0]
            Aky += kdN[p, a] * X[nd, 1]
        lA = math.sqrt(Akx * Akx + Aky * Aky)
        la = math.sqrt(akx * akx + aky * aky)
        dA = lA * kw[p]
        Jk = la / lA
        akcx = akx / (la * la)
        akcy = aky / (la * la)

        xi, g, flag, patch = project_kernel(xk, stype, ctrl, geo, pnode, x, X, g_far)
        if flag != PROJ_OK:
            continue
        xip_out[p] = xi
        g_out[p] = g
        if g > g_far or g < -g_far:
            continue
        npn = surf_eval(stype, ctrl, geo, pnode, x, X, xi, out, pn, pN, pdN)
        xpx, xpy = out[0], out[1]
        ax, ay, bx, by = out[2], out[3], out[4], out[5]
        Ax, Ay, Bx, By = out[8], out[9], out[10], out[11]
        m = ax * ax + ay * ay
        sm = math.sqrt(m)
        nx = ay / sm
        ny = -ax / sm
        kap = nx * bx + ny * by
        den = m - g * kap
        if abs(den) <= 1e-12 * m:
            continue
        c = 1.0 / den
        acx = ax / m
        acy = ay / m
        if use_stretch:
            mA = Ax * Ax + Ay * Ay
            J = sm / math.sqrt(mA)
            J1 = J * (acx * bx + acy * by - (Ax * Bx + Ay * By) / mA)
        else:
            J = 1.0
            J1 = 0.0

        nl = 0
        for i in range(npn):
            _, nl = _add_node(L, nl, pn[i])
        for q in range(NCOL):
            dxi[q] = 0.0
            dg[q] = 0.0
            dan[q] = 0.0
            dJ[q] = 0.0
        dxi[0] = c * ax
        dxi[1] = c * ay
        dg[0] = nx
        dg[1] = ny
        for i in range(npn):
            b0 = 2 + 2 * i
            dxi[b0] = -c * (pN[i] * ax - g * pdN[i] * nx)
            dxi[b0 + 1] = -c * (pN[i] * ay - g * pdN[i] * ny)
            dg[b0] = -pN[i] * nx
            dg[b0 + 1] = -pN[i] * ny
            dan[b0] = pdN[i] * nx
            dan[b0 + 1] = pdN[i] * ny
            if use_stretch:
                dJ[b0] = J * pdN[i] * acx
                dJ[b0 + 1] = J * pdN[i] * acy
        for q in range(NCOL):
            dan[q] += kap * dxi[q]
            dJ[q] += J1 * dxi[q]

        # normal part
        Tn = tn_kernel(g, ap)
        dTn = dtn_kernel(g, ap)
        qx = 0.0
        qy = 0.0
        for q in range(NCOL):
            dq[0, q] = 0.0
            dq[1, q] = 0.0
        if (parts & 1) != 0:
            qx = Tn / J * nx
            qy = Tn / J * ny
            for q in range(NCOL):
                dnx = -acx * dan[q]
                dny = -acy * dan[q]
                dq[0, q] = dTn / J * nx * dg[q] + Tn / J * dnx - Tn / (J * J) * nx * dJ[q]
                dq[1, q] = dTn / J * ny * dg[q] + Tn / J * dny - Tn / (J * J) * ny * dJ[q]

        # tangential part
        status = FRICTIONLESS_SLIDE
        tx = 0.0
        ty = 0.0
        fac = 1.0
        xis_new = xi
        if law != FRICTIONLESS:
            if law == DI_LAW:
                ts, dtsg = di_kernel(g, tau, g_cut, kreg)
                dtsJ = 0.0
                fac = Jk
            else:
                ts, dtsg, dtsJ = ea_kernel(g, J, mu, g_cut, ap)
            ts_out[p] = ts
            for q in range(NCOL):
                dts[q] = dtsg * dg[q] + dtsJ * dJ[q]
            if anchor_in[p]:
                xs = xi_s_in[p]
                nsn = surf_eval(stype, ctrl, geo, pnode, x, X, xs, out, sn, sN, sdN)
                xsx = out[0]
                xsy = out[1]
                ttx = eps * (xpx - xsx)
                tty = eps * (xpy - xsy)
                ntt = math.sqrt(ttx * ttx + tty * tty)
                if frozen:
                    status = status_in[p]
                    if status == SLIDE and ntt == 0.0:
                        status = FRICTIONLESS_SLIDE
                else:
                    if ts <= 0.0 and ntt == 0.0:
                        status = FRICTIONLESS_SLIDE
                    elif ntt - ts < 0.0:
                        status = STICK
                    else:
                        status = SLIDE
                        if ntt == 0.0:
                            status = FRICTIONLESS_SLIDE
                if status == STICK or status == SLIDE:
                    # trial traction linearization over the merged node list
                    for q in range(NCOL):
                        dtt[0, q] = eps * ax * dxi[q]
                        dtt[1, q] = eps * ay * dxi[q]
                    for i in range(npn):
                        b0 = 2 + 2 * i
                        dtt[0, b0] += eps * pN[i]
                        dtt[1, b0 + 1] += eps * pN[i]
                    for i in range(nsn):
                        idx, nl = _add_node(L, nl, sn[i])
                        b0 = 2 + 2 * idx
                        dtt[0, b0] -= eps * sN[i]
                        dtt[1, b0 + 1] -= eps * sN[i]
                    if status == STICK:
                        tx = ttx
                        ty = tty
                        for q in range(NCOL):
                            dt[0, q] = dtt[0, q]
                            dt[1, q] = dtt[1, q]
                    else:
                        ntx = ttx / ntt
                        nty = tty / ntt
                        tx = ts * ntx
                        ty = ts * nty
                        r = ts / ntt
                        for q in range(NCOL):
                            pa = dtt[0, q]
                            pb = dtt[1, q]
                            proj = ntx * pa + nty * pb
                            dt[0, q] = r * (pa - ntx * proj) + ntx * dts[q]
                            dt[1, q] = r * (pb - nty * proj) + nty * dts[q]
                        dgam = (ntt - ts) / eps
                        if dgam < 0.0:
                            dgam = 0.0
                        dgam_out[p] = dgam
                        xis_new = xs + dgam * (ntx * acx + nty * acy)
                        if stype == BSPLINE:
                            if xis_new < 0.0 or xis_new > ctrl.shape[0] - 2:
                                xis_new = xi
                        elif xis_new < geo[5] or xis_new > geo[6]:
                            xis_new = xi
                    if status == STICK:
                        xis_new = xs
        status_out[p] = status
        xis_out[p] = xis_new
        t_out[p, 0] = tx
        t_out[p, 1] = ty
        has_t = (parts & 2) != 0 and (status == STICK or status == SLIDE)
        if has_t:
            qx -= fac * tx
            qy -= fac * ty
            for q in range(2 + 2 * nl):
                dq[0, q] -= fac * dt[0, q]
                dq[1, q] -= fac * dt[1, q]
        if (parts & 1) == 0 and not has_t:
            continue

        # assembly: k rows
        for a in range(3):
            na = kn[p, a]
            Na = kN[p, a]
            f_out[2 * na] -= Na * qx * dA
            f_out[2 * na + 1] -= Na * qy * dA
            for i in range(2):
                rw = 2 * na + i
                for b in range(3):
                    nb = kn[p, b]
                    for j in range(2):
                        v = -Na * dq[i, j] * kN[p, b] * dA
                        if has_t and law == DI_LAW:
                            tk = tx if i == 0 else ty
                            ak = akcx if j == 0 else akcy
                            v += Na * dA * tk * Jk * ak * kdN[p, b]
                        rows[nnz] = rw
                        cols[nnz] = 2 * nb + j
                        vals[nnz] = v
                        nnz += 1
                for li in range(nl):
                    for j in range(2):
                        rows[nnz] = rw
                        cols[nnz] = 2 * L[li] + j
                        vals[nnz] = -Na * dq[i, 2 + 2 * li + j] * dA
                        nnz += 1
        if react:
            f_out[2 * pnode] += qx * dA
            f_out[2 * pnode + 1] += qy * dA
            for i in range(2):
                rw = 2 * pnode + i
                for b in range(3):
                    nb = kn[p, b]
                    for j in range(2):
                        v = dq[i, j] * kN[p, b] * dA
                        if has_t and law == DI_LAW:
                            tk = tx if i == 0 else ty
                            ak = akcx if j == 0 else akcy
                            v -= dA * tk * Jk * ak * kdN[p, b]
                        rows[nnz] = rw
                        cols[nnz] = 2 * nb + j
                        vals[nnz] = v
                        nnz += 1
                for li in range(nl):
                    for j in range(2):
                        rows[nnz] = rw
                        cols[nnz] = 2 * L[li] + j
                        vals[nnz] = dq[i, 2 + 2 * li + j] * dA
                        nnz += 1
    return nnz


# ---------------------------------------------------------------------------
# python-side containers


@dataclass
class PassResult:
    status: np.ndarray
    g: np.ndarray
    xi_p: np.ndarray
    xi_s: np.ndarray
    t: np.ndarray
    t_slide: np.ndarray
    dgamma: np.ndarray


class HalfPass:
    """Quadrature points of surface ``k`` projected onto surface ``l``.

    Holds the committed per-point history (anchor, status).
    """

    def __init__(self, k: BSplineSurface, l: Surface, n_gauss: int = 4):
        self.k = k
        self.l = l
        zeta, w = np.polynomial.legendre.leggauss(n_gauss)
        nspan = k.n_patches
        pts = (np.arange(nspan)[:, None] + 0.5 * (1.0 + zeta)[None, :]).ravel()
        self.elem = np.repeat(np.arange(nspan), n_gauss)
        self.gp = np.tile(np.arange(n_gauss), nspan)
        self.kw = np.tile(0.5 * w, nspan)
        npts = pts.size
        self.kn = np.empty((npts, 3), dtype=np.int64)
        self.kN = np.empty((npts, 3))
        self.kdN = np.empty((npts, 3))
        from .geometry import bspline2_basis
        dd = np.empty(3)
        for p, xi in enumerate(pts):
            j = bspline2_basis(xi, nspan, self.kN[p], self.kdN[p], dd)
            self.kn[p] = k.ctrl[j:j + 3]
        self.xi_k = pts
        self.l_pack = l.pack()
        self.status = np.full(npts, FAR, dtype=np.int64)
        self.xi_s = np.zeros(npts)
        self.anchor = np.zeros(npts, dtype=np.bool_)
        self.t_last = np.zeros((npts, 2))
        self.dgamma_last = np.zeros(npts)
        self.last: PassResult | None = None

    @property
    def n_points(self) -> int:
        return self.kn.shape[0]

    @property
    def rigid_reaction(self) -> bool:
        return self.l_pack[0] != BSPLINE and self.l_pack[3] >= 0


class ContactPair:
    """Contact interaction between two surfaces with one interface law.

    ``surface_l`` may be rigid, in which case only one half-pass exists.
    """

    def __init__(self, surface_k: BSplineSurface, surface_l: Surface, adhesion: AdhesionParams,
                 law=None, eps_t: float = EPS_T_DEFAULT, n_gauss: int = 4,
                 use_stretch: bool = True, name: str = "contact"):
        self.adhesion = adhesion
        self.law = Frictionless() if law is None else law
        if eps_t <= 0:
            raise ValueError("eps_t must be positive")
        self.eps_t = eps_t
        self.use_stretch = use_stretch
        self.name = name
        self.passes = [HalfPass(surface_k, surface_l, n_gauss)]
        if isinstance(surface_l, BSplineSurface):
            self.passes.append(HalfPass(surface_l, surface_k, n_gauss))
        self.ap = adhesion.pack()
        self.lp = self.law.pack(adhesion, eps_t)
        self.adhesion_scale = 1.0

    def set_law(self, law) -> None:
        """Swap the tangential law; call ``initialize`` afterwards to re-anchor."""
        self.law = Frictionless() if law is None else law
        self.lp = self.law.pack(self.adhesion, self.eps_t)

    def set_adhesion_scale(self, s: float) -> None:
        """Scale the normal traction law by ``s`` (used for continuation)."""
        if not s > 0:
            raise ValueError("adhesion scale must be positive")
        self.adhesion_scale = float(s)
        self.ap = self.adhesion.pack()
        self.ap[0] *= s

    # -- state handling -------------------------------------------------

    def initialize(self, x: np.ndarray, X: np.ndarray) -> None:
        """Anchor every in-range point at its current foot point."""
        ndof = 2 * len(x)
        self.evaluate(x, X, np.zeros(ndof), None, frozen=False, parts=0)
        for hp in self.passes:
            r = hp.last
            inrange = np.isfinite(r.g) & (np.abs(r.g) <= self.adhesion.g_far)
            hp.xi_s = np.where(inrange, r.xi_p, 0.0)
            hp.anchor = inrange.copy()
            hp.status = np.where(inrange, FRICTIONLESS_SLIDE, FAR).astype(np.int64)
        # anchored points at rest have zero trial traction, so they start sticking
        self.evaluate(x, X, np.zeros(ndof), None, frozen=False, parts=0)
        for hp in self.passes:
            hp.status = np.where(hp.anchor, hp.last.status, FAR).astype(np.int64)

    def commit(self) -> None:
        """Accept the last evaluated state as the converged history."""
        for hp in self.passes:
            r = hp.last
            hp.status = r.status.copy()
            active = r.status != FAR
            hp.xi_s = np.where(active, r.xi_s, r.xi_p)
            hp.anchor = active.copy()
            hp.t_last = r.t.copy()
            hp.dgamma_last = r.dgamma.copy()

    def snapshot(self):
        return [(hp.status.copy(), hp.xi_s.copy(), hp.anchor.copy(),
                 hp.t_last.copy(), hp.dgamma_last.copy()) for hp in self.passes]

    def restore(self, snap) -> None:
        for hp, (s, xs, an, tl, dg) in zip(self.passes, snap):
            hp.status, hp.xi_s, hp.anchor, hp.t_last, hp.dgamma_last = \
                s.copy(), xs.copy(), an.copy(), tl.copy(), dg.copy()

    def last_statuses(self) -> np.ndarray:
        return np.concatenate([hp.last.status for hp in self.passes])

    # -- evaluation -----------------------------------------------------

    def evaluate_pass(self, ip: int, x, X, f_out, *, frozen: bool, parts: int = PART_ALL,
                      mask=None, status_in=None):
        """Run one half-pass; returns COO triplets and stores ``hp.last``."""
        hp = self.passes[ip]
        npts = hp.n_points
        if mask is None:
            mask = np.ones(npts, dtype=np.bool_)
        if status_in is None:
            status_in = hp.status
        rows = np.empty(npts * ENTRIES_PER_POINT, dtype=np.int64)
        cols = np.empty_like(rows)
        vals = np.empty(rows.size)
        res = PassResult(status=np.empty(npts, dtype=np.int64), g=np.empty(npts),
                         xi_p=np.empty(npts), xi_s=np.empty(npts), t=np.empty((npts, 2)),
                         t_slide=np.empty(npts), dgamma=np.empty(npts))
        stype, ctrl, geo, pnode = hp.l_pack
        nnz = contact_pass_kernel(hp.kn, hp.kN, hp.kdN, hp.kw, stype, ctrl, geo, pnode,
                                  np.ascontiguousarray(x), np.ascontiguousarray(X), self.ap, self.lp,
                                  self.use_stretch, parts, frozen, mask, status_in, hp.xi_s,
                                  hp.anchor, f_out, rows, cols, vals, res.status, res.g, res.xi_p,
                                  res.xi_s, res.t, res.t_slide, res.dgamma)
        hp.last = res
        return rows[:nnz], cols[:nnz], vals[:nnz]

    def evaluate(self, x, X, f_out, system=None, *, frozen: bool, parts: int = PART_ALL):
        """Both half-passes: forces into ``f_out``, tangent into ``system``."""
        for ip in range(len(self.passes)):
            r, c, v = self.evaluate_pass(ip, x, X, f_out, frozen=frozen, parts=parts)
            if system is not None:
                system.add_matrix(r, c, v)

    # -- diagnostics ----------------------------------------------------

    def contact_rows(self):
        """Per-point rows ``pass, elem, gp, gn, status, ttx, tty, Tslide``."""
        out = []
        for ip, hp in enumerate(self.passes):
            r = hp.last
            for p in range(hp.n_points):
                out.append((ip + 1, int(hp.elem[p]), int(hp.gp[p]), float(r.g[p]),
                            Status(int(r.status[p])).name.lower(), float(r.t[p, 0]),
                            float(r.t[p, 1]), float(r.t_slide[p])))
        return out


def write_contact_dump(path, pairs, step: int | None = None, append: bool = False) -> None:
    """CSV dump of every contact quadrature point of the given pairs."""
    head = "pass,elem,gp,gn,status,ttx,tty,Tslide"
    if step is not None:
        head = "step," + head
    mode = "a" if append else "w"
    with open(path, mode) as fh:
        if not append:
            fh.write(head + "\n")
        for pair in pairs:
            for row in pair.contact_rows():
                vals = [f"{v:.17g}" if isinstance(v, float) else str(v) for v in row]
                if step is not None:
                    vals.insert(0, str(step))
                fh.write(",".join(vals) + "\n")


# ---------------------------------------------------------------------------
# element-level API


def _element_eval(pair: ContactPair, ip: int, elem: int, x, X, parts: int, frozen: bool):
    hp = pair.passes[ip]
    mask = hp.elem == elem
    f = np.zeros(2 * len(x))
    r, c, v = pair.evaluate_pass(ip, x, X, f, frozen=frozen, parts=parts, mask=mask)
    import scipy.sparse as sp
    K = sp.csr_matrix((v, (r, c)), shape=(f.size, f.size)).toarray()
    return f, K


def normal_force_element(pair: ContactPair, elem: int, x, X, ip: int = 0) -> np.ndarray:
    """Global-length vector of the normal contact force of one k-surface span."""
    return _element_eval(pair, ip, elem, x, X, PART_NORMAL, False)[0]


def tangential_force_element(pair: ContactPair, elem: int, x, X, ip: int = 0,
                             frozen: bool = False) -> np.ndarray:
    """Tangential part ``-int N^T (-c t) dA`` of one span (sign as in the total force)."""
    return _element_eval(pair, ip, elem, x, X, PART_TANGENTIAL, frozen)[0]


def normal_tangent_element(pair: ContactPair, elem: int, x, X, ip: int = 0) -> np.ndarray:
    return _element_eval(pair, ip, elem, x, X, PART_NORMAL, False)[1]


def tangential_tangent_element(pair: ContactPair, elem: int, x, X, ip: int = 0,
                               frozen: bool = False) -> np.ndarray:
    return _element_eval(pair, ip, elem, x, X, PART_TANGENTIAL, frozen)[1]


def two_half_pass(pairs, x, X, ndof: int, *, frozen: bool = False, parts: int = PART_ALL):
    """Global contact force vector and sparse tangent over all pairs."""
    import scipy.sparse as sp
    f = np.zeros(ndof)
    R, C, V = [], [], []
    for pair in pairs:
        for ip in range(len(pair.passes)):
            r, c, v = pair.evaluate_pass(ip, x, X, f, frozen=frozen, parts=parts)
            R.append(r)
            C.append(c)
            V.append(v)
    if R:
        K = sp.csr_matrix((np.concatenate(V), (np.concatenate(R), np.concatenate(C))),
                          shape=(ndof, ndof))
    else:
        K = sp.csr_matrix((ndof, ndof))
    return f, K


# ---------------------------------------------------------------------------
# active sets


@dataclass
class ActiveSetControl:
    """Freeze / release logic for the contact active sets within one step."""

    freeze_tol: float = 1e-2
    max_repeats: int = 2
    frozen: bool = True
    history: list = field(default_factory=list)
    cut_requested: bool = False

    def reset(self) -> None:
        self.frozen = True
        self.history = []
        self.cut_requested = False


def update_active_sets(ctrl: ActiveSetControl, residual_norm: float, reference: float,
                       statuses: np.ndarray | None = None, first: bool = False) -> ActiveSetControl:
    """Decide whether the next evaluation uses frozen memberships.

    The first iteration of a step is always frozen. Once released, each new
    membership pattern is recorded; seeing an A -> B -> A oscillation
    ``max_repeats`` times sets ``cut_requested``.
    """
    if first:
        ctrl.reset()
        return ctrl
    if ctrl.frozen and residual_norm <= ctrl.freeze_tol * reference:
        ctrl.frozen = False
    if not ctrl.frozen and statuses is not None:
        key = hash(np.asarray(statuses, dtype=np.int64).tobytes())
        h = ctrl.history
        h.append(key)
        osc = 0
        for i in range(2, len(h)):
            if h[i] == h[i - 2] and h[i] != h[i - 1]:
                osc += 1
        if osc >= 2 * ctrl.max_repeats - 1:
            ctrl.cut_requested = True
    return ctrl
