"""Contact-surface kinematics in 2D: smooth surface evaluation, closest-point
projection, normal gap, surface stretch and the curvature-corrected metric.

Three surface kinds share one kernel interface:

* ``BSplineSurface`` -- quadratic B-spline with open uniform knots whose control
  points are finite-element nodes (C1 across spans, one span per patch);
* ``RigidLine`` -- straight segment or infinite line, optionally riding on a
  pseudo-node that carries the rigid-body translation;
* ``RigidCircle`` -- analytic circle, optionally riding on a pseudo-node.

Surfaces are traversed with the body on the left, so the outward normal is
the tangent rotated clockwise: ``n = (a_y, -a_x) / |a|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import njit

BSPLINE = 0
LINE = 1
CIRCLE = 2

# projection result flags
PROJ_OK = 0
PROJ_CLAMPED = 1
PROJ_FAILED = 2

_INF = 1e300


class DegenerateGeometryError(ValueError):
    pass


class SingularCurvatureError(ValueError):
    pass


class ProjectionError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# kernels


@njit
def _knot(idx, m):
    v = idx - 2
    if v < 0:
        return 0.0
    if v > m:
        return float(m)
    return float(v)


@njit
def bspline2_basis(xi, m, N, dN, ddN):
    """Quadratic open-uniform B-spline basis on ``m`` unit spans.

    Fills the three non-zero functions and their first and second
    derivatives at ``xi`` and returns the span index ``j`` (functions
    ``j, j+1, j+2`` are non-zero).
    """
    j = int(math.floor(xi))
    if j < 0:
        j = 0
    if j > m - 1:
        j = m - 1
    i = j + 2
    u_im1 = _knot(i - 1, m)
    u_i = _knot(i, m)
    u_ip1 = _knot(i + 1, m)
    u_ip2 = _knot(i + 2, m)
    h = u_ip1 - u_i
    A = u_ip1 - u_im1
    B = u_ip2 - u_i
    n0 = (u_ip1 - xi) / h
    n1 = (xi - u_i) / h
    N[0] = (u_ip1 - xi) / A * n0
    N[1] = (xi - u_im1) / A * n0 + (u_ip2 - xi) / B * n1
    N[2] = (xi - u_i) / B * n1
    dN[0] = -2.0 / A * n0
    dN[1] = 2.0 / A * n0 - 2.0 / B * n1
    dN[2] = 2.0 / B * n1
    ddN[0] = 2.0 / (h * A)
    ddN[1] = -2.0 / (h * A) - 2.0 / (h * B)
    ddN[2] = 2.0 / (h * B)
    return j


@njit
def surf_eval(stype, ctrl, geo, pnode, x, X, xi, out, nodes, N, dN):
    """Evaluate a surface at parameter ``xi``.

    ``out`` receives ``[x, a, b, X, A, B]`` (position, tangent and its
    parametric derivative, current then reference, 2 entries each).
    ``nodes/N/dN`` receive the nodal dependence ``x = sum N_i x_i + const``;
    the number of contributing nodes is returned.
    """
    for q in range(12):
        out[q] = 0.0
    if stype == BSPLINE:
        m = ctrl.shape[0] - 2
        ddN = np.empty(3)
        j = bspline2_basis(xi, m, N, dN, ddN)
        for r in range(3):
            nd = ctrl[j + r]
            nodes[r] = nd
            for d in range(2):
                out[d] += N[r] * x[nd, d]
                out[2 + d] += dN[r] * x[nd, d]
                out[4 + d] += ddN[r] * x[nd, d]
                out[6 + d] += N[r] * X[nd, d]
                out[8 + d] += dN[r] * X[nd, d]
                out[10 + d] += ddN[r] * X[nd, d]
        return 3
    ux = 0.0
    uy = 0.0
    cnt = 0
    if pnode >= 0:
        ux = x[pnode, 0] - X[pnode, 0]
        uy = x[pnode, 1] - X[pnode, 1]
        nodes[0] = pnode
        N[0] = 1.0
        dN[0] = 0.0
        cnt = 1
    if stype == LINE:
        p0x, p0y, dx, dy = geo[0], geo[1], geo[2], geo[3]
        out[6] = p0x + xi * dx
        out[7] = p0y + xi * dy
        out[8] = dx
        out[9] = dy
    else:
        cx, cy, R = geo[0], geo[1], geo[4]
        c = math.cos(xi)
        s = math.sin(xi)
        out[6] = cx + R * c
        out[7] = cy + R * s
        out[8] = -R * s
        out[9] = R * c
        out[10] = -R * c
        out[11] = -R * s
    out[0] = out[6] + ux
    out[1] = out[7] + uy
    out[2] = out[8]
    out[3] = out[9]
    out[4] = out[10]
    out[5] = out[11]
    return cnt


@njit
def _newton_span(xk, stype, ctrl, geo, pnode, x, X, lo, hi, xi0, tol, maxit):
    """Newton iteration for (x(xi) - xk) . a(xi) = 0 on [lo, hi].

    Returns (xi, flag, iterations).
    """
    out = np.empty(12)
    nodes = np.empty(6, dtype=np.int64)
    N = np.empty(6)
    dN = np.empty(6)
    xi = xi0
    for it in range(maxit):
        surf_eval(stype, ctrl, geo, pnode, x, X, xi, out, nodes, N, dN)
        dx = out[0] - xk[0]
        dy = out[1] - xk[1]
        r = dx * out[2] + dy * out[3]
        dr = out[2] * out[2] + out[3] * out[3] + dx * out[4] + dy * out[5]
        if dr <= 0.0:
            return xi, PROJ_FAILED, it
        step = -r / dr
        xnew = xi + step
        if xnew < lo:
            xnew = lo
        elif xnew > hi:
            xnew = hi
        if abs(xnew - xi) <= tol:
            xi = xnew
            surf_eval(stype, ctrl, geo, pnode, x, X, xi, out, nodes, N, dN)
            dx = out[0] - xk[0]
            dy = out[1] - xk[1]
            r = dx * out[2] + dy * out[3]
            scale = math.sqrt(out[2] * out[2] + out[3] * out[3])
            if (xi == lo or xi == hi) and abs(r) > 1e-9 * scale * (hi - lo):
                return xi, PROJ_CLAMPED, it
            return xi, PROJ_OK, it
        xi = xnew
    return xi, PROJ_FAILED, maxit


@njit
def _gap_at(xk, stype, ctrl, geo, pnode, x, X, xi):
    out = np.empty(12)
    nodes = np.empty(6, dtype=np.int64)
    N = np.empty(6)
    dN = np.empty(6)
    surf_eval(stype, ctrl, geo, pnode, x, X, xi, out, nodes, N, dN)
    ax, ay = out[2], out[3]
    la = math.sqrt(ax * ax + ay * ay)
    return ((xk[0] - out[0]) * ay - (xk[1] - out[1]) * ax) / la


@njit
def project_kernel(xk, stype, ctrl, geo, pnode, x, X, pad):
    """Closest-point projection of ``xk`` onto one surface.

    Each B-spline span is a patch; spans whose control-point bounding box
    (inflated by ``pad``) excludes ``xk`` are skipped. Among candidates the
    unflagged result with the smallest |g_n| wins, ties going to the lower
    span. Returns (xi, g_n, flag, patch).
    """
    tol = 1e-13
    if stype == LINE:
        lo, hi = geo[5], geo[6]
        ux = 0.0
        uy = 0.0
        if pnode >= 0:
            ux = x[pnode, 0] - X[pnode, 0]
            uy = x[pnode, 1] - X[pnode, 1]
        dx, dy = geo[2], geo[3]
        xi = ((xk[0] - geo[0] - ux) * dx + (xk[1] - geo[1] - uy) * dy) / (dx * dx + dy * dy)
        flag = PROJ_OK
        if xi < lo:
            xi = lo
            flag = PROJ_CLAMPED
        elif xi > hi:
            xi = hi
            flag = PROJ_CLAMPED
        return xi, _gap_at(xk, stype, ctrl, geo, pnode, x, X, xi), flag, 0
    if stype == CIRCLE:
        ux = 0.0
        uy = 0.0
        if pnode >= 0:
            ux = x[pnode, 0] - X[pnode, 0]
            uy = x[pnode, 1] - X[pnode, 1]
        rx = xk[0] - geo[0] - ux
        ry = xk[1] - geo[1] - uy
        if rx * rx + ry * ry == 0.0:
            return 0.0, 0.0, PROJ_FAILED, 0
        xi = math.atan2(ry, rx)
        return xi, _gap_at(xk, stype, ctrl, geo, pnode, x, X, xi), PROJ_OK, 0

    m = ctrl.shape[0] - 2
    best_xi = 0.0
    best_g = _INF
    best_flag = PROJ_FAILED
    best_patch = -1
    for j in range(m):
        xmin = _INF
        xmax = -_INF
        ymin = _INF
        ymax = -_INF
        for r in range(3):
            nd = ctrl[j + r]
            xmin = min(xmin, x[nd, 0])
            xmax = max(xmax, x[nd, 0])
            ymin = min(ymin, x[nd, 1])
            ymax = max(ymax, x[nd, 1])
        if xk[0] < xmin - pad or xk[0] > xmax + pad or xk[1] < ymin - pad or xk[1] > ymax + pad:
            continue
        lo = float(j)
        hi = float(j + 1)
        xi, flag, _ = _newton_span(xk, stype, ctrl, geo, pnode, x, X, lo, hi, lo + 0.5, tol, 50)
        if flag == PROJ_FAILED:
            # fallback seed from a 5-point parametric scan
            dmin = _INF
            seed = lo
            for q in range(5):
                s = lo + 0.25 * q
                out = np.empty(12)
                nodes = np.empty(6, dtype=np.int64)
                N = np.empty(6)
                dN = np.empty(6)
                surf_eval(stype, ctrl, geo, pnode, x, X, s, out, nodes, N, dN)
                dd = (out[0] - xk[0]) ** 2 + (out[1] - xk[1]) ** 2
                if dd < dmin:
                    dmin = dd
                    seed = s
            xi, flag, _ = _newton_span(xk, stype, ctrl, geo, pnode, x, X, lo, hi, seed, tol, 50)
            if flag == PROJ_FAILED:
                continue
        g = _gap_at(xk, stype, ctrl, geo, pnode, x, X, xi)
        # clamped at an interior seam belongs to the neighbouring span
        if flag == PROJ_CLAMPED and 0.0 < xi < float(m):
            continue
        better = False
        if best_patch < 0:
            better = True
        elif flag < best_flag:
            better = True
        elif flag == best_flag and abs(g) < abs(best_g):
            better = True
        if better:
            best_xi = xi
            best_g = g
            best_flag = flag
            best_patch = j
    if best_patch < 0:
        return 0.0, _INF, PROJ_FAILED, -1
    return best_xi, best_g, best_flag, best_patch


# ---------------------------------------------------------------------------
# surfaces


class Surface:
    """Common interface; subclasses provide ``pack`` and the domain."""

    stype: int

    def pack(self):
        raise NotImplementedError

    @property
    def n_patches(self) -> int:
        return 1

    @property
    def domain(self) -> tuple[float, float]:
        raise NotImplementedError

    @property
    def nodes(self) -> np.ndarray:
        return np.empty(0, dtype=np.int64)


class BSplineSurface(Surface):
    """Quadratic B-spline over an ordered chain of mesh nodes (control points)."""

    stype = BSPLINE

    def __init__(self, node_ids):
        self.ctrl = np.ascontiguousarray(node_ids, dtype=np.int64)
        if self.ctrl.size < 3:
            raise DegenerateGeometryError("a B-spline surface needs at least 3 control nodes")

    def pack(self):
        return BSPLINE, self.ctrl, np.zeros(7), -1

    @property
    def n_patches(self) -> int:
        return self.ctrl.size - 2

    @property
    def domain(self):
        return 0.0, float(self.ctrl.size - 2)

    @property
    def nodes(self):
        return self.ctrl


class RigidLine(Surface):
    """Rigid straight surface through ``point`` with outward ``normal``.

    The parameter is arc length along ``d = (-n_y, n_x)``. ``bounds``
    restricts it to a finite segment. With ``pnode`` set, the line translates
    with that pseudo-node.
    """

    stype = LINE

    def __init__(self, point, normal, bounds=(-_INF, _INF), pnode: int = -1):
        n = np.asarray(normal, dtype=float)
        n = n / np.linalg.norm(n)
        self.point = np.asarray(point, dtype=float)
        self.normal = n
        self.direction = np.array([-n[1], n[0]])
        self.bounds = (float(bounds[0]), float(bounds[1]))
        self.pnode = int(pnode)

    def pack(self):
        geo = np.array([self.point[0], self.point[1], self.direction[0], self.direction[1],
                        0.0, self.bounds[0], self.bounds[1]])
        return LINE, np.zeros(3, dtype=np.int64), geo, self.pnode

    @property
    def domain(self):
        return self.bounds

    @property
    def nodes(self):
        return np.array([self.pnode], dtype=np.int64) if self.pnode >= 0 else super().nodes


class RigidCircle(Surface):
    """Rigid circle (outward normal radial), parametrized by polar angle."""

    stype = CIRCLE

    def __init__(self, center, radius, pnode: int = -1):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise DegenerateGeometryError("circle radius must be positive")
        self.pnode = int(pnode)

    def pack(self):
        geo = np.array([self.center[0], self.center[1], 0.0, 0.0, self.radius, -math.pi, math.pi])
        return CIRCLE, np.zeros(3, dtype=np.int64), geo, self.pnode

    @property
    def domain(self):
        return -math.pi, math.pi

    @property
    def nodes(self):
        return np.array([self.pnode], dtype=np.int64) if self.pnode >= 0 else super().nodes


# ---------------------------------------------------------------------------
# python-level API


@dataclass
class SurfaceBasis:
    """Surface quantities at one parameter value (2D: one tangent direction)."""

    x: np.ndarray
    a_co: np.ndarray          # covariant tangent a_1
    a_contra: np.ndarray      # contravariant tangent a^1
    normal: np.ndarray
    metric: float             # a_11
    inv_metric: float         # a^11
    curvature: np.ndarray     # a_{1,1}
    A_co: np.ndarray          # reference tangent
    A_curvature: np.ndarray   # reference a_{1,1}
    nodes: np.ndarray
    N: np.ndarray
    dN: np.ndarray


@dataclass
class Projection:
    xi: float
    x_p: np.ndarray
    g_n_vec: np.ndarray
    g_n: float
    basis: SurfaceBasis
    J_cl: float
    patch: int
    surface: int
    clamped: bool


def _coords(x, X):
    x = np.ascontiguousarray(x, dtype=float).reshape(-1, 2)
    X = x.copy() if X is None else np.ascontiguousarray(X, dtype=float).reshape(-1, 2)
    return x, X


def evaluate_basis(surface: Surface, xi: float, x=None, X=None) -> SurfaceBasis:
    """Tangents, normal, metric and curvature of ``surface`` at ``xi``.

    ``x`` / ``X`` are the current / reference node coordinates (only needed
    for node-based surfaces and pseudo-nodes).
    """
    if x is None:
        x = np.zeros((max(1, int(surface.nodes.max(initial=-1)) + 1), 2))
    x, X = _coords(x, X)
    stype, ctrl, geo, pnode = surface.pack()
    out = np.empty(12)
    nodes = np.zeros(6, dtype=np.int64)
    N = np.zeros(6)
    dN = np.zeros(6)
    cnt = surf_eval(stype, ctrl, geo, pnode, x, X, float(xi), out, nodes, N, dN)
    a = out[2:4].copy()
    m = float(a @ a)
    if m <= 0.0 or not np.isfinite(m):
        raise DegenerateGeometryError("zero-length tangent")
    n = np.array([a[1], -a[0]]) / math.sqrt(m)
    return SurfaceBasis(x=out[0:2].copy(), a_co=a, a_contra=a / m, normal=n, metric=m,
                        inv_metric=1.0 / m, curvature=out[4:6].copy(), A_co=out[8:10].copy(),
                        A_curvature=out[10:12].copy(), nodes=nodes[:cnt].copy(),
                        N=N[:cnt].copy(), dN=dN[:cnt].copy())


def surface_stretch(basis: SurfaceBasis) -> float:
    """Ratio of current to reference arc length at the basis point."""
    L = float(np.linalg.norm(basis.A_co))
    if L == 0.0:
        raise DegenerateGeometryError("zero reference metric")
    return math.sqrt(basis.metric) / L


def curvature_corrected_metric(basis: SurfaceBasis, g_n: float) -> float:
    """Inverse of ``a_11 - g_n (n . a_{1,1})``."""
    d = basis.metric - g_n * float(basis.normal @ basis.curvature)
    if abs(d) <= 1e-14 * basis.metric:
        raise SingularCurvatureError("gap at the focal distance of the surface")
    return 1.0 / d


def closest_point_projection(x_k, surfaces, x=None, X=None, pad: float = _INF) -> Projection:
    """Project ``x_k`` onto a list of surfaces (or a single surface).

    Patches are numbered consecutively over the surfaces; the unclamped
    result with the smallest |g_n| wins and ties go to the lower patch id.
    Raises ``ProjectionError`` when no patch yields a foot point.
    """
    if isinstance(surfaces, Surface):
        surfaces = [surfaces]
    if x is None:
        hi = max(int(s.nodes.max(initial=-1)) for s in surfaces)
        x = np.zeros((max(hi + 1, 1), 2))
    x, X = _coords(x, X)
    xk = np.asarray(x_k, dtype=float)
    best = None
    offset = 0
    for sid, s in enumerate(surfaces):
        stype, ctrl, geo, pnode = s.pack()
        xi, g, flag, patch = project_kernel(xk, stype, ctrl, geo, pnode, x, X, pad)
        if flag != PROJ_FAILED:
            key = (flag, abs(g))
            if best is None or key < best[0]:
                best = (key, sid, xi, offset + patch)
        offset += s.n_patches
    if best is None:
        raise ProjectionError(f"no foot point found for {xk}")
    (flag, _), sid, xi, patch = best
    basis = evaluate_basis(surfaces[sid], xi, x, X)
    gv = xk - basis.x
    g = float(gv @ basis.normal)
    return Projection(xi=xi, x_p=basis.x, g_n_vec=gv, g_n=g, basis=basis,
                      J_cl=surface_stretch(basis), patch=patch, surface=sid,
                      clamped=flag == PROJ_CLAMPED)
