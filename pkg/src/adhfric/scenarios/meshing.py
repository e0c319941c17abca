"""Structured quadrilateral mesh generators for the scenario geometries."""
from __future__ import annotations

import math

import numpy as np

from ..fem.mesh import Mesh

_Q2_OFFSETS = [(0, 0), (2, 0), (2, 2), (0, 2), (1, 0), (2, 1), (1, 2), (0, 1), (1, 1)]
_Q1_OFFSETS = [(0, 0), (1, 0), (1, 1), (0, 1)]


def grid_mesh(P: np.ndarray, etype: str) -> Mesh:
    """Mesh from a node grid ``P (nj, ni, 2)`` with ``s`` along ``i``, ``t`` along ``j``.

    The grid must be right-handed. Node sets ``bottom``, ``right``, ``top``
    and ``left`` are emitted counterclockwise (body on the left) and the
    ``boundary`` set is the closed counterclockwise loop.
    """
    nj, ni, _ = P.shape
    step = 2 if etype == "Q2" else 1
    if (ni - 1) % step or (nj - 1) % step:
        raise ValueError("Q2 grids need an odd number of nodes per direction")
    nid = np.arange(nj * ni).reshape(nj, ni)
    offs = _Q2_OFFSETS if etype == "Q2" else _Q1_OFFSETS
    elems = []
    for j in range(0, nj - 1, step):
        for i in range(0, ni - 1, step):
            elems.append([nid[j + dj, i + di] for di, dj in offs])
    mesh = Mesh(P.reshape(-1, 2), np.array(elems, dtype=np.int64), etype)
    mesh.add_set("bottom", "other", nid[0, :])
    mesh.add_set("right", "other", nid[:, -1])
    mesh.add_set("top", "other", nid[-1, ::-1])
    mesh.add_set("left", "other", nid[::-1, 0])
    return mesh


def coons(bottom, right, top, left, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Transfinite interpolation of four boundary curves on parameters ``s, t``.

    ``bottom(s)`` and ``top(s)`` run left to right, ``left(t)`` and
    ``right(t)`` bottom to top; all map [0, 1] into the plane.
    """
    S, T = np.meshgrid(s, t)
    B = np.array([bottom(v) for v in s])[None, :, :]
    Tp = np.array([top(v) for v in s])[None, :, :]
    Lf = np.array([left(v) for v in t])[:, None, :]
    Rt = np.array([right(v) for v in t])[:, None, :]
    S = S[..., None]
    T = T[..., None]
    c00, c10 = np.asarray(bottom(0.0)), np.asarray(bottom(1.0))
    c01, c11 = np.asarray(top(0.0)), np.asarray(top(1.0))
    return ((1 - T) * B + T * Tp + (1 - S) * Lf + S * Rt
            - ((1 - S) * (1 - T) * c00 + S * (1 - T) * c10 + (1 - S) * T * c01 + S * T * c11))


def graded(n: int, ratio: float = 1.0, symmetric: bool = False) -> np.ndarray:
    """``n + 1`` points on [0, 1]; ``ratio`` = last / first spacing.

    With ``symmetric`` the spacing is mirrored about 0.5 and ``ratio`` is
    the centre / end spacing.
    """
    if symmetric:
        if n % 2:
            raise ValueError("symmetric grading needs an even count")
        half = graded(n // 2, ratio)
        return np.concatenate([0.5 * half, 0.5 + 0.5 * (1 - half[::-1])[1:]])
    if n < 1:
        raise ValueError("need at least one interval")
    if abs(ratio - 1.0) < 1e-12:
        return np.linspace(0.0, 1.0, n + 1)
    q = ratio ** (1.0 / max(n - 1, 1))
    h = q ** np.arange(n)
    return np.concatenate([[0.0], np.cumsum(h) / h.sum()])


def refine_params(p: np.ndarray, etype: str) -> np.ndarray:
    """Insert mid-points for Q2 grids."""
    if etype == "Q1":
        return p
    out = np.empty(2 * p.size - 1)
    out[0::2] = p
    out[1::2] = 0.5 * (p[:-1] + p[1:])
    return out


def rectangle(x0: float, y0: float, width: float, height: float, nx: int, ny: int,
              etype: str = "Q1") -> Mesh:
    s = refine_params(np.linspace(0, 1, nx + 1), etype)
    t = refine_params(np.linspace(0, 1, ny + 1), etype)
    S, T = np.meshgrid(s, t)
    P = np.stack([x0 + width * S, y0 + height * T], axis=-1)
    return grid_mesh(P, etype)


def half_disc(R: float, n: int, etype: str = "Q1") -> Mesh:
    """Upper half-disc of radius ``R`` centred at the origin, flat base on y = 0.

    Coons patch with the base as bottom edge and the arc split into three
    edges of 45, 90 and 45 degrees; ``n`` elements on each 45 degree edge
    (2n along the base and the middle arc). Sets: ``base`` (left to right)
    and ``arc`` (counterclockwise, from (R, 0) to (-R, 0)).
    """
    q = math.pi / 4

    def arc(a):
        return np.array([R * math.cos(a), R * math.sin(a)])

    s = refine_params(np.linspace(0, 1, 2 * n + 1), etype)
    t = refine_params(np.linspace(0, 1, n + 1), etype)
    P = coons(lambda v: np.array([-R + 2 * R * v, 0.0]), lambda v: arc(q * v),
              lambda v: arc(3 * q - 2 * q * v), lambda v: arc(math.pi - q * v), s, t)
    mesh = grid_mesh(P, etype)
    ns = mesh.sets
    arc_nodes = np.concatenate([ns["right"].nodes, ns["top"].nodes[1:], ns["left"].nodes[1:]])
    mesh.add_set("base", "dirichlet", ns["bottom"].nodes)
    mesh.add_set("arc", "contact", arc_nodes)
    return mesh


def circular_segment(chord: float, height: float, n_s: int, n_t: int, etype: str = "Q1",
                     side_angle: float = 0.25, ratio_s: float = 1.0, ratio_t: float = 1.0) -> Mesh:
    """Circular segment (cap) with its chord on y = 0 and apex at (0, height).

    The arc is split into two side edges covering ``side_angle`` of the half
    opening angle each and a top edge. ``ratio_s`` is the end / centre
    spacing ratio along the top edge, ``ratio_t`` the bottom / top spacing
    ratio through the height. Sets: ``base`` (chord) and ``arc``
    (counterclockwise from the right chord end to the left one).
    """
    Rc = (chord**2 / 4 + height**2) / (2 * height)
    yc = height - Rc
    half = math.asin(chord / (2 * Rc)) if chord < 2 * Rc else math.pi / 2
    if height > Rc:
        half = math.pi - math.asin(chord / (2 * Rc))
    a_r0 = math.pi / 2 - half
    a_r1 = a_r0 + side_angle * half
    a_l1 = math.pi / 2 + half
    a_l0 = a_l1 - side_angle * half

    def arc(a):
        return np.array([Rc * math.cos(a), yc + Rc * math.sin(a)])

    s_top = graded(2 * n_s, 1.0 / ratio_s, symmetric=True) if ratio_s != 1.0 else np.linspace(0, 1, 2 * n_s + 1)
    s = refine_params(s_top, etype)
    t = refine_params(graded(n_t, 1.0 / ratio_t), etype)
    P = coons(lambda v: np.array([-chord / 2 + chord * v, 0.0]),
              lambda v: arc(a_r0 + (a_r1 - a_r0) * v),
              lambda v: arc(a_l0 + (a_r1 - a_l0) * v),
              lambda v: arc(a_l1 - (a_l1 - a_l0) * v), s, t)
    mesh = grid_mesh(P, etype)
    ns = mesh.sets
    arc_nodes = np.concatenate([ns["right"].nodes, ns["top"].nodes[1:], ns["left"].nodes[1:]])
    mesh.add_set("base", "dirichlet", ns["bottom"].nodes)
    mesh.add_set("arc", "contact", arc_nodes)
    mesh.check_jacobians()
    return mesh


def point_reflect(mesh: Mesh, center) -> Mesh:
    """Copy of ``mesh`` rotated by 180 degrees about ``center`` (orientation kept)."""
    c = np.asarray(center, dtype=float)
    out = Mesh(2.0 * c - mesh.nodes, mesh.elements.copy(), mesh.etype)
    for name, ns in mesh.sets.items():
        out.add_set(name, ns.kind, ns.nodes.copy())
    return out


def perturb_interior(mesh: Mesh, seed: int, fraction: float = 0.1) -> Mesh:
    """Copy with nodes outside every node set jittered by up to ``fraction``
    of the shortest element edge, reproducibly from ``seed``."""
    rng = np.random.default_rng(seed)
    nodes = mesh.nodes.copy()
    ids = np.arange(len(nodes))
    on_set = np.zeros(len(nodes), dtype=bool)
    for ns in mesh.sets.values():
        on_set[ns.nodes] = True
    corners = mesh.elements[:, :4]
    P = nodes[corners]
    h = np.linalg.norm(P - np.roll(P, 1, axis=1), axis=2).min()
    free = ids[~on_set]
    nodes[free] += rng.uniform(-fraction * h, fraction * h, size=(free.size, 2))
    out = Mesh(nodes, mesh.elements.copy(), mesh.etype)
    for name, ns in mesh.sets.items():
        out.add_set(name, ns.kind, ns.nodes.copy())
    out.check_jacobians()
    return out


def maybe_perturb(mesh: Mesh, mesh_cfg: dict) -> Mesh:
    seed = mesh_cfg.get("seed")
    if seed is None:
        return mesh
    return perturb_interior(mesh, int(seed), float(mesh_cfg.get("perturbation", 0.1)))
