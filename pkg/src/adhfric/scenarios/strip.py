"""Peeling of an elastic strip from a rigid flat substrate."""
from __future__ import annotations

import numpy as np

from ..contact import FAR, STICK, ContactPair
from ..geometry import BSplineSurface, RigidLine
from ..model import Model
from ..solver import LoadProgram, Stage, run
from .config import build_adhesion, build_law, build_material, build_solver
from .meshing import maybe_perturb, rectangle
from .results import ScenarioResult


def build_strip(cfg: dict):
    """Model, contact pair and the driven node of the strip set-up.

    The strip's lower face starts at ``g_eq`` above the substrate, so the
    normal traction is initially zero everywhere.
    """
    ad = build_adhesion(cfg)
    law = build_law(cfg)
    g = cfg["geometry"]
    m = cfg["mesh"]
    mesh = rectangle(0.0, ad.g_eq, g["length"], g["height"], m["nx"], m["ny"], m["element"])
    mesh = maybe_perturb(mesh, m)
    model = Model()
    model.add_body(mesh, build_material(cfg))
    lw = cfg["law"]
    pair = model.add_pair(ContactPair(BSplineSurface(mesh.sets["bottom"].nodes),
                                      RigidLine([0.0, 0.0], [0.0, 1.0]), ad, law,
                                      eps_t=lw["eps_t"], use_stretch=lw["use_stretch"], name="strip"))
    right = mesh.sets["right"].nodes
    driven = int(right[len(right) // 2])
    return model, pair, driven


def peel_lengths(pair: ContactPair, X: np.ndarray, g_area: float) -> tuple[float, float, float]:
    """(L_peel, L_slide, contact length), nominal lengths along the strip face.

    The peel front is where the gap, scanned from the free (right) end,
    first drops to ``g_area``; it is located by linear interpolation
    between quadrature points.
    """
    hp = pair.passes[0]
    r = hp.last
    Xq = np.einsum("pa,pa->p", hp.kN, X[hp.kn, 0])
    dA = hp.kw * np.abs(np.einsum("pa,pa->p", hp.kdN, X[hp.kn, 0]))
    L0 = float(dA.sum())
    x_end = float(X[hp.k.ctrl[-1], 0])
    g = np.where(np.isfinite(r.g), r.g, np.inf)
    attached = np.flatnonzero(g <= g_area)
    if attached.size == 0:
        front = float(X[hp.k.ctrl[0], 0])
    else:
        i = attached[-1]
        if i + 1 < len(g) and np.isfinite(g[i + 1]):
            w = (g_area - g[i]) / (g[i + 1] - g[i])
            front = Xq[i] + w * (Xq[i + 1] - Xq[i])
        elif i + 1 < len(g):
            front = Xq[i]
        else:
            front = x_end
    L_peel = max(0.0, x_end - front)
    stick = (r.status == STICK)
    L_slide = L0 - float(dA[stick].sum())
    L_c = float(dA[(g <= g_area) & (r.status != FAR)].sum())
    return L_peel, L_slide, L_c


def fracture_energy(L_peel: np.ndarray, dPi: np.ndarray,
                    min_spacing: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference d(dPi)/dL_peel after monotone re-indexing by L_peel.

    Samples closer than ``min_spacing`` to the previously kept one are
    dropped, which suppresses the jitter of a front advancing node by node.
    """
    L = np.asarray(L_peel, dtype=float)
    P = np.asarray(dPi, dtype=float)
    keep = []
    best = -np.inf
    for i, v in enumerate(L):
        if v > best + max(min_spacing, 1e-9):
            keep.append(i)
            best = v
    L = L[keep]
    P = P[keep]
    if L.size < 3:
        return L[:0], L[:0]
    G = (P[2:] - P[:-2]) / (L[2:] - L[:-2])
    return L[1:-1], G


def strip_program(cfg: dict, driven: int) -> LoadProgram:
    """Vertical ramp of the driven node with its horizontal position held."""
    ld = cfg["load"]
    return LoadProgram([Stage({2 * driven: 0.0, 2 * driven + 1: float(ld["u_max"])},
                              n_steps=int(ld["n_steps"]), name="peel")])


def run_strip(cfg: dict) -> ScenarioResult:
    model, pair, driven = build_strip(cfg)
    ad = pair.adhesion
    X = model.X
    dof_x, dof_y = 2 * driven, 2 * driven + 1
    program = strip_program(cfg, driven)
    res = ScenarioResult("strip")
    state = {"Pi_ext": 0.0, "u": 0.0, "F": 0.0}
    res.append("forces", {"step": 0, "u": 0.0, "F_x": 0.0, "F_y": 0.0})
    res.append("contact", {"step": 0, "u": 0.0, "L_peel": 0.0, "L_slide": 0.0,
                           "L_c": float(pair.passes[0].kw.sum() * cfg["geometry"]["length"]
                                        / pair.passes[0].k.n_patches)})
    res.append("energies", {"step": 0, "u": 0.0, "Pi_ext": 0.0, "Pi_int": 0.0, "dPi": 0.0})

    def on_step(st):
        u = float(st.u[dof_y])
        r = st.f_int + st.f_c - st.f_ext
        Fx, Fy = float(r[dof_x]), float(r[dof_y])
        state["Pi_ext"] += 0.5 * (Fy + state["F"]) * (u - state["u"])
        state["u"], state["F"] = u, Fy
        Pi_int = model.internal_energy(st.u)
        Lp, Ls, Lc = peel_lengths(pair, X, ad.g_area)
        k = len(res.series["forces"]["step"])
        res.append("forces", {"step": k, "u": u, "F_x": Fx, "F_y": Fy})
        res.append("contact", {"step": k, "u": u, "L_peel": Lp, "L_slide": Ls, "L_c": Lc})
        res.append("energies", {"step": k, "u": u, "Pi_ext": state["Pi_ext"], "Pi_int": Pi_int,
                                "dPi": state["Pi_ext"] - Pi_int})

    _, report = run(program, model, build_solver(cfg), on_step=on_step)
    res.reports.append(report)
    spacing = 2.0 * cfg["geometry"]["length"] / cfg["mesh"]["nx"]
    Lg, G = fracture_energy(res.column("contact", "L_peel"), res.column("energies", "dPi"), spacing)
    res.extra["gamma"] = (Lg, G)
    res.summary.update({"scenario": "strip", "W_adh": ad.W_adh, "T_max": ad.T_max,
                        "gamma_steady": steady_gamma(Lg, G)})
    return res


def steady_gamma(L: np.ndarray, G: np.ndarray, window=(0.4, 0.9)) -> dict:
    """Mean and relative spread of the fracture energy over a window of the peel range."""
    if L.size < 3:
        return {"mean": float("nan"), "rel_std": float("nan"), "n": 0}
    lo = L.min() + window[0] * (L.max() - L.min())
    hi = L.min() + window[1] * (L.max() - L.min())
    sel = (L >= lo) & (L <= hi)
    if not np.any(sel):
        return {"mean": float("nan"), "rel_std": float("nan"), "n": 0}
    g = G[sel]
    return {"mean": float(g.mean()), "rel_std": float(g.std() / abs(g.mean())), "n": int(sel.sum())}
