"""Deformable cylindrical cap pressed and sheared by a rigid flat plate."""
from __future__ import annotations

import copy
import logging
import math

import numpy as np
from scipy.optimize import brentq

from ..contact import FAR, SLIDE, ContactPair
from ..geometry import (PROJ_OK, BSplineSurface, RigidLine, bspline2_basis, evaluate_basis,
                        project_kernel)
from ..model import Model
from ..solver import LoadProgram, Stage, run
from .config import build_adhesion, build_law, build_material, build_solver
from .fits import FitError, fit_beta, fit_eta, fit_quadratic_xi
from .meshing import circular_segment, maybe_perturb
from .results import ScenarioResult

log = logging.getLogger(__name__)


def build_cap(cfg: dict):
    """Cap body plus a rigid plate pseudo-node placed ``g_eq`` above the apex."""
    g = cfg["geometry"]
    m = cfg["mesh"]
    mesh = circular_segment(float(g["chord"]), float(g["height"]), int(m["n_s"]), int(m["n_t"]),
                            m["element"], float(m["side_angle"]), float(m["ratio_s"]),
                            float(m["ratio_t"]))
    mesh = maybe_perturb(mesh, m)
    ad = build_adhesion(cfg)
    model = Model()
    model.add_body(mesh, build_material(cfg))
    arc = BSplineSurface(mesh.sets["arc"].nodes)
    xs = np.linspace(0.0, arc.n_patches, 40 * arc.n_patches + 1)
    ys = [evaluate_basis(arc, v, mesh.nodes).x[1] for v in xs]
    j = int(np.argmax(ys))
    lo, hi = xs[max(j - 1, 0)], xs[min(j + 1, xs.size - 1)]
    res = brentq(lambda v: evaluate_basis(arc, v, mesh.nodes).a_co[1], lo, hi) \
        if evaluate_basis(arc, lo, mesh.nodes).a_co[1] * evaluate_basis(arc, hi, mesh.nodes).a_co[1] < 0 else xs[j]
    apex = evaluate_basis(arc, res, mesh.nodes).x
    y_plate = float(apex[1] + ad.g_eq)
    plate = model.add_pseudo_node([0.0, y_plate])
    lw = cfg["law"]
    pair = model.add_pair(ContactPair(arc, RigidLine([0.0, y_plate], [0.0, -1.0], pnode=plate),
                                      ad, build_law(cfg), eps_t=lw["eps_t"],
                                      use_stretch=lw["use_stretch"], name="cap"))
    return model, pair, plate, mesh


def _gap_fn(pair: ContactPair, x: np.ndarray, X: np.ndarray):
    hp = pair.passes[0]
    stype, ctrl, geo, pnode = hp.l_pack
    m = hp.k.n_patches
    N = np.empty(3)
    dN = np.empty(3)
    dd = np.empty(3)

    def g(xi: float) -> float:
        j = bspline2_basis(xi, m, N, dN, dd)
        xk = N @ x[hp.k.ctrl[j:j + 3]]
        v, gap, flag, _ = project_kernel(xk, stype, ctrl, geo, pnode, x, X, 1e300)
        return gap if flag == PROJ_OK else np.inf

    def pos(xi: float, y: np.ndarray = x) -> np.ndarray:
        j = bspline2_basis(xi, m, N, dN, dd)
        return N @ y[hp.k.ctrl[j:j + 3]]

    return g, pos


def contact_extent(pair: ContactPair, x: np.ndarray, X: np.ndarray, g_area: float):
    """Contact span of points with g < g_area.

    Returns ``(L_c, x_left, x_right, L_ref)``: the current length and edge
    positions, and the reference (material) length of the same span.
    Brackets come from the quadrature-point gaps; the two ends are refined
    by root finding on the smooth surface.
    """
    hp = pair.passes[0]
    r = hp.last
    g = np.where(np.isfinite(r.g), r.g, np.inf)
    inside = np.flatnonzero(g < g_area)
    if inside.size == 0:
        return 0.0, float("nan"), float("nan"), 0.0
    gfun, pos = _gap_fn(pair, x, X)
    xi = hp.xi_k
    i0, i1 = inside[0], inside[-1]
    f = lambda v: gfun(v) - g_area  # noqa: E731
    a = brentq(f, xi[i0 - 1], xi[i0], xtol=1e-14) if i0 > 0 else xi[i0]
    b = brentq(f, xi[i1], xi[i1 + 1], xtol=1e-14) if i1 + 1 < xi.size else xi[i1]
    pa, pb = pos(a), pos(b)
    Pa, Pb = pos(a, X), pos(b, X)
    return (float(abs(pa[0] - pb[0])), float(min(pa[0], pb[0])), float(max(pa[0], pb[0])),
            float(abs(Pa[0] - Pb[0])))


def sliding_state(pair: ContactPair, g_area: float) -> tuple[bool, int]:
    """(every in-contact point slides, number of in-contact points)."""
    r = pair.passes[0].last
    inside = np.isfinite(r.g) & (r.g < g_area) & (r.status != FAR)
    n = int(inside.sum())
    return bool(n > 0 and np.all(r.status[inside] == SLIDE)), n


def _program(cfg: dict, model: Model, pair: ContactPair, plate: int, base: np.ndarray,
             F_n: float | None):
    """Press with weakened adhesion, restore it with the plate held, then
    switch the plate to force control and shear.

    Continuation in the adhesion strength avoids the jump-to-contact
    instability of a soft cap approached by a strongly adhesive plate. With
    ``frictionless_approach`` the normal stages run without friction and the
    tangential law is switched on, freshly anchored, at the start of shear.
    """
    ld = cfg["load"]
    law = build_law(cfg)
    if ld["frictionless_approach"]:
        pair.set_law(None)

    def start_shear(u):
        if ld["frictionless_approach"]:
            pair.set_law(law)
            model.initialize_contact(u)

    fixed = {}
    for nd in base:
        fixed[2 * nd] = 0.0
        fixed[2 * nd + 1] = 0.0
    px, py = 2 * plate, 2 * plate + 1
    s0 = float(ld["adhesion_start"])
    press = {**fixed, px: 0.0, py: -float(ld["indent"])}
    stages = [Stage(press, n_steps=int(ld["n_indent"]), name="indent",
                    ramp=lambda lam: pair.set_adhesion_scale(s0)),
              Stage(press, n_steps=int(ld["n_adhere"]), name="adhere",
                    ramp=lambda lam: pair.set_adhesion_scale(s0 ** (1.0 - lam)))]
    if F_n is not None:
        stages.append(Stage({**fixed, px: 0.0}, {py: -F_n}, n_steps=int(ld["n_normal"]),
                            name="normal"))
        stages.append(Stage({**fixed, px: float(ld["u_max"])}, {py: -F_n},
                            n_steps=int(ld["n_shear"]), name="shear", setup=start_shear))
    return LoadProgram(stages)


def run_cap_load(cfg: dict, F_n: float, res: ScenarioResult | None = None, tag: str = ""):
    """One normal load: indent, switch to force control at ``F_n``, then shear.

    ``F_n`` is positive in compression. Returns the per-step records of the
    shear stage and a summary dict; rows are also appended to ``res``.
    """
    model, pair, plate, mesh = build_cap(cfg)
    ad = pair.adhesion
    X = model.X
    base = mesh.sets["base"].nodes
    ld = cfg["load"]
    program = _program(cfg, model, pair, plate, base, F_n)
    px, py = 2 * plate, 2 * plate + 1
    rows: list[dict] = []
    info = {"F_n": F_n, "tag": tag, "full_sliding": False, "L_c0": float("nan")}

    def on_step(st):
        x = model.current(st.u)
        L_c, xl, xr, L_ref = contact_extent(pair, x, X, ad.g_area)
        full, n_in = sliding_state(pair, ad.g_area)
        Ft = float(st.f_c[px])
        Fn = float(-st.f_c[py])
        stage = program.stages[st.stage].name
        row = {"load": tag, "F_n_target": F_n, "stage": stage, "lam": st.lam,
               "u": float(st.u[px]), "v": float(st.u[py]), "F_t": Ft, "F_n": Fn, "L_c": L_c,
               "L_c_ref": L_ref, "x_left": xl, "x_right": xr, "n_contact": n_in, "full_sliding": full}
        rows.append(row)
        if res is not None:
            res.append("forces", {k: row[k] for k in ("load", "F_n_target", "stage", "u", "v",
                                                       "F_t", "F_n")})
            res.append("contact", {k: row[k] for k in ("load", "F_n_target", "stage", "u", "L_c",
                                                        "L_c_ref", "x_left", "x_right", "n_contact",
                                                        "full_sliding")})
            res.append("energies", {"load": tag, "stage": stage, "u": row["u"],
                                    "Pi_int": model.internal_energy(st.u)})
        if stage == "normal" and st.lam >= 1.0:
            info["L_c0"] = L_c
        if stage == "shear" and full:
            info["full_sliding"] = True
            if ld["stop_at_full_sliding"]:
                return True
        return None

    _, report = run(program, model, build_solver(cfg), on_step=on_step)
    if res is not None:
        res.reports.append(report)
    shear = [r for r in rows if r["stage"] == "shear"]
    normal = [r for r in rows if r["stage"] == "normal"]
    info.update({"converged": report.converged, "failure_reason": report.failure_reason,
                 "failure_stage": (program.stages[report.failure_stage].name
                                   if report.failure_stage is not None else None),
                 "last_L_c": rows[-1]["L_c"] if rows else float("nan"),
                 "n_shear_steps": len(shear)})
    if normal and math.isnan(info["L_c0"]):
        info["L_c0"] = normal[-1]["L_c"]
    if shear:
        last = shear[-1]
        info["F_t_final"] = last["F_t"]
        info["L_c_final"] = last["L_c"]
        info["tau_L_c"] = float(pair.law.tau * last["L_c"]) if hasattr(pair.law, "tau") else None
    return rows, info, report


def stable_prefix(rows: list[dict], L_c0: float) -> int:
    """Number of shear rows before the contact length first grows again.

    Past a detachment limit point the solver may land on a re-attached
    branch; the rows from there on do not continue the stable path.
    """
    last = L_c0
    for i, r in enumerate(rows):
        if r["L_c"] > last:
            return i
        last = r["L_c"]
    return len(rows)


def analyse_load(rows: list[dict], info: dict) -> dict:
    """Quadratic and power-law fits of the shear stage before full sliding.

    For runs that end without convergence only the stable prefix enters the
    fits; otherwise every pre-sliding row does, so a non-monotone curve
    shows up in ``monotone``.
    """
    shear = [r for r in rows if r["stage"] == "shear" and not r["full_sliding"]]
    out = {}
    L0 = info["L_c0"]
    n_stable = stable_prefix(shear, L0)
    out["last_stable_L_c"] = shear[n_stable - 1]["L_c"] if n_stable else L0
    if not info.get("converged", True):
        shear = shear[:n_stable]
    F = np.array([0.0] + [r["F_t"] for r in shear])
    L = np.array([L0] + [r["L_c"] for r in shear])
    out["monotone"] = bool(L.size >= 2 and np.all(np.diff(L) < 0) and np.all(np.diff(F) > 0))
    try:
        q = fit_quadratic_xi(L, F)
        out.update({"fit_L_c0": q.L_c0, "xi": q.xi, "r2": q.r2})
    except FitError as exc:
        out.update({"fit_L_c0": float("nan"), "xi": float("nan"), "r2": float("nan"),
                    "fit_error": str(exc)})
    try:
        e = fit_eta(L[1:], F[1:], L0)
        out.update({"eta": e.exponent, "eta_r2": e.r2})
    except FitError as exc:
        out.update({"eta": float("nan"), "eta_r2": float("nan"), "eta_error": str(exc)})
    return out


def indentation_sweep(cfg: dict, depth: float, n_steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Frictionless displacement-controlled indentation; returns (F_n, L_c)."""
    model, pair, plate, mesh = build_cap(cfg)
    pair.set_law(None)
    X = model.X
    base = mesh.sets["base"].nodes
    fixed = {}
    for nd in base:
        fixed[2 * nd] = 0.0
        fixed[2 * nd + 1] = 0.0
    px, py = 2 * plate, 2 * plate + 1
    program = LoadProgram([Stage({**fixed, px: 0.0, py: -depth}, n_steps=n_steps, name="sweep")])
    F, L = [], []

    def on_step(st):
        F.append(float(-st.f_c[py]))
        L.append(contact_extent(pair, model.current(st.u), X, pair.adhesion.g_area)[0])

    run(program, model, build_solver(cfg), on_step=on_step)
    return np.array(F), np.array(L)


def match_normal_force(F: np.ndarray, L: np.ndarray, L_target: float) -> float:
    """Normal force at which a sweep reaches ``L_target`` (linear interpolation)."""
    order = np.argsort(L)
    Ls, Fs = L[order], F[order]
    if not Ls[0] <= L_target <= Ls[-1]:
        raise ValueError(f"target contact length {L_target:.4g} outside the sweep "
                         f"[{Ls[0]:.4g}, {Ls[-1]:.4g}]")
    return float(np.interp(L_target, Ls, Fs))


def nonadhesive_config(cfg: dict) -> dict:
    """Copy of ``cfg`` with the attraction removed and friction kept."""
    out = copy.deepcopy(cfg)
    out["law"]["nonadhesive"] = True
    return out


def _load_summary(res: ScenarioResult, cfg: dict, Fn: float, tag: str) -> dict:
    rows, info, _ = run_cap_load(cfg, Fn, res, tag=tag)
    info.update(analyse_load(rows, info))
    return info


def run_cap(cfg: dict) -> ScenarioResult:
    """Load ladder with fits, detachment probes and matched non-adhesive runs.

    The ladder gives one indent / adhere / normal / shear run per ``F_n``,
    the quadratic reduction parameter ``xi`` and exponent ``eta`` per load,
    and ``beta`` over loads. Loads in ``detach_F_n`` are expected to end by
    non-convergence during shear; their last stable contact length is
    reported. With ``match_nonadhesive`` each ladder load gets a
    non-adhesive partner with the same initial contact length.
    """
    ld = cfg["load"]
    res = ScenarioResult("cap")
    loads = [_load_summary(res, cfg, float(Fn), f"L{i}") for i, Fn in enumerate(ld["F_n"])]
    res.summary["scenario"] = "cap"
    res.summary["loads"] = loads
    good = [l for l in loads if l.get("converged") and np.isfinite(l.get("xi", np.nan))
            and l.get("xi", 0) > 0]
    res.summary["eta"] = [l.get("eta") for l in loads]
    if len(good) >= 3:
        try:
            b = fit_beta([l["L_c0"] for l in good], [l["xi"] for l in good])
            res.summary["beta"] = b.exponent
            res.summary["beta_r2"] = b.r2
        except FitError as exc:
            res.summary["beta_error"] = str(exc)
    probes = [_load_summary(res, cfg, float(Fn), f"D{i}")
              for i, Fn in enumerate(ld.get("detach_F_n", []))]
    probes += [l for l in loads if not l.get("converged")]
    res.summary["detachment"] = [{"F_n": l["F_n"], "converged": l["converged"],
                                  "stage": l["failure_stage"],
                                  "last_stable_L_c": l["last_stable_L_c"]} for l in probes]
    if ld.get("match_nonadhesive"):
        na_cfg = nonadhesive_config(cfg)
        F, L = indentation_sweep(na_cfg, float(ld["sweep_depth"]), int(ld["n_sweep"]))
        pairs = []
        for i, l in enumerate(good):
            Fn = match_normal_force(F, L, l["L_c0"])
            na = _load_summary(res, na_cfg, Fn, f"N{i}")
            pairs.append({"F_n_adhesive": l["F_n"], "L_c0_adhesive": l["L_c0"],
                          "xi_adhesive": l["xi"], "F_n_nonadhesive": Fn,
                          "L_c0_nonadhesive": na["L_c0"], "xi_nonadhesive": na["xi"],
                          "r2_nonadhesive": na["r2"], "converged": na["converged"]})
        res.summary["nonadhesive"] = pairs
    # detachment probes end by design; any other failed run is a solver failure
    res.failed = any(not l["converged"] for l in loads) or \
        any(not p["converged"] for p in res.summary.get("nonadhesive", []))
    return res
