"""Two half-disc bodies sheared past each other with a fixed vertical overlap."""
from __future__ import annotations

import numpy as np

from ..contact import ContactPair
from ..fem.assembly import cauchy_stress
from ..geometry import BSplineSurface
from ..model import Model
from ..solver import LoadProgram, Stage, run
from .config import build_adhesion, build_law, build_material, build_solver
from .meshing import half_disc, maybe_perturb, point_reflect
from .results import ScenarioResult


def build_cylinders(cfg: dict):
    """Lower half-disc centred at the origin; the upper one is its point
    reflection, centred at ``(-R, (2 - overlap) R)`` before loading."""
    g = cfg["geometry"]
    R = float(g["R"])
    h = (2.0 - float(g["overlap"])) * R
    lower = maybe_perturb(half_disc(R, int(cfg["mesh"]["n"]), cfg["mesh"]["element"]), cfg["mesh"])
    upper = point_reflect(lower, (-0.5 * R, 0.5 * h))
    mat = build_material(cfg)
    model = Model()
    off1 = model.add_body(lower, mat)
    off2 = model.add_body(upper, mat)
    lw = cfg["law"]
    pair = model.add_pair(ContactPair(BSplineSurface(lower.sets["arc"].nodes + off1),
                                      BSplineSurface(upper.sets["arc"].nodes + off2),
                                      build_adhesion(cfg), build_law(cfg), eps_t=lw["eps_t"],
                                      use_stretch=lw["use_stretch"], name="cylinders"))
    info = {"R": R, "h": h, "off": (off1, off2), "n1": lower.n_nodes,
            "base1": lower.sets["base"].nodes + off1, "base2": upper.sets["base"].nodes + off2}
    return model, pair, info


def symmetry_error(f: np.ndarray, n1: int) -> float:
    """Relative violation of ``f_2[i] = -f_1[i]`` for point-symmetric node pairs."""
    F = f.reshape(-1, 2)
    a, b = F[:n1], F[n1:2 * n1]
    scale = max(np.abs(a).max(), np.abs(b).max(), 1e-300)
    return float(np.abs(a + b).max() / scale)


def symmetrize(U: np.ndarray, n1: int, shift: float) -> np.ndarray:
    """Nearest exactly point-symmetric displacement field.

    The upper body is the point reflection of the lower one, so symmetry
    about the moving centre requires ``u_2[i] = (shift, 0) - u_1[i]``.
    """
    V = U.reshape(-1, 2).copy()
    a, b = V[:n1], V[n1:2 * n1]
    s = np.array([shift, 0.0])
    lower = 0.5 * (a + s - b)
    V[:n1], V[n1:2 * n1] = lower, s - lower
    return V.reshape(-1)


def cylinders_program(cfg: dict, info: dict) -> LoadProgram:
    """Lower base clamped; upper base moved horizontally by ``u_max_R * R``."""
    ld = cfg["load"]
    u_max = float(ld["u_max_R"]) * info["R"]
    dirichlet = {}
    for nd in info["base1"]:
        dirichlet[2 * nd] = 0.0
        dirichlet[2 * nd + 1] = 0.0
    for nd in info["base2"]:
        dirichlet[2 * nd] = u_max
        dirichlet[2 * nd + 1] = 0.0
    return LoadProgram([Stage(dirichlet, n_steps=int(ld["n_steps"]), name="shear")])


def run_cylinders(cfg: dict) -> ScenarioResult:
    model, pair, info = build_cylinders(cfg)
    R, n1 = info["R"], info["n1"]
    ld = cfg["load"]
    base1, base2 = info["base1"], info["base2"]
    program = cylinders_program(cfg, info)
    body1 = model.bodies[0]
    X1 = body1.mesh.nodes
    corner = np.array([-R, 0.0])
    pos, _ = cauchy_stress(body1, np.zeros((n1, 2)))
    flat = pos.reshape(-1, 2)
    probe = int(np.argmin(np.linalg.norm(flat - corner, axis=1)))
    row = np.abs(pos[..., 1] - pos[..., 1].min()) < 1e-9
    res = ScenarioResult("cylinders")
    profile_u = float(ld["profile_u_R"]) * R
    tracked = {"profile_done": False, "max_sym": 0.0, "max_sym_u": 0.0}

    def on_step(st):
        u = float(st.u[2 * base2[0]])
        r = st.f_int + st.f_c - st.f_ext
        Fx = float(r[2 * base2].sum())
        Fy = float(r[2 * base2 + 1].sum())
        U = st.u.reshape(-1, 2)
        _, sig = cauchy_stress(body1, U[:n1])
        s_flat = sig.reshape(-1, 2, 2)
        x = X1 + U[:n1]
        x2 = model.X[n1:2 * n1] + U[n1:2 * n1]
        centre = np.array([0.5 * (u - R), 0.5 * info["h"]])
        sym_f = symmetry_error(st.f_c, n1)
        sym_x = float(np.abs(x + x2 - 2 * centre).max() / R)
        tracked["max_sym"] = max(tracked["max_sym"], sym_f)
        res.extra.setdefault("states", []).append((u, st.u.copy()))
        k = len(res.series.get("forces", {}).get("step", [])) + 1
        res.append("forces", {"step": k, "u": u, "u_R": u / R, "F_x": Fx, "F_y": Fy,
                              "F_x_lower": float(r[2 * base1].sum()),
                              "F_y_lower": float(r[2 * base1 + 1].sum()),
                              "sigma_yy_corner": float(s_flat[probe, 1, 1]),
                              "sym_force": sym_f, "sym_position": sym_x})
        stat = pair.last_statuses()
        res.append("contact", {"step": k, "u": u, "n_active": int(np.count_nonzero(stat != 0)),
                               "min_gap": float(min(np.min(hp.last.g) for hp in pair.passes))})
        res.append("energies", {"step": k, "u": u, "Pi_int": model.internal_energy(st.u)})
        if not tracked["profile_done"] and u >= profile_u - 1e-9:
            tracked["profile_done"] = True
            sel = row.reshape(-1)
            order = np.argsort(flat[sel, 0])
            res.summary["base_profile"] = {"u": u, "x": flat[sel, 0][order],
                                           "sigma_yy": s_flat[sel][order, 1, 1]}

    _, report = run(program, model, build_solver(cfg), on_step=on_step)
    res.reports.append(report)
    res.summary.update({"scenario": "cylinders", "R": R, "max_symmetry_error": tracked["max_sym"]})
    return res
