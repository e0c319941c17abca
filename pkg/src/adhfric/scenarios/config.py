"""Scenario configuration: defaults, strict merging and object construction.

A configuration is a nested JSON object. Every block is optional except
``scenario`` and ``material``; omitted keys take the scenario defaults
below and unknown keys are rejected.
"""
from __future__ import annotations

import copy
import json
from pathlib import Path

from ..fem.material import NEARLY_INCOMPRESSIBLE, STANDARD, Material
from ..laws import DI, EA, AdhesionParams, DomainError, Frictionless, equivalent_mu_DI
from ..solver import SolverConfig


class ConfigError(ValueError):
    pass


LAW_CHOICES = ("di", "ea", "frictionless", "nonadhesive-di")

_LAW = {
    "type": "frictionless",
    "mu": None,            # DI: tau = mu T_max; EA: friction coefficient
    "tau": None,           # DI: explicit sliding traction
    "mu_ea_equivalent": None,  # DI: map an EA coefficient onto mu
    "g_cut": None,
    "k": None,
    "s_cut": 1.0,
    "eps_t": 50.0,
    "use_stretch": True,
    "nonadhesive": False,
}
_ADHESION = {"A_H": None, "r0": None, "T_max": None, "W_adh": None, "g_far": None, "g_area": None}
_SOLVER = {"tol": 1e-8, "max_iter": 30, "max_cuts": 6, "freeze_tol": 1e-2, "line_search": 8}
# interior-node jitter as a fraction of the shortest element edge; seed None = off
_PERTURB = {"seed": None, "perturbation": 0.1}
_OUTPUT = {"dir": "out"}

DEFAULTS = {
    "strip": {
        "scenario": "strip",
        "geometry": {"length": 150.0, "height": 7.5},
        "mesh": {"nx": 80, "ny": 4, "element": "Q2", **_PERTURB},
        "material": {"E": 1.0, "nu": 0.2, "variant": STANDARD},
        "adhesion": dict(_ADHESION, A_H=0.05, r0=0.4),
        "law": dict(_LAW),
        "load": {"u_max": 60.0, "n_steps": 240},
        "solver": dict(_SOLVER),
        "output": dict(_OUTPUT),
    },
    "cylinders": {
        "scenario": "cylinders",
        "geometry": {"R": 40.0, "overlap": 0.25},
        "mesh": {"n": 14, "element": "Q1", **_PERTURB},
        "material": {"E": 1.0, "nu": 0.3, "variant": STANDARD},
        "adhesion": dict(_ADHESION, A_H=0.0254, r0=0.4),
        "law": dict(_LAW, use_stretch=False),
        "load": {"u_max_R": 2.0, "n_steps": 160, "profile_u_R": 0.5},
        "solver": dict(_SOLVER),
        "output": dict(_OUTPUT),
    },
    "cap": {
        "scenario": "cap",
        "geometry": {"chord": 53.4, "height": 10.0},
        "mesh": {"n_s": 100, "n_t": 25, "ratio_s": 6.0, "ratio_t": 8.0, "side_angle": 0.25,
                 "element": "Q1", **_PERTURB},
        "material": {"E": 1.0, "nu": 0.49, "variant": NEARLY_INCOMPRESSIBLE},
        "adhesion": dict(_ADHESION, T_max=0.165, W_adh=0.0135),
        "law": dict(_LAW, type="di", mu=1.0),
        "load": {"F_n": [0.3, 0.1, 0.0, -0.1, -0.2], "indent": 0.3, "n_indent": 6,
                 "adhesion_start": 0.05, "n_adhere": 12, "n_normal": 12, "u_max": 4.0, "n_shear": 80, "stop_at_full_sliding": True,
                 "frictionless_approach": True, "detach_F_n": [-0.36],
                 "match_nonadhesive": True, "sweep_depth": 1.5, "n_sweep": 30},
        "solver": dict(_SOLVER),
        "output": dict(_OUTPUT),
    },
}

REQUIRED = ("scenario", "material")


def _merge(defaults: dict, user: dict, where: str) -> dict:
    out = copy.deepcopy(defaults)
    for key, val in user.items():
        path = f"{where}.{key}" if where else key
        if key not in defaults:
            raise ConfigError(f"unknown key '{path}'")
        if isinstance(defaults[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"'{path}' must be an object")
            out[key] = _merge(defaults[key], val, path)
        else:
            out[key] = val
    return out


def default_config(scenario: str) -> dict:
    if scenario not in DEFAULTS:
        raise ConfigError(f"unknown scenario '{scenario}'")
    return copy.deepcopy(DEFAULTS[scenario])


def parse_config(doc: dict, require_blocks: bool = True) -> dict:
    """Validate a user document against the scenario schema and fill defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    if require_blocks:
        for key in REQUIRED:
            if key not in doc:
                raise ConfigError(f"missing required block '{key}'")
    scenario = doc.get("scenario")
    if scenario not in DEFAULTS:
        raise ConfigError(f"unknown scenario '{scenario}'")
    cfg = _merge(DEFAULTS[scenario], doc, "")
    validate(cfg)
    return cfg


def load_config(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return parse_config(doc)


def validate(cfg: dict) -> None:
    try:
        build_material(cfg)
        build_adhesion(cfg)
        build_law(cfg)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    scale_keys = [v for k, v in cfg["mesh"].items()
                  if k != "seed" and isinstance(v, (int, float)) and not isinstance(v, bool)]
    if any(v <= 0 for v in scale_keys):
        raise ConfigError("mesh parameters must be positive")


def build_material(cfg: dict) -> Material:
    m = cfg["material"]
    return Material(float(m["E"]), float(m["nu"]), m["variant"])


def build_adhesion(cfg: dict) -> AdhesionParams:
    a = cfg["adhesion"]
    law = cfg["law"]
    adhesive = not (law["nonadhesive"] or law["type"] == "nonadhesive-di")
    kw = {"g_far": a["g_far"], "g_area": a["g_area"], "adhesive": adhesive}
    micro = a["A_H"] is not None and a["r0"] is not None
    macro = a["T_max"] is not None and a["W_adh"] is not None
    if micro == macro:
        raise ConfigError("adhesion needs exactly one of (A_H, r0) or (T_max, W_adh)")
    try:
        if micro:
            return AdhesionParams(float(a["A_H"]), float(a["r0"]), **kw)
        return AdhesionParams.from_macroscopic(float(a["T_max"]), float(a["W_adh"]), **kw)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def build_law(cfg: dict):
    law = cfg["law"]
    kind = law["type"]
    if kind not in LAW_CHOICES:
        raise ConfigError(f"law.type must be one of {LAW_CHOICES}")
    ad = build_adhesion_raw(cfg)
    if kind == "frictionless":
        return Frictionless()
    if kind == "ea":
        if law["mu"] is None:
            raise ConfigError("law.mu is required for the EA law")
        return EA(float(law["mu"]), float(law["s_cut"]))
    if law["tau"] is not None:
        g_cut = ad.g_max if law["g_cut"] is None else float(law["g_cut"])
        k = 80.0 / ad.r0 if law["k"] is None else float(law["k"])
        return DI(float(law["tau"]), g_cut, k)
    if law["mu_ea_equivalent"] is not None:
        g_ea = EA(float(law["mu_ea_equivalent"]), float(law["s_cut"])).g_cut(ad)
        mu = equivalent_mu_DI(float(law["mu_ea_equivalent"]), g_ea, ad)
    elif law["mu"] is not None:
        mu = float(law["mu"])
    else:
        raise ConfigError("the DI law needs law.mu, law.tau or law.mu_ea_equivalent")
    return DI.from_mu(mu, ad, g_cut=law["g_cut"], k=law["k"])


def build_adhesion_raw(cfg: dict) -> AdhesionParams:
    """Adhesion parameters with the adhesive flag ignored (law constants)."""
    c = copy.deepcopy(cfg)
    c["law"]["nonadhesive"] = False
    c["law"]["type"] = "di"
    return build_adhesion(c)


def build_solver(cfg: dict) -> SolverConfig:
    s = cfg["solver"]
    return SolverConfig(tol=float(s["tol"]), max_iter=int(s["max_iter"]),
                        max_cuts=int(s["max_cuts"]), freeze_tol=float(s["freeze_tol"]),
                        line_search=int(s["line_search"]))


def apply_cli_overrides(cfg: dict, law: str | None = None, resolution_scale: float | None = None,
                        out: str | None = None, seed: int | None = None) -> dict:
    cfg = copy.deepcopy(cfg)
    if seed is not None:
        cfg["mesh"]["seed"] = int(seed)
    if law is not None:
        if law not in LAW_CHOICES:
            raise ConfigError(f"--law must be one of {LAW_CHOICES}")
        cfg["law"]["type"] = law
        if law == "nonadhesive-di":
            cfg["law"]["nonadhesive"] = True
        if law in ("di", "nonadhesive-di") and cfg["law"]["mu"] is None and cfg["law"]["tau"] is None \
                and cfg["law"]["mu_ea_equivalent"] is None:
            cfg["law"]["mu"] = 1.0
        if law == "ea" and cfg["law"]["mu"] is None:
            cfg["law"]["mu"] = 0.01
    if resolution_scale is not None:
        if not resolution_scale > 0:
            raise ConfigError("--resolution-scale must be positive")
        cfg["mesh"] = scale_mesh(cfg["mesh"], resolution_scale)
    if out is not None:
        cfg["output"]["dir"] = out
    validate(cfg)
    return cfg


def scale_mesh(mesh: dict, s: float) -> dict:
    out = dict(mesh)
    for key in ("nx", "ny", "n", "n_s", "n_t"):
        if key in out:
            out[key] = max(1, int(round(out[key] * s)))
    return out
