"""Drivers for the peeling strip, the colliding cylinders and the sheared cap."""
from __future__ import annotations

from .cap import _program as _cap_program
from .cap import build_cap, run_cap
from .config import ConfigError, apply_cli_overrides, default_config, load_config, parse_config
from .cylinders import build_cylinders, cylinders_program, run_cylinders
from .results import ScenarioResult, write_outputs
from .strip import build_strip, run_strip, strip_program

RUNNERS = {"strip": run_strip, "cylinders": run_cylinders, "cap": run_cap}


def build_scenario(cfg: dict):
    """(model, load program) of a scenario, without running it.

    For the cap the program uses the first ``F_n`` of the ladder.
    """
    name = cfg["scenario"]
    if name == "strip":
        model, _, driven = build_strip(cfg)
        return model, strip_program(cfg, driven)
    if name == "cylinders":
        model, _, info = build_cylinders(cfg)
        return model, cylinders_program(cfg, info)
    if name == "cap":
        model, pair, plate, mesh = build_cap(cfg)
        F_n = cfg["load"]["F_n"][0] if cfg["load"]["F_n"] else None
        return model, _cap_program(cfg, model, pair, plate, mesh.sets["base"].nodes, F_n)
    raise ConfigError(f"unknown scenario '{name}'")


def run_scenario(cfg: dict) -> ScenarioResult:
    return RUNNERS[cfg["scenario"]](cfg)


__all__ = ["ConfigError", "RUNNERS", "ScenarioResult", "apply_cli_overrides", "build_scenario",
           "default_config", "load_config", "parse_config", "run_scenario", "write_outputs"]
