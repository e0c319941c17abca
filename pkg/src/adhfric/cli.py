"""Command-line entry point.

::

    adhfric run <config.json> [--out DIR] [--law LAW] [--resolution-scale S] [--seed N]
    adhfric verify-tangents <config.json> [--steps N]
    adhfric selftest

Exit codes: 0 success, 1 configuration error, 2 solver failure (partial
outputs are still written by ``run``).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .scenarios import (ConfigError, apply_cli_overrides, build_scenario, load_config,
                        run_scenario, write_outputs)
from .scenarios.config import LAW_CHOICES, build_solver
from .selftest import run_selftest
from .solver import run, verify_tangent

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2
TANGENT_TOL = 1e-5

log = logging.getLogger("adhfric")


class _Stop(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config_file", nargs="?", help="JSON scenario configuration")
    common.add_argument("--config", dest="config_opt", help="same as the positional config file")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--resolution-scale", type=float, help="multiply mesh divisions")
    common.add_argument("--law", choices=LAW_CHOICES, help="override the interface law")
    common.add_argument("--seed", type=int, help="jitter interior mesh nodes with this seed")
    common.add_argument("-v", "--verbose", action="count", default=0)
    p = argparse.ArgumentParser(prog="adhfric", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run a scenario and write CSV/JSON outputs")
    vt = sub.add_parser("verify-tangents", parents=[common],
                        help="compare the assembled tangent with finite differences")
    vt.add_argument("--steps", type=int, default=3, help="load increments before checking")
    vt.add_argument("--h", type=float, default=1e-7, help="finite-difference step")
    st = sub.add_parser("selftest", help="run the closed-form check suite")
    st.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _config(args) -> dict:
    path = args.config_opt or args.config_file
    if path is None:
        raise ConfigError("no configuration file given")
    cfg = load_config(path)
    return apply_cli_overrides(cfg, law=args.law, resolution_scale=args.resolution_scale,
                               out=args.out, seed=args.seed)


def _cmd_run(args) -> int:
    cfg = _config(args)
    result = run_scenario(cfg)
    out = write_outputs(result, cfg["output"]["dir"])
    print(f"outputs written to {out}")
    if result.solver_failure:
        for r in result.reports:
            if not r.converged:
                print(f"solver failure in stage {r.failure_stage}: {r.failure_reason}",
                      file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def tangent_check(cfg: dict, steps: int = 3, h: float = 1e-7) -> dict:
    """Run ``steps`` increments of the scenario, then FD-check the tangent.

    Only the columns of contact-surface DOFs are differentiated, which covers
    every contact block and the bulk coupling of those nodes.
    """
    model, program = build_scenario(cfg)
    count = {"n": 0}
    last = {"u": np.zeros(model.ndof), "f_ext": np.zeros(model.ndof)}

    def on_step(st):
        last["u"], last["f_ext"] = st.u, st.f_ext
        count["n"] += 1
        if count["n"] >= steps:
            raise _Stop

    try:
        _, report = run(program, model, build_solver(cfg), on_step=on_step)
        converged = report.converged
    except _Stop:
        converged = True
    nodes = set()
    for pair in model.pairs:
        for hp in pair.passes:
            nodes.update(int(n) for n in hp.k.nodes)
            nodes.update(int(n) for n in hp.l.nodes)
    dofs = np.array(sorted(2 * n + c for n in nodes for c in (0, 1)), dtype=np.int64)
    err = verify_tangent(model, last["u"], h=h, dofs=dofs, f_ext=last["f_ext"])
    status = np.concatenate([pair.last_statuses() for pair in model.pairs]) \
        if model.pairs else np.zeros(0, dtype=np.int64)
    counts = {name: int(np.count_nonzero(status == v))
              for v, name in enumerate(("far", "frictionless", "stick", "slide"))}
    return {"scenario": cfg["scenario"], "steps": count["n"], "converged": converged,
            "columns": int(dofs.size), "relative_error": err, "tolerance": TANGENT_TOL,
            "statuses": counts, "passed": bool(err <= TANGENT_TOL)}


def _cmd_verify(args) -> int:
    cfg = _config(args)
    out = tangent_check(cfg, args.steps, args.h)
    print(json.dumps(out, indent=2))
    if not out["converged"]:
        return EXIT_SOLVER
    return EXIT_OK if out["passed"] else EXIT_SOLVER


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "selftest":
            return EXIT_OK if run_selftest() else EXIT_SOLVER
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_verify(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
