"""Scenario result container and file emission."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..solver import SolveReport


@dataclass
class ScenarioResult:
    scenario: str
    series: dict[str, dict[str, list]] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    reports: list[SolveReport] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    # set by drivers whose program contains runs that are expected to fail
    failed: bool | None = None

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.reports)

    @property
    def solver_failure(self) -> bool:
        return (not self.converged) if self.failed is None else self.failed

    def column(self, table: str, name: str) -> np.ndarray:
        return np.asarray(self.series[table][name], dtype=float)

    def append(self, table: str, row: dict) -> None:
        tab = self.series.setdefault(table, {})
        if tab and set(tab) != set(row):
            raise KeyError(f"row keys differ from the {table} header")
        for k, v in row.items():
            tab.setdefault(k, []).append(v)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, table: dict[str, list]) -> None:
    keys = list(table)
    n = len(table[keys[0]]) if keys else 0
    with open(path, "w") as fh:
        fh.write(",".join(keys) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(table[k][i]) for k in keys) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_outputs(result: ScenarioResult, out_dir) -> Path:
    """Write ``forces.csv``, ``contact.csv``, ``energies.csv`` and ``summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("forces", "contact", "energies"):
        tab = result.series.get(name)
        write_csv(out / f"{name}.csv", tab if tab else {"step": []})
    summary = dict(result.summary)
    summary["converged"] = result.converged
    summary["solver_failure"] = result.solver_failure
    summary["solver"] = [{"steps": len(r.steps), "cutbacks": len(r.cutbacks),
                          "converged": r.converged, "stopped": r.stopped,
                          "failure_stage": r.failure_stage, "failure_reason": r.failure_reason}
                         for r in result.reports]
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    return out
