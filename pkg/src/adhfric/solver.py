"""Quasi-static incremental Newton driver.

A ``LoadProgram`` is a list of stages. Each stage ramps prescribed DOF values
(Dirichlet) and external DOF forces linearly from their values at the start
of the stage to the given end values in ``n_steps`` increments. A DOF listed
under ``forces`` is free, so moving a rigid pseudo-node DOF from
``dirichlet`` to ``forces`` switches it to force control. An optional ``ramp`` callback receives the
stage load factor before every attempt, for continuation in a model
parameter; ``setup`` is called once with the displacements at stage start.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .contact import ActiveSetControl, update_active_sets
from .fem.assembly import SingularSystemError, assemble_and_solve
from .fem.material import ElementInversionError
from .model import Model

log = logging.getLogger(__name__)


@dataclass
class Stage:
    dirichlet: dict[int, float]
    forces: dict[int, float] = field(default_factory=dict)
    n_steps: int = 10
    name: str = ""
    ramp: Callable[[float], None] | None = None
    setup: Callable[[np.ndarray], None] | None = None

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("a stage needs at least one step")
        clash = set(self.dirichlet) & set(self.forces)
        if clash:
            raise ValueError(f"DOFs both prescribed and loaded: {sorted(clash)}")


@dataclass
class LoadProgram:
    stages: list[Stage]


def force_controlled_constraint(stage: Stage, dof: int, target: float) -> Stage:
    """Copy of ``stage`` with ``dof`` freed and loaded by ``target``.

    The DOF's equation becomes ``sum of contact reactions - target = 0``,
    linearized with the same contact tangent as the rest of the system.
    """
    dirichlet = {k: v for k, v in stage.dirichlet.items() if k != dof}
    forces = dict(stage.forces)
    forces[dof] = target
    return Stage(dirichlet, forces, stage.n_steps, stage.name, stage.ramp, stage.setup)


@dataclass
class SolverConfig:
    tol: float = 1e-8
    abs_floor: float = 1e-14
    roundoff: float = 1e-13
    max_iter: int = 30
    max_cuts: int = 6
    freeze_tol: float = 1e-2
    max_repeats: int = 2
    line_search: int = 8
    stall_ratio: float = 0.5


@dataclass
class StepRecord:
    stage: int
    lam: float
    iterations: int
    residuals: list[float]
    status_changes: int
    cut_level: int


@dataclass
class SolveReport:
    steps: list[StepRecord] = field(default_factory=list)
    cutbacks: list[tuple[int, float, str]] = field(default_factory=list)
    converged: bool = True
    stopped: bool = False
    failure_stage: int | None = None
    failure_reason: str = ""

    @property
    def iterations(self) -> list[int]:
        return [s.iterations for s in self.steps]


class _StepFailure(Exception):
    pass


@dataclass
class State:
    u: np.ndarray
    f_ext: np.ndarray
    f_int: np.ndarray
    f_c: np.ndarray
    stage: int
    lam: float


def newton_step(model: Model, u: np.ndarray, f_ext: np.ndarray, fixed: np.ndarray,
                cfg: SolverConfig):
    """Solve one increment in place; returns (u, f_int, f_c, residuals, changes).

    Raises ``_StepFailure`` on divergence, cycling, singular systems or
    element inversion.
    """
    ctrl = ActiveSetControl(freeze_tol=cfg.freeze_tol, max_repeats=cfg.max_repeats)
    update_active_sets(ctrl, 0.0, 0.0, first=True)
    res_hist: list[float] = []
    r0 = None
    prev = None
    changes = 0
    solves = 0
    cached = None
    while True:
        if cached is not None and cached[0] == ctrl.frozen:
            sys, f_int, f_c = cached[1]
        else:
            try:
                sys, f_int, f_c = model.assemble(u, f_ext, frozen=ctrl.frozen)
            except ElementInversionError as exc:
                raise _StepFailure(str(exc)) from exc
        cached = None
        sys.fixed = fixed
        R = sys.residual[sys.free]
        r = float(np.linalg.norm(R))
        if not np.isfinite(r):
            raise _StepFailure("non-finite residual")
        res_hist.append(r)
        log.debug("iter %d r=%.3e frozen=%s", solves, r, ctrl.frozen)
        st = model.statuses()
        if prev is not None and not ctrl.frozen and st.size:
            changes += int(np.count_nonzero(st != prev))
        if not ctrl.frozen:
            prev = st
        if r0 is None:
            r0 = max(r, cfg.abs_floor)
        scale = max(np.linalg.norm(f_int[sys.free]), np.linalg.norm(f_c[sys.free]),
                    np.linalg.norm(f_ext[sys.free]), cfg.abs_floor)
        floor = max(cfg.tol * r0, cfg.abs_floor, cfg.roundoff * scale)
        if r <= floor:
            if not ctrl.frozen:
                return u, f_int, f_c, res_hist, changes, solves + 1
            # confirm with memberships evaluated afresh
            ctrl.frozen = False
            continue
        was_frozen = ctrl.frozen
        update_active_sets(ctrl, r, r0, None if ctrl.frozen else st)
        if ctrl.frozen and len(res_hist) > 1 and r > cfg.stall_ratio * res_hist[-2]:
            # frozen memberships that admit no equilibrium stall; release early
            ctrl.frozen = False
        if ctrl.cut_requested:
            raise _StepFailure("active-set cycling")
        if solves >= cfg.max_iter:
            raise _StepFailure(f"no convergence in {cfg.max_iter} iterations (r={r:.3e}, r0={r0:.3e})")
        try:
            du = assemble_and_solve(sys)
        except SingularSystemError as exc:
            raise _StepFailure(f"singular tangent: {exc}") from exc
        solves += 1
        if cfg.line_search <= 0 or (was_frozen and not ctrl.frozen):
            u = u + du
            continue
        # backtracking on the residual norm: damps slip-direction reversals
        # near the stick limit and overshoot into the repulsive range
        alpha = 1.0
        for _ in range(cfg.line_search + 1):
            u_try = u + alpha * du
            try:
                trial = model.assemble(u_try, f_ext, frozen=ctrl.frozen)
            except ElementInversionError:
                alpha *= 0.5
                continue
            trial[0].fixed = fixed
            r_try = float(np.linalg.norm(trial[0].residual[trial[0].free]))
            if r_try < r or r_try <= floor:
                break
            alpha *= 0.5
        else:
            alpha = 1.0
            u_try = u + du
            trial = None
        if alpha < 1.0:
            log.debug("line search alpha=%.4g", alpha)
        u = u_try
        cached = (ctrl.frozen, trial) if trial is not None else None


def run(program: LoadProgram, model: Model, config: SolverConfig | None = None,
        u0: np.ndarray | None = None,
        on_step: Callable[[State], bool | None] | None = None) -> tuple[list[State], SolveReport]:
    """Run the load program; returns the converged trajectory and a report.

    On failure after ``max_cuts`` halvings the trajectory so far is returned
    and ``report.converged`` is False. ``on_step`` is called after every
    converged increment; returning True ends the current stage early.
    """
    cfg = config or SolverConfig()
    ndof = model.ndof
    u = np.zeros(ndof) if u0 is None else np.array(u0, dtype=float)
    f_ext = np.zeros(ndof)
    model.initialize_contact(u)
    traj: list[State] = []
    report = SolveReport()
    reaction = np.zeros(ndof)
    fixed_prev: set[int] = set()
    for si, stage in enumerate(program.stages):
        d_dofs = np.array(sorted(stage.dirichlet), dtype=np.int64)
        d0 = u[d_dofs].copy()
        d1 = np.array([stage.dirichlet[k] for k in d_dofs])
        f_dofs = np.array(sorted(stage.forces), dtype=np.int64)
        f0 = f_ext[f_dofs].copy()
        for j, d in enumerate(f_dofs):
            if int(d) in fixed_prev:
                f0[j] = reaction[d]
        f1 = np.array([stage.forces[k] for k in f_dofs])
        f_ext[d_dofs] = 0.0
        if stage.setup is not None:
            stage.setup(u)
        nominal = 1.0 / stage.n_steps
        lam = 0.0
        dlam = nominal
        level = 0
        while lam < 1.0 - 1e-12:
            step = min(dlam, 1.0 - lam)
            lam_new = lam + step
            if 1.0 - lam_new < 1e-9:
                lam_new = 1.0
            u_try = u.copy()
            u_try[d_dofs] = d0 + lam_new * (d1 - d0)
            fe_try = f_ext.copy()
            fe_try[f_dofs] = f0 + lam_new * (f1 - f0)
            snap = model.snapshot()
            if stage.ramp is not None:
                stage.ramp(lam_new)
            try:
                u_new, f_int, f_c, hist, changes, its = newton_step(model, u_try, fe_try, d_dofs, cfg)
            except _StepFailure as exc:
                model.restore(snap)
                level += 1
                report.cutbacks.append((si, lam_new, str(exc)))
                log.info("stage %d lam %.4g: %s; cut %d", si, lam_new, exc, level)
                if level > cfg.max_cuts:
                    report.converged = False
                    report.failure_stage = si
                    report.failure_reason = str(exc)
                    return traj, report
                dlam = step / 2.0
                continue
            model.commit()
            u = u_new
            f_ext = fe_try
            lam = lam_new
            report.steps.append(StepRecord(si, lam, its, hist, changes, level))
            state = State(u.copy(), f_ext.copy(), f_int, f_c, si, lam)
            traj.append(state)
            reaction = f_int + f_c
            if level > 0:
                level -= 1
                dlam = min(2.0 * step, nominal)
            if on_step is not None and on_step(state):
                report.stopped = True
                break
        fixed_prev = set(int(d) for d in d_dofs)
    return traj, report


def verify_tangent(model: Model, u: np.ndarray, h: float = 1e-7, dofs=None,
                   f_ext: np.ndarray | None = None) -> float:
    """Relative Frobenius error of the assembled tangent vs central FD.

    Active sets are frozen at the memberships evaluated at ``u``; ``dofs``
    restricts the checked columns.
    """
    f_ext = np.zeros(model.ndof) if f_ext is None else f_ext
    snap = model.snapshot()
    sys, _, _ = model.assemble(u, f_ext, frozen=False)
    for pair in model.pairs:
        for hp in pair.passes:
            hp.status = hp.last.status.copy()
    K = sys.matrix().toarray()
    cols = np.arange(model.ndof) if dofs is None else np.asarray(dofs)
    Kfd = np.zeros((model.ndof, cols.size))
    for j, d in enumerate(cols):
        up = u.copy()
        up[d] += h
        um = u.copy()
        um[d] -= h
        rp = model.assemble(up, f_ext, frozen=True, with_matrix=False)[0].residual
        rm = model.assemble(um, f_ext, frozen=True, with_matrix=False)[0].residual
        Kfd[:, j] = (rp - rm) / (2 * h)
    model.restore(snap)
    Ka = K[:, cols]
    return float(np.linalg.norm(Ka - Kfd) / max(np.linalg.norm(Kfd), 1e-300))
