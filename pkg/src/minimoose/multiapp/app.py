"""Application tree: one :class:`AppNode` per simulation, children held by MultiApps."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import BuildError, SolveError
from ..input.registry import register
from ..restart import RestartableStore, read_checkpoint, write_checkpoint
from ..solver import (
    ProblemSystem,
    SolveReport,
    SolverOptions,
    TimeState,
    implicit_euler_step,
    newton_solve,
    steady_state_check,
)
from ..solver.transient import MAX_DT_HALVINGS
from ..systems.base import MooseObject
from ..systems.execute import (
    apply_initial_conditions,
    execute_aux_kernels,
    execute_postprocessors,
    init_stateful,
    update_stateful,
)
from ..systems.functions import PiecewiseLinear

log = logging.getLogger(__name__)

STEADY_ONLY_STEP_CAP = 100000


@dataclass
class ExecutionerConfig:
    kind: str = "Transient"
    solver: SolverOptions = field(default_factory=SolverOptions)
    dt: float = 1.0
    start_time: float = 0.0
    end_time: float | None = None
    num_steps: int | None = None
    steady_state_detection: bool = False
    steady_state_tol: float = 1e-6
    steady_state_start_time: float = -math.inf
    fixed_point: bool = False
    fixed_point_max_its: int = 10
    fixed_point_tol: float = 1e-6

    def __post_init__(self):
        if self.kind not in ("Steady", "Transient"):
            raise BuildError(f"unknown executioner type {self.kind}")
        if not self.dt > 0:
            raise BuildError("dt must be positive")
        if self.fixed_point_max_its < 1:
            raise BuildError("fixed_point_max_its must be at least 1")


@dataclass
class OutputConfig:
    file_base: str = "out"
    csv: bool = True
    vtk: bool = False
    vtk_interval: int = 1
    checkpoint_interval: int = 0


@dataclass
class SubAppSlot:
    app: "AppNode"
    position: np.ndarray
    index: int


@dataclass
class StepReport:
    converged: bool
    t: float
    dt: float
    solve: SolveReport | None = None
    fixed_point_its: int = 0
    fixed_point_change: float = 0.0
    failed_child: str | None = None
    retries: int = 0
    message: str = ""


@register("MultiApp")
class TransientMultiApp(MooseObject):
    """Children built from input files, one per position, advanced with the parent."""

    @classmethod
    def valid_params(cls):
        return (
            super()
            .valid_params()
            .add("input_files", "string_list", doc="one file for every child or one per position")
            .add("positions", "real_list", doc="x y z triples")
            .add("start_time", "real", math.nan, "child start time; defaults to the parent's")
            .add("sub_cycling", "bool", False)
            .add("execute_on", "string", "timestep_end", "timestep_begin or timestep_end")
        )

    def __init__(self, name, params=None):
        super().__init__(name, params)
        pos = self.params["positions"]
        if len(pos) == 0 or len(pos) % 3:
            raise BuildError(f"{name}: positions must be a non-empty list of x y z triples")
        files = self.params["input_files"]
        if len(files) not in (1, len(pos) // 3):
            raise BuildError(f"{name}: give one input file or one per position")
        if self.params["execute_on"] not in ("timestep_begin", "timestep_end"):
            raise BuildError(f"{name}: execute_on must be timestep_begin or timestep_end")
        self.slots: list[SubAppSlot] = []

    @property
    def positions(self) -> np.ndarray:
        return np.asarray(self.params["positions"], dtype=float).reshape(-1, 3)

    def input_file(self, i: int) -> str:
        files = self.params["input_files"]
        return files[0] if len(files) == 1 else files[i]

    def add_child(self, app: "AppNode", position) -> SubAppSlot:
        slot = SubAppSlot(app, np.asarray(position, dtype=float), len(self.slots))
        self.slots.append(slot)
        return slot

    def advance_to(self, t: float) -> str | None:
        """Step every child up to ``t``; returns the path of a failed child, if any."""
        for slot in self.slots:
            if not slot.app.advance_to(t, self.params["sub_cycling"]):
                return slot.app.path
        return None


class AppNode:
    """One simulation in the app tree plus its MultiApps, transfers and outputs."""

    def __init__(self, name, problem, executioner=None, outputs=None, path=None, multiapps=(), transfers=()):
        self.name = name
        self.path = path or name
        self.problem = problem
        self.executioner = executioner or ExecutionerConfig()
        self.outputs = outputs or OutputConfig(file_base=name)
        self.multiapps: list[TransientMultiApp] = list(multiapps)
        self.transfers = list(transfers)
        self.store = RestartableStore()
        self.history: list[list[float]] = []
        self.events: list[tuple] = []
        self.nworkers = 1
        self.initialized = False
        self.steady_state_reached = False
        self.halted = False

    # tree -------------------------------------------------------------------------
    def children(self):
        for ma in self.multiapps:
            for slot in ma.slots:
                yield slot.app

    def walk(self):
        yield self
        for child in self.children():
            yield from child.walk()

    def share_events(self, events: list) -> None:
        self.events = events
        for child in self.children():
            child.share_events(events)

    def set_workers(self, n: int) -> None:
        for node in self.walk():
            node.nworkers = int(n)

    def _transfers(self, ma, direction):
        return [tr for tr in self.transfers if tr.multiapp is ma and tr.direction == direction]

    @property
    def columns(self) -> list[str]:
        return ["time", *self.problem.postprocessors]

    def _record(self):
        pp = self.problem.pp_values
        self.history.append([self.problem.time.t, *(pp.get(n, math.nan) for n in self.problem.postprocessors)])

    # restartable state ----------------------------------------------------------------
    def _register_state(self):
        problem, store = self.problem, self.store

        def set_time(a):
            problem.time = TimeState(float(a[0]), float(a[1]), int(a[2]))

        store.register("time", lambda: [problem.time.t, problem.time.dt, problem.time.step], set_time)

        def set_u(a):
            problem.u = a.copy()

        store.register("solution", lambda: problem.u, set_u)
        sf = problem.stateful
        for p in sf.names():
            store.register(f"stateful/{p}/old", lambda p=p: sf.old(p), lambda a, p=p: sf.set_old(p, a.reshape(sf.old(p).shape)))
            store.register(
                f"stateful/{p}/current",
                lambda p=p: sf.current(p),
                lambda a, p=p: sf.set_current(p, a.reshape(sf.current(p).shape)),
            )
        for name, aux in problem.aux.items():
            store.register(f"aux/{name}", lambda aux=aux: aux.values, lambda a, aux=aux: aux.values.__setitem__(..., a))
        names = list(problem.postprocessors)

        def get_pp():
            return [problem.pp_values.get(n, math.nan) for n in names]

        def set_pp(a):
            for n, v in zip(names, a):
                if math.isnan(v):
                    problem.pp_values.pop(n, None)
                else:
                    problem.pp_values[n] = float(v)

        store.register("postprocessors", get_pp, set_pp)
        for name, fn in problem.functions.items():
            if isinstance(fn, PiecewiseLinear):
                store.register(
                    f"function/{name}",
                    lambda fn=fn: np.concatenate([[len(fn.xs)], fn.xs, fn.ys]),
                    lambda a, fn=fn: fn.set_points(a[1 : 1 + int(a[0])], a[1 + int(a[0]) :]),
                )
        ncols = len(self.columns)

        def get_hist():
            rows = np.asarray(self.history, dtype=float).reshape(-1, ncols)
            return np.concatenate([[rows.shape[0]], rows.ravel()])

        def set_hist(a):
            n = int(a[0])
            self.history = [list(map(float, r)) for r in a[1:].reshape(n, ncols)]

        store.register("history", get_hist, set_hist)

    def snapshot_tree(self) -> dict:
        return {node.path: node.store.snapshot() for node in self.walk()}

    def restore_tree(self, snap: dict) -> None:
        for node in self.walk():
            node.store.restore(snap[node.path])

    # lifecycle ------------------------------------------------------------------------
    def initialize(self, start_time: float | None = None) -> None:
        ex, problem = self.executioner, self.problem
        t0 = ex.start_time if start_time is None or math.isnan(start_time) else float(start_time)
        problem.time = TimeState(t0, ex.dt, 0)
        apply_initial_conditions(problem)
        init_stateful(problem)
        execute_aux_kernels(problem, "initial")
        execute_postprocessors(problem, "initial")
        for ma in self.multiapps:
            for tr in self._transfers(ma, "to_subapps"):
                tr.execute()
            for slot in ma.slots:
                slot.app.initialize(ma.params["start_time"] if not math.isnan(ma.params["start_time"]) else t0)
            for tr in self._transfers(ma, "from_subapps"):
                tr.execute()
        if ex.kind == "Transient":
            self._record()
        self._register_state()
        self.initialized = True
        self.events.append(("initialize", self.path, t0))

    def _solve_steady(self) -> SolveReport:
        problem = self.problem
        state = TimeState(problem.time.t, problem.time.dt, problem.time.step + 1, problem.u.copy())
        problem.stateful.swap()
        u, rep = newton_solve(ProblemSystem(problem, state, self.nworkers), problem.u, self.executioner.solver)
        if rep.converged:
            problem.u = u
            problem.time = state
            update_stateful(problem, u)
        return rep

    def _solve(self, dt, t_target=None) -> SolveReport:
        t = self.problem.time.t
        if self.executioner.kind == "Steady":
            self.problem.time = TimeState(t if t_target is None else float(t_target), dt, self.problem.time.step)
            rep = self._solve_steady()
            if not rep.converged:
                self.problem.time = TimeState(t, dt, self.problem.time.step)
        else:
            _, rep = implicit_euler_step(self.problem, self.executioner.solver, dt=dt, nworkers=self.nworkers, t_target=t_target)
        self.events.append(("solve", self.path, self.problem.time.t))
        return rep

    def _run_children(self, ma, t) -> tuple[list[np.ndarray], str | None]:
        vals = []
        for tr in self._transfers(ma, "to_subapps"):
            vals.append(tr.execute())
            self.events.append(("transfer", tr.name, "to_subapps"))
        failed = ma.advance_to(t)
        if failed:
            return vals, failed
        for tr in self._transfers(ma, "from_subapps"):
            vals.append(tr.execute())
            self.events.append(("transfer", tr.name, "from_subapps"))
        return vals, None

    def _reapply_from_transfers(self):
        for node in self.walk():
            for tr in node.transfers:
                if tr.direction == "from_subapps":
                    tr.reapply()

    def execute_coupled_step(self, dt: float, t_target=None) -> StepReport:
        """Parent solve, transfers down, children advance, transfers up; optionally iterate.

        Nothing is committed here; :meth:`step` handles retries and commit.
        """
        ex = self.executioner
        start_t = self.problem.time.t
        target = start_t + dt if t_target is None else float(t_target)
        snap = self.snapshot_tree() if ex.fixed_point else None
        its = ex.fixed_point_max_its if ex.fixed_point else 1
        prev = None
        report = StepReport(False, start_t, dt)
        for it in range(its):
            if it > 0:
                self.restore_tree(snap)
                self._reapply_from_transfers()
            vals = []
            for ma in self.multiapps:
                if ma.params["execute_on"] == "timestep_begin":
                    v, failed = self._run_children(ma, target)
                    vals += v
                    if failed:
                        report.failed_child = failed
                        report.message = f"child {failed} failed to converge"
                        return report
            rep = self._solve(dt, t_target)
            report.solve = rep
            report.t = self.problem.time.t
            report.dt = rep.dt if rep.dt is not None else dt
            if not rep.converged:
                report.message = rep.message
                return report
            for ma in self.multiapps:
                if ma.params["execute_on"] == "timestep_begin":
                    if abs(self.problem.time.t - target) > 1e-12 * max(1.0, abs(target)):
                        report.message = "parent step shortened after children advanced"
                        return report
                    continue
                v, failed = self._run_children(ma, self.problem.time.t)
                vals += v
                if failed:
                    report.failed_child = failed
                    report.message = f"child {failed} failed to converge"
                    return report
            report.fixed_point_its = it + 1
            values = np.concatenate(vals) if vals else np.zeros(0)
            if not ex.fixed_point:
                break
            if prev is not None and prev.shape == values.shape:
                scale = max(float(np.max(np.abs(values))) if values.size else 0.0, 1e-300)
                change = float(np.max(np.abs(values - prev))) / scale if values.size else 0.0
                report.fixed_point_change = change
                log.debug("  fixed point it %d: change %.3e", it + 1, change)
                if change < ex.fixed_point_tol:
                    break
            prev = values
        else:
            if ex.fixed_point:
                log.warning(
                    "%s: fixed-point iteration stopped at %d its (change %.3e)", self.path, its, report.fixed_point_change
                )
        report.converged = True
        return report

    def step(self, dt: float, t_target=None) -> StepReport:
        """Take one committed step; a child failure restores state and halves ``dt``."""
        snap = self.snapshot_tree() if self.multiapps else None
        for attempt in range(MAX_DT_HALVINGS + 1):
            report = self.execute_coupled_step(dt, t_target)
            report.retries = attempt
            if report.converged or report.failed_child is None or attempt == MAX_DT_HALVINGS:
                break
            log.info("%s: %s; retrying with dt=%g", self.path, report.message, dt * 0.5)
            self.restore_tree(snap)
            dt *= 0.5
            t_target = None
        if not report.converged:
            if snap is not None:
                self.restore_tree(snap)
            return report
        self.commit()
        return report

    def commit(self) -> None:
        execute_aux_kernels(self.problem, "timestep_end")
        execute_postprocessors(self.problem, "timestep_end")
        self._record()
        self.events.append(("commit", self.path, self.problem.time.t))

    def advance_to(self, t: float, sub_cycling: bool = False) -> bool:
        """Step until this app's time reaches ``t`` exactly (last step clipped)."""
        eps = 1e-12 * max(1.0, abs(t))
        while self.problem.time.t < t - eps:
            remaining = t - self.problem.time.t
            dt = self.executioner.dt
            if sub_cycling and dt < remaining - eps:
                rep = self.step(dt)
            else:
                rep = self.step(remaining, t_target=t)
            if not rep.converged:
                return False
        return True

    # driver loop ----------------------------------------------------------------------
    def _finished(self) -> bool:
        ex, t = self.executioner, self.problem.time
        if ex.num_steps is not None and t.step >= ex.num_steps:
            return True
        if ex.end_time is not None and t.t >= ex.end_time - 1e-12 * max(1.0, abs(ex.end_time)):
            return True
        return t.step >= STEADY_ONLY_STEP_CAP

    def run(self, output_dir=None, halt_after_step=None, recover_step=None) -> StepReport | None:
        """Run to completion (or to ``halt_after_step``) writing outputs to ``output_dir``."""
        from ..driver import output

        out = Path(output_dir) if output_dir is not None else None
        if not self.initialized:
            self.initialize()
        if recover_step is not None:
            if out is None:
                raise SolveError("recovering needs the output directory holding the checkpoints")
            read_checkpoint(out, recover_step, self)
            log.info("recovered %s at step %d, t=%g", self.path, self.problem.time.step, self.problem.time.t)
        ex = self.executioner
        report = None
        try:
            if ex.kind == "Steady":
                report = StepReport(False, self.problem.time.t, ex.dt)
                rep = self._solve_steady()
                report.solve = rep
                if not rep.converged:
                    raise SolveError(f"steady solve failed: {rep.message}")
                report.converged = True
                self.commit()
                _log_step(self, report)
                return report
            if out is not None and self.outputs.vtk and recover_step is None:
                output.write_vtk_tree(self, out)
            while not self._finished():
                dt = ex.dt
                t_target = None
                if ex.end_time is not None and self.problem.time.t + dt > ex.end_time:
                    dt = ex.end_time - self.problem.time.t
                    t_target = ex.end_time
                u_prev = self.problem.u.copy()
                report = self.step(dt, t_target)
                if not report.converged:
                    raise SolveError(f"{self.path}: step failed at t={self.problem.time.t}: {report.message}")
                _log_step(self, report)
                k = self.problem.time.step
                if out is not None and self.outputs.vtk and k % max(1, self.outputs.vtk_interval) == 0:
                    output.write_vtk_tree(self, out)
                if out is not None and self.outputs.checkpoint_interval and k % self.outputs.checkpoint_interval == 0:
                    write_checkpoint(self, out, k)
                if (
                    ex.steady_state_detection
                    and self.problem.time.t >= ex.steady_state_start_time - 1e-12
                    and steady_state_check(self.problem.u, u_prev, report.dt, ex.steady_state_tol)
                ):
                    self.steady_state_reached = True
                    log.info("%s: steady state reached at t=%g", self.path, self.problem.time.t)
                    break
                if halt_after_step is not None and k >= halt_after_step:
                    self.halted = True
                    break
            if not self.halted:
                for node in self.walk():
                    execute_postprocessors(node.problem, "final")
            return report
        finally:
            if out is not None:
                output.write_csv_tree(self, out)


def _log_step(app, report: StepReport):
    s = report.solve
    log.info(
        "step %d t=%.6g dt=%.4g nl=%d lin=%d |R|=%.3e%s",
        app.problem.time.step,
        app.problem.time.t,
        report.dt,
        s.nonlinear_its if s else 0,
        s.linear_its if s else 0,
        s.final_norm if s else 0.0,
        f" fp={report.fixed_point_its}" if app.executioner.fixed_point else "",
    )
