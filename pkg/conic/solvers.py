"""
Solver adapters.

CvxpySolver hands a ConicProgram to cvxpy: one flat variable vector x, one
symmetric cvxpy variable per PSD block tied to x by equality constraints, and
the solver picked in SolverOptions (Clarabel by default, SCS as a fallback).
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import cvxpy as cp
import numpy as np

from conic.exceptions import SolverOptionError, SolverUnavailableError
from conic.program import NONNEG, PSD, ZERO, upper_triangle

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical-failure"

STATUS_MAP = {
    cp.OPTIMAL: (OPTIMAL, False),
    cp.OPTIMAL_INACCURATE: (OPTIMAL, True),
    cp.INFEASIBLE: (INFEASIBLE, False),
    cp.INFEASIBLE_INACCURATE: (INFEASIBLE, True),
    cp.UNBOUNDED: (UNBOUNDED, False),
    cp.UNBOUNDED_INACCURATE: (UNBOUNDED, True),
}

# Generic option names and what each solver calls them.
OPTION_NAMES = {
    "CLARABEL": {"max_iters": ["max_iter"], "feas_tol": ["tol_feas"], "gap_tol": ["tol_gap_abs", "tol_gap_rel"]},
    "SCS": {"max_iters": ["max_iters"], "feas_tol": ["eps_abs"], "gap_tol": ["eps_rel"]},
    "CVXOPT": {"max_iters": ["max_iters"], "feas_tol": ["feastol"], "gap_tol": ["abstol", "reltol"]},
}

INTEGER_OPTIONS = {"max_iters"}
FLOAT_OPTIONS = {"feas_tol", "gap_tol"}
OPTION_KEYS = {"solver", "verbose"} | INTEGER_OPTIONS | FLOAT_OPTIONS


@dataclass(frozen=True)
class SolverOptions:
    solver: str = "CLARABEL"
    max_iters: int = 500
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    verbose: bool = False

    @classmethod
    def from_mapping(cls, data):
        """Build options from settings or parsed --solver-opt pairs; unknown keys are rejected."""
        data = dict(data or {})
        unknown = sorted(set(data) - OPTION_KEYS)
        if unknown:
            raise SolverOptionError(f"unknown solver option(s) {', '.join(map(repr, unknown))}; "
                                    f"expected one of {', '.join(sorted(OPTION_KEYS))}")
        values = {}
        try:
            if "solver" in data:
                values["solver"] = str(data.pop("solver")).upper()
            for key in INTEGER_OPTIONS:
                if key in data:
                    values[key] = int(data.pop(key))
            for key in FLOAT_OPTIONS:
                if key in data:
                    values[key] = float(data.pop(key))
            if "verbose" in data:
                verbose = data.pop("verbose")
                values["verbose"] = verbose if isinstance(verbose, bool) else str(verbose).lower() in ("1", "true", "yes")
        except (TypeError, ValueError) as exc:
            raise SolverOptionError(f"invalid solver option: {exc}") from exc
        for key in INTEGER_OPTIONS:
            if key in values and values[key] <= 0:
                raise SolverOptionError(f"{key} must be positive")
        for key in FLOAT_OPTIONS:
            if key in values and not values[key] > 0:
                raise SolverOptionError(f"{key} must be positive")
        return cls(**values)

    @staticmethod
    def parse_pairs(pairs):
        """Parse ["key=value", ...] into a dict, numbers converted where possible."""
        options = {}
        for pair in pairs or ():
            key, sep, value = pair.partition("=")
            if not sep or not key:
                raise SolverOptionError(f"expected key=value, got {pair!r}")
            for cast in (int, float):
                try:
                    value = cast(value)
                    break
                except ValueError:
                    continue
            options[key.strip()] = value
        return options

    def merged(self, overrides):
        data = {"solver": self.solver, "max_iters": self.max_iters, "feas_tol": self.feas_tol,
                "gap_tol": self.gap_tol, "verbose": self.verbose}
        data.update(overrides or {})
        return SolverOptions.from_mapping(data)

    def solver_kwargs(self):
        names = OPTION_NAMES.get(self.solver, {})
        kwargs = {}
        for key in ("max_iters", "feas_tol", "gap_tol"):
            for native in names.get(key, []):
                kwargs[native] = getattr(self, key)
        return kwargs

    def as_dict(self):
        return {"solver": self.solver, "max_iters": self.max_iters, "feas_tol": self.feas_tol,
                "gap_tol": self.gap_tol}


@dataclass(frozen=True, eq=False)
class Solution:
    """Solver outcome; values are only present for an optimal status."""
    status: str
    values: Dict[str, Any] = field(default_factory=dict)
    objective: Optional[float] = None
    x: Optional[np.ndarray] = None
    inaccurate: bool = False
    stats: Dict[str, Any] = field(default_factory=dict)

    @property
    def is_optimal(self):
        return self.status == OPTIMAL

    def value(self, name):
        return self.values[name]


class CvxpySolver:

    def __init__(self, options=None):
        self.options = options or SolverOptions()

    def _check_available(self):
        installed = cp.installed_solvers()
        if self.options.solver not in installed:
            raise SolverUnavailableError(self.options.solver, installed)

    def _problem(self, program):
        x = cp.Variable(program.num_vars) if program.num_vars else None
        constraints = []
        for block in program.blocks:
            if x is None:
                expression = block.b
            else:
                expression = block.A @ x + block.b
            if block.cone == ZERO:
                constraints.append(expression == 0)
            elif block.cone == NONNEG:
                constraints.append(expression >= 0)
            elif block.cone == PSD:
                size = block.size
                Z = cp.Variable((size, size), symmetric=True, name=block.name)
                flat = np.array([i + j * size for i, j in upper_triangle(size)])
                constraints.append(cp.vec(Z, order="F")[flat] == expression)
                constraints.append(Z >> 0)
        objective = (program.objective @ x if x is not None else 0) + program.objective_constant
        sense = cp.Maximize if program.sense == "maximize" else cp.Minimize
        return cp.Problem(sense(objective), constraints), x

    def solve(self, program):
        self._check_available()
        problem, x = self._problem(program)
        started = time.perf_counter()
        try:
            problem.solve(solver=self.options.solver, verbose=self.options.verbose, **self.options.solver_kwargs())
        except cp.error.SolverError as exc:
            logger.warning("solver=%s failed error=%s", self.options.solver, exc)
            return Solution(NUMERICAL_FAILURE, stats={"solver": self.options.solver, "error": str(exc),
                                                      "wall_time": time.perf_counter() - started})
        wall_time = time.perf_counter() - started

        status, inaccurate = STATUS_MAP.get(problem.status, (NUMERICAL_FAILURE, False))
        stats = {"solver": self.options.solver, "raw_status": problem.status, "wall_time": wall_time}
        solver_stats = problem.solver_stats
        if solver_stats is not None:
            stats["iterations"] = solver_stats.num_iters
            stats["solve_time"] = solver_stats.solve_time
        logger.info("solver=%s status=%s vars=%d blocks=%d wall_time=%.3f",
                    self.options.solver, problem.status, program.num_vars, len(program.blocks), wall_time)

        if status != OPTIMAL:
            return Solution(status, inaccurate=inaccurate, stats=stats)

        values_x = np.asarray(x.value, dtype=float) if x is not None else np.zeros(0)
        stats["primal_residual"] = program.primal_residual(values_x)
        values = {name: info.read(values_x) for name, info in program.variables.items()}
        return Solution(status, values, program.objective_value(values_x), values_x, inaccurate, stats)


def solve(program, options=None):
    return CvxpySolver(options).solve(program)
