"""
Compile, solve, verify and record one synthesis problem.

Status of a run:

- optimal: solved and every sampled check passed
- solved-unverified: solved, but some check failed
- infeasible, unbounded, numerical-failure: as reported by the solver; an
  optimal gamma, or raw objective gamma^2 or gamma^2d, at or below GAMMA_TOL
  also counts as infeasible
"""
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

import numpy as np
from django.db import DatabaseError

from conic.solvers import INFEASIBLE, NUMERICAL_FAILURE, OPTIMAL, UNBOUNDED, solve
from hybrid.reduction import LiftingMap
from synthesis.compilers import compiler_for
from synthesis.conf import solver_options, synthesis_setting
from synthesis.models import SynthesisRun
from synthesis.problem import Objective
from verify.checks import ConditionResult, VerificationReport, verify_models
from verify.support import model_from_dict

logger = logging.getLogger(__name__)

SOLVED_UNVERIFIED = "solved-unverified"
STATUSES = (OPTIMAL, SOLVED_UNVERIFIED, INFEASIBLE, UNBOUNDED, NUMERICAL_FAILURE)

EXIT_CODES = {
    OPTIMAL: 0,
    INFEASIBLE: 3,
    UNBOUNDED: 4,
    NUMERICAL_FAILURE: 4,
    SOLVED_UNVERIFIED: 5,
}

SOLUTION_FILE = "solution.json"
REPORT_FILE = "report.json"
FINGERPRINT_FILE = "program.sha256"


def _jsonable(value):
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def dump_json(data, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


@dataclass(frozen=True, eq=False)
class SynthesisSolution:
    label: str
    template: dict
    status: str
    gamma: Optional[float]
    models: Dict[str, object]
    report: dict
    fingerprint: str
    stats: dict
    lifting: LiftingMap
    objective: Objective
    seconds: float = field(default=0.0, compare=False)

    @property
    def verified(self):
        return self.status == OPTIMAL

    @property
    def exit_code(self):
        return EXIT_CODES[self.status]

    @property
    def root_model(self):
        return self.models.get(self.objective.node)

    def as_dict(self):
        """Solution file contents; wall-clock times are left out so reruns give identical files."""
        return {
            "label": self.label,
            "template": self.template,
            "status": self.status,
            "gamma": self.gamma,
            "models": {node_id: model.as_dict() for node_id, model in self.models.items()},
            "report": self.report,
            "fingerprint": self.fingerprint,
            "stats": self.stats,
            "lifting": self.lifting.as_dict(),
            "objective": self.objective.as_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            label=data.get("label", ""),
            template=data["template"],
            status=data["status"],
            gamma=data.get("gamma"),
            models={node_id: model_from_dict(model) for node_id, model in data.get("models", {}).items()},
            report=data.get("report", {}),
            fingerprint=data.get("fingerprint", ""),
            stats=data.get("stats", {}),
            lifting=LiftingMap.from_dict(data["lifting"]),
            objective=Objective.from_dict(data["objective"]),
        )

    @classmethod
    def read(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def write(self, output_dir):
        """solution.json, report.json and program.sha256 under output_dir."""
        output_dir = Path(output_dir)
        paths = [dump_json(self.as_dict(), output_dir / SOLUTION_FILE), dump_json(self.report, output_dir / REPORT_FILE)]
        fingerprint = output_dir / FINGERPRINT_FILE
        fingerprint.write_text(self.fingerprint + "\n")
        paths.append(fingerprint)
        return paths


def verify_solution(system, models, objective=None, seed=None, directions=None, tol=None, convexity_samples=None):
    """verify_models with the sampling parameters taken from settings unless given."""
    return verify_models(
        system, models, objective,
        n_dirs=synthesis_setting("VERIFY_DIRECTIONS") if directions is None else directions,
        tol=synthesis_setting("VERIFY_TOL") if tol is None else tol,
        seed=synthesis_setting("VERIFY_SEED") if seed is None else seed,
        convexity_samples=synthesis_setting("CONVEXITY_SAMPLES") if convexity_samples is None else convexity_samples,
    )


def solve_synthesis(problem, options=None, seed=None, directions=None, tol=None):
    """Compile the problem for its template, solve it, read gamma and the models back and verify them."""
    options = options or solver_options()
    seed = synthesis_setting("VERIFY_SEED") if seed is None else seed
    tol = synthesis_setting("VERIFY_TOL") if tol is None else tol
    started = time.perf_counter()

    compiler = compiler_for(problem)
    program = compiler.compile()
    result = solve(program, options)
    stats = {
        "solver": options.solver,
        "solver_options": options.as_dict(),
        "raw_status": result.stats.get("raw_status"),
        "iterations": result.stats.get("iterations"),
        "primal_residual": result.stats.get("primal_residual"),
        "inaccurate": result.inaccurate,
        "program": program.summary(),
    }
    common = dict(label=problem.label, template=problem.template.as_dict(), fingerprint=program.fingerprint,
                  stats=stats, lifting=problem.lifting, objective=problem.objective)

    if not result.is_optimal:
        logger.warning("label=%s template=%s status=%s", problem.label, problem.template.kind, result.status)
        return SynthesisSolution(status=result.status, gamma=None, models={}, report={},
                                 seconds=time.perf_counter() - started, **common)

    gamma = compiler.gamma(result.values)
    models = compiler.models(result.values)
    # raw objective: gamma^2, or gamma^2d for polysets
    scale = float(result.values[compiler.objective_variable])
    if min(gamma, scale) <= synthesis_setting("GAMMA_TOL"):
        logger.warning("label=%s template=%s gamma=%.3g only the trivial set fits", problem.label,
                       problem.template.kind, gamma)
        return SynthesisSolution(status=INFEASIBLE, gamma=gamma, models=models, report={},
                                 seconds=time.perf_counter() - started, **common)

    report = verify_solution(problem.system, models, problem.objective.as_tuple(gamma), seed, directions, tol)
    if compiler.certificates:
        violation = compiler.certificate_violation(result.x, seed=seed)
        certificates = ConditionResult("certificate", "cone certificates", len(compiler.certificates), violation, tol)
        report = report.merged(VerificationReport((certificates,), report.seed, report.directions))

    status = OPTIMAL if report.passed else SOLVED_UNVERIFIED
    seconds = time.perf_counter() - started
    logger.info("label=%s template=%s status=%s gamma=%.6f max_violation=%.3g seconds=%.2f",
                problem.label, problem.template.kind, status, gamma, report.max_violation, seconds)
    return SynthesisSolution(status=status, gamma=gamma, models=models, report=report.as_dict(), seconds=seconds,
                             **common)


def record_run(solution):
    """Store the run in the ledger; a missing table only costs a warning."""
    if not synthesis_setting("RECORD_RUNS"):
        return None
    try:
        return SynthesisRun.objects.create(
            label=solution.label,
            template=solution.template["kind"],
            parameters=solution.template,
            gamma=solution.gamma,
            status=solution.status,
            verified=solution.verified,
            fingerprint=solution.fingerprint,
            solve_seconds=solution.seconds,
            solution=json.loads(json.dumps(solution.as_dict(), default=_jsonable)),
        )
    except DatabaseError as exc:
        logger.warning("run ledger unavailable, label=%s not recorded: %s", solution.label, exc)
        return None
