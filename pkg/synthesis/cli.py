"""
Pieces shared by the solve, plot, verify and reproduce_paper commands.

Every failure leaves through CommandError with the exit status of the run:
2 for unreadable or invalid input, 3 infeasible, 4 solver failure or
unbounded, 5 solved but not verified.
"""
import logging
from pathlib import Path

from django.core.management.base import CommandError
from rest_framework import serializers

from conic.exceptions import ConicProgramError, SolverOptionError
from conic.solvers import SolverOptions
from geometry.exceptions import GeometryError
from hybrid.exceptions import HybridSystemError
from synthesis.conf import solver_options, synthesis_setting
from synthesis.config import flatten_errors, load_run_config
from synthesis.exceptions import RunConfigError, SynthesisError
from synthesis.plots import plot_solution, read_reference, scale_bound
from synthesis.runner import SOLUTION_FILE, SynthesisSolution, record_run, solve_synthesis

logger = logging.getLogger(__name__)

PARSE_ERROR = 2
SOLVER_ERROR = 4


def add_run_arguments(parser):
    parser.add_argument('--output-dir', help='Directory for solution, report and plot files.')
    parser.add_argument('--seed', type=int, help='Seed of the verification sampler.')
    parser.add_argument('--dirs', type=int, help='Number of sampled directions per verified condition.')
    parser.add_argument('--solver-opt', action='append', default=[], metavar='KEY=VALUE',
                        help='Solver option, may be repeated (solver, max_iters, feas_tol, gap_tol, verbose).')


def solver_overrides(pairs):
    try:
        overrides = SolverOptions.parse_pairs(pairs)
        solver_options(overrides)
    except SolverOptionError as exc:
        raise CommandError(f'--solver-opt: {exc}', returncode=PARSE_ERROR)
    return overrides


def read_config(path, output_dir=None, solver=None):
    try:
        config = load_run_config(path)
    except RunConfigError as exc:
        raise CommandError(str(exc), returncode=PARSE_ERROR)
    return config.with_overrides(output_dir=output_dir, solver=solver)


def build_problem(config):
    try:
        return config.build_problem()
    except serializers.ValidationError as exc:
        raise CommandError(f'{config.source}: ' + '; '.join(flatten_errors(exc.detail)), returncode=PARSE_ERROR)
    except (SynthesisError, HybridSystemError, GeometryError, ValueError) as exc:
        raise CommandError(f'{config.source}: {exc}', returncode=PARSE_ERROR)


def output_dir_for(config):
    return Path(config.output_dir) if config.output_dir else Path(synthesis_setting('OUTPUT_DIR')) / config.label


def write_plots(solution, problem, config, output_dir, directions=None, fmt=None):
    """Plot files for a solved run; a run without a plottable set only logs a warning."""
    node = problem.system.nodes[solution.objective.node]
    try:
        plot = plot_solution(solution, safe_box=node.safe_set, directions=directions or config.plot_directions,
                             reference=config.reference)
    except SynthesisError as exc:
        logger.warning('label=%s plots skipped: %s', solution.label, exc)
        return []
    return plot.write(output_dir, fmt or config.plot_format)


def run_config(config, seed=None, directions=None, plots=True, record=True):
    """Solve one config end to end: files under its output directory, plots, ledger entry."""
    problem = build_problem(config)
    try:
        solution = solve_synthesis(problem, solver_options(config.solver), seed=seed, directions=directions)
    except SolverOptionError as exc:
        raise CommandError(f'{config.source}: {exc}', returncode=PARSE_ERROR)
    except ConicProgramError as exc:
        raise CommandError(f'{config.label}: {exc}', returncode=SOLVER_ERROR)

    output_dir = output_dir_for(config)
    paths = solution.write(output_dir)
    if plots and solution.root_model is not None and solution.gamma:
        paths += write_plots(solution, problem, config, output_dir)
    if record:
        record_run(solution)
    return solution, paths


def read_solution(path):
    try:
        return SynthesisSolution.read(path)
    except FileNotFoundError:
        raise CommandError(f'{path}: file does not exist', returncode=PARSE_ERROR)
    except (KeyError, ValueError, TypeError) as exc:
        raise CommandError(f'{path}: not a solution file ({exc})', returncode=PARSE_ERROR)


def solution_path(config, path=None):
    return Path(path) if path else output_dir_for(config) / SOLUTION_FILE


def status_error(solution):
    """CommandError carrying the run's exit status, or None for a verified optimum."""
    if solution.exit_code == 0:
        return None
    gamma = 'n/a' if solution.gamma is None else f'{solution.gamma:.6f}'
    return CommandError(f'{solution.label}: status {solution.status}, gamma {gamma}', returncode=solution.exit_code)


def reference_bound(config):
    """Largest gamma the reference polygon of the config leaves room for, or None."""
    if config.reference is None:
        return None
    try:
        return scale_bound(read_reference(config.reference), config.objective['vertices'])
    except (OSError, ValueError, SynthesisError) as exc:
        logger.warning('label=%s reference bound skipped: %s', config.label, exc)
        return None


def reproduce_run(path, output_root=None, solver=None, seed=None, directions=None, plots=True):
    """
    One row of the reproduction table, as plain data so it can cross a process boundary.

    The ledger entry is left to the caller.
    """
    try:
        config = read_config(path, solver=solver)
        if output_root:
            config = config.with_overrides(output_dir=Path(output_root) / config.label)
        solution, _ = run_config(config, seed=seed, directions=directions, plots=plots, record=False)
    except CommandError as exc:
        return {'label': Path(path).stem, 'error': str(exc), 'returncode': exc.returncode}
    return {
        'label': config.label,
        'expected_gamma': config.expected_gamma,
        'bound': reference_bound(config),
        'solution': solution.as_dict(),
        'seconds': solution.seconds,
    }
