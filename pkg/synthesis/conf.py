from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

from conic.solvers import SolverOptions

DEFAULTS = {
    'SOLVER': 'CLARABEL',
    'SOLVER_OPTIONS': {'max_iters': 500, 'feas_tol': 1e-8, 'gap_tol': 1e-8},
    'RANK_TOL': 1e-9,
    'VERIFY_SEED': 2021,
    'VERIFY_DIRECTIONS': 10000,
    'VERIFY_TOL': 1e-6,
    'CONVEXITY_SAMPLES': 10000,
    'GAMMA_TOL': 1e-6,
    'PLOT_DIRECTIONS': 720,
    'CERTIFICATE_FORM': 'hrep',
    'RECORD_RUNS': True,
    'REPRODUCE_JOBS': 4,
    'OUTPUT_DIR': 'out',
}


def synthesis_setting(name):
    """A key of settings.HYBRID_INVARIANCE, falling back to the defaults above."""
    if name not in DEFAULTS:
        raise ImproperlyConfigured(f'Unknown HYBRID_INVARIANCE setting {name!r}.')
    return getattr(settings, 'HYBRID_INVARIANCE', {}).get(name, DEFAULTS[name])


def solver_options(overrides=None):
    """Solver options from settings, with per-run overrides (config file or --solver-opt) on top."""
    options = SolverOptions.from_mapping({'solver': synthesis_setting('SOLVER'), **synthesis_setting('SOLVER_OPTIONS')})
    return options.merged(overrides) if overrides else options
