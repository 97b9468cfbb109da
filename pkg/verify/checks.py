"""
Sampled checks of solved support functions.

For a hybrid algebraic system with per-node models h_q:

- transition q -s-> q': h_q(C_s^T y) <= h_q'(E_s^T y) for sampled unit y
- node q: <z, C_q grad h_q(E_q^T z)> <= 0 for sampled unit z; for piecewise
  models every piece whose cone contains E_q^T z is checked
- safe box: h_q(e_i) <= upper_i and h_q(-e_i) <= -lower_i, exactly
- objective: gamma <v, y> <= h_root(lift(y)) for every vertex v of D

Reports are data; nothing here raises on a failed check.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from verify.support import PiecewiseModel

logger = logging.getLogger(__name__)

DEFAULT_SEED = 2021
DEFAULT_DIRECTIONS = 10000
DEFAULT_TOL = 1e-6
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class ConditionResult:
    condition: str
    subject: str
    samples: int
    max_violation: float
    tol: float
    skipped: int = 0

    def __post_init__(self):
        # plain Python numbers, so reports dump to JSON
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "max_violation", float(self.max_violation))
        object.__setattr__(self, "tol", float(self.tol))
        object.__setattr__(self, "skipped", int(self.skipped))

    @property
    def passed(self):
        return bool(self.max_violation <= self.tol)

    def as_dict(self):
        return {
            "condition": self.condition,
            "subject": self.subject,
            "samples": self.samples,
            "skipped": self.skipped,
            "max_violation": self.max_violation,
            "tol": self.tol,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class VerificationReport:
    results: Tuple[ConditionResult, ...] = ()
    seed: int = DEFAULT_SEED
    directions: int = DEFAULT_DIRECTIONS
    extra: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self):
        return all(result.passed for result in self.results)

    @property
    def max_violation(self):
        return max((result.max_violation for result in self.results), default=0.0)

    def failures(self):
        return [result for result in self.results if not result.passed]

    def merged(self, other):
        return VerificationReport(self.results + other.results, self.seed, self.directions, {**self.extra, **other.extra})

    def as_dict(self):
        return {
            "passed": self.passed,
            "seed": self.seed,
            "directions": self.directions,
            "max_violation": self.max_violation,
            "conditions": [result.as_dict() for result in self.results],
            **self.extra,
        }


def sample_directions(dim, count, seed=DEFAULT_SEED):
    """Unit directions, uniform on the sphere, from a seeded generator."""
    if dim == 0 or count == 0:
        return np.zeros((0, dim))
    rng = np.random.default_rng(seed)
    Y = rng.normal(size=(count, dim))
    return Y / np.linalg.norm(Y, axis=1, keepdims=True)


def _max(values):
    values = np.asarray(values, dtype=float)
    return float(np.max(values)) if values.size else float("-inf")


def _clip(violation):
    return max(violation, 0.0) if np.isfinite(violation) else 0.0


def check_transition(model_from, model_to, C, E, subject, n_dirs=DEFAULT_DIRECTIONS, tol=DEFAULT_TOL,
                     seed=DEFAULT_SEED):
    Y = sample_directions(C.shape[0], n_dirs, seed)
    if not len(Y):
        return ConditionResult("transition", subject, 0, 0.0, tol)
    violation = _max(np.atleast_1d(model_from.value(Y @ C)) - np.atleast_1d(model_to.value(Y @ E)))
    return ConditionResult("transition", subject, len(Y), _clip(violation), tol)


def _node_violations(model, Z, C, E):
    W = Z @ E
    drift = Z @ C
    norms = np.linalg.norm(W, axis=1)
    usable = norms > DEGENERATE_TOL
    if isinstance(model, PiecewiseModel):
        worst = []
        for w, d in zip(W[usable], drift[usable]):
            values = [float(d @ model.piece_gradient(i, w)[0]) for i in model.containing_pieces(w)]
            values = [v for v in values if np.isfinite(v)]
            worst.append(max(values) if values else -np.inf)
        return np.array(worst), int(np.sum(~usable))
    grads = np.atleast_2d(model.gradient(W[usable]))
    values = np.einsum("ij,ij->i", drift[usable], grads)
    finite = np.isfinite(values)
    return values[finite], int(np.sum(~usable) + np.sum(~finite))


def check_node(model, C, E, subject, n_dirs=DEFAULT_DIRECTIONS, tol=DEFAULT_TOL, seed=DEFAULT_SEED):
    Z = sample_directions(C.shape[0], n_dirs, seed)
    if not len(Z):
        return ConditionResult("node", subject, 0, 0.0, tol)
    values, skipped = _node_violations(model, Z, C, E)
    return ConditionResult("node", subject, len(Z), _clip(_max(values)), tol, skipped)


def check_invariance(system, models, n_dirs=DEFAULT_DIRECTIONS, tol=DEFAULT_TOL, seed=DEFAULT_SEED):
    """Sampled transition and node conditions for every transition and node of a HAS."""
    results = []
    for transition in system.automaton.transitions:
        reset = system.signals[transition.signal]
        results.append(check_transition(
            models[transition.source], models[transition.target], reset.C, reset.E,
            f"transition {transition}", n_dirs, tol, seed,
        ))
    for node_id in system.automaton.nodes:
        node = system.nodes[node_id]
        results.append(check_node(models[node_id], node.C, node.E, f"node '{node_id}'", n_dirs, tol, seed))
    report = VerificationReport(tuple(results), seed, n_dirs)
    logger.info("invariance passed=%s max_violation=%.3g conditions=%d", report.passed, report.max_violation,
                len(results))
    return report


def _facet_values(model, direction):
    if isinstance(model, PiecewiseModel):
        return max(float(model.piece_value(i, direction)[0]) for i in model.containing_pieces(direction))
    return float(model.value(direction))


def check_box_inclusion(model, box, subject="", tol=DEFAULT_TOL):
    """S within the box, checked at the 2n facet normals."""
    worst = float("-inf")
    for i in range(box.dim):
        e = np.zeros(box.dim)
        e[i] = 1.0
        worst = max(worst, _facet_values(model, e) - box.upper[i], _facet_values(model, -e) + box.lower[i])
    return ConditionResult("safe-set", subject, 2 * box.dim, _clip(worst), tol)


def lift_directions(Y, coordinates, dim):
    lifted = np.zeros((len(Y), dim))
    lifted[:, list(coordinates)] = Y
    return lifted


def check_polytope_inclusion(model, vertices, gamma, coordinates, subject="objective", n_dirs=DEFAULT_DIRECTIONS,
                             tol=DEFAULT_TOL, seed=DEFAULT_SEED):
    """gamma * conv(vertices) within the projection of S onto `coordinates`."""
    vertices = np.atleast_2d(np.asarray(vertices, dtype=float))
    Y = sample_directions(vertices.shape[1], n_dirs, seed)
    Y = np.vstack([Y, vertices / np.maximum(np.linalg.norm(vertices, axis=1, keepdims=True), DEGENERATE_TOL)])
    h = np.atleast_1d(model.value(lift_directions(Y, coordinates, model.dim)))
    violation = _max(gamma * np.max(Y @ vertices.T, axis=1) - h)
    return ConditionResult("objective", subject, len(Y), _clip(violation), tol)


def check_inclusion(model, target, **kwargs):
    """Dispatch to the box or scaled-polytope inclusion check."""
    if hasattr(target, "upper"):
        return check_box_inclusion(model, target, **kwargs)
    vertices, gamma, coordinates = target
    return check_polytope_inclusion(model, vertices, gamma, coordinates, **kwargs)


def check_homogeneity(model, samples=100, seed=DEFAULT_SEED, tol=1e-9, scales=(0.5, 2.0, 10.0), subject=""):
    Y = sample_directions(model.dim, samples, seed)
    base = np.atleast_1d(model.value(Y))
    worst = 0.0
    for scale in scales:
        scaled = np.atleast_1d(model.value(scale * Y))
        relative = np.abs(scaled - scale * base) / np.maximum(scale * np.abs(base), 1.0)
        worst = max(worst, float(np.max(relative)))
    return ConditionResult("homogeneity", subject, len(Y), worst, tol)


def audit_convexity(model, samples=10000, seed=DEFAULT_SEED, tol=1e-8, subject=""):
    """h(a y1 + (1 - a) y2) <= a h(y1) + (1 - a) h(y2) on random triples."""
    rng = np.random.default_rng(seed)
    Y1 = rng.normal(size=(samples, model.dim))
    Y2 = rng.normal(size=(samples, model.dim))
    alpha = rng.uniform(size=samples)
    mixed = alpha[:, None] * Y1 + (1.0 - alpha[:, None]) * Y2
    gap = np.atleast_1d(model.value(mixed)) - (alpha * np.atleast_1d(model.value(Y1))
                                               + (1.0 - alpha) * np.atleast_1d(model.value(Y2)))
    scale = np.maximum(np.linalg.norm(Y1, axis=1) + np.linalg.norm(Y2, axis=1), 1.0)
    return ConditionResult("convexity", subject, samples, _clip(_max(gap / scale)), tol)


def verify_models(system, models, objective=None, n_dirs=DEFAULT_DIRECTIONS, tol=DEFAULT_TOL, seed=DEFAULT_SEED,
                  convexity_samples=10000):
    """
    Full gate for a solved system.

    objective is (node_id, vertices, gamma, coordinates) or None.
    """
    report = check_invariance(system, models, n_dirs, tol, seed)
    results = []
    for node_id in system.automaton.nodes:
        model = models[node_id]
        results.append(check_box_inclusion(model, system.nodes[node_id].safe_set, f"node '{node_id}'", tol))
        if isinstance(model, PiecewiseModel) and convexity_samples:
            results.append(audit_convexity(model, convexity_samples, seed, tol, f"node '{node_id}'"))
    if objective is not None:
        node_id, vertices, gamma, coordinates = objective
        results.append(check_polytope_inclusion(models[node_id], vertices, gamma, coordinates,
                                                f"node '{node_id}'", n_dirs, tol, seed))
    return report.merged(VerificationReport(tuple(results), seed, n_dirs))
