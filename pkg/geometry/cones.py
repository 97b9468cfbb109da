"""
Polyhedral cones {y : G y <= 0}.

A cone keeps its H-representation G and, once computed, its generators:
rays of the pointed part plus a basis of the lineality space. Generators
come from a small double description implementation; the conic partitions
used here live in dimension 3, and anything above 6 is refused.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.optimize import linprog

from geometry.exceptions import DegenerateConeError, DimensionMismatchError, UnsupportedDimensionError

logger = logging.getLogger(__name__)

MAX_DD_DIMENSION = 6
MEMBERSHIP_TOL = 1e-9
RAY_TOL = 1e-10
INTERIOR_TOL = 1e-9


def _normalize_rows(G):
    G = np.asarray(G, dtype=float)
    if G.size == 0:
        return G
    norms = np.linalg.norm(G, axis=1)
    keep = norms > RAY_TOL
    return G[keep] / norms[keep, None]


@dataclass(frozen=True, eq=False)
class PolyhedralCone:
    """
    - H: m x n matrix, the cone is {y : H y <= 0}; rows are unit normals
    - rays: n x p generator columns of the pointed part (None until computed)
    - lineality: n x l basis of the lineality space (None until computed)
    - empty_interior: set by intersect_cones when no strictly feasible point exists
    """
    H: np.ndarray
    rays: Optional[np.ndarray] = None
    lineality: Optional[np.ndarray] = None
    empty_interior: Optional[bool] = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        if H.ndim != 2:
            raise DimensionMismatchError(f"H must be two-dimensional, got shape {H.shape}")
        object.__setattr__(self, "H", _normalize_rows(H) if H.shape[0] else H)
        if self.rays is not None:
            object.__setattr__(self, "rays", np.asarray(self.rays, dtype=float).reshape(H.shape[1], -1))
        if self.lineality is not None:
            object.__setattr__(self, "lineality", np.asarray(self.lineality, dtype=float).reshape(H.shape[1], -1))

    @classmethod
    def full_space(cls, n):
        return cls(np.zeros((0, n)), rays=np.zeros((n, 0)), lineality=np.eye(n), empty_interior=False)

    @classmethod
    def halfspace(cls, normal):
        return cls(np.atleast_2d(normal))

    @property
    def dim(self):
        return self.H.shape[1]

    def contains(self, Y, tol=MEMBERSHIP_TOL):
        """Membership of a point or of the rows of Y; tolerance scales with the point norm."""
        Y = np.asarray(Y, dtype=float)
        if not self.H.shape[0]:
            return np.ones(Y.shape[:-1], dtype=bool) if Y.ndim > 1 else True
        slack = Y @ self.H.T
        scale = np.maximum(np.linalg.norm(Y, axis=-1), 1.0)
        inside = np.all(slack <= tol * scale[..., None], axis=-1)
        return inside if Y.ndim > 1 else bool(inside)

    def interior_point(self):
        """A unit vector with H y < 0 strictly, or None when the interior is empty."""
        if "interior" not in self._cache:
            self._cache["interior"] = _interior_probe(self.H)
        return self._cache["interior"]

    @property
    def has_interior(self):
        return self.interior_point() is not None

    def generators(self):
        """(rays, lineality) of the cone, computing them by double description when needed."""
        if self.rays is not None and self.lineality is not None:
            return self.rays, self.lineality
        if "generators" not in self._cache:
            self._cache["generators"] = cone_generators(self)
        return self._cache["generators"]

    def with_generators(self):
        rays, lineality = self.generators()
        return PolyhedralCone(self.H, rays, lineality, self.empty_interior)

    @property
    def is_origin_only(self):
        rays, lineality = self.generators()
        return rays.shape[1] == 0 and lineality.shape[1] == 0

    def irredundant(self):
        """
        The same cone with duplicate and non-facet rows of H dropped.

        Only full-dimensional cones are reduced; others come back unchanged.
        """
        if not self.H.shape[0] or not self.has_interior:
            return self
        rays, lineality = self.generators()
        generators = np.hstack([rays, lineality])
        keep = []
        for k, row in enumerate(self.H):
            if any(np.linalg.norm(row - self.H[j]) <= 1e-9 for j in keep):
                continue
            tight = generators[:, np.abs(row @ generators) <= 1e-9]
            rank = np.linalg.matrix_rank(tight, tol=1e-8) if tight.shape[1] else 0
            if rank >= self.dim - 1:
                keep.append(k)
        return PolyhedralCone(self.H[keep], rays, lineality, empty_interior=False)

    def span_dimension(self):
        rays, lineality = self.generators()
        stacked = np.hstack([rays, lineality])
        return int(np.linalg.matrix_rank(stacked, tol=1e-8)) if stacked.size else 0

    def as_dict(self):
        rays, lineality = self.generators()
        return {"H": self.H.tolist(), "rays": rays.T.tolist(), "lineality": lineality.T.tolist()}


def _interior_probe(H):
    m, n = H.shape
    if m == 0:
        point = np.zeros(n)
        point[0] = 1.0
        return point
    # maximize t subject to H y + t <= 0, -1 <= y <= 1, t <= 1 (rows of H are unit)
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A = np.hstack([H, np.ones((m, 1))])
    bounds = [(-1.0, 1.0)] * n + [(None, 1.0)]
    result = linprog(c, A_ub=A, b_ub=np.zeros(m), bounds=bounds, method="highs")
    if result.status != 0 or -result.fun <= INTERIOR_TOL:
        return None
    y = result.x[:n]
    return y / np.linalg.norm(y)


def preimage_cone(cone, M):
    """{y : M^T y in cone} for M of shape (r, k) and a cone in R^k."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[1] != cone.dim:
        raise DimensionMismatchError(f"matrix has {M.shape[1]} columns, cone lives in R^{cone.dim}")
    return PolyhedralCone(cone.H @ M.T if cone.H.shape[0] else np.zeros((0, M.shape[0])))


def intersect_cones(a, b):
    if a.dim != b.dim:
        raise DimensionMismatchError(f"cannot intersect cones in R^{a.dim} and R^{b.dim}")
    cone = PolyhedralCone(np.vstack([a.H, b.H]))
    object.__setattr__(cone, "empty_interior", not cone.has_interior)
    return cone


def _dedupe(rays):
    kept = []
    for ray in rays:
        if not any(np.linalg.norm(ray - other) <= 1e-8 for other in kept):
            kept.append(ray)
    return kept


def _double_description(A, d):
    """Extreme rays of the pointed cone {c in R^d : A c <= 0}, A of full column rank."""
    order, chosen = [], []
    for k in range(A.shape[0]):
        if np.linalg.matrix_rank(A[chosen + [k]], tol=1e-9) > len(chosen):
            chosen.append(k)
            if len(chosen) == d:
                break
    if len(chosen) < d:
        raise DegenerateConeError("constraint matrix is rank deficient after removing the lineality space")
    order = chosen + [k for k in range(A.shape[0]) if k not in chosen]

    basis = A[chosen]
    rays = list((-np.linalg.inv(basis)).T)
    rays = [r / np.linalg.norm(r) for r in rays]
    processed = list(chosen)

    for k in order[d:]:
        a = A[k]
        values = [float(a @ r) for r in rays]
        positive = [i for i, v in enumerate(values) if v > RAY_TOL]
        negative = [i for i, v in enumerate(values) if v < -RAY_TOL]
        zero = [i for i, v in enumerate(values) if abs(v) <= RAY_TOL]
        if not positive:
            processed.append(k)
            continue
        tight = {i: {j for j in processed if abs(A[j] @ rays[i]) <= RAY_TOL} for i in positive + negative}
        new_rays = []
        for p in positive:
            for n in negative:
                common = sorted(tight[p] & tight[n])
                rank = np.linalg.matrix_rank(A[common], tol=1e-9) if common else 0
                if rank != d - 2:
                    continue
                ray = values[p] * rays[n] - values[n] * rays[p]
                norm = np.linalg.norm(ray)
                if norm > RAY_TOL:
                    new_rays.append(ray / norm)
        rays = _dedupe([rays[i] for i in negative + zero] + new_rays)
        processed.append(k)
        if not rays:
            break
    return rays


def cone_generators(cone):
    """
    Rays of the pointed part and a lineality basis, both as column matrices.

    The lineality space is ker(H); the pointed part lives in the row space of H
    where the double description runs.
    """
    n = cone.dim
    if n > MAX_DD_DIMENSION:
        raise UnsupportedDimensionError(f"generator enumeration is limited to R^{MAX_DD_DIMENSION}, got R^{n}")
    H = cone.H
    if H.shape[0] == 0:
        return np.zeros((n, 0)), np.eye(n)

    lineality = linalg.null_space(H, rcond=1e-10)
    rowspace = linalg.orth(H.T, rcond=1e-10)
    d = rowspace.shape[1]
    if d == 0:
        return np.zeros((n, 0)), lineality

    reduced = H @ rowspace
    rays = _double_description(reduced, d)
    if not rays:
        return np.zeros((n, 0)), lineality
    full = np.array([rowspace @ r for r in rays]).T
    full /= np.linalg.norm(full, axis=0)
    worst = float(np.max(H @ full)) if full.size else 0.0
    if worst > 1e-9:
        raise DegenerateConeError(f"generated ray violates the H-representation by {worst:.2e}")
    return full, lineality


def cone_from_generators(rays, lineality=None):
    """H-representation of cone(rays) + span(lineality), via generators of the polar cone."""
    rays = np.atleast_2d(np.asarray(rays, dtype=float))
    n = rays.shape[0]
    lineality = np.zeros((n, 0)) if lineality is None else np.asarray(lineality, dtype=float).reshape(n, -1)
    polar = PolyhedralCone(np.vstack([rays.T, lineality.T, -lineality.T]))
    polar_rays, polar_lineality = cone_generators(polar)
    H = np.vstack([polar_rays.T, polar_lineality.T, -polar_lineality.T])
    return PolyhedralCone(H if H.size else np.zeros((0, n)), rays=rays, lineality=lineality)
