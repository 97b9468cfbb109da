"""
Conic partitions of direction space.

A ConicPartition is a list of full-dimensional polyhedral cones that cover R^n
and overlap only on their boundaries. face_fan() builds the partition formed by
the conic hulls of the facets of a polytope whose vertices sample the unit
sphere on a longitude/latitude grid.
"""
import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from geometry.cones import PolyhedralCone, cone_from_generators, intersect_cones
from geometry.exceptions import DegenerateHullError, DimensionMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Adjacency:
    """
    Two cones sharing a facet.

    - basis: n x (n-1) orthonormal basis of the shared facet's span
    - normal: unit normal of the facet, pointing from cone i into cone j
    - rays: n x r columns generating the shared facet as a cone
    """
    i: int
    j: int
    basis: np.ndarray
    normal: np.ndarray
    rays: np.ndarray = None


@dataclass(frozen=True)
class PartitionReport:
    full_dimensional: bool
    covering: bool
    overlap_free: bool
    uncovered: int = 0
    overlapping: int = 0
    samples: int = 0
    defects: Tuple[str, ...] = ()

    @property
    def ok(self):
        return self.full_dimensional and self.covering and self.overlap_free


@dataclass(frozen=True, eq=False)
class ConicPartition:
    cones: Tuple[PolyhedralCone, ...]
    adjacency: Tuple[Adjacency, ...] = ()
    label: str = "custom"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        cones = tuple(self.cones)
        if not cones:
            raise DimensionMismatchError("a partition needs at least one cone")
        dims = {cone.dim for cone in cones}
        if len(dims) != 1:
            raise DimensionMismatchError(f"cones live in different dimensions: {sorted(dims)}")
        object.__setattr__(self, "cones", cones)
        object.__setattr__(self, "adjacency", tuple(self.adjacency))

    @property
    def dim(self):
        return self.cones[0].dim

    def __len__(self):
        return len(self.cones)

    def locate(self, Y, tol=1e-9):
        """Index of the first cone containing each row of Y, -1 when none does."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        found = np.full(Y.shape[0], -1)
        for index, cone in enumerate(self.cones):
            hit = (found < 0) & cone.contains(Y, tol)
            found[hit] = index
        return found

    def containing(self, y, tol=1e-9):
        """All cones containing the single direction y."""
        return [index for index, cone in enumerate(self.cones) if cone.contains(y, tol)]

    def boundary_directions(self):
        """Unit rays shared by the cones, used to place plot samples on kinks."""
        rays = [cone.generators()[0].T for cone in self.cones]
        return np.unique(np.round(np.vstack(rays), 12), axis=0) if rays else np.zeros((0, self.dim))

    def check(self, samples=1000, seed=2021):
        """Sample-based check of full dimensionality, covering and interior overlaps."""
        defects = []
        full = True
        for index, cone in enumerate(self.cones):
            if not cone.has_interior:
                full = False
                defects.append(f"cone {index} has an empty interior")

        rng = np.random.default_rng(seed)
        Y = rng.normal(size=(samples, self.dim))
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        uncovered = int(np.sum(self.locate(Y) < 0))
        if uncovered:
            defects.append(f"{uncovered} sampled directions lie in no cone")

        strict = np.zeros(samples, dtype=int)
        for cone in self.cones:
            if cone.H.shape[0]:
                strict += np.all(Y @ cone.H.T < -1e-7, axis=1)
            else:
                strict += 1
        overlapping = int(np.sum(strict > 1))
        if overlapping:
            defects.append(f"{overlapping} sampled directions lie in the interior of several cones")

        broken = 0
        for adjacency in self.adjacency:
            if np.linalg.matrix_rank(adjacency.basis, tol=1e-8) != self.dim - 1:
                broken += 1
                defects.append(f"cones {adjacency.i} and {adjacency.j} do not share a facet")

        report = PartitionReport(full, uncovered == 0, overlapping == 0 and broken == 0,
                                 uncovered, overlapping, samples, tuple(defects))
        if not report.ok:
            logger.warning("partition=%s defects=%s", self.label, "; ".join(defects))
        return report


def _simplicial_cone(rays):
    """Cone over three rays in R^3 with facet normals oriented outward."""
    normals = []
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        normal = np.cross(rays[a], rays[b])
        if normal @ rays[c] > 0:
            normal = -normal
        normals.append(normal)
    return PolyhedralCone(np.array(normals), rays=np.array(rays).T, lineality=np.zeros((3, 0)), empty_interior=False)


def sphere_points(m1, m2):
    """Longitude/latitude samples of the unit sphere, poles listed once."""
    if m1 < 3:
        raise ValueError(f"m1 must be at least 3, got {m1}")
    if m2 < 3 or m2 % 2 == 0:
        raise ValueError(f"m2 must be odd and at least 3, got {m2}")
    alphas = 2 * np.pi * np.arange(m1) / m1
    betas = np.linspace(-np.pi / 2, np.pi / 2, m2)
    points = [np.array([0.0, 0.0, -1.0])]
    for beta in betas[1:-1]:
        for alpha in alphas:
            points.append(np.array([np.cos(alpha) * np.cos(beta), np.sin(alpha) * np.cos(beta), np.sin(beta)]))
    points.append(np.array([0.0, 0.0, 1.0]))
    points = np.array(points)
    points[np.abs(points) < 1e-15] = 0.0
    return points


def face_fan(m1, m2):
    """
    The fan of conic hulls of the (triangulated) facets of the sphere-sampled polytope.

    (4, 3) gives the octahedron and its 8 orthant cones, (8, 5) gives 48 cones
    and (16, 7) gives 160.
    """
    points = sphere_points(m1, m2)
    try:
        hull = ConvexHull(points)
    except QhullError as exc:
        raise DegenerateHullError(f"convex hull of the sphere samples failed: {exc}") from exc

    simplices = [tuple(int(v) for v in simplex) for simplex in hull.simplices]
    cones = [_simplicial_cone(points[list(simplex)]) for simplex in simplices]

    edges = {}
    for index, simplex in enumerate(simplices):
        for a, b in ((0, 1), (1, 2), (0, 2)):
            key = tuple(sorted((simplex[a], simplex[b])))
            edges.setdefault(key, []).append(index)

    adjacency = []
    for (a, b), owners in sorted(edges.items()):
        if len(owners) != 2:
            raise DegenerateHullError(f"hull edge {(a, b)} belongs to {len(owners)} facets")
        i, j = sorted(owners)
        shared = points[[a, b]].T
        basis, _ = np.linalg.qr(shared)
        normal = np.cross(points[a], points[b])
        normal /= np.linalg.norm(normal)
        third = [v for v in simplices[i] if v not in (a, b)][0]
        if normal @ points[third] > 0:
            normal = -normal
        adjacency.append(Adjacency(i, j, basis, normal, shared))

    logger.debug("face_fan m1=%d m2=%d points=%d cones=%d", m1, m2, len(points), len(cones))
    return ConicPartition(tuple(cones), tuple(adjacency), label=f"face_fan({m1},{m2})")


def compute_adjacency(cones):
    """Facet-sharing pairs of an arbitrary list of full-dimensional cones."""
    adjacency = []
    n = cones[0].dim
    for i in range(len(cones)):
        for j in range(i + 1, len(cones)):
            shared = intersect_cones(cones[i], cones[j])
            rays, lineality = shared.generators()
            generators = np.hstack([rays, lineality])
            if not generators.size or np.linalg.matrix_rank(generators, tol=1e-8) != n - 1:
                continue
            tight = [row for row in cones[i].H if np.all(np.abs(row @ generators) <= 1e-8)]
            if not tight:
                continue
            basis = np.linalg.svd(generators)[0][:, :n - 1]
            adjacency.append(Adjacency(i, j, basis, tight[0], np.hstack([rays, lineality, -lineality])))
    return tuple(adjacency)


def partition_from_rays(ray_sets, label="custom"):
    """Build a partition from per-cone generator lists (rows are rays)."""
    cones = tuple(cone_from_generators(np.asarray(rays, dtype=float).T) for rays in ray_sets)
    return ConicPartition(cones, compute_adjacency(cones), label=label)
