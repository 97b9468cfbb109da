import itertools

import numpy as np
from django.test import SimpleTestCase
from rest_framework.exceptions import ValidationError

from geometry.cones import PolyhedralCone, cone_from_generators, cone_generators, intersect_cones, preimage_cone
from geometry.exceptions import DimensionMismatchError, UnsupportedDimensionError
from geometry.fans import face_fan, partition_from_rays, sphere_points
from geometry.serializers import PartitionSerializer, load_partition
from hybrid.systems import Box


def brute_force_facets(points, tol=1e-9):
    """Triples of points whose plane leaves every other point on one side."""
    facets = []
    for triple in itertools.combinations(range(len(points)), 3):
        a, b, c = points[list(triple)]
        normal = np.cross(b - a, c - a)
        if np.linalg.norm(normal) < tol:
            continue
        side = (points - a) @ normal
        if np.all(side <= tol) or np.all(side >= -tol):
            facets.append(triple)
    return facets


def random_simplicial_cone(rng, n=3):
    rays = rng.normal(size=(n, n))
    while abs(np.linalg.det(rays)) < 0.1:
        rays = rng.normal(size=(n, n))
    return cone_from_generators(rays)


def same_columns(a, b, tol=1e-8):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    return all(any(np.linalg.norm(a[:, i] - b[:, j]) <= tol for j in range(b.shape[1])) for i in range(a.shape[1]))


class ConeGeneratorTests(SimpleTestCase):

    def test_negative_orthant(self):
        rays, lineality = cone_generators(PolyhedralCone(np.eye(3)))
        self.assertTrue(same_columns(rays, -np.eye(3)))
        self.assertEqual(lineality.shape, (3, 0))

    def test_collapsed_halfplane(self):
        cone = PolyhedralCone(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]))
        rays, lineality = cone.generators()
        self.assertTrue(same_columns(rays, np.array([[0.0], [-1.0]])))
        self.assertEqual(lineality.shape[1], 0)

    def test_halfspace_has_lineality(self):
        rays, lineality = PolyhedralCone.halfspace([1.0, 0.0, 0.0]).generators()
        self.assertTrue(same_columns(rays, np.array([[-1.0], [0.0], [0.0]])))
        self.assertEqual(lineality.shape[1], 2)
        np.testing.assert_allclose(lineality[0], 0.0, atol=1e-12)

    def test_origin_only(self):
        cone = PolyhedralCone(np.vstack([np.eye(2), -np.eye(2)]))
        self.assertTrue(cone.is_origin_only)
        self.assertEqual(cone.span_dimension(), 0)

    def test_rays_are_feasible_and_distinct(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            H = rng.normal(size=(6, 3))
            cone = PolyhedralCone(H)
            rays, _ = cone.generators()
            if rays.size:
                self.assertLessEqual(np.max(cone.H @ rays), 1e-9)
            for i, j in itertools.combinations(range(rays.shape[1]), 2):
                self.assertGreater(np.linalg.norm(rays[:, i] - rays[:, j]), 1e-8)

    def test_dimension_limit(self):
        with self.assertRaises(UnsupportedDimensionError):
            cone_generators(PolyhedralCone(np.eye(7)))

    def test_h_to_v_to_h_round_trip(self):
        rng = np.random.default_rng(11)
        samples = rng.normal(size=(1000, 3))
        cones = list(face_fan(8, 5).cones[:6]) + [PolyhedralCone(rng.normal(size=(5, 3))) for _ in range(4)]
        for cone in cones:
            rays, lineality = cone.generators()
            rebuilt = cone_from_generators(rays, lineality)
            inside = cone.contains(samples, tol=1e-8)
            margin = np.min(np.abs(samples @ cone.H.T), axis=1) if cone.H.shape[0] else np.ones(1000)
            clear = margin > 1e-6
            np.testing.assert_array_equal(rebuilt.contains(samples, tol=1e-8)[clear], inside[clear])


class PreimageIntersectionTests(SimpleTestCase):

    def test_identity_preimage(self):
        cone = PolyhedralCone(np.eye(2))
        self.assertTrue(np.allclose(preimage_cone(cone, np.eye(2)).H, cone.H))

    def test_permutation_preimage(self):
        image = preimage_cone(PolyhedralCone(np.eye(2)), np.array([[0.0, 1.0], [1.0, 0.0]]))
        self.assertTrue(image.contains([-1.0, -2.0]))
        self.assertFalse(image.contains([1.0, -2.0]))
        np.testing.assert_allclose(image.H, [[0.0, 1.0], [1.0, 0.0]])

    def test_random_preimage_membership(self):
        rng = np.random.default_rng(3)
        cone = PolyhedralCone.halfspace([1.0, 0.0])
        M = rng.normal(size=(3, 2))
        Z = rng.normal(size=(100, 3))
        direct = cone.contains(Z @ M)
        np.testing.assert_array_equal(preimage_cone(cone, M).contains(Z), direct)

    def test_preimage_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            preimage_cone(PolyhedralCone(np.eye(2)), np.eye(3))

    def test_orthant_intersection(self):
        orthant = PolyhedralCone(np.eye(3))
        both = intersect_cones(orthant, orthant)
        self.assertFalse(both.empty_interior)
        self.assertTrue(same_columns(both.generators()[0], -np.eye(3)))

    def test_opposite_halfspaces(self):
        plane = intersect_cones(PolyhedralCone.halfspace([1.0, 0.0]), PolyhedralCone.halfspace([-1.0, 0.0]))
        self.assertTrue(plane.empty_interior)
        self.assertTrue(plane.contains([0.0, 5.0]))
        self.assertFalse(plane.contains([0.1, 5.0]))
        self.assertEqual(plane.span_dimension(), 1)

    def test_irredundant_drops_duplicate_and_implied_rows(self):
        H = np.array([[-1.0, 0.0], [0.0, -1.0], [-1.0, 0.0], [-1.0, -1.0]])
        reduced = PolyhedralCone(H).irredundant()
        self.assertEqual(reduced.H.shape[0], 2)
        Y = np.random.default_rng(3).normal(size=(200, 2))
        np.testing.assert_array_equal(reduced.contains(Y), PolyhedralCone(H).contains(Y))

    def test_irredundant_keeps_flat_cones(self):
        plane = intersect_cones(PolyhedralCone.halfspace([1.0, 0.0]), PolyhedralCone.halfspace([-1.0, 0.0]))
        self.assertIs(plane.irredundant(), plane)

    def test_random_intersection_membership(self):
        rng = np.random.default_rng(5)
        Y = rng.normal(size=(500, 3))
        for _ in range(10):
            a, b = random_simplicial_cone(rng), random_simplicial_cone(rng)
            both = intersect_cones(a, b)
            np.testing.assert_array_equal(both.contains(Y), a.contains(Y) & b.contains(Y))

    def test_box_support_matches_vertex_enumeration(self):
        rng = np.random.default_rng(13)
        for n in (1, 2, 3, 4):
            box = Box.symmetric(np.ones(n))
            Y = rng.normal(size=(50, n))
            by_vertices = np.max(Y @ box.vertices().T, axis=1)
            np.testing.assert_allclose(box.support(Y), by_vertices, atol=1e-12)
            np.testing.assert_allclose(box.support(Y), np.abs(Y).sum(axis=1), atol=1e-12)


class FaceFanTests(SimpleTestCase):

    def test_octahedron(self):
        points = sphere_points(4, 3)
        self.assertEqual(len(points), 6)
        partition = face_fan(4, 3)
        self.assertEqual(len(partition), 8)
        self.assertEqual(len(brute_force_facets(points)), 8)
        for cone in partition.cones:
            rays, _ = cone.generators()
            self.assertEqual(np.count_nonzero(np.abs(rays) > 0.5), 3)
            signs = np.sign(rays.sum(axis=1))
            self.assertTrue(cone.contains(signs))

    def test_octahedron_cone_rays_from_double_description(self):
        partition = face_fan(4, 3)
        for cone in partition.cones:
            computed, _ = cone_generators(cone)
            self.assertTrue(same_columns(computed, cone.rays))

    def test_cone_counts(self):
        self.assertEqual(len(sphere_points(8, 5)), 26)
        self.assertEqual(len(face_fan(8, 5)), 48)
        self.assertEqual(len(face_fan(16, 7)), 160)

    def test_fan_facets_support_the_point_set(self):
        points = sphere_points(8, 5)
        for cone in face_fan(8, 5).cones:
            a, b, c = cone.rays.T
            normal = np.cross(b - a, c - a)
            side = (points - a) @ normal
            self.assertTrue(np.all(side <= 1e-9) or np.all(side >= -1e-9))

    def test_partition_definition(self):
        for m1, m2 in ((4, 3), (8, 5), (16, 7)):
            report = face_fan(m1, m2).check(samples=1000)
            self.assertTrue(report.ok, report.defects)

    def test_adjacency_normals(self):
        partition = face_fan(4, 3)
        self.assertEqual(len(partition.adjacency), 12)
        for adjacency in partition.adjacency:
            inside_i = partition.cones[adjacency.i].interior_point()
            inside_j = partition.cones[adjacency.j].interior_point()
            self.assertLess(adjacency.normal @ inside_i, 0)
            self.assertGreater(adjacency.normal @ inside_j, 0)
            np.testing.assert_allclose(adjacency.normal @ adjacency.basis, 0.0, atol=1e-12)

    def test_locate(self):
        partition = face_fan(8, 5)
        rng = np.random.default_rng(17)
        Y = rng.normal(size=(200, 3))
        found = partition.locate(Y)
        self.assertTrue(np.all(found >= 0))
        for y, index in zip(Y, found):
            self.assertTrue(partition.cones[index].contains(y))

    def test_bad_arguments(self):
        with self.assertRaises(ValueError):
            face_fan(2, 3)
        with self.assertRaises(ValueError):
            face_fan(4, 4)


class PartitionSerializerTests(SimpleTestCase):

    def test_face_fan(self):
        partition = load_partition({'face_fan': [4, 3]})
        self.assertEqual(len(partition), 8)
        self.assertEqual(PartitionSerializer(partition).data, {'face_fan': [4, 3]})

    def test_even_latitude_count_rejected(self):
        serializer = PartitionSerializer(data={'face_fan': [8, 4]})
        self.assertFalse(serializer.is_valid())
        self.assertIn('face_fan', serializer.errors)

    def test_needs_exactly_one_form(self):
        with self.assertRaises(ValidationError):
            load_partition({})
        with self.assertRaises(ValidationError):
            load_partition({'face_fan': [4, 3], 'cones': [{'rays': [[1, 0], [0, 1]]}]})

    def test_quadrants_from_rays(self):
        quadrants = [[[1, 0], [0, 1]], [[0, 1], [-1, 0]], [[-1, 0], [0, -1]], [[0, -1], [1, 0]]]
        partition = load_partition({'cones': [{'rays': rays} for rays in quadrants]})
        self.assertEqual(len(partition), 4)
        self.assertEqual(len(partition.adjacency), 4)
        self.assertTrue(partition.check(samples=500).ok)
        self.assertTrue(partition.cones[0].contains([2.0, 1.0]))
        self.assertFalse(partition.cones[0].contains([-2.0, 1.0]))

    def test_partition_from_rays_matches_serializer(self):
        halves = [[[1, 0], [0, 1], [-1, 0]], [[-1, 0], [0, -1], [1, 0]]]
        partition = partition_from_rays(halves)
        self.assertEqual(len(partition.adjacency), 1)
