import json

import numpy as np
from django.test import SimpleTestCase

from geometry.cones import PolyhedralCone
from geometry.fans import ConicPartition, face_fan
from hybrid.systems import AlgebraicNode, AlgebraicReset, Automaton, Box, HybridAlgebraicSystem, Transition
from polysos.polynomials import HomogeneousPoly
from verify.checks import (
    audit_convexity,
    check_box_inclusion,
    check_homogeneity,
    check_inclusion,
    check_invariance,
    check_polytope_inclusion,
    sample_directions,
    verify_models,
)
from verify.exceptions import BoundaryDirectionError, PartitionDefectError
from verify.support import (
    EllipsoidModel,
    PiecewiseModel,
    PolysetModel,
    model_from_dict,
    support_gradient,
    support_value,
)


def quartic_model():
    return PolysetModel(HomogeneousPoly(2, 4, {(4, 0): 1.0, (2, 2): 0.5, (0, 4): 2.0}))


def piecewise_ball():
    partition = face_fan(4, 3)
    return PiecewiseModel(partition, [np.eye(3)] * len(partition))


def single_node(C, E, box=None):
    box = box or Box.symmetric(np.ones(np.shape(C)[1]))
    return HybridAlgebraicSystem(Automaton(("q",), ()), {"q": AlgebraicNode(C, E, box)}, {})


def interior_directions(model, count, seed):
    """Random unit directions, none of them on a cone boundary of a piecewise model."""
    Y = sample_directions(model.dim, count, seed)
    if isinstance(model, PiecewiseModel):
        Y = np.array([y for y in Y if len(model.containing_pieces(y)) == 1])
    return Y


class SupportValueTests(SimpleTestCase):

    def test_euclidean_norm(self):
        self.assertAlmostEqual(support_value(EllipsoidModel(np.eye(2)), [3.0, 4.0]), 5.0)

    def test_quartic(self):
        model = PolysetModel(HomogeneousPoly(2, 4, {(4, 0): 1.0, (0, 4): 1.0}))
        self.assertAlmostEqual(support_value(model, [1.0, 0.0]), 1.0)

    def test_box_support(self):
        self.assertEqual(Box.symmetric([1.0, 1.0]).support(np.array([1.0, 2.0])), 3.0)

    def test_piecewise_matches_ball(self):
        model = piecewise_ball()
        Y = np.random.default_rng(1).normal(size=(50, 3))
        np.testing.assert_allclose(model.value(Y), np.linalg.norm(Y, axis=1), rtol=1e-12)

    def test_direction_in_no_cone(self):
        quadrant = ConicPartition((PolyhedralCone(np.eye(2)),))
        model = PiecewiseModel(quadrant, [np.eye(2)])
        self.assertAlmostEqual(model.value([-1.0, -1.0]), np.sqrt(2.0))
        with self.assertRaises(PartitionDefectError):
            model.value([1.0, 0.5])


class SupportGradientTests(SimpleTestCase):

    def test_unit_ball_exposed_point(self):
        np.testing.assert_allclose(support_gradient(EllipsoidModel(np.eye(2)), [0.0, 2.0]), [0.0, 1.0])

    def test_boundary_direction(self):
        with self.assertRaises(BoundaryDirectionError):
            piecewise_ball().gradient([1.0, 0.0, 0.0])

    def test_finite_differences_and_euler(self):
        rng = np.random.default_rng(2)
        root = rng.normal(size=(3, 3))
        models = [EllipsoidModel(root @ root.T + np.eye(3)), quartic_model(), piecewise_ball()]
        step = 1e-6
        for model in models:
            for y in interior_directions(model, 100, 3):
                grad = model.gradient(y)
                numeric = np.array([
                    (model.value(y + step * e) - model.value(y - step * e)) / (2 * step) for e in np.eye(model.dim)
                ])
                self.assertLess(np.linalg.norm(grad - numeric) / np.linalg.norm(grad), 1e-6, model.kind)
                self.assertAlmostEqual(float(y @ grad), model.value(y), places=8)

    def test_linear_image_of_ellipsoid(self):
        rng = np.random.default_rng(4)
        root = rng.normal(size=(2, 2))
        P = root @ root.T + 0.1 * np.eye(2)
        A = rng.normal(size=(2, 2))
        theta = np.linspace(0, 2 * np.pi, 100000, endpoint=False)
        points = np.column_stack([np.cos(theta), np.sin(theta)]) @ np.linalg.cholesky(P).T
        image = points @ A.T
        model = EllipsoidModel(P)
        for y in rng.normal(size=(20, 2)):
            self.assertAlmostEqual(np.max(image @ y), model.value(A.T @ y), delta=1e-6)

    def test_primal_matrix(self):
        P = np.diag([4.0, 0.25])
        np.testing.assert_allclose(EllipsoidModel(P).primal_matrix(), np.diag([0.25, 4.0]))

    def test_round_trip(self):
        for model in (EllipsoidModel(np.diag([1.0, 2.0])), quartic_model(), piecewise_ball()):
            rebuilt = model_from_dict(model.as_dict())
            Y = np.random.default_rng(5).normal(size=(20, model.dim))
            np.testing.assert_allclose(rebuilt.value(Y), model.value(Y))


class InvarianceCheckTests(SimpleTestCase):

    def test_unstable_node_is_reported(self):
        system = single_node(np.eye(2), np.eye(2))
        report = check_invariance(system, {"q": EllipsoidModel(np.eye(2))}, n_dirs=500)
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.max_violation, 1.0, places=6)

    def test_stable_node_passes(self):
        system = single_node(-np.eye(2), np.eye(2))
        report = check_invariance(system, {"q": EllipsoidModel(np.eye(2))}, n_dirs=500)
        self.assertTrue(report.passed)

    def test_no_algebraic_rows_is_vacuous(self):
        system = single_node(np.zeros((0, 2)), np.zeros((0, 2)))
        report = check_invariance(system, {"q": EllipsoidModel(np.eye(2))})
        self.assertTrue(report.passed)
        self.assertEqual(report.results[0].samples, 0)

    def test_transition_condition(self):
        box = Box.symmetric([1.0, 1.0])
        shrink = AlgebraicReset(np.eye(2), 2 * np.eye(2))
        grow = AlgebraicReset(2 * np.eye(2), np.eye(2))
        for reset, passed in ((shrink, True), (grow, False)):
            system = HybridAlgebraicSystem(
                Automaton(("q",), ("s",), (Transition("q", "s", "q"),)),
                {"q": AlgebraicNode(np.zeros((0, 2)), np.zeros((0, 2)), box)},
                {"s": reset},
            )
            report = check_invariance(system, {"q": EllipsoidModel(np.eye(2))}, n_dirs=200)
            self.assertEqual(report.passed, passed)

    def test_piecewise_node_checks_every_containing_piece(self):
        system = single_node(-np.eye(3), np.eye(3))
        report = check_invariance(system, {"q": piecewise_ball()}, n_dirs=200)
        self.assertTrue(report.passed)


class InclusionCheckTests(SimpleTestCase):

    def test_unit_ball_in_unit_box(self):
        result = check_box_inclusion(EllipsoidModel(np.eye(2)), Box.symmetric([1.0, 1.0]))
        self.assertTrue(result.passed)
        self.assertEqual(result.max_violation, 0.0)

    def test_box_not_containing_the_set(self):
        result = check_inclusion(EllipsoidModel(np.eye(2)), Box([-1.0, 0.5], [1.0, 1.0]))
        self.assertFalse(result.passed)
        self.assertAlmostEqual(result.max_violation, 1.5)

    def test_failed_box_report_is_plain_json(self):
        shrunk = Box(np.array([-0.5, -0.5]), np.array([0.5, 0.5]))
        report = verify_models(single_node(np.zeros((0, 2)), np.zeros((0, 2)), shrunk),
                               {"q": EllipsoidModel(np.eye(2))}, n_dirs=10)
        result = report.results[-1]
        self.assertIs(type(result.passed), bool)
        self.assertIs(type(result.max_violation), float)
        decoded = json.loads(json.dumps(report.as_dict()))
        self.assertFalse(decoded["passed"])
        self.assertEqual(decoded["conditions"][-1]["condition"], "safe-set")

    def test_scaled_polytope(self):
        square = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
        model = EllipsoidModel(np.eye(3))
        gamma = 1.0 / np.sqrt(2.0)
        self.assertTrue(check_polytope_inclusion(model, square, gamma, (0, 1), n_dirs=2000).passed)
        inflated = check_inclusion(model, (square, 1.05 * gamma, (0, 1)), n_dirs=2000)
        self.assertFalse(inflated.passed)

    def test_full_gate(self):
        system = single_node(-np.eye(2), np.eye(2))
        objective = ("q", np.array([[1.0, 0.0], [-1.0, 0.0]]), 1.0, (0, 1))
        report = verify_models(system, {"q": EllipsoidModel(np.eye(2))}, objective, n_dirs=500)
        self.assertTrue(report.passed)
        self.assertEqual([r.condition for r in report.results], ["node", "safe-set", "objective"])
        self.assertTrue(report.as_dict()["passed"])


class ShapeAuditTests(SimpleTestCase):

    def test_homogeneity(self):
        for model in (EllipsoidModel(np.diag([1.0, 3.0])), quartic_model(), piecewise_ball()):
            self.assertTrue(check_homogeneity(model).passed, model.kind)

    def test_convexity(self):
        for model in (EllipsoidModel(np.diag([1.0, 3.0])), quartic_model(), piecewise_ball()):
            self.assertTrue(audit_convexity(model, samples=2000).passed, model.kind)

    def test_non_convex_piecewise_fails_audit(self):
        partition = face_fan(4, 3)
        matrices = [np.eye(3) * (4.0 if cone.contains([1.0, 1.0, 1.0]) else 1.0) for cone in partition.cones]
        model = PiecewiseModel(partition, matrices)
        self.assertFalse(audit_convexity(model, samples=2000).passed)

    def test_directions_are_reproducible(self):
        np.testing.assert_array_equal(sample_directions(3, 10, 7), sample_directions(3, 10, 7))
        np.testing.assert_allclose(np.linalg.norm(sample_directions(3, 10, 7), axis=1), 1.0)
