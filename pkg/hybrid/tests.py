import json

import numpy as np
from django.test import SimpleTestCase
from rest_framework.exceptions import ValidationError

from hybrid import DATA_DIR
from hybrid.exceptions import ConstrainedInputError, NonFiniteMatrixError
from hybrid.reduction import LiftingMap, hcs_to_has, lift_box_inputs, orth_complement_projector
from hybrid.serializers import dump_system, load_system, read_system_file
from hybrid.systems import (
    AlgebraicNode,
    Automaton,
    Box,
    ControlNode,
    ControlReset,
    HybridAlgebraicSystem,
    HybridControlSystem,
    Transition,
    validate_has,
    validate_hcs,
)


def single_node(A, B, safe, inputs=None):
    return HybridControlSystem(
        automaton=Automaton(nodes=["q"], signals=[]),
        nodes={"q": ControlNode(A=A, B=B, safe_set=safe, input_set=inputs)},
    )


class BoxTests(SimpleTestCase):

    def test_support_matches_vertex_enumeration(self):
        box = Box([-1.0, -2.0, 0.5], [1.0, 3.0, 2.0])
        rng = np.random.default_rng(7)
        for y in rng.normal(size=(50, 3)):
            self.assertAlmostEqual(box.support(y), max(box.vertices() @ y), places=12)

    def test_unit_square_support(self):
        self.assertEqual(Box.symmetric([1.0, 1.0]).support([1.0, 2.0]), 3.0)

    def test_rejects_inverted_bounds(self):
        with self.assertRaises(ValueError):
            Box([1.0], [0.0])

    def test_rejects_empty_box(self):
        with self.assertRaises(ValueError):
            Box([], [])

    def test_product(self):
        box = Box([-1.0], [1.0]).product(Box([0.0], [2.0]))
        self.assertEqual(box, Box([-1.0, 0.0], [1.0, 2.0]))
        self.assertEqual(len(box.vertices()), 4)


class ValidationTests(SimpleTestCase):

    def test_lifted_example_is_valid(self):
        system = read_system_file(DATA_DIR / "double_integrator.lifted.json")
        report = validate_hcs(system)
        self.assertTrue(report.ok, report.messages())
        self.assertEqual(len(system.nodes), 2)
        self.assertEqual(len(system.automaton.transitions), 2)

    def test_safe_set_dimension_mismatch(self):
        system = single_node(np.eye(2), np.ones((2, 1)), Box.symmetric([1.0, 1.0, 1.0]))
        report = validate_hcs(system)
        self.assertFalse(report.ok)
        self.assertIn("safe-set dimension mismatch", report.messages()[0])
        self.assertEqual(report.violations[0].subject, "node 'q'")

    def test_reset_dimension_mismatch(self):
        system = HybridControlSystem(
            automaton=Automaton(nodes=["q"], signals=["s"], transitions=[Transition("q", "s", "q")]),
            nodes={"q": ControlNode(A=np.eye(2), B=np.zeros((2, 0)), safe_set=Box.symmetric([1.0, 1.0]))},
            signals={"s": ControlReset(A=np.ones((2, 3)), B=np.zeros((2, 0)))},
        )
        report = validate_hcs(system)
        self.assertFalse(report.ok)
        self.assertTrue(any("transition q -s-> q" == v.subject for v in report.violations))

    def test_unknown_node_in_transition(self):
        system = HybridControlSystem(
            automaton=Automaton(nodes=["q"], signals=["s"], transitions=[Transition("q", "s", "p")]),
            nodes={"q": ControlNode(A=np.eye(1), B=np.zeros((1, 0)), safe_set=Box.symmetric([1.0]))},
            signals={"s": ControlReset(A=np.eye(1), B=np.zeros((1, 0)))},
        )
        self.assertIn("unknown node", validate_hcs(system).messages()[0])

    def test_algebraic_example_is_valid(self):
        system = read_system_file(DATA_DIR / "double_integrator.algebraic.json")
        self.assertTrue(validate_has(system).ok)
        np.testing.assert_array_equal(system.nodes["mode"].C, [[0, 1, 0], [0, 0, 1]])

    def test_row_count_mismatch(self):
        system = HybridAlgebraicSystem(
            automaton=Automaton(nodes=["q"], signals=[]),
            nodes={"q": AlgebraicNode(C=np.ones((2, 3)), E=np.ones((1, 3)), safe_set=Box.symmetric([1.0] * 3))},
        )
        report = validate_has(system)
        self.assertFalse(report.ok)
        self.assertIn("row count mismatch", report.messages()[0])

    def test_zero_algebraic_rows_are_valid(self):
        system = HybridAlgebraicSystem(
            automaton=Automaton(nodes=["q"], signals=[]),
            nodes={"q": AlgebraicNode(C=None, E=None, safe_set=Box.symmetric([1.0, 1.0]))},
        )
        self.assertTrue(validate_has(system).ok)
        self.assertEqual(system.nodes["q"].C.shape, (0, 2))

    def test_validation_is_deterministic(self):
        system = single_node(np.eye(2), np.ones((3, 1)), Box.symmetric([1.0]))
        self.assertEqual(validate_hcs(system), validate_hcs(system))


class ProjectorTests(SimpleTestCase):

    def test_second_axis_complement(self):
        projector = orth_complement_projector(np.array([[0.0], [1.0]]))
        np.testing.assert_allclose(np.abs(projector.matrix), [[1.0, 0.0]], atol=1e-12)

    def test_third_axis_complement_on_lifted_drift(self):
        projector = orth_complement_projector(np.array([[0.0], [0.0], [1.0]]))
        A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
        C = projector.apply(A)
        np.testing.assert_allclose(C.T @ C, np.array([[0, 1, 0], [0, 0, 1]]).T @ np.array([[0, 1, 0], [0, 0, 1]]),
                                   atol=1e-12)

    def test_full_rank_input_leaves_no_rows(self):
        self.assertEqual(orth_complement_projector(np.eye(3)).matrix.shape, (0, 3))

    def test_zero_input_keeps_everything(self):
        projector = orth_complement_projector(np.zeros((3, 1)))
        np.testing.assert_allclose(projector.matrix.T @ projector.matrix, np.eye(3), atol=1e-12)

    def test_non_finite_input(self):
        with self.assertRaises(NonFiniteMatrixError):
            orth_complement_projector(np.array([[np.nan], [1.0]]))

    def test_random_inputs(self):
        rng = np.random.default_rng(2021)
        for _ in range(200):
            n, m = rng.integers(1, 7), rng.integers(1, 5)
            B = rng.normal(size=(n, m))
            if rng.random() < 0.3 and m > 1:
                B[:, -1] = B[:, 0]
            projector = orth_complement_projector(B)
            rank = np.linalg.matrix_rank(B)
            self.assertEqual(projector.rows, n - rank)
            np.testing.assert_allclose(projector.matrix @ B, 0.0, atol=1e-10)
            np.testing.assert_allclose(projector.matrix @ projector.matrix.T, np.eye(n - rank), atol=1e-10)

    def test_projection_characterizes_reachable_derivatives(self):
        rng = np.random.default_rng(11)
        for trial in range(500):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, n))
            A, B = rng.normal(size=(n, n)), rng.normal(size=(n, m))
            x = rng.normal(size=n)
            y = A @ x + B @ rng.normal(size=m) if trial % 2 else rng.normal(size=n)
            w, *_ = np.linalg.lstsq(B, y - A @ x, rcond=None)
            reachable = np.linalg.norm(A @ x + B @ w - y) <= 1e-8
            projector = orth_complement_projector(B)
            projected = np.linalg.norm(projector.matrix @ y - projector.matrix @ A @ x) <= 1e-8
            self.assertEqual(reachable, projected)


class ReductionTests(SimpleTestCase):

    def setUp(self):
        self.system = read_system_file(DATA_DIR / "double_integrator.json")
        self.lifted = read_system_file(DATA_DIR / "double_integrator.lifted.json")
        self.algebraic = read_system_file(DATA_DIR / "double_integrator.algebraic.json")

    def test_lifting_builds_the_temporary_node(self):
        lifted, lifting = lift_box_inputs(self.system)
        self.assertEqual(lifted, self.lifted)
        self.assertTrue(validate_hcs(lifted).ok)
        self.assertEqual(lifting.state_coordinates("mode"), (0, 1))
        self.assertTrue(lifting.nodes["jump@mode->mode"].temporary)

    def test_reduction_matches_algebraic_system(self):
        reduced = hcs_to_has(self.lifted)
        self.assertEqual(reduced.automaton, self.lifted.automaton)
        for node_id, expected in self.algebraic.nodes.items():
            node = reduced.nodes[node_id]
            np.testing.assert_allclose(node.E.T @ node.E, expected.E.T @ expected.E, atol=1e-12)
            np.testing.assert_allclose(node.E.T @ node.C, expected.E.T @ expected.C, atol=1e-12)
        for signal_id, expected in self.algebraic.signals.items():
            reset = reduced.signals[signal_id]
            np.testing.assert_allclose(reset.E.T @ reset.E, expected.E.T @ expected.E, atol=1e-12)
            np.testing.assert_allclose(reset.E.T @ reset.C, expected.E.T @ expected.C, atol=1e-12)
        self.assertEqual(reduced.nodes["jump@mode->mode"].algebraic_dim, 0)

    def test_reduction_requires_lifting(self):
        with self.assertRaises(ConstrainedInputError):
            hcs_to_has(self.system)

    def test_unconstrained_system_is_unchanged(self):
        system = single_node(np.eye(2), np.zeros((2, 1)), Box.symmetric([1.0, 1.0]))
        lifted, lifting = lift_box_inputs(system)
        self.assertIs(lifted, system)
        self.assertTrue(lifting.is_identity)

    def test_single_node_input_lifting(self):
        system = single_node([[-1.0]], [[2.0]], Box.symmetric([1.0]), Box.symmetric([1.0]))
        lifted, lifting = lift_box_inputs(system)
        node = lifted.nodes["q"]
        self.assertEqual(node.safe_set, Box.symmetric([1.0, 1.0]))
        self.assertIsNone(node.input_set)
        reduced = hcs_to_has(lifted).nodes["q"]
        np.testing.assert_allclose(np.abs(reduced.E), [[1.0, 0.0]], atol=1e-12)
        np.testing.assert_allclose(reduced.C * np.sign(reduced.E[0, 0]), [[-1.0, 2.0]], atol=1e-12)
        self.assertEqual(lifting.nodes["q"].inputs, (1,))

    def test_identity_input_removes_continuous_condition(self):
        reduced = hcs_to_has(single_node(np.eye(2), np.eye(2), Box.symmetric([1.0, 1.0])))
        self.assertEqual(reduced.nodes["q"].algebraic_dim, 0)

    def test_lifting_map_projects_and_serializes(self):
        _, lifting = lift_box_inputs(self.system)
        points = np.array([[0.1, 0.2, 0.3], [1.0, 2.0, 3.0]])
        np.testing.assert_array_equal(lifting.project("mode", points), [[0.1, 0.2], [1.0, 2.0]])
        self.assertEqual(LiftingMap.from_dict(json.loads(json.dumps(lifting.as_dict()))), lifting)


class SerializerTests(SimpleTestCase):

    def test_control_round_trip(self):
        system = read_system_file(DATA_DIR / "double_integrator.json")
        self.assertEqual(load_system(json.loads(json.dumps(dump_system(system)))), system)

    def test_algebraic_round_trip(self):
        system = hcs_to_has(read_system_file(DATA_DIR / "double_integrator.lifted.json"))
        self.assertEqual(load_system(json.loads(json.dumps(dump_system(system)))), system)

    def test_golden_file_is_stable(self):
        path = DATA_DIR / "double_integrator.lifted.json"
        self.assertEqual(dump_system(read_system_file(path)), json.loads(path.read_text()))

    def test_ragged_matrix_is_rejected(self):
        data = json.loads((DATA_DIR / "double_integrator.json").read_text())
        data["nodes"][0]["A"] = [[0.0, 1.0], [0.0]]
        with self.assertRaises(ValidationError) as ctx:
            load_system(data)
        self.assertIn("nodes", ctx.exception.detail)

    def test_bad_box_is_rejected(self):
        data = json.loads((DATA_DIR / "double_integrator.json").read_text())
        data["nodes"][0]["safe_set"] = [[1.0, 1.0], [-1.0, -1.0]]
        with self.assertRaises(ValidationError):
            load_system(data)

    def test_unknown_kind(self):
        with self.assertRaises(ValidationError):
            load_system({"kind": "stochastic", "nodes": []})
