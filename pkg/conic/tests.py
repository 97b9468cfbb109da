import numpy as np
from django.test import SimpleTestCase

from conic.exceptions import DimensionMismatchError, ProgramFinalizedError, SolverOptionError, SolverUnavailableError
from conic.expressions import Affine, AffineMatrix
from conic.program import NONNEG, ZERO, ProgramBuilder
from conic.solvers import INFEASIBLE, OPTIMAL, UNBOUNDED, CvxpySolver, SolverOptions, solve


class ExpressionTests(SimpleTestCase):

    def test_affine_arithmetic(self):
        a = Affine({0: 1.0}, 2.0)
        b = Affine({1: 3.0})
        expr = 2 * a - b + 1
        self.assertEqual(expr.terms, {0: 2.0, 1: -3.0})
        self.assertEqual(expr.constant, 5.0)
        self.assertEqual((a - a).terms, {})

    def test_numpy_scalars_defer_to_affine(self):
        expr = np.float64(2.0) * Affine({0: 1.0})
        self.assertIsInstance(expr, Affine)
        self.assertEqual(expr.terms, {0: 2.0})

    def test_scalar_times_matrix(self):
        scaled = Affine({0: 2.0}, 1.0) * np.eye(2)
        self.assertIsInstance(scaled, AffineMatrix)
        np.testing.assert_array_equal(scaled.value(np.array([3.0])), 7 * np.eye(2))
        self.assertIsInstance(np.eye(2) * Affine({0: 1.0}), AffineMatrix)

    def test_non_affine_product_is_rejected(self):
        with self.assertRaises(TypeError):
            Affine({0: 1.0}) * Affine({1: 1.0})

    def test_congruence(self):
        builder = ProgramBuilder()
        P = builder.add_symmetric("P", 2)
        L = np.array([[1.0, 1.0]])
        x = np.array([1.0, 2.0, 3.0])
        value = P.congruence(L).value(x)
        np.testing.assert_allclose(value, L @ P.value(x) @ L.T)
        self.assertEqual(P.value(x).tolist(), [[1.0, 2.0], [2.0, 3.0]])

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            AffineMatrix.zeros(2) + AffineMatrix.zeros(3)


class BuilderTests(SimpleTestCase):

    def test_use_after_build(self):
        builder = ProgramBuilder()
        s = builder.add_scalar("s")
        builder.build()
        with self.assertRaises(ProgramFinalizedError):
            builder.add_le(s, 3)
        with self.assertRaises(ProgramFinalizedError):
            builder.build()

    def test_unknown_variable(self):
        with self.assertRaises(DimensionMismatchError):
            ProgramBuilder().add_linear([Affine({4: 1.0})], NONNEG)

    def test_non_square_psd(self):
        with self.assertRaises(DimensionMismatchError):
            ProgramBuilder().add_psd(AffineMatrix(np.zeros((2, 3))))

    def test_psd_block_reads_back_symmetric(self):
        builder = ProgramBuilder()
        builder.add_psd_matrix("P", 3)
        program = builder.build()
        matrix = program.read("P", np.arange(6.0))
        np.testing.assert_array_equal(matrix, matrix.T)

    def test_dump_is_deterministic(self):
        def assemble():
            builder = ProgramBuilder()
            s = builder.add_scalar("s")
            P = builder.add_psd_matrix("P", 2)
            builder.add_psd(P - s * np.outer([1, 1], [1, 1]))
            builder.add_le(P.entry(0, 0), 1)
            builder.set_objective(s)
            return builder.build()

        first, second = assemble(), assemble()
        self.assertEqual(first.dump(), second.dump())
        self.assertEqual(first.fingerprint, second.fingerprint)
        self.assertIn("block 0 psd", first.dump())

    def test_primal_residual(self):
        builder = ProgramBuilder()
        s = builder.add_scalar("s")
        builder.add_linear([s - 1], ZERO)
        program = builder.build()
        self.assertEqual(program.primal_residual(np.array([1.0])), 0.0)
        self.assertAlmostEqual(program.primal_residual(np.array([3.0])), 2.0)


class SolverOptionTests(SimpleTestCase):

    def test_pairs(self):
        options = SolverOptions.parse_pairs(["max_iters=50", "feas_tol=1e-6", "solver=scs"])
        self.assertEqual(options, {"max_iters": 50, "feas_tol": 1e-6, "solver": "scs"})
        parsed = SolverOptions.from_mapping(options)
        self.assertEqual(parsed.solver, "SCS")
        self.assertEqual(parsed.solver_kwargs()["eps_abs"], 1e-6)

    def test_clarabel_names(self):
        kwargs = SolverOptions(gap_tol=1e-7).solver_kwargs()
        self.assertEqual(kwargs["tol_gap_abs"], 1e-7)
        self.assertEqual(kwargs["tol_gap_rel"], 1e-7)
        self.assertEqual(kwargs["max_iter"], 500)

    def test_bad_pair(self):
        with self.assertRaises(SolverOptionError):
            SolverOptions.parse_pairs(["max_iters"])

    def test_unknown_key(self):
        with self.assertRaises(SolverOptionError) as cm:
            SolverOptions.from_mapping({"feas_tl": 1e-3})
        self.assertIn("feas_tl", str(cm.exception))
        with self.assertRaises(SolverOptionError):
            SolverOptions().merged({"eps_abs": 1e-3})

    def test_bad_value(self):
        with self.assertRaises(SolverOptionError):
            SolverOptions.from_mapping({"max_iters": "many"})
        with self.assertRaises(SolverOptionError):
            SolverOptions.from_mapping({"feas_tol": -1})

    def test_missing_solver(self):
        builder = ProgramBuilder()
        builder.add_scalar("s")
        with self.assertRaises(SolverUnavailableError):
            CvxpySolver(SolverOptions(solver="NOT_A_SOLVER")).solve(builder.build())


class SolveTests(SimpleTestCase):

    def test_scalar_bound(self):
        builder = ProgramBuilder()
        s = builder.add_scalar("s")
        builder.add_le(s, 3)
        builder.set_objective(s)
        solution = solve(builder.build())
        self.assertEqual(solution.status, OPTIMAL)
        self.assertAlmostEqual(solution.objective, 3.0, places=6)
        self.assertAlmostEqual(solution.value("s"), 3.0, places=6)

    def test_correlation_bound(self):
        builder = ProgramBuilder()
        P = builder.add_psd_matrix("P", 2)
        builder.add_equal(P.entry(0, 0), 1)
        builder.add_equal(P.entry(1, 1), 1)
        builder.set_objective(P.entry(0, 1))
        solution = solve(builder.build())
        self.assertEqual(solution.status, OPTIMAL)
        self.assertAlmostEqual(solution.objective, 1.0, places=5)

    def test_rank_one_lower_bound(self):
        builder = ProgramBuilder()
        s = builder.add_scalar("s")
        P = builder.add_psd_matrix("P", 2)
        v = np.array([1.0, 1.0])
        builder.add_psd(P - s * np.outer(v, v))
        builder.add_le(P.entry(0, 0), 1)
        builder.add_le(P.entry(1, 1), 1)
        builder.set_objective(s)
        program = builder.build()
        solution = solve(program)
        self.assertEqual(solution.status, OPTIMAL)
        self.assertAlmostEqual(solution.objective, 1.0, places=5)
        np.testing.assert_allclose(solution.value("P"), np.ones((2, 2)), atol=1e-4)
        self.assertLess(program.primal_residual(solution.x), 1e-6)

    def test_infeasible(self):
        builder = ProgramBuilder()
        s = builder.add_scalar("s")
        builder.add_le(s, 0)
        builder.add_le(1, s)
        builder.set_objective(s)
        solution = solve(builder.build())
        self.assertEqual(solution.status, INFEASIBLE)
        self.assertEqual(solution.values, {})

    def test_unbounded(self):
        builder = ProgramBuilder()
        s = builder.add_scalar("s", lower=0)
        builder.set_objective(s)
        self.assertEqual(solve(builder.build()).status, UNBOUNDED)
