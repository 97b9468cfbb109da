import numpy as np
from django.test import SimpleTestCase

from conic.expressions import AffineMatrix
from conic.program import ProgramBuilder
from conic.solvers import INFEASIBLE, NUMERICAL_FAILURE, OPTIMAL, solve
from geometry.cones import PolyhedralCone
from polysos.certificates import (
    HREP,
    VREP,
    emit_cone_quadratic,
    emit_sos,
    emit_sos_convexity,
    gram_polynomial,
)
from polysos.exceptions import OddDegreeError, PolynomialError
from polysos.polynomials import (
    HomogeneousPoly,
    compose_linear,
    gradient,
    hessian_form,
    lie_polynomial,
    monomials,
)


def poly(nvars, degree, terms):
    return HomogeneousPoly(nvars, degree, terms)


def random_poly(rng, nvars, degree):
    return HomogeneousPoly(nvars, degree, {m: rng.normal() for m in monomials(nvars, degree)})


class PolynomialTests(SimpleTestCase):

    def test_monomial_order(self):
        self.assertEqual(monomials(2, 2), ((2, 0), (1, 1), (0, 2)))
        self.assertEqual(len(monomials(3, 4)), 15)
        self.assertEqual(monomials(0, 0), ((),))

    def test_zero_coefficients_pruned(self):
        p = poly(2, 2, {(2, 0): 1.0, (0, 2): 0.0})
        self.assertEqual(list(p.coeffs), [(2, 0)])
        with self.assertRaises(PolynomialError):
            poly(2, 2, {(1, 0): 1.0})

    def test_compose_permutation(self):
        p = poly(2, 4, {(4, 0): 1.0, (0, 4): 1.0})
        swapped = compose_linear(p, np.array([[0.0, 1.0], [1.0, 0.0]]))
        self.assertTrue(swapped.isclose(p))

    def test_compose_binomial(self):
        p = poly(1, 2, {(2,): 1.0})
        result = compose_linear(p, np.array([[1.0], [1.0]]))
        self.assertTrue(result.isclose(poly(2, 2, {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0})))

    def test_compose_matches_evaluation(self):
        rng = np.random.default_rng(1)
        p = random_poly(rng, 3, 4)
        M = rng.normal(size=(2, 3))
        Y = rng.normal(size=(100, 2))
        composed = compose_linear(p, M)
        np.testing.assert_allclose(composed.evaluate(Y), p.evaluate(Y @ M), rtol=1e-10, atol=1e-10)

    def test_gradient_examples(self):
        grad = gradient(poly(2, 4, {(4, 0): 1.0, (0, 4): 1.0}))
        self.assertTrue(grad[0].isclose(poly(2, 3, {(3, 0): 4.0})))
        self.assertTrue(grad[1].isclose(poly(2, 3, {(0, 3): 4.0})))
        grad = gradient(poly(2, 4, {(2, 2): 1.0}))
        self.assertTrue(grad[0].isclose(poly(2, 3, {(1, 2): 2.0})))
        self.assertTrue(grad[1].isclose(poly(2, 3, {(2, 1): 2.0})))

    def test_gradient_finite_differences(self):
        rng = np.random.default_rng(2)
        step = 1e-5
        for trial in range(100):
            nvars = 1 + trial % 3
            degree = 2 * (1 + trial % 4)
            p = random_poly(rng, nvars, degree)
            grad = gradient(p)
            for y in rng.normal(size=(3, nvars)):
                exact = np.array([g.evaluate(y) for g in grad])
                numeric = np.array([
                    (p.evaluate(y + step * e) - p.evaluate(y - step * e)) / (2 * step) for e in np.eye(nvars)
                ])
                scale = max(np.linalg.norm(exact), 1.0)
                self.assertLess(np.linalg.norm(exact - numeric) / scale, 1e-6)

    def test_euler_identity(self):
        rng = np.random.default_rng(3)
        for degree in (2, 4, 6):
            p = random_poly(rng, 3, degree)
            y = rng.normal(size=3)
            euler = sum(y[i] * g.evaluate(y) for i, g in enumerate(gradient(p)))
            self.assertAlmostEqual(euler, degree * p.evaluate(y), places=8)

    def test_lie_isotropic_flow(self):
        p = poly(2, 2, {(2, 0): 1.0, (0, 2): 1.0})
        q = lie_polynomial(p, -np.eye(2), np.eye(2))
        self.assertTrue(q.isclose(poly(2, 2, {(2, 0): -2.0, (0, 2): -2.0})))

    def test_lie_double_integrator_node(self):
        p = poly(3, 2, {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0})
        C = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        E = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        q = lie_polynomial(p, C, E)
        self.assertTrue(q.isclose(poly(2, 2, {(1, 1): 2.0})))

    def test_lie_zero_drift(self):
        rng = np.random.default_rng(4)
        q = lie_polynomial(random_poly(rng, 3, 4), np.zeros((2, 3)), rng.normal(size=(2, 3)))
        self.assertEqual(q.coeffs, {})

    def test_hessian_form(self):
        p = poly(2, 4, {(2, 2): 1.0})
        form = hessian_form(p)
        rng = np.random.default_rng(5)
        y, v = rng.normal(size=2), rng.normal(size=2)
        hessian = np.array([[2 * y[1] ** 2, 4 * y[0] * y[1]], [4 * y[0] * y[1], 2 * y[0] ** 2]])
        self.assertAlmostEqual(form.evaluate(np.concatenate([y, v])), v @ hessian @ v, places=10)

    def test_serialized_coefficients(self):
        p = poly(2, 2, {(2, 0): 1.5, (1, 1): -2.0})
        self.assertEqual(p.as_dict(), {"2,0": 1.5, "1,1": -2.0})
        self.assertTrue(HomogeneousPoly.from_dict(2, 2, p.as_dict()).isclose(p))


def feasibility(emit):
    builder = ProgramBuilder()
    emit(builder)
    return solve(builder.build())


class SosTests(SimpleTestCase):

    def test_square_of_monomial(self):
        solution = feasibility(lambda b: emit_sos(b, poly(2, 4, {(2, 2): 1.0})))
        self.assertEqual(solution.status, OPTIMAL)

    def test_binomial_square_has_rank_one_gram(self):
        builder = ProgramBuilder()
        constraint = emit_sos(builder, poly(2, 2, {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0}))
        solution = solve(builder.build())
        self.assertEqual(solution.status, OPTIMAL)
        eigenvalues = np.linalg.eigvalsh(constraint.gram_value(solution.x))
        self.assertLess(eigenvalues[0], 1e-6)
        self.assertAlmostEqual(eigenvalues[1], 2.0, places=5)

    def test_motzkin_is_rejected(self):
        motzkin = poly(3, 6, {(4, 2, 0): 1.0, (2, 4, 0): 1.0, (2, 2, 2): -3.0, (0, 0, 6): 1.0})
        solution = feasibility(lambda b: emit_sos(b, motzkin))
        self.assertIn(solution.status, (INFEASIBLE, NUMERICAL_FAILURE))

    def test_odd_degree(self):
        with self.assertRaises(OddDegreeError):
            emit_sos(ProgramBuilder(), poly(2, 3, {(3, 0): 1.0}))

    def test_only_support_variables_enter_the_basis(self):
        builder = ProgramBuilder()
        constraint = emit_sos(builder, poly(3, 2, {(2, 0, 0): 1.0}))
        self.assertEqual(constraint.basis, ((1, 0, 0),))

    def test_feasible_gram_is_pointwise_nonnegative(self):
        builder = ProgramBuilder()
        c = builder.add_scalar("c")
        target = poly(2, 4, {(4, 0): 1.0, (0, 4): 1.0}) + poly(2, 4, {(2, 2): 1.0}) * c
        constraint = emit_sos(builder, target)
        builder.set_objective(c, "minimize")
        solution = solve(builder.build())
        self.assertEqual(solution.status, OPTIMAL)
        self.assertAlmostEqual(solution.value("c"), -2.0, places=4)
        reconstructed = gram_polynomial(constraint, solution.x, 2)
        Y = np.random.default_rng(6).normal(size=(1000, 2))
        self.assertGreaterEqual(np.min(reconstructed.evaluate(Y)), -1e-7)
        self.assertGreaterEqual(np.min(target.substitute(solution.x).evaluate(Y)), -1e-7)


class SosConvexityTests(SimpleTestCase):

    def test_squared_norm(self):
        p = poly(2, 4, {(4, 0): 1.0, (2, 2): 2.0, (0, 4): 1.0})
        self.assertEqual(feasibility(lambda b: emit_sos_convexity(b, p)).status, OPTIMAL)

    def test_separable_quartic(self):
        p = poly(2, 4, {(4, 0): 1.0, (0, 4): 1.0})
        self.assertEqual(feasibility(lambda b: emit_sos_convexity(b, p)).status, OPTIMAL)

    def test_indefinite_hessian_is_rejected(self):
        p = poly(2, 4, {(4, 0): 1.0, (2, 2): -6.0, (0, 4): 1.0})
        hessian = np.array([[12 - 12, -24], [-24, 12 - 12]])
        self.assertLess(np.linalg.eigvalsh(hessian)[0], 0)
        self.assertEqual(feasibility(lambda b: emit_sos_convexity(b, p)).status, INFEASIBLE)

    def test_quadratic(self):
        builder = ProgramBuilder()
        constraint = emit_sos_convexity(builder, poly(2, 2, {(2, 0): 1.0, (0, 2): 3.0}))
        self.assertEqual(constraint.basis, ((0, 0, 1, 0), (0, 0, 0, 1)))


class ConeQuadraticTests(SimpleTestCase):

    def test_off_diagonal_on_orthant(self):
        M = np.array([[0.0, -1.0], [-1.0, 0.0]])
        for form in (HREP, VREP):
            solution = feasibility(lambda b: emit_cone_quadratic(b, M, PolyhedralCone(np.eye(2)), form=form))
            self.assertEqual(solution.status, OPTIMAL, form)

    def test_negative_definite_on_any_cone(self):
        cone = PolyhedralCone(np.random.default_rng(7).normal(size=(4, 3)))
        solution = feasibility(lambda b: emit_cone_quadratic(b, -np.eye(3), cone))
        self.assertEqual(solution.status, OPTIMAL)

    def test_identity_on_full_space(self):
        solution = feasibility(lambda b: emit_cone_quadratic(b, np.eye(2), PolyhedralCone.full_space(2)))
        self.assertEqual(solution.status, INFEASIBLE)

    def test_shape_mismatch(self):
        with self.assertRaises(PolynomialError):
            emit_cone_quadratic(ProgramBuilder(), np.eye(3), PolyhedralCone(np.eye(2)))

    def test_unknown_form(self):
        with self.assertRaises(ValueError):
            emit_cone_quadratic(ProgramBuilder(), np.eye(2), PolyhedralCone(np.eye(2)), form="dual")

    def test_certificate_soundness(self):
        base = np.array([[-1.0, 2.0], [2.0, -1.0]])
        for form in (HREP, VREP):
            builder = ProgramBuilder()
            s = builder.add_scalar("s")
            M = AffineMatrix(base) + AffineMatrix(np.zeros((2, 2)), {0: np.eye(2)})
            cone = PolyhedralCone(np.eye(2))
            certificate = emit_cone_quadratic(builder, M, cone, form=form)
            builder.set_objective(s)
            solution = solve(builder.build())
            self.assertEqual(solution.status, OPTIMAL, form)
            self.assertAlmostEqual(solution.value("s"), -1.0, places=4)
            Z = -np.abs(np.random.default_rng(8).normal(size=(1000, 2)))
            Z /= np.linalg.norm(Z, axis=1, keepdims=True)
            self.assertLessEqual(np.max(certificate.quadratic_value(solution.x, Z)), 1e-7)
