"""
Certificates emitted into a ProgramBuilder.

- emit_sos: p is a sum of squares, p(y) = b(y)^T G b(y) with G PSD
- emit_sos_convexity: v^T hess p(y) v is a sum of squares in (y, v)
- emit_cone_quadratic: z^T M z <= 0 for every z in a polyhedral cone, by the
  S-procedure in H-representation (M + G^T L G NSD, L >= 0 entrywise) or in
  generator form (-K^T M K = S + N, S PSD, N >= 0 on the ray block)
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from conic.expressions import Affine, AffineMatrix
from conic.program import ZERO
from polysos.exceptions import MissingHRepError, OddDegreeError, PolynomialError
from polysos.polynomials import HomogeneousPoly, hessian_form, monomials

logger = logging.getLogger(__name__)

HREP = "hrep"
VREP = "vrep"
CERTIFICATE_FORMS = (HREP, VREP)


@dataclass(frozen=True, eq=False)
class GramConstraint:
    """
    - basis: exponent tuples (in the target's variables) of the Gram basis b(y)
    - gram: the PSD matrix variable, None when the target is identically zero
    - equations: number of coefficient-matching equalities emitted
    """
    name: str
    basis: Tuple[Tuple[int, ...], ...]
    gram: Optional[AffineMatrix]
    equations: int

    def gram_value(self, x):
        return self.gram.value(x) if self.gram is not None else np.zeros((0, 0))


@dataclass(frozen=True, eq=False)
class ConeQuadraticCertificate:
    name: str
    form: str
    matrix: AffineMatrix
    H: np.ndarray
    multiplier: Optional[AffineMatrix] = None
    slack: Optional[AffineMatrix] = None

    def quadratic_value(self, x, Z):
        """z^T M z at the solved point x for the rows of Z."""
        M = self.matrix.value(x)
        Z = np.atleast_2d(Z)
        return np.einsum("ij,jk,ik->i", Z, M, Z)


def _embed(exponent, positions, nvars):
    wide = [0] * nvars
    for i, e in zip(positions, exponent):
        wide[i] = e
    return tuple(wide)


def _match_gram(builder, target, basis, name):
    """Gram matrix over `basis` whose quadratic form equals `target` coefficientwise."""
    gram = builder.add_psd_matrix(name, len(basis))
    products = defaultdict(list)
    for i, left in enumerate(basis):
        for j, right in enumerate(basis):
            products[tuple(a + b for a, b in zip(left, right))].append((i, j))
    rows = []
    for exponent in sorted(set(products) | set(target.coeffs), reverse=True):
        total = Affine()
        for i, j in products.get(exponent, ()):
            total = total + gram.entry(i, j)
        rows.append(total - target.coefficient(exponent))
    builder.add_linear(rows, ZERO, name=f"{name}=coeffs")
    return gram, len(rows)


def emit_sos(builder, p, name="sos"):
    """Constrain p (coefficients affine in the decision variables) to be a sum of squares."""
    if p.degree % 2:
        raise OddDegreeError(p.degree)
    if not p.coeffs:
        return GramConstraint(name, (), None, 0)
    support = p.support_variables
    basis = tuple(_embed(m, support, p.nvars) for m in monomials(len(support), p.degree // 2))
    gram, equations = _match_gram(builder, p, basis, name)
    logger.debug("sos name=%s degree=%d basis=%d equations=%d", name, p.degree, len(basis), equations)
    return GramConstraint(name, basis, gram, equations)


def emit_sos_convexity(builder, p, name="sosconvex"):
    """Constrain the Hessian form v^T hess p(y) v to be a sum of squares in (y, v)."""
    if p.degree % 2:
        raise OddDegreeError(p.degree)
    if p.degree < 2:
        raise PolynomialError(f"convexity certificates need degree >= 2, got {p.degree}")
    n = p.nvars
    form = hessian_form(p)
    if not form.coeffs:
        return GramConstraint(name, (), None, 0)
    support = p.support_variables
    basis = []
    for i in support:
        for m in monomials(len(support), p.degree // 2 - 1):
            exponent = list(_embed(m, support, 2 * n))
            exponent[n + i] += 1
            basis.append(tuple(exponent))
    basis = tuple(basis)
    gram, equations = _match_gram(builder, form, basis, name)
    logger.debug("sos-convexity name=%s degree=%d basis=%d equations=%d", name, p.degree, len(basis), equations)
    return GramConstraint(name, basis, gram, equations)


def emit_cone_quadratic(builder, M, cone, name="copos", form=HREP):
    """
    Require z^T M z <= 0 for all z in `cone` with a sufficient LMI.

    M is a square AffineMatrix (or a constant array) acting on the cone's
    ambient space.
    """
    M = AffineMatrix.lift(M)
    if form not in CERTIFICATE_FORMS:
        raise ValueError(f"unknown certificate form {form!r}, expected one of {CERTIFICATE_FORMS}")
    H = getattr(cone, "H", None)
    if H is None:
        raise MissingHRepError(f"certificate {name} needs a cone with an H-representation")
    if M.shape != (cone.dim, cone.dim):
        raise PolynomialError(f"matrix of shape {M.shape} does not act on R^{cone.dim}")

    if form == VREP:
        return _emit_generator_form(builder, M, cone, name)

    if H.shape[0] == 0:
        builder.add_psd(-M, name=name)
        return ConeQuadraticCertificate(name, form, M, H)
    multiplier = builder.add_symmetric(f"{name}.lambda", H.shape[0])
    builder.add_elementwise_nonneg(multiplier, name=f"{name}.lambda>=0")
    builder.add_psd(-(M + multiplier.congruence(H.T)), name=name)
    return ConeQuadraticCertificate(name, form, M, H, multiplier=multiplier)


def _emit_generator_form(builder, M, cone, name):
    rays, lineality = cone.generators()
    K = np.hstack([rays, lineality])
    if K.shape[1] == 0:
        return ConeQuadraticCertificate(name, VREP, M, cone.H)
    slack = builder.add_psd_matrix(f"{name}.S", K.shape[1])
    rhs = slack
    if rays.shape[1]:
        nonneg = builder.add_symmetric(f"{name}.N", rays.shape[1])
        builder.add_elementwise_nonneg(nonneg, name=f"{name}.N>=0")
        J = np.eye(K.shape[1])[:, :rays.shape[1]]
        rhs = slack + nonneg.congruence(J)
    builder.add_matrix_equal(-M.congruence(K.T), rhs, name=name)
    return ConeQuadraticCertificate(name, VREP, M, cone.H, slack=slack)


def gram_polynomial(constraint, x, nvars):
    """b(y)^T G b(y) at the solved point, for checking a certificate."""
    G = constraint.gram_value(x)
    coeffs = defaultdict(float)
    for i, left in enumerate(constraint.basis):
        for j, right in enumerate(constraint.basis):
            coeffs[tuple(a + b for a, b in zip(left, right))] += G[i, j]
    degree = 2 * sum(constraint.basis[0]) if constraint.basis else 0
    return HomogeneousPoly(nvars, degree, coeffs)
