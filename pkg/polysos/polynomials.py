"""
Homogeneous polynomials with sparse coefficient maps.

Coefficients are either floats or conic.expressions.Affine, so the same class
holds both numeric polynomials and polynomials whose coefficients are
decision variables. Products are only formed when at most one side has
variable coefficients, which keeps every coefficient affine.

Monomials are exponent tuples; monomials(n, d) lists them in graded
lexicographic order, the order used for Gram bases and for every program
built from a polynomial.
"""
from functools import lru_cache
from numbers import Real

import numpy as np

from conic.expressions import Affine
from polysos.exceptions import PolynomialError


@lru_cache(maxsize=None)
def monomials(nvars, degree):
    """Exponent tuples of total degree `degree` in `nvars` variables, graded lex order."""
    if nvars == 0:
        return ((),) if degree == 0 else ()
    if nvars == 1:
        return ((degree,),)
    result = []
    for first in range(degree, -1, -1):
        for rest in monomials(nvars - 1, degree - first):
            result.append((first,) + rest)
    return tuple(result)


def _is_zero(value):
    if isinstance(value, Affine):
        return value.is_constant and value.constant == 0
    return value == 0


def _add_exponents(a, b):
    return tuple(x + y for x, y in zip(a, b))


class HomogeneousPoly:
    __slots__ = ("nvars", "degree", "coeffs")
    __array_ufunc__ = None

    def __init__(self, nvars, degree, coeffs=None):
        self.nvars = int(nvars)
        self.degree = int(degree)
        clean = {}
        for exponent, value in (coeffs or {}).items():
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != self.nvars or sum(exponent) != self.degree or min(exponent, default=0) < 0:
                raise PolynomialError(f"exponent {exponent} does not fit {self.nvars} variables of degree {self.degree}")
            if not isinstance(value, Affine):
                value = float(value)
            if not _is_zero(value):
                clean[exponent] = value
        self.coeffs = clean

    @classmethod
    def zero(cls, nvars, degree):
        return cls(nvars, degree)

    @classmethod
    def linear_form(cls, v):
        v = np.asarray(v, dtype=float).ravel()
        n = v.size
        return cls(n, 1, {tuple(int(i == j) for j in range(n)): v[i] for i in range(n)})

    @classmethod
    def quadratic_form(cls, Q):
        Q = np.asarray(Q, dtype=float)
        n = Q.shape[0]
        coeffs = {}
        for i in range(n):
            for j in range(n):
                exponent = [0] * n
                exponent[i] += 1
                exponent[j] += 1
                exponent = tuple(exponent)
                coeffs[exponent] = coeffs.get(exponent, 0.0) + Q[i, j]
        return cls(n, 2, coeffs)

    @property
    def is_numeric(self):
        return not any(isinstance(c, Affine) for c in self.coeffs.values())

    @property
    def support_variables(self):
        """Indices of the variables that appear in some monomial."""
        used = set()
        for exponent in self.coeffs:
            used.update(i for i, e in enumerate(exponent) if e)
        return tuple(sorted(used))

    def coefficient(self, exponent):
        return self.coeffs.get(tuple(exponent), 0.0)

    def _check_compatible(self, other):
        if (self.nvars, self.degree) != (other.nvars, other.degree):
            raise PolynomialError(
                f"cannot combine ({self.nvars} vars, degree {self.degree}) with ({other.nvars} vars, degree {other.degree})"
            )

    def __add__(self, other):
        if not isinstance(other, HomogeneousPoly):
            return NotImplemented
        self._check_compatible(other)
        coeffs = dict(self.coeffs)
        for exponent, value in other.coeffs.items():
            coeffs[exponent] = coeffs[exponent] + value if exponent in coeffs else value
        return HomogeneousPoly(self.nvars, self.degree, coeffs)

    def __neg__(self):
        return HomogeneousPoly(self.nvars, self.degree, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, HomogeneousPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (Real, Affine)):
            return HomogeneousPoly(self.nvars, self.degree, {e: c * other for e, c in self.coeffs.items()})
        if not isinstance(other, HomogeneousPoly):
            return NotImplemented
        if self.nvars != other.nvars:
            raise PolynomialError(f"cannot multiply polynomials in {self.nvars} and {other.nvars} variables")
        if not (self.is_numeric or other.is_numeric):
            raise PolynomialError("product of two polynomials with variable coefficients is not affine")
        coeffs = {}
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                exponent = _add_exponents(ea, eb)
                term = ca * cb
                coeffs[exponent] = coeffs[exponent] + term if exponent in coeffs else term
        return HomogeneousPoly(self.nvars, self.degree + other.degree, coeffs)

    __rmul__ = __mul__

    def power(self, k):
        if k < 0:
            raise PolynomialError("negative powers are not polynomials")
        result = HomogeneousPoly(self.nvars, 0, {(0,) * self.nvars: 1.0})
        for _ in range(k):
            result = result * self
        return result

    def derivative(self, i):
        if self.degree == 0:
            return HomogeneousPoly(self.nvars, 0)
        coeffs = {}
        for exponent, value in self.coeffs.items():
            if exponent[i]:
                lowered = list(exponent)
                lowered[i] -= 1
                coeffs[tuple(lowered)] = value * exponent[i]
        return HomogeneousPoly(self.nvars, self.degree - 1, coeffs)

    def evaluate(self, Y):
        """Evaluate a numeric polynomial at the rows of Y (or at a single point)."""
        if not self.is_numeric:
            raise PolynomialError("evaluate() needs numeric coefficients, use substitute() first")
        Y = np.asarray(Y, dtype=float)
        if not self.coeffs:
            return np.zeros(Y.shape[:-1]) if Y.ndim > 1 else 0.0
        exponents = np.array(list(self.coeffs), dtype=float)
        values = np.array(list(self.coeffs.values()))
        powers = np.prod(Y[..., None, :] ** exponents, axis=-1)
        result = powers @ values
        return float(result) if np.ndim(result) == 0 else result

    def value_at(self, y):
        """Affine value of the polynomial at a fixed point y."""
        y = np.asarray(y, dtype=float)
        total = Affine()
        for exponent, value in self.coeffs.items():
            total = total + value * float(np.prod(y ** np.array(exponent)))
        return total

    def substitute(self, x):
        """Replace variable coefficients by their values in the decision vector x."""
        return HomogeneousPoly(self.nvars, self.degree, {
            e: (c.value(x) if isinstance(c, Affine) else c) for e, c in self.coeffs.items()
        })

    def embed(self, nvars, positions):
        """The same polynomial in a larger variable set; variable i becomes positions[i]."""
        coeffs = {}
        for exponent, value in self.coeffs.items():
            wide = [0] * nvars
            for i, e in zip(positions, exponent):
                wide[i] = e
            coeffs[tuple(wide)] = value
        return HomogeneousPoly(nvars, self.degree, coeffs)

    def isclose(self, other, tol=1e-9):
        if not isinstance(other, HomogeneousPoly) or (self.nvars, self.degree) != (other.nvars, other.degree):
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self.coefficient(k) - other.coefficient(k)) <= tol for k in keys)

    def as_dict(self):
        """Exponent strings to coefficients, for solution files."""
        return {",".join(str(e) for e in exponent): float(value)
                for exponent, value in sorted(self.coeffs.items(), reverse=True)}

    @classmethod
    def from_dict(cls, nvars, degree, data):
        return cls(nvars, degree, {tuple(int(e) for e in key.split(",")): value for key, value in data.items()})

    def __repr__(self):
        return f"HomogeneousPoly(nvars={self.nvars}, degree={self.degree}, terms={len(self.coeffs)})"


def compose_linear(p, M):
    """
    y -> p(M^T y) for M of shape (r, k) and p in k variables; the result is in r variables.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    r, k = M.shape
    if k != p.nvars:
        raise PolynomialError(f"matrix has {k} columns but the polynomial has {p.nvars} variables")
    forms = [HomogeneousPoly.linear_form(M[:, i]) if r else None for i in range(k)]
    cache = {}

    def form_power(i, e):
        if (i, e) not in cache:
            cache[(i, e)] = forms[i].power(e) if r else None
        return cache[(i, e)]

    result = HomogeneousPoly(r, p.degree)
    if r == 0:
        return result
    for exponent, value in p.coeffs.items():
        term = HomogeneousPoly(r, 0, {(0,) * r: 1.0})
        for i, e in enumerate(exponent):
            if e:
                term = term * form_power(i, e)
        result = result + term * value
    return result


def gradient(p):
    if p.degree < 1:
        raise PolynomialError("the gradient needs degree >= 1")
    return [p.derivative(i) for i in range(p.nvars)]


def lie_polynomial(p, C, E):
    """q(z) = z^T C grad p(E^T z), homogeneous of degree deg(p) in the rows of C."""
    C, E = np.atleast_2d(np.asarray(C, dtype=float)), np.atleast_2d(np.asarray(E, dtype=float))
    if C.shape != E.shape:
        raise PolynomialError(f"C {C.shape} and E {E.shape} must have the same shape")
    if C.shape[1] != p.nvars:
        raise PolynomialError(f"C has {C.shape[1]} columns but the polynomial has {p.nvars} variables")
    rows = C.shape[0]
    result = HomogeneousPoly(rows, p.degree)
    if rows == 0:
        return result
    for i, partial in enumerate(gradient(p)):
        if not np.any(C[:, i]) or not partial.coeffs:
            continue
        result = result + HomogeneousPoly.linear_form(C[:, i]) * compose_linear(partial, E)
    return result


def hessian_form(p):
    """v^T hess p(y) v as a polynomial in (y, v): variables 0..n-1 are y, n..2n-1 are v."""
    n = p.nvars
    if p.degree < 2:
        return HomogeneousPoly(2 * n, p.degree)
    result = HomogeneousPoly(2 * n, p.degree)
    for i in range(n):
        first = p.derivative(i)
        for j in range(n):
            second = first.derivative(j)
            if not second.coeffs:
                continue
            v_part = [0] * n
            v_part[i] += 1
            v_part[j] += 1
            coeffs = {exponent + tuple(v_part): value for exponent, value in second.coeffs.items()}
            result = result + HomogeneousPoly(2 * n, p.degree, coeffs)
    return result
