"""
Affine expressions over the scalarized decision vector.

An Affine is constant + sum_k coef_k * x_k. An AffineMatrix is
constant + sum_k x_k * T_k with dense coefficient matrices, which keeps
congruences L M L^T and products L M R cheap for the small matrices that show
up here.
"""
from numbers import Real

import numpy as np

from conic.exceptions import DimensionMismatchError


def _prune(terms):
    return {k: v for k, v in terms.items() if v != 0}


class Affine:
    __slots__ = ("terms", "constant")
    __array_ufunc__ = None

    def __init__(self, terms=None, constant=0.0):
        self.terms = _prune(dict(terms or {}))
        self.constant = float(constant)

    @classmethod
    def lift(cls, value):
        if isinstance(value, Affine):
            return value
        if isinstance(value, Real):
            return cls(constant=value)
        raise TypeError(f"cannot use {type(value).__name__} as an affine expression")

    @property
    def is_constant(self):
        return not self.terms

    def __add__(self, other):
        if isinstance(other, AffineMatrix):
            return NotImplemented
        other = Affine.lift(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0.0) + v
        return Affine(terms, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self):
        return Affine({k: -v for k, v in self.terms.items()}, -self.constant)

    def __sub__(self, other):
        return self + (-Affine.lift(other))

    def __rsub__(self, other):
        return Affine.lift(other) - self

    def __mul__(self, other):
        if isinstance(other, Affine):
            if other.is_constant:
                other = other.constant
            elif self.is_constant:
                return other * self.constant
            else:
                raise TypeError("product of two non-constant affine expressions is not affine")
        if isinstance(other, np.ndarray) and other.ndim == 2:
            return AffineMatrix(self.constant * other, {k: v * other for k, v in self.terms.items()})
        if not isinstance(other, Real):
            return NotImplemented
        other = float(other)
        return Affine({k: v * other for k, v in self.terms.items()}, self.constant * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1.0 / float(other))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self.constant + sum(v * x[k] for k, v in self.terms.items())

    def __eq__(self, other):
        if isinstance(other, Real):
            other = Affine(constant=other)
        if not isinstance(other, Affine):
            return NotImplemented
        return self.terms == other.terms and self.constant == other.constant

    __hash__ = None

    def __repr__(self):
        parts = [f"{v:+g}*x{k}" for k, v in sorted(self.terms.items())]
        return f"Affine({' '.join(parts)} {self.constant:+g})"


class AffineMatrix:
    """A matrix-valued affine expression; shapes are checked on every operation."""
    __slots__ = ("constant", "terms")
    __array_ufunc__ = None

    def __init__(self, constant, terms=None):
        self.constant = np.array(constant, dtype=float)
        if self.constant.ndim != 2:
            raise DimensionMismatchError(f"expected a matrix, got shape {self.constant.shape}")
        self.terms = {}
        for k, matrix in (terms or {}).items():
            matrix = np.asarray(matrix, dtype=float)
            if matrix.shape != self.constant.shape:
                raise DimensionMismatchError(f"term shape {matrix.shape} != {self.constant.shape}")
            if np.any(matrix):
                self.terms[k] = matrix

    @classmethod
    def lift(cls, value, shape=None):
        if isinstance(value, AffineMatrix):
            return value
        value = np.asarray(value, dtype=float)
        if value.ndim == 0 and shape is not None:
            value = np.full(shape, float(value))
        return cls(value)

    @classmethod
    def zeros(cls, rows, cols=None):
        return cls(np.zeros((rows, rows if cols is None else cols)))

    @property
    def shape(self):
        return self.constant.shape

    def _combine(self, other, sign):
        other = AffineMatrix.lift(other, self.shape)
        if other.shape != self.shape:
            raise DimensionMismatchError(f"cannot combine {self.shape} and {other.shape}")
        terms = {k: m.copy() for k, m in self.terms.items()}
        for k, m in other.terms.items():
            terms[k] = terms[k] + sign * m if k in terms else sign * m
        return AffineMatrix(self.constant + sign * other.constant, terms)

    def __add__(self, other):
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __rsub__(self, other):
        return AffineMatrix.lift(other, self.shape)._combine(self, -1.0)

    def __neg__(self):
        return AffineMatrix(-self.constant, {k: -m for k, m in self.terms.items()})

    def __mul__(self, scalar):
        if isinstance(scalar, Affine):
            if not scalar.is_constant:
                raise TypeError("product of two non-constant affine expressions is not affine")
            scalar = scalar.constant
        if not isinstance(scalar, Real):
            return NotImplemented
        return AffineMatrix(self.constant * scalar, {k: m * scalar for k, m in self.terms.items()})

    __rmul__ = __mul__

    def left_right(self, L, R):
        """L M R with constant matrices L and R."""
        L, R = np.atleast_2d(np.asarray(L, dtype=float)), np.atleast_2d(np.asarray(R, dtype=float))
        if L.shape[1] != self.shape[0] or R.shape[0] != self.shape[1]:
            raise DimensionMismatchError(f"cannot form {L.shape} x {self.shape} x {R.shape}")
        return AffineMatrix(L @ self.constant @ R, {k: L @ m @ R for k, m in self.terms.items()})

    def congruence(self, L):
        """L M L^T."""
        L = np.atleast_2d(np.asarray(L, dtype=float))
        return self.left_right(L, L.T)

    @property
    def T(self):
        return AffineMatrix(self.constant.T, {k: m.T for k, m in self.terms.items()})

    def symmetrized(self):
        return (self + self.T) * 0.5

    def submatrix(self, rows, cols=None):
        rows = list(rows)
        cols = rows if cols is None else list(cols)
        index = np.ix_(rows, cols)
        return AffineMatrix(self.constant[index], {k: m[index] for k, m in self.terms.items()})

    def entry(self, i, j):
        return Affine({k: m[i, j] for k, m in self.terms.items()}, self.constant[i, j])

    def quadratic_form(self, v):
        """v^T M v as an Affine, for a constant vector v."""
        v = np.asarray(v, dtype=float)
        return Affine({k: float(v @ m @ v) for k, m in self.terms.items()}, float(v @ self.constant @ v))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        result = self.constant.copy()
        for k, m in self.terms.items():
            result += x[k] * m
        return result

    def __repr__(self):
        return f"AffineMatrix(shape={self.shape}, variables={sorted(self.terms)})"
