"""
Program builder and the frozen ConicProgram it produces.

Constraint blocks come in three kinds:

- zero: A x + b = 0
- nonneg: A x + b >= 0
- psd: the symmetric matrix whose upper triangle (column-major) is A x + b is PSD

Only the upper triangle of a PSD block is scalarized, so a block is symmetric
by construction.
"""
import hashlib
import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import sparse

from conic.exceptions import DimensionMismatchError, ProgramFinalizedError
from conic.expressions import Affine, AffineMatrix

logger = logging.getLogger(__name__)

ZERO = "zero"
NONNEG = "nonneg"
PSD = "psd"
CONES = (ZERO, NONNEG, PSD)


def upper_triangle(size):
    """(i, j) pairs of the upper triangle in column-major order."""
    return [(i, j) for j in range(size) for i in range(j + 1)]


@dataclass(frozen=True)
class VariableInfo:
    name: str
    kind: str
    shape: Tuple[int, ...]
    offset: int

    @property
    def length(self):
        if self.kind == "symmetric":
            return self.shape[0] * (self.shape[0] + 1) // 2
        return int(np.prod(self.shape)) if self.shape else 1

    def read(self, x):
        chunk = np.asarray(x[self.offset:self.offset + self.length], dtype=float)
        if self.kind == "scalar":
            return float(chunk[0])
        if self.kind == "vector":
            return chunk.copy()
        size = self.shape[0]
        matrix = np.zeros((size, size))
        for value, (i, j) in zip(chunk, upper_triangle(size)):
            matrix[i, j] = matrix[j, i] = value
        return matrix


@dataclass(frozen=True, eq=False)
class ConstraintBlock:
    name: str
    cone: str
    A: sparse.csr_matrix
    b: np.ndarray
    size: int = 0

    @property
    def rows(self):
        return self.A.shape[0]

    def residual(self, x):
        """Largest violation of this block at x (0 when satisfied)."""
        values = self.A @ x + self.b
        if self.cone == ZERO:
            return float(np.max(np.abs(values), initial=0.0))
        if self.cone == NONNEG:
            return float(max(0.0, -np.min(values, initial=0.0)))
        matrix = np.zeros((self.size, self.size))
        for value, (i, j) in zip(values, upper_triangle(self.size)):
            matrix[i, j] = matrix[j, i] = value
        return float(max(0.0, -np.linalg.eigvalsh(matrix)[0]))


@dataclass(frozen=True, eq=False)
class ConicProgram:
    """
    A finalized program: maximize c^T x + c0 subject to the constraint blocks.
    """
    variables: Dict[str, VariableInfo]
    num_vars: int
    blocks: Tuple[ConstraintBlock, ...]
    objective: np.ndarray
    objective_constant: float
    sense: str = "maximize"

    def variable(self, name):
        return self.variables[name]

    def read(self, name, x):
        return self.variables[name].read(x)

    def objective_value(self, x):
        return float(self.objective @ x + self.objective_constant)

    def primal_residual(self, x):
        x = np.asarray(x, dtype=float)
        return max((block.residual(x) for block in self.blocks), default=0.0)

    def dump(self):
        """Sparse triplet text; identical programs produce identical text."""
        lines = [f"program vars={self.num_vars} blocks={len(self.blocks)} sense={self.sense}"]
        for info in self.variables.values():
            shape = "x".join(str(s) for s in info.shape) or "1"
            lines.append(f"var {info.name} {info.kind} {shape} @{info.offset}")
        lines.append(f"objective constant={self.objective_constant!r}")
        for j in np.flatnonzero(self.objective):
            lines.append(f"c {j} {float(self.objective[j])!r}")
        for number, block in enumerate(self.blocks):
            lines.append(f"block {number} {block.cone} rows={block.rows} size={block.size} name={block.name}")
            coo = block.A.tocoo()
            for i, j, v in sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())):
                lines.append(f"a {i} {j} {v!r}")
            for i in np.flatnonzero(block.b):
                lines.append(f"b {i} {float(block.b[i])!r}")
        return "\n".join(lines) + "\n"

    @property
    def fingerprint(self):
        return hashlib.sha256(self.dump().encode("utf-8")).hexdigest()

    def summary(self):
        counts = {cone: sum(1 for b in self.blocks if b.cone == cone) for cone in CONES}
        return {"variables": self.num_vars, "blocks": len(self.blocks), **counts}


class ProgramBuilder:
    """
    Single-writer builder for a ConicProgram.

    Variables are returned as expressions (Affine for scalars, a list of Affine
    for vectors, AffineMatrix for symmetric matrices) so constraints can be
    written with ordinary arithmetic.
    """

    def __init__(self):
        self._variables = {}
        self._num_vars = 0
        self._blocks = []
        self._objective = Affine()
        self._sense = "maximize"
        self._finalized = False
        self._names = {}

    def _check_open(self):
        if self._finalized:
            raise ProgramFinalizedError()

    def _register(self, name, kind, shape, length):
        self._check_open()
        if name in self._variables:
            raise ValueError(f"variable {name!r} already exists")
        info = VariableInfo(name, kind, tuple(shape), self._num_vars)
        self._variables[name] = info
        self._num_vars += length
        return info

    def _unique(self, prefix):
        count = self._names.get(prefix, 0)
        self._names[prefix] = count + 1
        return f"{prefix}{count}"

    @property
    def num_vars(self):
        return self._num_vars

    def add_scalar(self, name, lower=None):
        info = self._register(name, "scalar", (), 1)
        variable = Affine({info.offset: 1.0})
        if lower is not None:
            self.add_linear([variable - lower], NONNEG, name=f"{name}>=")
        return variable

    def add_vector(self, name, size):
        info = self._register(name, "vector", (size,), size)
        return [Affine({info.offset + k: 1.0}) for k in range(size)]

    def add_symmetric(self, name, size):
        info = self._register(name, "symmetric", (size, size), size * (size + 1) // 2)
        terms = {}
        for k, (i, j) in enumerate(upper_triangle(size)):
            unit = np.zeros((size, size))
            unit[i, j] = unit[j, i] = 1.0
            terms[info.offset + k] = unit
        return AffineMatrix(np.zeros((size, size)), terms)

    def add_psd_matrix(self, name, size):
        matrix = self.add_symmetric(name, size)
        if size:
            self.add_psd(matrix, name=f"{name}>>0")
        return matrix

    def add_linear(self, rows, cone, name=None):
        """Constrain each Affine in rows to the zero or nonnegative cone."""
        self._check_open()
        if cone not in (ZERO, NONNEG):
            raise ValueError(f"unknown linear cone {cone!r}")
        rows = [Affine.lift(row) for row in rows]
        if not rows:
            return
        self._append(name or self._unique(cone), cone, rows, 0)

    def add_equal(self, left, right, name=None):
        self.add_linear([Affine.lift(left) - right], ZERO, name=name)

    def add_le(self, left, right, name=None):
        self.add_linear([Affine.lift(right) - left], NONNEG, name=name)

    def add_psd(self, matrix, name=None):
        self._check_open()
        matrix = AffineMatrix.lift(matrix)
        rows, cols = matrix.shape
        if rows != cols:
            raise DimensionMismatchError(f"PSD block must be square, got {matrix.shape}")
        if rows == 0:
            return
        sym = matrix.symmetrized()
        entries = [sym.entry(i, j) for i, j in upper_triangle(rows)]
        self._append(name or self._unique(PSD), PSD, entries, rows)

    def add_elementwise_nonneg(self, matrix, name=None, symmetric=True):
        matrix = AffineMatrix.lift(matrix)
        if symmetric:
            entries = [matrix.entry(i, j) for i, j in upper_triangle(matrix.shape[0])]
        else:
            entries = [matrix.entry(i, j) for i in range(matrix.shape[0]) for j in range(matrix.shape[1])]
        self.add_linear(entries, NONNEG, name=name)

    def add_matrix_equal(self, left, right, name=None):
        difference = AffineMatrix.lift(left) - right
        rows, cols = difference.shape
        if rows == cols:
            entries = [difference.entry(i, j) for i, j in upper_triangle(rows)]
        else:
            entries = [difference.entry(i, j) for i in range(rows) for j in range(cols)]
        self.add_linear(entries, ZERO, name=name)

    def _append(self, name, cone, rows, size):
        data, row_index, col_index = [], [], []
        b = np.zeros(len(rows))
        for r, expr in enumerate(rows):
            b[r] = expr.constant
            for k, v in sorted(expr.terms.items()):
                if k >= self._num_vars:
                    raise DimensionMismatchError(f"expression references unknown variable x{k}")
                data.append(v)
                row_index.append(r)
                col_index.append(k)
        self._blocks.append((name, cone, data, row_index, col_index, b, size))

    def set_objective(self, expression, sense="maximize"):
        self._check_open()
        if sense not in ("maximize", "minimize"):
            raise ValueError(f"unknown objective sense {sense!r}")
        self._objective = Affine.lift(expression)
        self._sense = sense

    def build(self):
        self._check_open()
        self._finalized = True
        n = self._num_vars
        blocks = tuple(
            ConstraintBlock(name, cone, sparse.csr_matrix((data, (rows, cols)), shape=(len(b), n)), b, size)
            for name, cone, data, rows, cols, b, size in self._blocks
        )
        objective = np.zeros(n)
        for k, v in self._objective.terms.items():
            objective[k] = v
        program = ConicProgram(dict(self._variables), n, blocks, objective, self._objective.constant, self._sense)
        logger.debug("built program %s", program.summary())
        return program
