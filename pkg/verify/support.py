"""
Support functions of the solved sets.

Each model evaluates h(y|S) and its gradient (the exposed point of S in
direction y) for a batch of directions given as the rows of Y:

- EllipsoidModel: h(y) = sqrt(y^T P y)
- PolysetModel: h(y) = p(y)^(1/2d)
- PiecewiseModel: h(y) = sqrt(y^T P_i y) on the cone P_i containing y
"""
import numpy as np

from geometry.serializers import PartitionSerializer, load_partition
from polysos.polynomials import HomogeneousPoly, gradient
from verify.exceptions import BoundaryDirectionError, PartitionDefectError, VerificationError

BOUNDARY_TOL = 1e-9


def _batch(Y, dim):
    Y = np.asarray(Y, dtype=float)
    single = Y.ndim == 1
    Y = np.atleast_2d(Y)
    if Y.shape[1] != dim:
        raise VerificationError(f"directions have {Y.shape[1]} coordinates, the model lives in R^{dim}")
    return Y, single


def _unbatch(values, single):
    if single:
        return float(values[0]) if values.ndim == 1 else values[0]
    return values


class SupportFunctionModel:
    kind = None

    @property
    def dim(self):
        raise NotImplementedError

    def value(self, Y):
        raise NotImplementedError

    def gradient(self, Y):
        raise NotImplementedError

    def as_dict(self):
        raise NotImplementedError


class EllipsoidModel(SupportFunctionModel):
    kind = "ellipsoid"

    def __init__(self, P):
        self.P = np.asarray(P, dtype=float)

    @property
    def dim(self):
        return self.P.shape[0]

    def value(self, Y):
        Y, single = _batch(Y, self.dim)
        squares = np.einsum("ij,jk,ik->i", Y, self.P, Y)
        return _unbatch(np.sqrt(np.maximum(squares, 0.0)), single)

    def gradient(self, Y):
        Y, single = _batch(Y, self.dim)
        h = np.atleast_1d(self.value(Y))
        with np.errstate(divide="ignore", invalid="ignore"):
            grads = (Y @ self.P) / h[:, None]
        return _unbatch(grads, single)

    def primal_matrix(self):
        """Q with S = {x : x^T Q^-1 x <= 1}, i.e. the inverse of the polar matrix P."""
        return np.linalg.pinv(self.P, hermitian=True)

    def as_dict(self):
        return {"kind": self.kind, "P": self.P.tolist()}


class PolysetModel(SupportFunctionModel):
    kind = "polyset"

    def __init__(self, p):
        if not p.is_numeric:
            raise VerificationError("a polyset model needs numeric coefficients")
        self.p = p
        self._gradient = gradient(p)

    @property
    def dim(self):
        return self.p.nvars

    @property
    def degree(self):
        return self.p.degree

    def value(self, Y):
        Y, single = _batch(Y, self.dim)
        values = np.maximum(np.atleast_1d(self.p.evaluate(Y)), 0.0)
        return _unbatch(values ** (1.0 / self.degree), single)

    def gradient(self, Y):
        Y, single = _batch(Y, self.dim)
        p = np.maximum(np.atleast_1d(self.p.evaluate(Y)), 0.0)
        grad_p = np.column_stack([np.atleast_1d(g.evaluate(Y)) for g in self._gradient])
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = p ** (1.0 / self.degree - 1.0) / self.degree
        return _unbatch(grad_p * scale[:, None], single)

    def as_dict(self):
        return {"kind": self.kind, "degree": self.degree, "nvars": self.dim, "coefficients": self.p.as_dict()}


class PiecewiseModel(SupportFunctionModel):
    kind = "piecewise"

    def __init__(self, partition, matrices):
        self.partition = partition
        self.matrices = [np.asarray(P, dtype=float) for P in matrices]
        if len(self.matrices) != len(partition):
            raise VerificationError(f"{len(self.matrices)} matrices for {len(partition)} cones")

    @property
    def dim(self):
        return self.partition.dim

    def _locate(self, Y):
        found = self.partition.locate(Y, tol=BOUNDARY_TOL)
        if np.any(found < 0):
            raise PartitionDefectError(f"{int(np.sum(found < 0))} directions lie in no cone of the partition")
        return found

    def piece_value(self, index, Y):
        Y = np.atleast_2d(Y)
        return np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", Y, self.matrices[index], Y), 0.0))

    def piece_gradient(self, index, Y):
        Y = np.atleast_2d(Y)
        h = self.piece_value(index, Y)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (Y @ self.matrices[index]) / h[:, None]

    def value(self, Y):
        Y, single = _batch(Y, self.dim)
        found = self._locate(Y)
        values = np.empty(len(Y))
        for index in np.unique(found):
            rows = found == index
            values[rows] = self.piece_value(index, Y[rows])
        return _unbatch(values, single)

    def gradient(self, Y):
        Y, single = _batch(Y, self.dim)
        found = self._locate(Y)
        for y in Y:
            if len(self.partition.containing(y, tol=BOUNDARY_TOL)) > 1:
                raise BoundaryDirectionError(f"direction {y.tolist()} lies on a cone boundary")
        grads = np.empty_like(Y)
        for index in np.unique(found):
            rows = found == index
            grads[rows] = self.piece_gradient(index, Y[rows])
        return _unbatch(grads, single)

    def containing_pieces(self, y):
        return self.partition.containing(y, tol=BOUNDARY_TOL)

    def as_dict(self):
        return {
            "kind": self.kind,
            "partition": dict(PartitionSerializer(self.partition).data),
            "matrices": [P.tolist() for P in self.matrices],
        }


def support_value(model, y):
    return model.value(y)


def support_gradient(model, y):
    return model.gradient(y)


def model_from_dict(data):
    """Inverse of the models' as_dict()."""
    kind = data.get("kind")
    if kind == EllipsoidModel.kind:
        return EllipsoidModel(data["P"])
    if kind == PolysetModel.kind:
        return PolysetModel(HomogeneousPoly.from_dict(data["nvars"], data["degree"], data["coefficients"]))
    if kind == PiecewiseModel.kind:
        return PiecewiseModel(load_partition(data["partition"]), data["matrices"])
    raise VerificationError(f"unknown model kind {kind!r}")
