class VerificationError(Exception):
    pass


class PartitionDefectError(VerificationError, ValueError):
    """A direction lies in no cone of a piecewise model's partition."""


class BoundaryDirectionError(VerificationError, ValueError):
    """The gradient of a piecewise model was requested on a cone boundary."""
