class HybridSystemError(Exception):
    """Base class for errors raised while building or transforming a hybrid system."""


class NonFiniteMatrixError(HybridSystemError, ValueError):
    pass


class ConstrainedInputError(HybridSystemError):
    """An input set is still constrained where only unconstrained inputs are accepted."""

    def __init__(self, subject):
        self.subject = subject
        super().__init__(f"{subject} has a constrained input set, lift it with lift_box_inputs first")


class UnsupportedInputSetError(HybridSystemError):
    pass
