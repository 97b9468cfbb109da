class PolynomialError(Exception):
    pass


class OddDegreeError(PolynomialError):
    def __init__(self, degree):
        self.degree = degree
        super().__init__(f"a sum-of-squares certificate needs an even degree, got {degree}")


class MissingHRepError(PolynomialError):
    pass
