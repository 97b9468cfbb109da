class GeometryError(Exception):
    pass


class DimensionMismatchError(GeometryError, ValueError):
    pass


class DegenerateHullError(GeometryError, ValueError):
    pass


class UnsupportedDimensionError(GeometryError, ValueError):
    pass


class DegenerateConeError(GeometryError, RuntimeError):
    pass
