"""Exception types raised across the package."""


class SpincError(Exception):
    """Base class for all package errors."""


class DegenerateForm(SpincError, ValueError):
    """A 2-form is (numerically) zero where a nowhere-zero form is required."""

    def __init__(self, message, site=None):
        super().__init__(message)
        self.site = site


class ShapeMismatch(SpincError, ValueError):
    pass


class ZeroField(SpincError, ValueError):
    pass


class NonQuantizedFlux(SpincError, ValueError):
    pass


class NotConverged(SpincError, RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class AntipodalEdge(SpincError, ValueError):
    """Two adjacent sphere-map images are (nearly) antipodal."""


class NonIntegerDegree(SpincError, ValueError):
    pass


class CorruptHeader(SpincError, ValueError):
    pass


class LengthMismatch(SpincError, ValueError):
    pass


class UnsupportedVersion(SpincError, ValueError):
    pass
