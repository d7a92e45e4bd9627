"""Exception types shared across the package."""


class ShapeMismatch(ValueError):
    """Operands have incompatible dimensions or symbol states."""


class SingularMatrix(ArithmeticError):
    """A coding or coefficient matrix is not invertible."""


class MalformedHeader(ValueError):
    """A packed coefficient header cannot be decoded."""


class InvalidParameter(ValueError):
    """A scheme, field or channel parameter is outside its admissible range."""


class NonConvergence(RuntimeError):
    """A truncated series did not fall below its tolerance within the cap."""
