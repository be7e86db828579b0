"""Exception types shared across the solver modules."""


class LvmpicError(Exception):
    """Base class for all solver errors."""


class SingularMappingError(LvmpicError):
    """Jacobian determinant non-positive (or below tolerance) somewhere."""


class UnsupportedBoundaryError(LvmpicError):
    """Requested boundary conditions other than fully periodic."""


class NonConvergenceError(LvmpicError):
    """Iterative solver exhausted max_iter. Carries the final residual."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class CompatibilityError(LvmpicError):
    """Right-hand side incompatible with a singular periodic operator."""


class InsufficientDataError(LvmpicError):
    """A diagnostic needs more samples/features than the series provides."""


class InvalidMarkerError(LvmpicError):
    """Marker state violates a positivity contract (s0 or f0)."""


class ConfigError(LvmpicError):
    """Configuration text failed to parse or validate.

    ``line`` is the 1-based line number in the source text when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
