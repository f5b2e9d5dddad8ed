"""Exception types shared across the package."""


class MlkrError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(MlkrError, ValueError):
    """Invalid parameter, state, or configuration value."""


class DivergenceError(MlkrError, RuntimeError):
    """A classical trajectory exceeded the momentum overflow bound."""


class GridTooSmallError(MlkrError, RuntimeError):
    """Quantum evolution pushed probability into the momentum-grid edge band."""
