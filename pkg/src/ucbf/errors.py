"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised when inputs violate a declared shape, range, or schema contract."""


class DomainError(ValueError):
    """Raised when a scalar function is evaluated outside its declared domain."""


class PreconditionError(ValueError):
    """Raised when an operation is called with arguments outside its stated premise."""


class PremiseViolationError(RuntimeError):
    """Raised when a scenario fails one of its load-time admissibility premises."""


class SingularDenominatorError(ArithmeticError):
    """Raised when an adaptation-rate denominator falls below the numeric guard."""


class InfeasibleStartError(RuntimeError):
    """Raised when an initial condition fails its required membership checks."""


class InconsistencyError(RuntimeError):
    """Raised when a measurement stream contradicts the current uncertainty set."""


class UnsupportedFeatureError(NotImplementedError):
    """Raised for declared-but-unimplemented generality (e.g. relative degree > 2)."""
