"""Exception types raised across the package."""


class EtaOutOfRange(ValueError):
    """The energy ratio E/M left the open interval (-1, 1)."""


class LengthMismatch(ValueError):
    """Paired component arrays have different lengths."""


class UnsupportedDimension(ValueError):
    """The requested spatial dimension is outside the validity of the formula."""


class UnsupportedCase(ValueError):
    """The closed-form reference result does not cover this configuration."""


class SupercriticalCoupling(ValueError):
    """|K| <= coupling: the indicial exponent turns imaginary."""


class DenominatorVanishes(ArithmeticError):
    """A coefficient denominator hits zero on the working interval."""

    def __init__(self, rho, message=None):
        self.rho = rho
        super().__init__(message or f"coefficient denominator vanishes near rho = {rho!r}")


class SingularCoefficient(ArithmeticError):
    """A finite-difference step coefficient vanished; the recurrence cannot advance."""


class NonFiniteValue(ArithmeticError):
    """Propagation produced NaN/inf despite rescaling."""

    def __init__(self, message, eta=None):
        self.eta = eta
        super().__init__(message)


class DomainError(ValueError):
    """Argument outside the validity window of a special-function evaluation."""


class NonConvergence(RuntimeError):
    """An iterative evaluation failed to converge within its budget."""


class ConfigError(ValueError):
    """Invalid run configuration (CLI flags, config file, or settings)."""
