"""Exception types shared across the package."""


class NotCoprimeError(ValueError):
    """Raised when an operation needs gcd(x, m) == 1."""


class SizeLimitError(ValueError):
    """Raised when an input exceeds the desk-scale size limits."""


class ModulusMismatchError(ValueError):
    """Raised when a signal and an index set live on different Z_q."""


class PreconditionError(ValueError):
    """Raised when a bound is requested outside the hypotheses that make it valid."""
