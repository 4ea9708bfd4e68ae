"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class NonConvergenceError(ArithmeticError):
    """A series or quadrature failed to reach its tolerance."""


class InconsistencyError(AssertionError):
    """Numerical evidence contradicts a proven classification."""
