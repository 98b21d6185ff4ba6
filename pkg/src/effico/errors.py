"""Exception types shared across the package."""


class EfficoError(Exception):
    """Base class for package-specific errors."""


class InfeasibleError(EfficoError):
    """The pricing-kernel constraint system has no nonnegative solution."""


class DimensionMismatchError(EfficoError, ValueError):
    """Vector or matrix dimensions do not line up."""


class TooManyStatesError(EfficoError):
    """State count exceeds an enumeration limit."""


class NumericalError(EfficoError):
    """A numerical routine broke down (degenerate pivots, divergent integrals)."""


class BracketError(EfficoError):
    """A root or optimum bracket could not be established."""
