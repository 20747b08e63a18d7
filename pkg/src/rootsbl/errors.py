"""Exception hierarchy shared by all modules."""


class RootSBLError(Exception):
    """Base class for errors raised by this package."""


class ContractError(RootSBLError, ValueError):
    """An argument violates a documented precondition."""


class NumericalError(RootSBLError, ArithmeticError):
    """A linear-algebra step failed (singular system, non-positive denominator)."""


class DegenerateError(NumericalError):
    """A polynomial or component has collapsed to a degenerate case."""
