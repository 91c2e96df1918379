"""Exception types shared across the package."""


class InputError(ValueError):
    """An argument violates the documented contract of an operation."""


class SolverError(RuntimeError):
    """A numeric solver failed to produce an acceptable solution."""
