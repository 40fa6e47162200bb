"""Exception types shared across the engine."""


class NumericsError(RuntimeError):
    """A numerical computation failed (near-singular solve, eigensolver
    breakdown, overflow)."""
