class InvariantError(RuntimeError):
    """A mathematical invariant failed at runtime; this indicates a bug, not bad input."""
