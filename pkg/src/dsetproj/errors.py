"""Exception types shared across the package.

The CLI maps these onto its exit codes: ``HypothesisError`` -> 1,
``InvariantError`` -> 2.
"""


class HypothesisError(ValueError):
    """Input parameters violate a hypothesis of the construction."""


class InvariantError(RuntimeError):
    """An internal invariant failed; indicates a bug rather than bad input."""
