"""Exception hierarchy shared by all hslab modules."""


class HslabError(Exception):
    """Base class for every error raised by hslab."""


class DomainError(HslabError, ValueError):
    """An input lies outside the domain of the requested operation."""


class IterationLimit(HslabError, RuntimeError):
    """An iterative factorization did not converge."""


class SwapFailure(HslabError, RuntimeError):
    """Adjacent Schur swap could not be performed reliably.

    Attributes
    ----------
    index : int
        Position ``i`` of the failed ``(i, i+1)`` swap.
    separation : float
        Distance between the two diagonal entries that were to be swapped.
    """

    def __init__(self, index, separation):
        self.index = index
        self.separation = separation
        super().__init__(
            f"Schur swap at index {index} is ill-conditioned "
            f"(eigenvalue separation {separation:.3e})"
        )


class BoundaryAmbiguity(HslabError, ValueError):
    """An atom sits too close to a region boundary to classify it."""


class NoSpectralGap(HslabError, ValueError):
    """No eigenvalue-modulus gap around the requested radius."""


class SumNotDirect(HslabError, ValueError):
    """Two subspaces do not form a direct sum decomposition of the space."""

    def __init__(self, intersection_dim, message=None):
        self.intersection_dim = intersection_dim
        super().__init__(
            message or f"subspace sum is not direct (intersection dimension {intersection_dim})"
        )


class DegenerateMeasure(HslabError, ValueError):
    """The idempotent-valued measure yields a numerically singular metric."""


class ConfigError(HslabError, ValueError):
    """Invalid experiment or tolerance configuration."""


class RegionSyntaxError(HslabError, ValueError):
    """A region expression could not be parsed.

    Attributes
    ----------
    text : str
        The full expression.
    position : int
        Zero-based offset of the offending character.
    """

    def __init__(self, text, position, reason):
        self.text = text
        self.position = position
        self.reason = reason
        caret = " " * position + "^"
        super().__init__(f"{reason} at offset {position}\n  {text}\n  {caret}")
