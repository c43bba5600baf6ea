"""Exception hierarchy.

Every error raised on bad input derives from :class:`PseudoCentroidError`,
which is itself a ``ValueError`` so callers that already catch ``ValueError``
keep working.
"""

__all__ = [
    "PseudoCentroidError",
    "NonSquareError",
    "NonZeroDiagonalError",
    "NonFiniteEntryError",
    "DimensionMismatchError",
    "EmptyInputError",
    "NegativeEntryWithWeightingError",
    "PointNotInClusterError",
    "EmptyClusterError",
    "TooFewPointsError",
    "BadKError",
    "NoCentroidsError",
    "DuplicateCentroidError",
    "MatchPointDroppedError",
    "InconsistentSetsError",
    "BadKCheckError",
    "InfeasibleBoundsError",
    "CombinatorialBlowupError",
    "BadFractionError",
    "SingleClusterError",
    "ParseError",
    "ConfigError",
]


class PseudoCentroidError(ValueError):
    """Base class for all library errors."""


# distance matrix construction
class NonSquareError(PseudoCentroidError):
    pass


class NonZeroDiagonalError(PseudoCentroidError):
    pass


class NonFiniteEntryError(PseudoCentroidError):
    pass


class DimensionMismatchError(PseudoCentroidError):
    pass


class EmptyInputError(PseudoCentroidError):
    pass


class NegativeEntryWithWeightingError(PseudoCentroidError):
    pass


class PointNotInClusterError(PseudoCentroidError):
    pass


class EmptyClusterError(PseudoCentroidError):
    pass


class TooFewPointsError(PseudoCentroidError):
    pass


# engine
class BadKError(PseudoCentroidError):
    pass


class NoCentroidsError(PseudoCentroidError):
    pass


class DuplicateCentroidError(PseudoCentroidError):
    pass


class MatchPointDroppedError(PseudoCentroidError):
    """The point defining the old MinMax span left the cluster; recompute in full."""


class InconsistentSetsError(PseudoCentroidError):
    pass


# starting methods
class BadKCheckError(PseudoCentroidError):
    pass


class InfeasibleBoundsError(PseudoCentroidError):
    pass


class CombinatorialBlowupError(PseudoCentroidError):
    pass


# regret / quality
class BadFractionError(PseudoCentroidError):
    pass


class SingleClusterError(PseudoCentroidError):
    pass


# cli / io
class ParseError(PseudoCentroidError):
    pass


class ConfigError(PseudoCentroidError):
    pass
