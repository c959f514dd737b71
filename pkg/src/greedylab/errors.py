"""Exception types raised by greedylab."""


class GreedyLabError(Exception):
    pass


class DimensionError(GreedyLabError, ValueError):
    """Vectors or sample sets with mismatched lengths."""


class NumericError(GreedyLabError, ArithmeticError):
    """Non-finite values where finite reals are required."""


class ParameterError(GreedyLabError, ValueError):
    """A parameter lies outside its admissible range."""


class ResidualTooLargeError(GreedyLabError, ValueError):
    """A vector that should lie in a span does not."""

    def __init__(self, message, residual_norm):
        super().__init__(message)
        self.residual_norm = residual_norm


class DomainError(GreedyLabError, ValueError):
    """Input outside the domain of a transform (e.g. log of a non-positive)."""
