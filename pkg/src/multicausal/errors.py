"""Exception types shared across the package."""


class MulticausalError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(MulticausalError, ValueError):
    """Inputs disagree on particle count or spatial dimension."""


class MeasureError(MulticausalError, ValueError):
    """A measure violates its invariants (weights, normalisation, ...)."""


class ResourceLimitError(MulticausalError, RuntimeError):
    """A size or memory guard was tripped."""


class NonCausalEvolutionError(MulticausalError):
    """A consecutive pair of slices admits no causal coupling.

    ``pair`` holds the grid indices ``(k, k + 1)`` of the offending pair and
    ``certificate`` the negative precedence certificate for it.
    """

    def __init__(self, pair, certificate, message=None):
        self.pair = pair
        self.certificate = certificate
        if message is None:
            message = f"slices {pair[0]} -> {pair[1]} are not causally ordered"
        super().__init__(message)
