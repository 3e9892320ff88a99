"""Exception types raised across the package."""


class BlockStatError(Exception):
    """Base class for all package errors."""


class EmptySeries(BlockStatError, ValueError):
    pass


class NonFiniteSeries(BlockStatError, ValueError):
    pass


class BlockTooLong(BlockStatError, ValueError):
    pass


class TooFewBlocks(BlockStatError, ValueError):
    pass


class DomainViolation(BlockStatError, ValueError):
    """A g-function was evaluated outside its domain.

    ``block_index`` is the 0-based index of the first offending block, or
    ``None`` when the failing point is not tied to a block.
    """

    def __init__(self, message, block_index=None):
        super().__init__(message)
        self.block_index = block_index


class DegenerateMoments(BlockStatError, ValueError):
    pass


class DegenerateKernel(BlockStatError, ValueError):
    pass


class InvalidCoefficients(BlockStatError, ValueError):
    pass


class NonSquareIntegrable(BlockStatError, ValueError):
    pass


class MethodUnavailable(BlockStatError, ValueError):
    pass


class CenteringTooNoisy(BlockStatError, ValueError):
    pass
