"""Exception hierarchy shared across the package."""


class AuctionError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(AuctionError, ValueError):
    """An argument violates a documented precondition."""


class GroupGenerationError(AuctionError):
    """Prime or generator search gave up."""


class DomainError(AuctionError, ArithmeticError):
    """Arithmetic outside the operation's domain (e.g. inverting zero)."""


class UnsolvableKnapsack(AuctionError):
    """The knapsack value is not a subset sum of the code book.

    In the auction this means a tie slipped through or a share was corrupted.
    """

    def __init__(self, sigma, residual):
        super().__init__(f"knapsack value {sigma} leaves residual {residual}")
        self.sigma = sigma
        self.residual = residual


class NoBids(AuctionError):
    """The flag vector has no bit set."""


class ScriptError(AuctionError):
    """An adversary script is malformed."""


class ConfigError(AuctionError):
    """A run configuration cannot be turned into a valid auction."""


class TranscriptParseError(AuctionError):
    """A transcript line could not be decoded."""

    def __init__(self, message, seq=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if seq is not None:
            where.append(f"seq {seq}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.seq = seq
        self.line = line
