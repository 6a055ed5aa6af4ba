"""Exception hierarchy for the roommates toolkit."""


class RoommatesError(Exception):
    """Base class for all toolkit errors."""


class TooSmall(RoommatesError):
    """Instance would have fewer than 2 agents."""


class BadLength(RoommatesError):
    """A preference row does not have exactly n-1 entries."""


class RowNotPermutation(RoommatesError):
    """A preference row misses or duplicates an agent, or contains self."""


class OddNotSupported(RoommatesError):
    """Symmetric instances require an even number of agents."""


class ParseError(RoommatesError):
    """Malformed instance text; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotEvenCycle(RoommatesError):
    """Cycle is not an even cycle of length >= 4."""


class Unsolvable(RoommatesError):
    """Operation requires a solvable instance."""


class TooLargeForOracle(RoommatesError):
    """Brute-force oracle guard tripped."""


class TooLargeForExact(RoommatesError):
    """Exact solvability enumeration only supports n <= 5."""


class DegenerateInput(RoommatesError):
    """Curve fit input has too few or non-positive points."""


class VerificationFailed(RoommatesError):
    """Engine output failed the stability verifier; always a bug, never a legal outcome."""


class BudgetExceeded(RoommatesError):
    """Backtracking node budget exhausted (carries partial results where applicable)."""


class UnsupportedCombination(RoommatesError):
    """Culture/size combination has no defined generator (e.g. symmetric with odd n)."""
