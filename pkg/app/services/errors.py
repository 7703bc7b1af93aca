"""Exception types shared across the package.

Everything derives from ValueError so callers that only care about
"bad input" can keep catching ValueError.
"""

from typing import Optional


class NetPcaError(ValueError):
    """Base class for data and feasibility errors."""


class GraphFormatError(NetPcaError):
    """An edge-list or manifest file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigurationSizeError(NetPcaError):
    """A subgraph configuration has more vertices than the graph it is counted in."""


class InfeasiblePartitionError(NetPcaError):
    """The (K, tau) pair violates 2*max|F_j| <= tau <= n_min / K."""


class DegenerateDataError(NetPcaError):
    """There is no variability left to analyze."""


class ConvergenceError(NetPcaError):
    """The Jacobi eigen-solver ran out of sweeps."""
