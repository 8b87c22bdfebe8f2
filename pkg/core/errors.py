"""
Error types shared by the estimator, optimizer and reporting packages.

Validation helpers return violation lists instead of raising; these
exceptions cover the cases where an operation cannot produce a result at all.
"""

from typing import Iterable


class CodesignError(Exception):
    """Base class for every error raised by this project"""


class ConfigError(CodesignError, ValueError):
    """Malformed run configuration or data file"""


class PruneSpaceError(CodesignError, ValueError):
    """Prune space cannot be built from the given base and steps"""


class InfeasibleMappingError(CodesignError, ValueError):
    """A GEMM cannot be mapped onto the local buffer of a core"""

    def __init__(self, message: str, operator: str = ""):
        super().__init__(message)
        self.operator = operator


class UnknownRegionError(CodesignError, KeyError):
    """Grid region code not present in the grid provider"""

    def __init__(self, region: str, available: Iterable[str] = ()):
        self.region = region
        self.available = sorted(available)
        super().__init__(
            f"Unknown grid region '{region}'. Available regions: {', '.join(self.available)}"
        )

    def __str__(self) -> str:
        return self.args[0]


class ProxyLookupError(CodesignError, KeyError):
    """Strict accuracy-table lookup missed"""

    def __init__(self, fingerprint: str):
        self.fingerprint = fingerprint
        super().__init__(f"No accuracy entry for configuration {fingerprint}")

    def __str__(self) -> str:
        return self.args[0]


class ModeMismatchError(CodesignError, ValueError):
    """Candidates evaluated under different objective modes were compared"""


class HypervolumeError(CodesignError, ValueError):
    """A front member does not strictly dominate the reference point"""

    def __init__(self, message: str, fingerprint: str = ""):
        super().__init__(message)
        self.fingerprint = fingerprint


class SearchSpaceTooLargeError(CodesignError, ValueError):
    """Exhaustive enumeration requested above the configured cap"""


class OutputDirError(CodesignError):
    """Output directory exists and is not empty"""


class RankCorrelationError(CodesignError, ValueError):
    """Rank correlation is undefined for the given vectors"""


__all__ = [
    "CodesignError",
    "ConfigError",
    "PruneSpaceError",
    "InfeasibleMappingError",
    "UnknownRegionError",
    "ProxyLookupError",
    "ModeMismatchError",
    "HypervolumeError",
    "SearchSpaceTooLargeError",
    "OutputDirError",
    "RankCorrelationError",
]
