"""
Error Types

Every failure the simulator reports is a SimulationError. Configuration
problems and caller mistakes are also ValueError / IndexError so plain
`except ValueError` keeps working.
"""

from typing import Optional


class SimulationError(Exception):
    """Base class for all simulator errors."""


# =============================================================================
# Configuration
# =============================================================================

class ConfigError(SimulationError, ValueError):
    """A scenario or parameter set is invalid."""

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None
    ):
        self.field = field
        self.line = line
        self.column = column
        location = ""
        if field:
            location += f"[{field}] "
        if line is not None:
            location += f"(line {line}, column {column}) "
        super().__init__(f"{location}{message}")


class ConfigMismatch(ConfigError):
    """Two parts of a configuration disagree (e.g. coupling count vs cavity levels)."""


class DimensionOverflow(ConfigError):
    """The composite Hilbert space exceeds the configured amplitude cap."""


class UnknownParameterPath(ConfigError):
    """A dotted sweep path does not resolve to a scalar in the scenario."""


# =============================================================================
# Caller mistakes
# =============================================================================

class DimensionMismatch(SimulationError, ValueError):
    """Vector or matrix sizes do not fit together."""


class IndexOutOfRange(SimulationError, IndexError):
    """A cavity level, qubit or site index is outside its range."""


# =============================================================================
# Numerical failures
# =============================================================================

class NumericalError(SimulationError):
    """A computation could not produce a trustworthy result."""


class QuadratureNonConvergence(NumericalError):
    """Adaptive quadrature hit its refinement limit before meeting tolerance."""

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        prefix = f"[{path}] " if path else ""
        super().__init__(f"{prefix}{message}")


class DegenerateSpectrum(NumericalError):
    """The two eigenvalues coincide, so the eigenbasis is not unique."""


class NormViolation(NumericalError, ValueError):
    """State coefficients are not normalized."""


class InvalidDensity(NumericalError, ValueError):
    """A matrix is not a valid density matrix."""


class NoOscillation(NumericalError):
    """A time series has no dominant nonzero frequency."""


class ZeroState(NumericalError, ValueError):
    """A state vector has (numerically) zero norm."""
