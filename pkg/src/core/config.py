"""
Numerics Configuration

Tolerances and limits shared by the numerical modules. Every operation that
needs one of these takes an optional `config` argument and falls back to
DEFAULT_CONFIG.
"""

from dataclasses import dataclass


@dataclass
class NumericsConfig:
    """Tunable tolerances for quadrature, eigen-solvers and propagation."""

    # Adaptive Simpson quadrature
    quad_rel_tol: float = 1e-12
    quad_abs_tol: float = 1e-15
    quad_max_depth: int = 40
    quad_min_depth: int = 5

    # Two-level spectra
    degeneracy_rel: float = 1e-13

    # Closed-form propagator: below R < series_switch * hbar use the series limit
    series_switch: float = 1e-8

    # Time-ordered oracle
    oracle_steps_per_unit: int = 2 ** 12
    oracle_max_steps: int = 2 ** 20
    oracle_batch: int = 4096

    # Composite Hilbert space caps: total amplitudes, entries of one dense block
    max_amplitudes: int = 2 ** 20
    max_block_entries: int = 2 ** 24

    # Norm squared below which a state counts as zero
    zero_norm_sq: float = 1e-20

    # Shortest sample step, relative to max(1, |t0|, |t1|)
    time_resolution: float = 1e-12

    # Density matrices
    eigen_clamp: float = 1e-10
    eigen_negative_limit: float = -1e-8
    norm_tol: float = 1e-10
    hermitian_tol: float = 1e-12
    trace_tol: float = 1e-10
    # Bloch radius within this of 1 counts as a pure 2x2 state
    pure_state_margin: float = 1e-12

    # Scenario ingestion
    ts_sample_points: int = 257

    # Rabi estimator
    rabi_min_samples: int = 16
    rabi_peak_ratio: float = 10.0
    rabi_peak_floor: float = 1e-12


# Default configuration
DEFAULT_CONFIG = NumericsConfig()
