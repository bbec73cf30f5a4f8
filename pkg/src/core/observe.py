"""
Observe Module

Measurement-side quantities of a qubit-cavity state: density matrices,
populations, partial traces, entanglement entropy, projectors, the
multiphoton transition probability and Rabi frequency extraction.

Tensor factor 0 is always the cavity; factors 1.. are the two-level
subsystems in assembly order.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .config import DEFAULT_CONFIG, NumericsConfig
from .errors import DimensionMismatch, IndexOutOfRange, InvalidDensity, NoOscillation, ZeroState
from .tbq import StateVector

logger = logging.getLogger(__name__)


# =============================================================================
# Density matrices
# =============================================================================

@dataclass
class DensityMatrix:
    """A density matrix over a tensor product with the given factor dimensions."""

    matrix: np.ndarray
    factor_dims: Tuple[int, ...]

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        self.factor_dims = tuple(int(d) for d in self.factor_dims)
        dim = int(np.prod(self.factor_dims))
        if self.matrix.shape != (dim, dim):
            raise DimensionMismatch(
                f"matrix shape {self.matrix.shape} does not match factor dims {self.factor_dims}"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def validate(self, config: NumericsConfig = None) -> None:
        """
        Check Hermiticity, unit trace and positivity.

        Raises:
            InvalidDensity: naming the first violated property.
        """
        if config is None:
            config = DEFAULT_CONFIG
        asym = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if asym > config.hermitian_tol:
            raise InvalidDensity(f"not Hermitian (max asymmetry {asym:.3e})")
        drift = abs(np.trace(self.matrix) - 1.0)
        if drift > config.trace_tol:
            raise InvalidDensity(f"trace deviates from 1 by {drift:.3e}")
        lowest = float(np.linalg.eigvalsh(self.matrix)[0])
        if lowest < -config.eigen_clamp:
            raise InvalidDensity(f"negative eigenvalue {lowest:.3e}")


def density_from_state(psi: StateVector, factor_dims: Sequence[int]) -> DensityMatrix:
    """rho = |psi><psi|."""
    dim = int(np.prod(factor_dims))
    if psi.dim != dim:
        raise DimensionMismatch(f"state has {psi.dim} amplitudes, factor dims give {dim}")
    a = psi.amplitudes
    return DensityMatrix(np.outer(a, a.conj()), tuple(factor_dims))


def _check_factor(factor_dims: Sequence[int], factor: int) -> None:
    if not 0 <= factor < len(factor_dims):
        raise IndexOutOfRange(f"tensor factor {factor} outside 0..{len(factor_dims) - 1}")


def reduce_to(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Partial trace over every factor not in `keep` (kept factors stay in tensor order)."""
    dims = rho.factor_dims
    keep = sorted(set(keep))
    if not keep:
        raise IndexOutOfRange("at least one factor must be kept")
    for factor in keep:
        _check_factor(dims, factor)

    count = len(dims)
    rows = list(range(count))
    cols = [count + j if j in keep else j for j in range(count)]
    out = [j for j in keep] + [count + j for j in keep]
    reduced = np.einsum(rho.matrix.reshape(dims + dims), rows + cols, out)

    kept_dims = tuple(dims[j] for j in keep)
    size = int(np.prod(kept_dims))
    return DensityMatrix(reduced.reshape(size, size), kept_dims)


def reduce(rho: DensityMatrix, keep_factor: int) -> DensityMatrix:
    """Reduced density matrix of a single tensor factor."""
    return reduce_to(rho, [keep_factor])


def cavity_density(rho: DensityMatrix) -> DensityMatrix:
    return reduce(rho, 0)


def qubit_density(rho: DensityMatrix, qubit_index: int = 0) -> DensityMatrix:
    return reduce(rho, qubit_index + 1)


# =============================================================================
# Populations and projectors
# =============================================================================

def cavity_population(rho: DensityMatrix, n: int) -> float:
    """Probability P(E_cn) that the cavity occupies level n (1-based)."""
    levels = rho.factor_dims[0]
    if not 1 <= n <= levels:
        raise IndexOutOfRange(f"cavity level {n} outside 1..{levels}")
    block = rho.dim // levels
    diag = np.real(np.diag(rho.matrix))
    return float(np.sum(diag[(n - 1) * block:n * block]))


def projector_site(factor_dims: Sequence[int], qubit_index: int, site: int) -> np.ndarray:
    """Identity on every factor except |x_site><x_site| on the given qubit."""
    if site not in (1, 2):
        raise IndexOutOfRange(f"site must be 1 or 2, got {site}")
    slot = qubit_index + 1
    if not 1 <= slot < len(factor_dims):
        raise IndexOutOfRange(f"qubit {qubit_index} outside 0..{len(factor_dims) - 2}")
    if factor_dims[slot] != 2:
        raise DimensionMismatch(f"factor {slot} has dimension {factor_dims[slot]}, expected 2")

    local = np.zeros((2, 2))
    local[site - 1, site - 1] = 1.0
    result = np.eye(1)
    for j, d in enumerate(factor_dims):
        result = np.kron(result, local if j == slot else np.eye(d))
    return result


def projector_cavity(factor_dims: Sequence[int], n: int) -> np.ndarray:
    """P_Ecn = |E_cn><E_cn| (x) I (x) ... ."""
    levels = factor_dims[0]
    if not 1 <= n <= levels:
        raise IndexOutOfRange(f"cavity level {n} outside 1..{levels}")
    local = np.zeros((levels, levels))
    local[n - 1, n - 1] = 1.0
    rest = int(np.prod(factor_dims[1:]))
    return np.kron(local, np.eye(rest))


def site_probability(rho: DensityMatrix, qubit_index: int, site: int) -> float:
    """Probability that the qubit's electron sits at the given node (e.g. rho11 + rho33)."""
    p = projector_site(rho.factor_dims, qubit_index, site)
    return float(np.real(np.sum(np.diag(p) * np.diag(rho.matrix))))


def multiphoton_probability(
    psi_t0: StateVector,
    psi_t: StateVector,
    cavity_level: int,
    factor_dims: Sequence[int]
) -> float:
    """
    |<psi(t0)| P_Ecn |psi(t)>|^2.

    P_Ecn only keeps level n's slice, so the overlap is taken on that slice.
    """
    dim = int(np.prod(factor_dims))
    if psi_t0.dim != dim or psi_t.dim != dim:
        raise DimensionMismatch(f"states have {psi_t0.dim} and {psi_t.dim} amplitudes, expected {dim}")
    levels = factor_dims[0]
    if not 1 <= cavity_level <= levels:
        raise IndexOutOfRange(f"cavity level {cavity_level} outside 1..{levels}")
    block = dim // levels
    part = slice((cavity_level - 1) * block, cavity_level * block)
    overlap = np.vdot(psi_t0.amplitudes[part], psi_t.amplitudes[part])
    return float(abs(overlap) ** 2)


def normalized_joint_probabilities(psi: StateVector, config: NumericsConfig = None) -> Tuple[np.ndarray, float]:
    """
    Joint distribution |psi_i|^2 / sum_j |psi_j|^2 and its raw denominator.

    Raises:
        ZeroState: If the denominator is below zero_norm_sq.
    """
    if config is None:
        config = DEFAULT_CONFIG
    weights = np.abs(psi.amplitudes) ** 2
    denominator = float(np.sum(weights))
    if denominator < config.zero_norm_sq:
        raise ZeroState(f"state norm squared {denominator:.3e} is numerically zero")
    return weights / denominator, denominator


# =============================================================================
# Entropy
# =============================================================================

def von_neumann_entropy(rho: DensityMatrix, config: NumericsConfig = None) -> float:
    """
    S = -sum_i lambda_i ln lambda_i (natural log, 0 ln 0 = 0).

    Raises:
        InvalidDensity: If an eigenvalue is below eigen_negative_limit.
    """
    if config is None:
        config = DEFAULT_CONFIG
    lam = np.linalg.eigvalsh(0.5 * (rho.matrix + rho.matrix.conj().T))
    if lam[0] < config.eigen_negative_limit:
        raise InvalidDensity(f"eigenvalue {lam[0]:.3e} is negative")
    lam = np.clip(lam, 0.0, 1.0)
    lam = lam[lam > 0.0]
    return max(0.0, float(-np.sum(lam * np.log(lam))))


def entropy_closed_form_2x2(rho: DensityMatrix, config: NumericsConfig = None) -> float:
    """
    Entropy of a 2x2 density matrix from rho22 and |rho12|:

        S = -1/2 [ln(1 - r) + ln(1 + r) + 2 r artanh(r) - ln 4]
        r = sqrt((1 - 2 rho22)^2 + 4 |rho12|^2)

    The pure-state singularity r -> 1 is replaced by its limit 0.
    """
    if config is None:
        config = DEFAULT_CONFIG
    if rho.matrix.shape != (2, 2):
        raise DimensionMismatch(f"expected a 2x2 density matrix, got {rho.matrix.shape}")

    rho22 = float(np.real(rho.matrix[1, 1]))
    r = float(np.hypot(1.0 - 2.0 * rho22, 2.0 * abs(rho.matrix[0, 1])))
    if 0.5 * (1.0 - r) < config.eigen_negative_limit:
        raise InvalidDensity(f"Bloch radius {r:.6g} exceeds 1")
    if r >= 1.0 - config.pure_state_margin:
        return 0.0
    value = -0.5 * (np.log1p(-r) + np.log1p(r) + 2.0 * r * np.arctanh(r) - np.log(4.0))
    return max(0.0, float(value))


def mutual_information(rho: DensityMatrix, a: int, b: int, config: NumericsConfig = None) -> float:
    """I(a:b) = S(rho_a) + S(rho_b) - S(rho_ab)."""
    return (
        von_neumann_entropy(reduce(rho, a), config)
        + von_neumann_entropy(reduce(rho, b), config)
        - von_neumann_entropy(reduce_to(rho, [a, b]), config)
    )


# =============================================================================
# Rabi frequency
# =============================================================================

def rabi_frequency_estimate(series, config: NumericsConfig = None) -> float:
    """
    Dominant angular frequency of a uniformly sampled (time, value) series.

    Gaussian-windowed FFT; the peak bin is refined by a parabola through the
    log-magnitudes of its two neighbours.

    Args:
        series: Sequence of (time, value) pairs, uniformly spaced in time.
        config: Optional numerics configuration.

    Returns:
        Angular frequency > 0.

    Raises:
        NoOscillation: If there are too few samples or no peak stands out of the floor.
        ValueError: If sampling is not uniform.
    """
    if config is None:
        config = DEFAULT_CONFIG
    data = np.asarray(series, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("series must be a sequence of (time, value) pairs")
    n = data.shape[0]
    if n < config.rabi_min_samples:
        raise NoOscillation(f"{n} samples, need at least {config.rabi_min_samples}")

    times, values = data[:, 0], data[:, 1]
    steps = np.diff(times)
    dt = float(np.mean(steps))
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise ValueError("series must be uniformly sampled in increasing time")

    centered = values - np.mean(values)
    sigma = n / 12.0
    window = np.exp(-0.5 * ((np.arange(n) - 0.5 * (n - 1)) / sigma) ** 2)
    spectrum = np.abs(np.fft.rfft(centered * window))

    if spectrum.shape[0] < 4:
        raise NoOscillation("series too short for a spectral peak")
    k = 1 + int(np.argmax(spectrum[1:-1]))
    peak = spectrum[k]
    floor = float(np.median(spectrum[1:]))
    scale = max(1.0, float(np.max(np.abs(values))))
    if peak <= config.rabi_peak_ratio * floor or peak < config.rabi_peak_floor * n * scale:
        raise NoOscillation(f"no spectral peak above the floor (peak {peak:.3e}, floor {floor:.3e})")

    tiny = np.finfo(float).tiny
    lo, mid, hi = np.log(np.maximum(spectrum[k - 1:k + 2], tiny))
    curvature = lo - 2.0 * mid + hi
    shift = 0.5 * (lo - hi) / curvature if curvature != 0 else 0.0
    omega = 2.0 * np.pi * (k + shift) / (n * dt)
    logger.debug("rabi estimate: bin %d, shift %.6f, omega %.12g", k, shift, omega)
    return float(omega)
