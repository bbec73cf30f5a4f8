"""
Two-Level Qubit Module

The isolated position-based (charge) qubit: two coupled quantum dots
described by a tight-binding Hamiltonian

    H(t) = [[E_p1(t),            |t_s(t)| e^{+i alpha(t)}],
            [|t_s(t)| e^{-i alpha(t)},  E_p2(t)          ]]

The logical states are the electron sitting at node 1 (|x1>) or node 2 (|x2>).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Tuple

import numpy as np

from .config import DEFAULT_CONFIG, NumericsConfig
from .errors import DegenerateSpectrum, DimensionMismatch, NormViolation
from .signals import Constant, Signal, adaptive_simpson, signal_from_dict

logger = logging.getLogger(__name__)


class Basis(Enum):
    """Which basis a state vector's amplitudes refer to."""
    POSITION = "position"   # |x1>, |x2> (tensor order for composites)
    ENERGY = "energy"       # |E1>, |E2>


# =============================================================================
# Types
# =============================================================================

@dataclass(frozen=True)
class QubitParams:
    """The four tight-binding signals of one pair of sites."""

    ep1: Signal
    ep2: Signal
    ts_mag: Signal
    alpha: Signal = Constant(0.0)

    @classmethod
    def constant(cls, ep1: float, ep2: float, ts_mag: float, alpha: float = 0.0) -> "QubitParams":
        return cls(Constant(ep1), Constant(ep2), Constant(ts_mag), Constant(alpha))

    @property
    def is_constant(self) -> bool:
        return all(s.is_constant for s in (self.ep1, self.ep2, self.ts_mag, self.alpha))

    def hopping(self, t: float) -> complex:
        """t_s(t) = |t_s(t)| e^{i alpha(t)}."""
        return complex(self.ts_mag.eval(t) * np.exp(1j * self.alpha.eval(t)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ep1": self.ep1.to_dict(),
            "ep2": self.ep2.to_dict(),
            "ts_mag": self.ts_mag.to_dict(),
            "alpha": self.alpha.to_dict()
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str = "qubit") -> "QubitParams":
        return cls(
            ep1=signal_from_dict(data.get("ep1", 0.0), f"{path}.ep1"),
            ep2=signal_from_dict(data.get("ep2", 0.0), f"{path}.ep2"),
            ts_mag=signal_from_dict(data.get("ts_mag", 0.0), f"{path}.ts_mag"),
            alpha=signal_from_dict(data.get("alpha", 0.0), f"{path}.alpha")
        )


@dataclass
class StateVector:
    """Complex amplitudes over a labelled basis."""

    amplitudes: np.ndarray
    basis: Basis = Basis.POSITION

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.amplitudes / self.norm, self.basis)

    def check_normalized(self, tol: float = None) -> None:
        """Raise NormViolation unless sum |gamma_i|^2 = 1 within tol."""
        tol = DEFAULT_CONFIG.norm_tol if tol is None else tol
        drift = abs(self.norm ** 2 - 1.0)
        if drift > tol:
            raise NormViolation(f"state norm squared deviates from 1 by {drift:.3e}")

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


# =============================================================================
# Hamiltonian and spectrum
# =============================================================================

def hamiltonian_at(qp: QubitParams, t: float) -> np.ndarray:
    """2x2 tight-binding Hamiltonian at time t."""
    hop = qp.hopping(t)
    return np.array([
        [qp.ep1.eval(t), hop],
        [np.conj(hop), qp.ep2.eval(t)]
    ], dtype=complex)


def eigenenergies(qp: QubitParams, t: float) -> Tuple[float, float]:
    """
    Instantaneous eigenenergies (E1, E2) with E1 <= E2.

    E_{1,2} = (E_p1 + E_p2)/2 -/+ sqrt((E_p1 - E_p2)^2/4 + |t_s|^2)
    """
    ep1 = qp.ep1.eval(t)
    ep2 = qp.ep2.eval(t)
    center = 0.5 * (ep1 + ep2)
    half_gap = float(np.hypot(0.5 * (ep1 - ep2), qp.ts_mag.eval(t)))
    return center - half_gap, center + half_gap


def eigensystem_2x2(h: np.ndarray, config: NumericsConfig = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenpairs of a 2x2 Hermitian matrix.

    The |x2> component of each eigenvector is made real, negative for the
    lower level and positive for the upper one.

    Args:
        h: Hermitian 2x2 matrix [[a, t], [t*, b]].
        config: Optional numerics configuration.

    Returns:
        (energies, vectors): energies ascending, vectors[k] the k-th eigenvector.

    Raises:
        DegenerateSpectrum: If E2 - E1 is below the degeneracy threshold.
    """
    if config is None:
        config = DEFAULT_CONFIG
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2):
        raise DimensionMismatch(f"expected a 2x2 matrix, got shape {h.shape}")

    a = h[0, 0].real
    b = h[1, 1].real
    hop = h[0, 1]
    center = 0.5 * (a + b)
    half_gap = float(np.hypot(0.5 * (b - a), abs(hop)))
    energies = np.array([center - half_gap, center + half_gap])

    scale = max(1.0, abs(energies[0]) + abs(energies[1]))
    if 2.0 * half_gap < config.degeneracy_rel * scale:
        raise DegenerateSpectrum(
            f"eigenvalues coincide (gap {2.0 * half_gap:.3e}); eigenbasis is not unique"
        )

    vectors = np.empty((2, 2), dtype=complex)
    for k, (energy, sign) in enumerate(zip(energies, (-1.0, 1.0))):
        # Null vector of (H - E) from whichever row is better conditioned
        from_first = np.array([hop, energy - a])
        from_second = np.array([energy - b, np.conj(hop)])
        v = from_first if np.linalg.norm(from_first) >= np.linalg.norm(from_second) else from_second
        v = v / np.linalg.norm(v)
        if abs(v[1]) > 0.0:
            v = v * (sign * np.conj(v[1]) / abs(v[1]))
        else:
            v = v * (np.conj(v[0]) / abs(v[0]))
        vectors[k] = v
    return energies, vectors


def eigenstates(qp: QubitParams, t: float, config: NumericsConfig = None) -> Tuple[StateVector, StateVector]:
    """Normalized, gauge-fixed eigenstates (|E1>, |E2>) in the position basis."""
    _, vectors = eigensystem_2x2(hamiltonian_at(qp, t), config)
    return StateVector(vectors[0]), StateVector(vectors[1])


def basis_change_matrix(qp: QubitParams, t: float, config: NumericsConfig = None) -> np.ndarray:
    """
    Matrix S with (|E1>, |E2>)^T = S (|x1>, |x2>)^T.

    Rows are the eigenstates' position-basis components, so S S^dagger = I.
    """
    _, vectors = eigensystem_2x2(hamiltonian_at(qp, t), config)
    return vectors.copy()


def printed_eigenvector(qp: QubitParams, t: float, level: int, divisor: float = 2.0) -> np.ndarray:
    """
    Eigenvector in the model's printed layout, normalized.

        |E1> ~ ( (D/2 + sqrt(D^2/divisor + |t_s|^2)) / t_s*, -1 )
        |E2> ~ ( (-D/2 + sqrt(D^2/divisor + |t_s|^2)) / t_s*, +1 )

    with D = E_p2 - E_p1. Only divisor = 4 solves the eigen-equation for
    nonzero detuning; divisor = 2 is the printed discriminant.
    """
    if level not in (1, 2):
        raise ValueError(f"level must be 1 or 2, got {level}")
    hop = qp.hopping(t)
    if hop == 0:
        raise ValueError("printed eigenvector is undefined for zero hopping")
    detuning = qp.ep2.eval(t) - qp.ep1.eval(t)
    root = np.sqrt(detuning ** 2 / divisor + abs(hop) ** 2)
    lead = 0.5 * detuning if level == 1 else -0.5 * detuning
    v = np.array([(lead + root) / np.conj(hop), -1.0 if level == 1 else 1.0], dtype=complex)
    return v / np.linalg.norm(v)


def hadamard_parameters(ep: float = 0.0) -> QubitParams:
    """Symmetric dots with purely imaginary unit hopping (t_sr = 0, t_si = 1)."""
    return QubitParams.constant(ep, ep, 1.0, np.pi / 2)


# =============================================================================
# Evolution
# =============================================================================

def adiabatic_evolve(
    qp: QubitParams,
    c_e1: complex,
    c_e2: complex,
    t0: float,
    t: float,
    hbar: float = 1.0,
    config: NumericsConfig = None
) -> StateVector:
    """
    Evolve an energy-basis superposition by accumulating dynamic phases.

    psi(t) = c_e1 e^{-i/hbar int E1} |E1(t)> + c_e2 e^{-i/hbar int E2} |E2(t)>

    No diabatic correction is applied: the result is exact for constant
    parameters and follows the slow-change regime otherwise.

    Args:
        qp: Qubit parameters.
        c_e1: Initial amplitude on |E1(t0)>.
        c_e2: Initial amplitude on |E2(t0)>.
        t0: Initial time.
        t: Final time.
        hbar: Unit scale.
        config: Optional numerics configuration.

    Returns:
        State at t in the position basis.

    Raises:
        NormViolation: If |c_e1|^2 + |c_e2|^2 differs from 1.
        DegenerateSpectrum: If the spectrum at t is degenerate.
    """
    if config is None:
        config = DEFAULT_CONFIG
    StateVector(np.array([c_e1, c_e2])).check_normalized(config.norm_tol)

    if qp.is_constant:
        phases = np.array(eigenenergies(qp, t0)) * (t - t0)
    else:
        phases = adaptive_simpson(
            lambda s: np.array(eigenenergies(qp, s)), t0, t, config=config
        )

    ket_e1, ket_e2 = eigenstates(qp, t, config)
    amplitudes = (
        c_e1 * np.exp(-1j * phases[0] / hbar) * ket_e1.amplitudes
        + c_e2 * np.exp(-1j * phases[1] / hbar) * ket_e2.amplitudes
    )
    return StateVector(amplitudes)


def rabi_probability(qp: QubitParams, t0: float, t: float, hbar: float = 1.0) -> float:
    """
    Site-1 probability cos^2(|t_s| (t - t0) / hbar) for a qubit started on |x1>.

    Only valid for constant, symmetric parameters (E_p1 = E_p2).
    """
    if not qp.is_constant:
        raise ValueError("rabi_probability needs constant parameters")
    if qp.ep1.constant_value() != qp.ep2.constant_value():
        raise ValueError("rabi_probability needs symmetric on-site energies")
    return float(np.cos(qp.ts_mag.constant_value() * (t - t0) / hbar) ** 2)
