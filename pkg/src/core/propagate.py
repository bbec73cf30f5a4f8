"""
Propagate Module

Builds the block-diagonal evolution operator U(t, t0) in three ways:

- closed_form:  the exact 2x2 exponential exp(M / i hbar) of the integrated
                block M = [[A, tau], [tau*, B]], evaluated without an eigensolver
- exp_integral: exp(M / i hbar) for blocks of any size, by Hermitian
                eigendecomposition of M
- oracle:       a time-ordered product of midpoint short-step exponentials

The first two are the same object and are exact only when H(t) commutes
with itself at different times. The oracle is the independent reference.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag

from .cavity import (
    HOP, SITE1, SITE2, BlockGenerator, BlockHamiltonian, CavityParams, DipoleQubit,
    cavity_level_energy, mode_signal
)
from .config import DEFAULT_CONFIG, NumericsConfig
from .errors import ConfigMismatch, DimensionMismatch
from .signals import Signal, integrate_hopping
from .tbq import QubitParams, StateVector, eigensystem_2x2

logger = logging.getLogger(__name__)


class PropagatorMethod(Enum):
    CLOSED_FORM = "closed_form"
    EXP_INTEGRAL = "exp_integral"
    ORACLE = "oracle"


class DriveReading(Enum):
    """How the cavity drive enters a single-qubit block."""
    SECTION2_SIGNED = "section2_signed"            # block n: (-E_fn, +E_fn)
    SECTION4_INDEPENDENT = "section4_independent"  # every block: (-E_f1, +E_f2)


# =============================================================================
# Block drives
# =============================================================================

@dataclass(frozen=True)
class BlockDrive:
    """
    One single-qubit block with independent diagonal drives:

        [[ec + d1(t) + E_p1(t),  t_s(t)              ],
         [t_s*(t),               ec + d2(t) + E_p2(t)]]
    """

    d1: Signal
    d2: Signal
    ec: float
    qp: QubitParams

    def at(self, t: float) -> np.ndarray:
        return self.generator().at(t)

    def generator(self) -> BlockGenerator:
        return BlockGenerator(
            dim=2,
            ec=self.ec,
            terms=((SITE1, self.qp.ep1), (SITE1, self.d1), (SITE2, self.qp.ep2), (SITE2, self.d2)),
            hoppings=((HOP, self.qp.ts_mag, self.qp.alpha),)
        )

    def integrals(self, t0: float, t: float, config: NumericsConfig = None) -> Tuple[float, float, complex]:
        """(A, B, tau): the integrated diagonal entries and hopping."""
        span = t - t0
        a = self.ec * span + self.d1.integrate(t0, t) + self.qp.ep1.integrate(t0, t)
        b = self.ec * span + self.d2.integrate(t0, t) + self.qp.ep2.integrate(t0, t)
        tau = integrate_hopping(self.qp.ts_mag, self.qp.alpha, t0, t, config)
        return a, b, tau


def drives_for(cav: CavityParams, dq: DipoleQubit, reading: DriveReading) -> List[BlockDrive]:
    """
    Per-level BlockDrives of a single qubit under the chosen drive reading.

    Raises:
        ConfigMismatch: section4_independent with fewer than two cavity levels.
    """
    reading = DriveReading(reading)
    qp = dq.params
    if reading == DriveReading.SECTION2_SIGNED:
        drives = []
        for n in range(1, cav.n_levels + 1):
            e_fn = mode_signal(cav, dq, n)
            drives.append(BlockDrive(-e_fn, e_fn, cavity_level_energy(cav, n), qp))
        return drives

    if cav.n_levels < 2:
        raise ConfigMismatch(
            "section4_independent reading needs at least two cavity levels",
            field="drive_reading"
        )
    e_f1 = mode_signal(cav, dq, 1)
    e_f2 = mode_signal(cav, dq, 2)
    return [
        BlockDrive(-e_f1, e_f2, cavity_level_energy(cav, n), qp)
        for n in range(1, cav.n_levels + 1)
    ]


def drive_hamiltonian(cav: CavityParams, dq: DipoleQubit, reading: DriveReading) -> BlockHamiltonian:
    """BlockHamiltonian whose blocks are the drives of `drives_for`."""
    blocks = tuple(bd.generator() for bd in drives_for(cav, dq, reading))
    return BlockHamiltonian(blocks, (cav.n_levels, 2), cav.hbar)


# =============================================================================
# Propagators
# =============================================================================

@dataclass(frozen=True)
class Propagator:
    """Block-diagonal unitary mapping states at t0 to states at t1."""

    blocks: Tuple[np.ndarray, ...]
    t0: float
    t1: float
    method: PropagatorMethod

    @property
    def block_dim(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def dim(self) -> int:
        return len(self.blocks) * self.block_dim

    def full_matrix(self) -> np.ndarray:
        return block_diag(*self.blocks)

    def unitarity_error(self) -> float:
        """max_n ||U_n^dagger U_n - I||_max."""
        eye = np.eye(self.block_dim)
        return max(float(np.max(np.abs(u.conj().T @ u - eye))) for u in self.blocks)


def identity_propagator(n_blocks: int, block_dim: int, t0: float = 0.0) -> Propagator:
    blocks = tuple(np.eye(block_dim, dtype=complex) for _ in range(n_blocks))
    return Propagator(blocks, t0, t0, PropagatorMethod.EXP_INTEGRAL)


def closed_form_from_integral(m: np.ndarray, hbar: float = 1.0, config: NumericsConfig = None) -> np.ndarray:
    """
    exp(M / i hbar) for an integrated 2x2 block M = [[A, tau], [tau*, B]].

    With R = sqrt((A - B)^2 + 4 |tau|^2), theta = R / 2 hbar, k = 2 sin(theta) / R:

        U = e^{-i (A + B) / 2 hbar} [[cos - i k (A - B)/2,  -i k tau            ],
                                     [-i k tau*,             cos + i k (A - B)/2]]

    k switches to its series in theta when R < series_switch * hbar.
    """
    if config is None:
        config = DEFAULT_CONFIG
    a = float(np.real(m[0, 0]))
    b = float(np.real(m[1, 1]))
    tau = complex(m[0, 1])
    tau_bar = complex(m[1, 0])

    r = float(np.hypot(a - b, 2.0 * abs(tau)))
    theta = r / (2.0 * hbar)
    if r < config.series_switch * hbar:
        k = (1.0 - theta ** 2 / 6.0 + theta ** 4 / 120.0) / hbar
        logger.debug("closed form at R=%.3e uses the series limit", r)
    else:
        k = 2.0 * np.sin(theta) / r

    phase = np.exp(-0.5j * (a + b) / hbar)
    cos = np.cos(theta)
    half = 0.5 * (a - b)
    return phase * np.array([
        [cos - 1j * k * half, -1j * k * tau],
        [-1j * k * tau_bar, cos + 1j * k * half]
    ], dtype=complex)


def closed_form_block(
    bd: BlockDrive,
    t0: float,
    t: float,
    hbar: float = 1.0,
    config: NumericsConfig = None
) -> np.ndarray:
    """Analytic 2x2 propagator of one block from its signal integrals."""
    a, b, tau = bd.integrals(t0, t, config)
    m = np.array([[a, tau], [np.conj(tau), b]], dtype=complex)
    return closed_form_from_integral(m, hbar, config)


def closed_form_coefficients(
    drives: Sequence[BlockDrive],
    t0: float,
    t: float,
    hbar: float = 1.0,
    config: NumericsConfig = None
) -> Dict[str, complex]:
    """
    The eight nonzero coefficients of the two-block single-qubit propagator.

    U11, U12, U21, U22 come from the first block, U33, U34, U43, U44 from the second.
    """
    if len(drives) < 2:
        raise DimensionMismatch(f"need two block drives, got {len(drives)}")
    first = closed_form_block(drives[0], t0, t, hbar, config)
    second = closed_form_block(drives[1], t0, t, hbar, config)
    return {
        "U11": complex(first[0, 0]), "U12": complex(first[0, 1]),
        "U21": complex(first[1, 0]), "U22": complex(first[1, 1]),
        "U33": complex(second[0, 0]), "U34": complex(second[0, 1]),
        "U43": complex(second[1, 0]), "U44": complex(second[1, 1]),
    }


def printed_u11(a: float, b: float, tau: complex, tau_bar: complex, hbar: float = 1.0) -> complex:
    """
    U11 in its printed expanded layout, with E = e^{i R / hbar}:

        e^{-i (R + A + B) / 2 hbar} [-A (E - 1) + (B + R) E + R - B] / 2R
    """
    r = np.sqrt((a - b) ** 2 + 4.0 * (tau * tau_bar).real)
    if r == 0.0:
        raise ValueError("printed U11 is singular at R = 0")
    e = np.exp(1j * r / hbar)
    prefactor = np.exp(-1j * (r + a + b) / (2.0 * hbar))
    return complex(prefactor * (-a * (e - 1.0) + (b + r) * e + r - b) / (2.0 * r))


def exp_hermitian(m: np.ndarray, hbar: float = 1.0) -> np.ndarray:
    """exp(M / i hbar) for Hermitian M via eigendecomposition."""
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    return (v * np.exp(-1j * w / hbar)) @ v.conj().T


def exp_of_integral_block(
    block: BlockGenerator,
    t0: float,
    t: float,
    hbar: float = 1.0,
    config: NumericsConfig = None
) -> np.ndarray:
    """exp((1 / i hbar) integral H dt') for a block of any dimension."""
    return exp_hermitian(block.integral(t0, t, config), hbar)


def default_oracle_steps(
    block: BlockGenerator,
    t0: float,
    t: float,
    hbar: float = 1.0,
    config: NumericsConfig = None
) -> int:
    """steps_per_unit * max(1, max|H| |t - t0| / hbar), capped."""
    if config is None:
        config = DEFAULT_CONFIG
    scale = block.max_magnitude(t0, t, config=config) * abs(t - t0) / hbar
    steps = int(np.ceil(config.oracle_steps_per_unit * max(1.0, scale)))
    return min(steps, config.oracle_max_steps)


def _ordered_product(stack: np.ndarray) -> np.ndarray:
    """stack[-1] @ ... @ stack[0] by pairwise reduction."""
    while stack.shape[0] > 1:
        if stack.shape[0] % 2:
            eye = np.eye(stack.shape[1], dtype=complex)[None, :, :]
            stack = np.concatenate([stack, eye])
        stack = stack[1::2] @ stack[0::2]
    return stack[0]


def time_ordered_oracle(
    block: BlockGenerator,
    t0: float,
    t: float,
    steps: int,
    hbar: float = 1.0,
    config: NumericsConfig = None
) -> np.ndarray:
    """
    Midpoint product prod_{k=steps..1} exp(H(t_k) dt / i hbar).

    Second-order accurate in dt and unitary for any step count.

    Args:
        block: Block generator.
        t0: Initial time.
        t: Final time.
        steps: Number of midpoint steps (>= 1).
        hbar: Unit scale.
        config: Optional numerics configuration.

    Returns:
        The block propagator U(t, t0).
    """
    if config is None:
        config = DEFAULT_CONFIG
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")

    dt = (t - t0) / steps
    u = np.eye(block.dim, dtype=complex)
    batch = min(config.oracle_batch, block.batch_size(config))
    for start in range(0, steps, batch):
        k = np.arange(start, min(start + batch, steps))
        mids = t0 + (k + 0.5) * dt
        h = block.at_many(mids)
        h = 0.5 * (h + np.conj(np.swapaxes(h, 1, 2)))
        w, v = np.linalg.eigh(h)
        step_ops = (v * np.exp(-1j * w * dt / hbar)[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2))
        u = _ordered_product(step_ops) @ u
    return u


def build_propagator(
    bh: BlockHamiltonian,
    t0: float,
    t: float,
    method: PropagatorMethod = PropagatorMethod.CLOSED_FORM,
    steps: int = None,
    config: NumericsConfig = None
) -> Propagator:
    """
    Propagator of a whole BlockHamiltonian with the chosen method.

    Raises:
        ConfigMismatch: closed_form requested for blocks larger than 2x2.
    """
    method = PropagatorMethod(method)
    if method == PropagatorMethod.CLOSED_FORM and bh.block_dim != 2:
        raise ConfigMismatch(
            f"closed_form needs 2x2 blocks, got {bh.block_dim}x{bh.block_dim}",
            field="propagator.method"
        )

    blocks = []
    for n, gen in enumerate(bh.blocks, start=1):
        if method == PropagatorMethod.CLOSED_FORM:
            u = closed_form_from_integral(gen.integral(t0, t, config), bh.hbar, config)
        elif method == PropagatorMethod.EXP_INTEGRAL:
            u = exp_of_integral_block(gen, t0, t, bh.hbar, config)
        else:
            n_steps = steps or default_oracle_steps(gen, t0, t, bh.hbar, config)
            logger.debug("oracle block %d: %d steps over [%g, %g]", n, n_steps, t0, t)
            u = time_ordered_oracle(gen, t0, t, n_steps, bh.hbar, config)
        blocks.append(u)
    return Propagator(tuple(blocks), t0, t, method)


def propagate_state(prop: Propagator, psi0: StateVector, config: NumericsConfig = None) -> StateVector:
    """
    Apply each block unitary to its slice of the amplitudes.

    Raises:
        DimensionMismatch: If psi0 does not match the propagator's dimension.
        NormViolation: If psi0 is not normalized.
    """
    if config is None:
        config = DEFAULT_CONFIG
    if psi0.dim != prop.dim:
        raise DimensionMismatch(f"state has {psi0.dim} amplitudes, propagator acts on {prop.dim}")
    psi0.check_normalized(config.norm_tol)

    d = prop.block_dim
    out = np.empty(prop.dim, dtype=complex)
    for n, u in enumerate(prop.blocks):
        out[n * d:(n + 1) * d] = u @ psi0.amplitudes[n * d:(n + 1) * d]
    return StateVector(out, psi0.basis)


# =============================================================================
# Instantaneous spectra
# =============================================================================

def eigen_block(bd: BlockDrive, t: float, config: NumericsConfig = None) -> Tuple[np.ndarray, List[StateVector]]:
    """Instantaneous eigenpairs of a single-qubit block at t."""
    energies, vectors = eigensystem_2x2(bd.at(t), config)
    return energies, [StateVector(v) for v in vectors]


def printed_block_energies(ec: float, e_fn: float, ep1: float, ep2: float, ts_mag: float) -> Tuple[float, float]:
    """(2 E_cn + E_p1 + E_p2 -/+ sqrt((2 E_fn - E_p1 + E_p2)^2 + 4 |t_s|^2)) / 2."""
    root = np.sqrt((2.0 * e_fn - ep1 + ep2) ** 2 + 4.0 * ts_mag ** 2)
    base = 2.0 * ec + ep1 + ep2
    return 0.5 * (base - root), 0.5 * (base + root)


def eigen_generator(block: BlockGenerator, t: float, config: NumericsConfig = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenpairs of a block of any size at t; rows of the second array are eigenvectors.

    2x2 blocks use the gauge-fixed solver, larger ones numpy's eigh.
    """
    h = block.at(t)
    if block.dim == 2:
        return eigensystem_2x2(h, config)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return w, v.T.copy()


# =============================================================================
# Pauli decomposition
# =============================================================================

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_decomposition(u: np.ndarray, tol: float = 0.0) -> Dict[str, complex]:
    """
    Coefficients c_P = Tr(P^dagger U) / d of U in the tensor-product Pauli basis.

    Labels read most significant factor first, e.g. "XI". Coefficients with
    |c_P| <= tol are omitted.
    """
    d = u.shape[0]
    qubits = int(round(np.log2(d)))
    if u.shape != (d, d) or 2 ** qubits != d:
        raise DimensionMismatch(f"expected a 2^k square matrix, got shape {u.shape}")
    coeffs = {}
    for labels in itertools.product("IXYZ", repeat=qubits):
        p = reduce(np.kron, (PAULI[c] for c in labels), np.eye(1, dtype=complex))
        c = complex(np.trace(p.conj().T @ u) / d)
        if abs(c) > tol:
            coeffs["".join(labels)] = c
    return coeffs


def pauli_reconstruct(coeffs: Dict[str, complex]) -> np.ndarray:
    """Inverse of pauli_decomposition."""
    total = None
    for label, c in coeffs.items():
        p = reduce(np.kron, (PAULI[ch] for ch in label), np.eye(1, dtype=complex))
        total = c * p if total is None else total + c * p
    if total is None:
        raise ValueError("no coefficients to reconstruct from")
    return total
