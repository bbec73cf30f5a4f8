"""
Cavity Module

Assembles the composite Hamiltonian of dipole qubits coupled to a K-level
quantum electromagnetic cavity.

The cavity never mixes its levels, so the total Hamiltonian is block
diagonal in the cavity index n:

    H = diag(H_1, ..., H_K),   H_n(t) = E_cn I + sum_q [H_q(t) + E_fnq(t) Z_q]

where H_q is the tight-binding Hamiltonian of subsystem q padded with
identities, Z_q = diag(-1, +1) on q's slot, and E_fnq the mode drive.
A BlockHamiltonian cannot represent cross-block terms at all.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.linalg import block_diag

from .config import DEFAULT_CONFIG, NumericsConfig
from .errors import ConfigError, ConfigMismatch, DimensionOverflow, IndexOutOfRange
from .signals import ZERO, Signal, Sinusoid, Trig, integrate_hopping
from .tbq import QubitParams

logger = logging.getLogger(__name__)

# Site projectors, drive pattern and hopping pattern of one two-level subsystem
SITE1 = np.array([[1.0, 0.0], [0.0, 0.0]])
SITE2 = np.array([[0.0, 0.0], [0.0, 1.0]])
DRIVE = np.array([[-1.0, 0.0], [0.0, 1.0]])
HOP = np.array([[0.0, 1.0], [0.0, 0.0]])


class ModeParity(Enum):
    """Which trig function and frequency the n-th cavity mode uses."""
    GENERAL = "general"                      # sin for odd n, cos for even n, frequency (n+1)w/2
    SECTION2_EXAMPLES = "section2_examples"  # cos for odd n, sin for even n, frequency n w


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; (p*r) x (q*s) for p x q and r x s inputs."""
    return np.kron(a, b)


def _padded(op: np.ndarray, slot: int, count: int) -> sparse.csr_matrix:
    """op on subsystem `slot` of `count`, identities elsewhere (slot 0 is most significant)."""
    result = sparse.identity(1, format="csr")
    for j in range(count):
        result = sparse.kron(result, op if j == slot else sparse.identity(2), format="csr")
    return result


Coefficient = Union[np.ndarray, sparse.spmatrix]
Entries = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _nonzeros(coeff: Coefficient) -> Entries:
    """(rows, cols, values) of the nonzero entries of a dense or sparse matrix."""
    coo = sparse.coo_matrix(coeff)
    coo.sum_duplicates()
    return coo.row, coo.col, coo.data


# =============================================================================
# Parameters
# =============================================================================

@dataclass(frozen=True)
class CavityParams:
    """A K-level cavity mode."""

    omega: float
    n_levels: int
    epsilon: float = 1.0
    hbar: float = 1.0
    mode_parity: ModeParity = ModeParity.GENERAL

    def __post_init__(self):
        if isinstance(self.n_levels, bool) or not isinstance(self.n_levels, (int, np.integer)):
            raise ConfigError("n_levels must be an integer", field="cavity.n_levels")
        if self.n_levels < 1:
            raise ConfigError(f"n_levels must be >= 1, got {self.n_levels}", field="cavity.n_levels")
        if not self.omega > 0:
            raise ConfigError(f"omega must be > 0, got {self.omega}", field="cavity.omega")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}", field="cavity.epsilon")
        if not self.hbar > 0:
            raise ConfigError(f"hbar must be > 0, got {self.hbar}", field="cavity.hbar")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "omega": self.omega,
            "n_levels": self.n_levels,
            "epsilon": self.epsilon,
            "hbar": self.hbar,
            "mode_parity": self.mode_parity.value
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str = "cavity") -> "CavityParams":
        parity = data.get("mode_parity", ModeParity.GENERAL.value)
        try:
            parity = ModeParity(parity)
        except ValueError:
            raise ConfigError(f"unknown mode_parity {parity!r}", field=f"{path}.mode_parity")
        for key in ("omega", "n_levels"):
            if key not in data:
                raise ConfigError("missing required field", field=f"{path}.{key}")
        return cls(
            omega=float(data["omega"]),
            n_levels=data["n_levels"],
            epsilon=float(data.get("epsilon", 1.0)),
            hbar=float(data.get("hbar", 1.0)),
            mode_parity=parity
        )


@dataclass(frozen=True)
class DipoleQubit:
    """A qubit with its dipole geometry and per-level cavity couplings a_1..a_K."""

    params: QubitParams
    dipole_length: float = 0.0
    charge: float = 1.0
    couplings: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(float(a) for a in self.couplings))
        if self.dipole_length < 0:
            raise ConfigError(f"dipole_length must be >= 0, got {self.dipole_length}",
                              field="qubit.dipole_length")

    def to_dict(self) -> Dict[str, Any]:
        data = self.params.to_dict()
        data.update({
            "dipole_length": self.dipole_length,
            "charge": self.charge,
            "couplings": list(self.couplings)
        })
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str = "qubit") -> "DipoleQubit":
        couplings = data.get("couplings", [])
        if not isinstance(couplings, list):
            raise ConfigError("couplings must be a list of numbers", field=f"{path}.couplings")
        return cls(
            params=QubitParams.from_dict(data, path),
            dipole_length=float(data.get("dipole_length", 0.0)),
            charge=float(data.get("charge", 1.0)),
            couplings=tuple(couplings)
        )


# =============================================================================
# Block generators
# =============================================================================

@dataclass(frozen=True)
class BlockGenerator:
    """
    A time-dependent Hermitian block

        H(t) = ec I + sum_k C_k s_k(t) + sum_j [P_j h_j(t) + P_j^T conj(h_j(t))]

    with real coefficient matrices C_k, real signals s_k, upper hopping
    patterns P_j and complex hoppings h_j = |t_s| e^{i alpha}.

    Coefficients may be dense arrays or scipy.sparse matrices; only their
    nonzero entries are kept.
    """

    dim: int
    ec: float
    terms: Tuple[Tuple[Coefficient, Signal], ...] = ()
    hoppings: Tuple[Tuple[Coefficient, Signal, Signal], ...] = ()
    _term_entries: Tuple[Tuple[Entries, Signal], ...] = field(init=False, repr=False, compare=False)
    _hop_entries: Tuple[Tuple[Entries, Signal, Signal], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_term_entries", tuple(
            (_nonzeros(coeff), signal) for coeff, signal in self.terms
        ))
        object.__setattr__(self, "_hop_entries", tuple(
            (_nonzeros(pattern), ts_mag, alpha) for pattern, ts_mag, alpha in self.hoppings
        ))

    def at(self, t: float) -> np.ndarray:
        """Block matrix at time t."""
        h = self.ec * np.eye(self.dim, dtype=complex)
        for (rows, cols, data), signal in self._term_entries:
            h[rows, cols] += data * signal.eval(t)
        for (rows, cols, data), ts_mag, alpha in self._hop_entries:
            hop = ts_mag.eval(t) * np.exp(1j * alpha.eval(t))
            h[rows, cols] += data * hop
            h[cols, rows] += data * np.conj(hop)
        return h

    def at_many(self, times: np.ndarray) -> np.ndarray:
        """Stack of block matrices, shape (len(times), dim, dim)."""
        times = np.asarray(times, dtype=float)
        h = np.broadcast_to(self.ec * np.eye(self.dim, dtype=complex),
                            (times.shape[0], self.dim, self.dim)).copy()
        for (rows, cols, data), signal in self._term_entries:
            values = np.broadcast_to(signal.eval(times), times.shape)
            h[:, rows, cols] += values[:, None] * data[None, :]
        for (rows, cols, data), ts_mag, alpha in self._hop_entries:
            hop = np.asarray(ts_mag.eval(times)) * np.exp(1j * np.asarray(alpha.eval(times)))
            hop = np.broadcast_to(hop, times.shape)
            h[:, rows, cols] += hop[:, None] * data[None, :]
            h[:, cols, rows] += np.conj(hop)[:, None] * data[None, :]
        return h

    def integral(self, t0: float, t1: float, config: NumericsConfig = None) -> np.ndarray:
        """Entrywise integral of the block over [t0, t1]."""
        m = self.ec * (t1 - t0) * np.eye(self.dim, dtype=complex)
        for (rows, cols, data), signal in self._term_entries:
            m[rows, cols] += data * signal.integrate(t0, t1)
        for (rows, cols, data), ts_mag, alpha in self._hop_entries:
            tau = integrate_hopping(ts_mag, alpha, t0, t1, config)
            m[rows, cols] += data * tau
            m[cols, rows] += data * np.conj(tau)
        return m

    def batch_size(self, config: NumericsConfig = None) -> int:
        """How many dense copies of this block fit in max_block_entries (at least 1)."""
        if config is None:
            config = DEFAULT_CONFIG
        return max(1, config.max_block_entries // self.dim ** 2)

    def max_magnitude(self, t0: float, t1: float, samples: int = 65, config: NumericsConfig = None) -> float:
        """Largest spectral norm of the block over a uniform sample grid."""
        times = np.linspace(t0, t1, samples)
        chunk = self.batch_size(config)
        largest = 0.0
        for start in range(0, samples, chunk):
            stack = self.at_many(times[start:start + chunk])
            largest = max(largest, float(np.max(np.abs(np.linalg.eigvalsh(stack)))))
        return largest


@dataclass(frozen=True)
class BlockHamiltonian:
    """Block-diagonal Hamiltonian indexed by cavity level."""

    blocks: Tuple[BlockGenerator, ...]
    factor_dims: Tuple[int, ...]
    hbar: float = 1.0

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_dim(self) -> int:
        return self.blocks[0].dim

    @property
    def dim(self) -> int:
        return self.n_blocks * self.block_dim

    def block(self, n: int) -> BlockGenerator:
        """Generator of cavity level n (1-based)."""
        if not 1 <= n <= self.n_blocks:
            raise IndexOutOfRange(f"cavity level {n} outside 1..{self.n_blocks}")
        return self.blocks[n - 1]

    def full_matrix(self, t: float) -> np.ndarray:
        """Dense block-diagonal Hamiltonian at time t."""
        return block_diag(*(b.at(t) for b in self.blocks))


# =============================================================================
# Cavity levels and modes
# =============================================================================

def cavity_level_energy(cav: CavityParams, n: int) -> float:
    """E_cn = hbar w (2n - 1) / 2."""
    if not 1 <= n <= cav.n_levels:
        raise IndexOutOfRange(f"cavity level {n} outside 1..{cav.n_levels}")
    return cav.hbar * cav.omega * (2 * n - 1) / 2.0


def mode_signal(cav: CavityParams, dq: DipoleQubit, n: int) -> Signal:
    """
    Drive E_fnq(t) that cavity level n exerts on the qubit dipole.

    general:            a_n (e d / 2) sqrt((2/eps) hbar nu w) trig(nu w t), nu = (n+1)/2,
                        sin for odd n and cos for even n
    section2_examples:  nu = n, cos for odd n and sin for even n

    Args:
        cav: Cavity parameters.
        dq: Qubit with couplings.
        n: Cavity level, 1-based.

    Returns:
        A Sinusoid, or the zero signal when a_n = 0.
    """
    if not 1 <= n <= cav.n_levels:
        raise IndexOutOfRange(f"cavity level {n} outside 1..{cav.n_levels}")
    if len(dq.couplings) != cav.n_levels:
        raise ConfigMismatch(
            f"{len(dq.couplings)} couplings for {cav.n_levels} cavity levels",
            field="qubit.couplings"
        )

    a_n = dq.couplings[n - 1]
    if a_n == 0.0:
        return ZERO

    if cav.mode_parity == ModeParity.GENERAL:
        nu = (n + 1) / 2.0
        fn = Trig.SIN if n % 2 == 1 else Trig.COS
    else:
        nu = float(n)
        fn = Trig.COS if n % 2 == 1 else Trig.SIN

    amplitude = a_n * (dq.charge * dq.dipole_length / 2.0) * np.sqrt(
        (2.0 / cav.epsilon) * cav.hbar * nu * cav.omega
    )
    return Sinusoid(float(amplitude), nu * cav.omega, 0.0, fn)


# =============================================================================
# Assembly
# =============================================================================

def _check_couplings(cav: CavityParams, subsystems: Sequence[DipoleQubit]) -> None:
    for q, dq in enumerate(subsystems):
        if len(dq.couplings) != cav.n_levels:
            raise ConfigMismatch(
                f"{len(dq.couplings)} couplings for {cav.n_levels} cavity levels",
                field=f"qubits.{q}.couplings"
            )


def assemble_one_qubit(cav: CavityParams, dq: DipoleQubit) -> BlockHamiltonian:
    """
    K blocks of size 2:

        H_n(t) = [[E_cn - E_fn(t) + E_p1(t),  t_s(t)                  ],
                  [t_s*(t),                   E_cn + E_fn(t) + E_p2(t)]]
    """
    _check_couplings(cav, [dq])
    qp = dq.params
    blocks = tuple(
        BlockGenerator(
            dim=2,
            ec=cavity_level_energy(cav, n),
            terms=((SITE1, qp.ep1), (SITE2, qp.ep2), (DRIVE, mode_signal(cav, dq, n))),
            hoppings=((HOP, qp.ts_mag, qp.alpha),)
        )
        for n in range(1, cav.n_levels + 1)
    )
    return BlockHamiltonian(blocks, (cav.n_levels, 2), cav.hbar)


def assemble_two_qubit(cav: CavityParams, dq_a: DipoleQubit, dq_b: DipoleQubit) -> BlockHamiltonian:
    """
    K blocks of size 4:

        H_n = E_cn I + H_A (x) I + I (x) H_B + E_fna Z (x) I + E_fnb I (x) Z

    Qubit A is the more significant tensor index.
    """
    _check_couplings(cav, [dq_a, dq_b])
    eye = np.eye(2)
    a, b = dq_a.params, dq_b.params
    blocks = []
    for n in range(1, cav.n_levels + 1):
        terms = (
            (kron(SITE1, eye), a.ep1), (kron(SITE2, eye), a.ep2),
            (kron(DRIVE, eye), mode_signal(cav, dq_a, n)),
            (kron(eye, SITE1), b.ep1), (kron(eye, SITE2), b.ep2),
            (kron(eye, DRIVE), mode_signal(cav, dq_b, n)),
        )
        hoppings = (
            (kron(HOP, eye), a.ts_mag, a.alpha),
            (kron(eye, HOP), b.ts_mag, b.alpha),
        )
        blocks.append(BlockGenerator(4, cavity_level_energy(cav, n), terms, hoppings))
    return BlockHamiltonian(tuple(blocks), (cav.n_levels, 2, 2), cav.hbar)


def assemble_general(
    cav: CavityParams,
    subsystems: Sequence[DipoleQubit],
    config: NumericsConfig = None
) -> BlockHamiltonian:
    """
    K blocks of size 2^m for m two-level subsystems.

    A single physical qubit with several level pairs is expressed as one
    subsystem per pair.

    Raises:
        ConfigError: If the list is empty.
        ConfigMismatch: If a coupling vector does not match n_levels.
        DimensionOverflow: If K * 2^m exceeds the amplitude cap or a dense
            2^m x 2^m block exceeds max_block_entries.
    """
    if config is None:
        config = DEFAULT_CONFIG
    if not subsystems:
        raise ConfigError("at least one subsystem is required", field="qubits")
    _check_couplings(cav, subsystems)

    count = len(subsystems)
    total = cav.n_levels * 2 ** count
    if total > config.max_amplitudes:
        raise DimensionOverflow(
            f"{cav.n_levels} levels x 2^{count} = {total} amplitudes exceeds cap {config.max_amplitudes}",
            field="qubits"
        )
    block_entries = 4 ** count
    if block_entries > config.max_block_entries:
        raise DimensionOverflow(
            f"blocks of 2^{count} x 2^{count} = {block_entries} entries exceed cap {config.max_block_entries}",
            field="qubits"
        )

    patterns = [
        (_padded(SITE1, q, count), _padded(SITE2, q, count),
         _padded(DRIVE, q, count), _padded(HOP, q, count))
        for q in range(count)
    ]
    blocks = []
    for n in range(1, cav.n_levels + 1):
        terms: List[Tuple[np.ndarray, Signal]] = []
        hoppings = []
        for q, dq in enumerate(subsystems):
            site1, site2, drive, hop = patterns[q]
            terms += [(site1, dq.params.ep1), (site2, dq.params.ep2), (drive, mode_signal(cav, dq, n))]
            hoppings.append((hop, dq.params.ts_mag, dq.params.alpha))
        blocks.append(BlockGenerator(2 ** count, cavity_level_energy(cav, n), tuple(terms), tuple(hoppings)))

    logger.debug("assembled %d blocks of dimension %d", cav.n_levels, 2 ** count)
    return BlockHamiltonian(tuple(blocks), (cav.n_levels,) + (2,) * count, cav.hbar)
