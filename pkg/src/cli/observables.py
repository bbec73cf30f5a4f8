"""
Observables Module

Named observables a scenario can request in its `outputs` list. Each one
contributes a fixed set of CSV columns and computes their values from one
sample of a trajectory.

Registered:
- amplitudes:          real and imaginary part of every amplitude
- site_probabilities:  P_x1, P_x2 per qubit
- cavity_populations:  P_Ec1 .. P_EcK
- reduced_cavity:      upper triangle of the cavity reduced density matrix
- reduced_qubits:      upper triangle of each qubit's reduced density matrix
- entropy:             cavity entanglement entropy (and its closed form when K = 2)
- joint_norm:          denominator of the renormalized joint distribution
- multiphoton:         transition probability into the top cavity level
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from core import (
    ConfigError,
    DensityMatrix,
    StateVector,
    cavity_density,
    cavity_population,
    entropy_closed_form_2x2,
    multiphoton_probability,
    normalized_joint_probabilities,
    qubit_density,
    site_probability,
    von_neumann_entropy,
)


@dataclass(frozen=True)
class Observation:
    """Everything an observable may read at one sample time."""

    t: float
    psi: StateVector
    psi0: StateVector
    rho: DensityMatrix

    @property
    def factor_dims(self) -> Tuple[int, ...]:
        return self.rho.factor_dims

    @property
    def n_qubits(self) -> int:
        return len(self.rho.factor_dims) - 1


@dataclass(frozen=True)
class Observable:
    """A named group of CSV columns."""

    name: str
    columns: Callable[[Tuple[int, ...]], List[str]]
    compute: Callable[[Observation], List[float]]


class ObservableRegistry:
    """Registry of all observables."""

    def __init__(self):
        self._observables: Dict[str, Observable] = {}
        self._register_builtins()

    def register(self, observable: Observable) -> None:
        """Register an observable."""
        self._observables[observable.name] = observable

    def get(self, name: str) -> Observable:
        """Get an observable by name."""
        if name not in self._observables:
            raise ConfigError(f"Unknown observable: {name}", field="outputs")
        return self._observables[name]

    def list_all(self) -> List[str]:
        """List all registered observables."""
        return list(self._observables.keys())

    def columns(self, names: Sequence[str], factor_dims: Tuple[int, ...]) -> List[str]:
        header = []
        for name in names:
            header += self.get(name).columns(factor_dims)
        return header

    def compute(self, names: Sequence[str], obs: Observation) -> List[float]:
        values = []
        for name in names:
            values += self.get(name).compute(obs)
        return values

    def _register_builtins(self) -> None:
        """Register built-in observables."""
        self.register(Observable("amplitudes", _amplitude_columns, _amplitudes))
        self.register(Observable("site_probabilities", _site_columns, _site_probabilities))
        self.register(Observable("cavity_populations", _population_columns, _cavity_populations))
        self.register(Observable("reduced_cavity", _cavity_matrix_columns, _reduced_cavity))
        self.register(Observable("reduced_qubits", _qubit_matrix_columns, _reduced_qubits))
        self.register(Observable("entropy", _entropy_columns, _entropy))
        self.register(Observable("joint_norm", lambda dims: ["joint_norm"], _joint_norm))
        self.register(Observable("multiphoton", _multiphoton_columns, _multiphoton))


# =============================================================================
# Column names
# =============================================================================

def site_column(qubit_index: int, site: int) -> str:
    """P_x1 / P_x2 for the first qubit, P_x1_q1 ... for the others."""
    suffix = "" if qubit_index == 0 else f"_q{qubit_index}"
    return f"P_x{site}{suffix}"


def _upper_triangle(prefix: str, dim: int) -> List[str]:
    columns = []
    for j in range(1, dim + 1):
        for k in range(j, dim + 1):
            columns += [f"{prefix}_{j}_{k}_re", f"{prefix}_{j}_{k}_im"]
    return columns


def _matrix_values(matrix: np.ndarray) -> List[float]:
    values = []
    dim = matrix.shape[0]
    for j in range(dim):
        for k in range(j, dim):
            values += [float(matrix[j, k].real), float(matrix[j, k].imag)]
    return values


def _amplitude_columns(dims: Tuple[int, ...]) -> List[str]:
    columns = []
    for i in range(1, int(np.prod(dims)) + 1):
        columns += [f"psi_{i}_re", f"psi_{i}_im"]
    return columns


def _site_columns(dims: Tuple[int, ...]) -> List[str]:
    return [site_column(q, s) for q in range(len(dims) - 1) for s in (1, 2)]


def _population_columns(dims: Tuple[int, ...]) -> List[str]:
    return [f"P_Ec{n}" for n in range(1, dims[0] + 1)]


def _cavity_matrix_columns(dims: Tuple[int, ...]) -> List[str]:
    return _upper_triangle("rhoC", dims[0])


def _qubit_matrix_columns(dims: Tuple[int, ...]) -> List[str]:
    columns = []
    for q in range(len(dims) - 1):
        columns += _upper_triangle(f"rhoQ{q}", 2)
    return columns


def _entropy_columns(dims: Tuple[int, ...]) -> List[str]:
    return ["S_cavity", "S_cavity_closed_form"] if dims[0] == 2 else ["S_cavity"]


def _multiphoton_columns(dims: Tuple[int, ...]) -> List[str]:
    return [f"Prob_psi0_to_Ec{dims[0]}"]


# =============================================================================
# Values
# =============================================================================

def _amplitudes(obs: Observation) -> List[float]:
    values = []
    for a in obs.psi.amplitudes:
        values += [float(a.real), float(a.imag)]
    return values


def _site_probabilities(obs: Observation) -> List[float]:
    return [site_probability(obs.rho, q, s) for q in range(obs.n_qubits) for s in (1, 2)]


def _cavity_populations(obs: Observation) -> List[float]:
    return [cavity_population(obs.rho, n) for n in range(1, obs.factor_dims[0] + 1)]


def _reduced_cavity(obs: Observation) -> List[float]:
    return _matrix_values(cavity_density(obs.rho).matrix)


def _reduced_qubits(obs: Observation) -> List[float]:
    values = []
    for q in range(obs.n_qubits):
        values += _matrix_values(qubit_density(obs.rho, q).matrix)
    return values


def _entropy(obs: Observation) -> List[float]:
    reduced = cavity_density(obs.rho)
    values = [von_neumann_entropy(reduced)]
    if obs.factor_dims[0] == 2:
        values.append(entropy_closed_form_2x2(reduced))
    return values


def _joint_norm(obs: Observation) -> List[float]:
    _, denominator = normalized_joint_probabilities(obs.psi)
    return [denominator]


def _multiphoton(obs: Observation) -> List[float]:
    top = obs.factor_dims[0]
    return [multiphoton_probability(obs.psi0, obs.psi, top, obs.factor_dims)]


# Global registry
registry = ObservableRegistry()
