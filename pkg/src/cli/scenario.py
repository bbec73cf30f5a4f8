"""
Scenario Schema

A scenario is one JSON document describing the cavity, the qubits, the
initial state, the time grid, the propagator and the observables to emit.
This module validates scenario data, loads scenario files and turns them
into the core objects a run needs.
"""

import json
import logging
import os
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from core import (
    DEFAULT_CONFIG,
    BlockHamiltonian,
    CavityParams,
    ConfigError,
    DipoleQubit,
    DriveReading,
    NumericsConfig,
    PropagatorMethod,
    StateVector,
    ConfigMismatch,
    UnknownParameterPath,
    assemble_general,
    assemble_one_qubit,
    assemble_two_qubit,
    drive_hamiltonian,
    eigen_generator,
)

from .observables import registry

logger = logging.getLogger(__name__)


# Default paths
SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "scenarios")


# =============================================================================
# Default Values
# =============================================================================

DEFAULT_OUTPUTS = ["site_probabilities", "cavity_populations", "entropy", "joint_norm"]

REQUIRED_SCENARIO_FIELDS = ["cavity", "qubits", "initial_state", "time"]
KNOWN_SCENARIO_FIELDS = REQUIRED_SCENARIO_FIELDS + [
    "name", "description", "propagator", "drive_reading", "outputs"
]

STATE_PRESETS = ["ground_block1", "site1_level1", "energy_superposition"]

InitialState = Union[str, List[complex]]


# =============================================================================
# Scenario Types
# =============================================================================

@dataclass(frozen=True)
class TimeGrid:
    """Uniform sample times t0 .. t1 (inclusive)."""

    t0: float
    t1: float
    samples: int

    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.samples)

    def to_dict(self) -> Dict[str, Any]:
        return {"t0": self.t0, "t1": self.t1, "samples": self.samples}


@dataclass(frozen=True)
class PropagatorSpec:
    method: PropagatorMethod = PropagatorMethod.CLOSED_FORM
    oracle_steps: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"method": self.method.value, "oracle_steps": self.oracle_steps}


@dataclass(frozen=True)
class Scenario:
    """A fully resolved scenario."""

    cavity: CavityParams
    qubits: Tuple[DipoleQubit, ...]
    initial_state: InitialState
    time: TimeGrid
    propagator: PropagatorSpec = PropagatorSpec()
    drive_reading: DriveReading = DriveReading.SECTION2_SIGNED
    outputs: Tuple[str, ...] = tuple(DEFAULT_OUTPUTS)
    name: str = "scenario"
    description: str = ""

    @property
    def factor_dims(self) -> Tuple[int, ...]:
        return (self.cavity.n_levels,) + (2,) * len(self.qubits)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def with_propagator(self, method: str = None, oracle_steps: int = None) -> "Scenario":
        """Copy with the propagator method and/or oracle step count overridden."""
        spec = self.propagator
        if method is not None:
            spec = replace(spec, method=_parse_method(method))
        if oracle_steps is not None:
            spec = replace(spec, oracle_steps=_parse_steps(oracle_steps))
        return replace(self, propagator=spec)

    def hamiltonian(self, config: NumericsConfig = None) -> BlockHamiltonian:
        """Block Hamiltonian of the scenario under its drive reading."""
        if self.drive_reading == DriveReading.SECTION4_INDEPENDENT:
            if len(self.qubits) != 1:
                raise ConfigMismatch(
                    "section4_independent reading is defined for a single qubit",
                    field="drive_reading"
                )
            return drive_hamiltonian(self.cavity, self.qubits[0], self.drive_reading)
        if len(self.qubits) == 1:
            return assemble_one_qubit(self.cavity, self.qubits[0])
        if len(self.qubits) == 2:
            return assemble_two_qubit(self.cavity, self.qubits[0], self.qubits[1])
        return assemble_general(self.cavity, self.qubits, config)

    def initial_state_vector(self, bh: BlockHamiltonian, config: NumericsConfig = None) -> StateVector:
        """
        Resolve the initial state against the Hamiltonian at t0.

        Presets:
            site1_level1                  |E_c1>|x1 x1 ...>
            ground_block1                 cavity level 1, ground state of block 1 at t0
            energy_superposition c1 c2    cavity level 1, c1|E1> + c2|E2> of block 1 at t0
        """
        if config is None:
            config = DEFAULT_CONFIG
        amplitudes = np.zeros(self.dim, dtype=complex)

        if not isinstance(self.initial_state, str):
            amplitudes[:] = self.initial_state
            return _renormalized(amplitudes, config)

        tokens = self.initial_state.split()
        preset = tokens[0]
        if preset == "site1_level1":
            amplitudes[0] = 1.0
            return StateVector(amplitudes)

        _, vectors = eigen_generator(bh.block(1), self.time.t0, config)
        if preset == "ground_block1":
            amplitudes[:bh.block_dim] = vectors[0]
            return StateVector(amplitudes)

        # energy_superposition
        if bh.block_dim != 2:
            raise ConfigError("energy_superposition needs a single qubit", field="initial_state")
        c_e1, c_e2 = (complex(tok) for tok in tokens[1:3])
        amplitudes[:2] = c_e1 * vectors[0] + c_e2 * vectors[1]
        return _renormalized(amplitudes, config)

    def to_dict(self) -> Dict[str, Any]:
        """Resolved form with every default expanded."""
        if isinstance(self.initial_state, str):
            state: Any = self.initial_state
        else:
            state = [[float(a.real), float(a.imag)] for a in self.initial_state]
        return {
            "name": self.name,
            "description": self.description,
            "cavity": self.cavity.to_dict(),
            "qubits": [dq.to_dict() for dq in self.qubits],
            "initial_state": state,
            "time": self.time.to_dict(),
            "propagator": self.propagator.to_dict(),
            "drive_reading": self.drive_reading.value,
            "outputs": list(self.outputs)
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], config: NumericsConfig = None) -> "Scenario":
        """
        Build a scenario from its JSON form.

        Raises:
            ConfigError: The first validation error, naming its field.
        """
        scenario, errors, warnings = _collect(data, config)
        for warning in warnings:
            logger.warning(warning)
        if errors:
            raise errors[0]
        return scenario


def _renormalized(amplitudes: np.ndarray, config: NumericsConfig) -> StateVector:
    norm = float(np.linalg.norm(amplitudes))
    if norm ** 2 < config.zero_norm_sq:
        raise ConfigError("initial state has zero norm", field="initial_state")
    if abs(norm ** 2 - 1.0) > config.norm_tol:
        logger.warning("initial state norm^2 was %.12g, renormalized", norm ** 2)
    return StateVector(amplitudes / norm)


# =============================================================================
# Validation
# =============================================================================

def validate_scenario(data: Dict[str, Any], config: NumericsConfig = None) -> Dict[str, Any]:
    """
    Validate scenario data and return validation result.

    Returns:
        {"valid": True/False, "errors": [...], "warnings": [...]}
    """
    _, errors, warnings = _collect(data, config)
    return {
        "valid": len(errors) == 0,
        "errors": [str(e) for e in errors],
        "warnings": warnings
    }


def is_valid_scenario(data: Dict[str, Any]) -> bool:
    return validate_scenario(data)["valid"]


def _collect(
    data: Any,
    config: NumericsConfig = None
) -> Tuple[Optional[Scenario], List[ConfigError], List[str]]:
    """Parse every section, collecting errors instead of stopping at the first."""
    if config is None:
        config = DEFAULT_CONFIG
    errors: List[ConfigError] = []
    warnings: List[str] = []

    if not isinstance(data, dict):
        return None, [ConfigError("scenario must be a JSON object")], warnings

    for name in REQUIRED_SCENARIO_FIELDS:
        if name not in data:
            errors.append(ConfigError("missing required field", field=name))
    for name in data:
        if name not in KNOWN_SCENARIO_FIELDS:
            warnings.append(f"Unknown scenario field ignored: {name}")
    if errors:
        return None, errors, warnings

    def attempt(parse, *args):
        try:
            return parse(*args)
        except ConfigError as e:
            errors.append(e)
        except (TypeError, ValueError) as e:
            errors.append(ConfigError(str(e)))
        return None

    cavity = attempt(_parse_cavity, data["cavity"])
    qubits = attempt(_parse_qubits, data["qubits"])
    grid = attempt(_parse_time, data["time"], config)
    propagator = attempt(_parse_propagator, data.get("propagator", {}))
    reading = attempt(_parse_reading, data.get("drive_reading", DriveReading.SECTION2_SIGNED.value))
    outputs = attempt(_parse_outputs, data.get("outputs", DEFAULT_OUTPUTS))
    if errors:
        return None, errors, warnings

    if len(qubits) > 1 and "energy_superposition" in str(data["initial_state"]):
        errors.append(ConfigError("energy_superposition needs a single qubit", field="initial_state"))
    if len(qubits) > 1 and propagator.method == PropagatorMethod.CLOSED_FORM:
        errors.append(ConfigMismatch(
            f"closed_form needs 2x2 blocks, {len(qubits)} qubits give {2 ** len(qubits)}x{2 ** len(qubits)}",
            field="propagator.method"
        ))
    dim = cavity.n_levels * 2 ** len(qubits)
    state = attempt(_parse_initial_state, data["initial_state"], dim, config)
    attempt(_check_hopping_magnitudes, qubits, grid, config)
    if errors:
        return None, errors, warnings

    scenario = Scenario(
        cavity=cavity,
        qubits=tuple(qubits),
        initial_state=state,
        time=grid,
        propagator=propagator,
        drive_reading=reading,
        outputs=tuple(outputs),
        name=str(data.get("name", "scenario")),
        description=str(data.get("description", ""))
    )
    attempt(scenario.hamiltonian, config)
    if errors:
        return None, errors, warnings
    return scenario, errors, warnings


def _parse_cavity(data: Any) -> CavityParams:
    if not isinstance(data, dict):
        raise ConfigError("cavity must be an object", field="cavity")
    for key in ("omega", "epsilon", "hbar"):
        if key in data:
            _require_number(data[key], f"cavity.{key}")
    return CavityParams.from_dict(data, "cavity")


def _parse_qubits(data: Any) -> List[DipoleQubit]:
    if not isinstance(data, list) or not data:
        raise ConfigError("qubits must be a non-empty list", field="qubits")
    qubits = []
    for i, entry in enumerate(data):
        path = f"qubits.{i}"
        if not isinstance(entry, dict):
            raise ConfigError("qubit entry must be an object", field=path)
        for key in ("dipole_length", "charge"):
            if key in entry:
                _require_number(entry[key], f"{path}.{key}")
        for j, a in enumerate(entry.get("couplings", [])):
            _require_number(a, f"{path}.couplings.{j}")
        qubits.append(DipoleQubit.from_dict(entry, path))
    return qubits


def _parse_time(data: Any, config: NumericsConfig) -> TimeGrid:
    if not isinstance(data, dict):
        raise ConfigError("time must be an object", field="time")
    t0 = _require_number(data.get("t0", 0.0), "time.t0")
    if "t1" not in data:
        raise ConfigError("missing required field", field="time.t1")
    t1 = _require_number(data["t1"], "time.t1")
    samples = data.get("samples", 2)
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 2:
        raise ConfigError(f"samples must be an integer >= 2, got {samples!r}", field="time.samples")
    step = (t1 - t0) / (samples - 1)
    if not step > config.time_resolution * max(1.0, abs(t0), abs(t1)):
        raise ConfigError(f"time span [{t0}, {t1}] is shorter than one sample step", field="time.t1")
    return TimeGrid(t0, t1, samples)


def _parse_method(value: Any) -> PropagatorMethod:
    try:
        return PropagatorMethod(value)
    except ValueError:
        choices = ", ".join(m.value for m in PropagatorMethod)
        raise ConfigError(f"unknown method {value!r} (choose {choices})", field="propagator.method")


def _parse_steps(value: Any) -> Optional[int]:
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"oracle_steps must be a positive integer, got {value!r}",
                          field="propagator.oracle_steps")
    return value


def _parse_propagator(data: Any) -> PropagatorSpec:
    if isinstance(data, str):
        data = {"method": data}
    if not isinstance(data, dict):
        raise ConfigError("propagator must be an object", field="propagator")
    return PropagatorSpec(
        method=_parse_method(data.get("method", PropagatorMethod.CLOSED_FORM.value)),
        oracle_steps=_parse_steps(data.get("oracle_steps"))
    )


def _parse_reading(value: Any) -> DriveReading:
    try:
        return DriveReading(value)
    except ValueError:
        raise ConfigError(f"unknown drive reading {value!r}", field="drive_reading")


def _parse_outputs(value: Any) -> List[str]:
    if not isinstance(value, list):
        raise ConfigError("outputs must be a list of observable names", field="outputs")
    known = registry.list_all()
    for i, name in enumerate(value):
        if name not in known:
            raise ConfigError(f"unknown observable {name!r} (known: {', '.join(known)})",
                              field=f"outputs.{i}")
    return list(value)


def _parse_initial_state(value: Any, dim: int, config: NumericsConfig) -> InitialState:
    if isinstance(value, str):
        tokens = value.split()
        if not tokens or tokens[0] not in STATE_PRESETS:
            raise ConfigError(f"unknown preset {value!r} (known: {', '.join(STATE_PRESETS)})",
                              field="initial_state")
        if tokens[0] == "energy_superposition":
            if len(tokens) != 3:
                raise ConfigError("energy_superposition takes two coefficients", field="initial_state")
            for tok in tokens[1:]:
                try:
                    complex(tok)
                except ValueError:
                    raise ConfigError(f"bad coefficient {tok!r}", field="initial_state")
        elif len(tokens) != 1:
            raise ConfigError(f"preset {tokens[0]} takes no arguments", field="initial_state")
        return " ".join(tokens)

    if not isinstance(value, list):
        raise ConfigError("initial_state must be a preset name or an amplitude list", field="initial_state")
    if len(value) != dim:
        raise ConfigError(f"{len(value)} amplitudes given, the scenario has {dim}", field="initial_state")
    amplitudes = []
    for i, entry in enumerate(value):
        path = f"initial_state.{i}"
        if isinstance(entry, list) and len(entry) == 2:
            amplitudes.append(complex(_require_number(entry[0], path), _require_number(entry[1], path)))
        else:
            amplitudes.append(complex(_require_number(entry, path)))
    if float(np.linalg.norm(amplitudes)) ** 2 < config.zero_norm_sq:
        raise ConfigError("initial state has zero norm", field="initial_state")
    return amplitudes


def _check_hopping_magnitudes(qubits: List[DipoleQubit], grid: TimeGrid, config: NumericsConfig) -> None:
    samples = np.linspace(grid.t0, grid.t1, config.ts_sample_points)
    for i, dq in enumerate(qubits):
        lowest = float(np.min(dq.params.ts_mag.eval(samples)))
        if lowest < 0:
            raise ConfigError(f"|t_s| must be >= 0, reaches {lowest:.6g}", field=f"qubits.{i}.ts_mag")


def _require_number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=path)
    if not np.isfinite(value):
        raise ConfigError("value must be finite", field=path)
    return float(value)


# =============================================================================
# Loading
# =============================================================================

def load_scenario(path: str, config: NumericsConfig = None) -> Scenario:
    """
    Load and validate a scenario file.

    Args:
        path: Path to a scenario JSON file, or the name of a shipped scenario

    Returns:
        The resolved Scenario

    Raises:
        ConfigError: On unreadable files, malformed JSON (with line and column) or invalid content.
    """
    if not os.path.exists(path):
        shipped = os.path.join(SCENARIO_DIR, f"{path}.json")
        if not os.path.exists(shipped):
            raise ConfigError(f"scenario not found: {path}")
        path = shipped

    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read scenario {path}: {e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, line=e.lineno, column=e.colno)
    logger.info("loaded scenario %s", path)
    return Scenario.from_dict(data, config)


def list_scenarios(scenario_dir: str = None) -> List[str]:
    """List all shipped scenarios."""
    directory = scenario_dir or SCENARIO_DIR

    if not os.path.exists(directory):
        return []

    return sorted(
        filename[:-len(".json")]
        for filename in os.listdir(directory)
        if filename.endswith(".json")
    )


# =============================================================================
# Parameter paths
# =============================================================================

def set_parameter(data: Dict[str, Any], path: str, value: float) -> Dict[str, Any]:
    """
    Return a copy of scenario data with the scalar at a dotted path replaced.

    Paths index lists by position, e.g. "qubits.0.couplings.1". A path that
    ends on a constant signal record sets its value. An integer field keeps
    its type when the new value is integral.

    Raises:
        UnknownParameterPath: If the path does not resolve to a scalar.
    """
    copy = json.loads(json.dumps(data))
    keys = path.split(".")
    node: Any = copy
    try:
        for key in keys[:-1]:
            node = node[int(key)] if isinstance(node, list) else node[key]
        last = keys[-1]
        index: Union[int, str] = int(last) if isinstance(node, list) else last
        current = node[index]
    except (KeyError, IndexError, ValueError, TypeError):
        raise UnknownParameterPath("path does not exist in the scenario", field=path)

    if isinstance(current, dict) and current.get("kind") == "constant":
        current["value"] = value
        return copy
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise UnknownParameterPath(f"path resolves to {type(current).__name__}, not a number", field=path)
    if isinstance(current, int) and float(value).is_integer():
        value = int(value)
    node[index] = value
    return copy
