"""
Runner Module

Orchestrates the three run kinds:
- eigen:    instantaneous spectra of every block
- simulate: a sampled trajectory with observables and a summary
- sweep:    one simulate summary per value of a scenario parameter
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core import (
    DEFAULT_CONFIG,
    BlockHamiltonian,
    DriveReading,
    NoOscillation,
    NumericsConfig,
    PropagatorMethod,
    QuadratureNonConvergence,
    StateVector,
    build_propagator,
    cavity_density,
    cavity_population,
    default_oracle_steps,
    density_from_state,
    eigen_generator,
    mode_signal,
    printed_block_energies,
    propagate_state,
    rabi_frequency_estimate,
    site_probability,
    von_neumann_entropy,
)

from .emit import write_csv, write_json
from .observables import Observation, registry
from .scenario import Scenario, set_parameter

logger = logging.getLogger(__name__)


SWEEP_COLUMNS = ["rabi_omega", "max_norm_drift", "max_cavity_population_drift", "final_entropy"]


@dataclass
class SimulationResult:
    """CSV table plus JSON summary of one simulate run."""

    header: List[str]
    rows: List[List[float]]
    summary: Dict[str, Any]

    def column(self, name: str) -> np.ndarray:
        index = self.header.index(name)
        return np.array([row[index] for row in self.rows], dtype=float)


# =============================================================================
# Eigen
# =============================================================================

def run_eigen(scn: Scenario, t: float = None, config: NumericsConfig = None) -> Dict[str, Any]:
    """
    Per-block instantaneous eigenenergies, eigenvectors and eigen-residuals at t.

    For a single qubit under the signed drive reading the closed-form
    block energies are reported alongside.
    """
    t = scn.time.t0 if t is None else float(t)
    bh = scn.hamiltonian(config)
    printed = len(scn.qubits) == 1 and scn.drive_reading == DriveReading.SECTION2_SIGNED

    blocks = []
    for n, gen in enumerate(bh.blocks, start=1):
        h = gen.at(t)
        energies, vectors = eigen_generator(gen, t, config)
        residuals = [float(np.linalg.norm(h @ v - e * v)) for e, v in zip(energies, vectors)]
        entry = {
            "level": n,
            "cavity_energy": gen.ec,
            "energies": [float(e) for e in energies],
            "eigenvectors": [[[float(a.real), float(a.imag)] for a in v] for v in vectors],
            "residuals": residuals
        }
        if printed:
            qp = scn.qubits[0].params
            entry["printed_energies"] = list(printed_block_energies(
                gen.ec,
                float(mode_signal(scn.cavity, scn.qubits[0], n).eval(t)),
                float(qp.ep1.eval(t)),
                float(qp.ep2.eval(t)),
                float(qp.ts_mag.eval(t))
            ))
        blocks.append(entry)

    return {"time": t, "blocks": blocks, "resolved_scenario": scn.to_dict()}


# =============================================================================
# Simulate
# =============================================================================

def _oracle_total_steps(scn: Scenario, bh: BlockHamiltonian, config: NumericsConfig) -> int:
    if scn.propagator.oracle_steps:
        return scn.propagator.oracle_steps
    t0, t1 = scn.time.t0, scn.time.t1
    return max(default_oracle_steps(gen, t0, t1, bh.hbar, config) for gen in bh.blocks)


def trajectory(
    scn: Scenario,
    bh: BlockHamiltonian,
    psi0: StateVector,
    config: NumericsConfig
) -> Iterator[Tuple[float, StateVector]]:
    """
    States at every sample time.

    Analytic methods propagate from t0 to each sample directly; the oracle
    steps from sample to sample.
    """
    times = scn.time.times()
    method = scn.propagator.method

    if method != PropagatorMethod.ORACLE:
        for t in times:
            prop = build_propagator(bh, scn.time.t0, float(t), method, config=config)
            yield float(t), propagate_state(prop, psi0, config)
        return

    per_interval = max(1, math.ceil(_oracle_total_steps(scn, bh, config) / (len(times) - 1)))
    logger.debug("oracle: %d steps per sample interval", per_interval)
    psi = psi0
    yield float(times[0]), psi
    for a, b in zip(times[:-1], times[1:]):
        prop = build_propagator(bh, float(a), float(b), method, steps=per_interval, config=config)
        psi = propagate_state(prop, psi, config)
        yield float(b), psi


def _alpha_paths(scn: Scenario) -> Optional[str]:
    paths = [f"qubits.{i}.alpha" for i, dq in enumerate(scn.qubits) if not dq.params.alpha.is_constant]
    return ", ".join(paths) or None


def run_simulate(scn: Scenario, config: NumericsConfig = None) -> SimulationResult:
    """
    Sample the trajectory and compute the requested observables.

    The summary holds the fitted Rabi frequency of P_x1 (null when no
    oscillation is found), the maximum norm drift, the maximum drift of any
    cavity population, the final cavity entropy and, for exp_integral runs,
    the max-element deviation from the oracle propagator at the final time.

    Raises:
        ConfigError: If the scenario cannot be assembled.
        QuadratureNonConvergence: Carrying the offending signal path.
    """
    if config is None:
        config = DEFAULT_CONFIG
    method = scn.propagator.method
    logger.info("simulate %s: %s, %d samples on [%g, %g]",
                scn.name, method.value, scn.time.samples, scn.time.t0, scn.time.t1)

    bh = scn.hamiltonian(config)
    dims = scn.factor_dims
    levels = scn.cavity.n_levels
    header = ["time"] + registry.columns(scn.outputs, dims)

    try:
        psi0 = scn.initial_state_vector(bh, config)
        rows = []
        rabi_series = []
        norm_drift = 0.0
        start_populations = None
        population_drift = 0.0
        entropy = 0.0
        for t, psi in trajectory(scn, bh, psi0, config):
            rho = density_from_state(psi, dims)
            populations = np.array([cavity_population(rho, n) for n in range(1, levels + 1)])
            if start_populations is None:
                start_populations = populations
            population_drift = max(population_drift, float(np.max(np.abs(populations - start_populations))))
            norm_drift = max(norm_drift, abs(psi.norm ** 2 - 1.0))
            rabi_series.append((t, site_probability(rho, 0, 1)))
            entropy = von_neumann_entropy(cavity_density(rho), config)

            obs = Observation(t=t, psi=psi, psi0=psi0, rho=rho)
            rows.append([t] + registry.compute(scn.outputs, obs))

        deviation = None
        if method == PropagatorMethod.EXP_INTEGRAL:
            deviation = _oracle_deviation(scn, bh, config)
    except QuadratureNonConvergence as e:
        if e.path:
            raise
        raise QuadratureNonConvergence(str(e), path=_alpha_paths(scn)) from e

    try:
        rabi_omega: Optional[float] = rabi_frequency_estimate(rabi_series, config)
    except NoOscillation as e:
        logger.warning("no Rabi oscillation in P_x1: %s", e)
        rabi_omega = None

    summary = {
        "scenario": scn.name,
        "propagator": method.value,
        "samples": scn.time.samples,
        "t0": scn.time.t0,
        "t1": scn.time.t1,
        "rabi_omega": rabi_omega,
        "max_norm_drift": norm_drift,
        "max_cavity_population_drift": population_drift,
        "final_entropy": entropy,
    }
    if deviation is not None:
        summary["oracle_deviation"] = deviation
    summary["resolved_scenario"] = scn.to_dict()

    logger.info("simulate %s done: rabi_omega=%s, norm drift %.3e", scn.name, rabi_omega, norm_drift)
    return SimulationResult(header, rows, summary)


def _oracle_deviation(scn: Scenario, bh: BlockHamiltonian, config: NumericsConfig) -> float:
    t0, t1 = scn.time.t0, scn.time.t1
    analytic = build_propagator(bh, t0, t1, PropagatorMethod.EXP_INTEGRAL, config=config)
    steps = _oracle_total_steps(scn, bh, config)
    oracle = build_propagator(bh, t0, t1, PropagatorMethod.ORACLE, steps=steps, config=config)
    return max(float(np.max(np.abs(u - v))) for u, v in zip(analytic.blocks, oracle.blocks))


def write_simulation(result: SimulationResult, out_dir: str) -> Tuple[str, str]:
    """Write <out>/timeseries.csv and <out>/summary.json."""
    csv_path = write_csv(os.path.join(out_dir, "timeseries.csv"), result.header, result.rows)
    json_path = write_json(os.path.join(out_dir, "summary.json"), result.summary)
    return csv_path, json_path


# =============================================================================
# Sweep
# =============================================================================

def run_sweep(
    scn: Scenario,
    path: str,
    values: Sequence[float],
    workers: int = 1,
    config: NumericsConfig = None
) -> Tuple[List[str], List[List[Any]]]:
    """
    One simulate summary row per parameter value, in input order.

    Raises:
        UnknownParameterPath: If `path` does not resolve to a scalar.
    """
    base = scn.to_dict()
    points = [set_parameter(base, path, float(v)) for v in values]
    if not points:
        set_parameter(base, path, 0.0)
    header = [path] + SWEEP_COLUMNS

    def run_point(data: Dict[str, Any]) -> Dict[str, Any]:
        return run_simulate(Scenario.from_dict(data, config), config).summary

    logger.info("sweep %s over %d values with %d workers", path, len(points), workers)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        summaries = list(pool.map(run_point, points))

    rows = [
        [float(v)] + [summary[column] for column in SWEEP_COLUMNS]
        for v, summary in zip(values, summaries)
    ]
    return header, rows
