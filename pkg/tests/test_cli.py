"""
End-to-end tests for simulate, eigen and sweep

Run with: pytest tests/
"""

import sys
import os
import json

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from core import UnknownParameterPath, PropagatorMethod
from cli import (
    Scenario, SCENARIO_DIR, load_scenario, list_scenarios,
    run_eigen, run_simulate, run_sweep, write_simulation, main
)


def shipped(name):
    with open(os.path.join(SCENARIO_DIR, f"{name}.json"), encoding="utf-8") as f:
        return json.load(f)


def rabi_data(t1, samples):
    data = shipped("rabi")
    data["time"] = {"t0": 0.0, "t1": t1, "samples": samples}
    data["outputs"] = ["site_probabilities"]
    return data


def write_scenario(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestSimulate:
    """Tests for sampled trajectories and their summaries."""

    def test_rabi_oscillation(self):
        result = run_simulate(load_scenario("rabi"))
        summary = result.summary
        assert summary["rabi_omega"] == pytest.approx(1.0, abs=1e-6)
        assert summary["max_norm_drift"] < 1e-10
        assert summary["max_cavity_population_drift"] < 1e-10
        assert summary["final_entropy"] < 1e-10

        times = result.column("time")
        assert np.max(np.abs(result.column("P_x1") - np.cos(0.5 * times) ** 2)) < 1e-9
        assert np.max(np.abs(result.column("P_x1") + result.column("P_x2") - 1.0)) < 1e-12

    def test_single_qubit_cavity(self):
        result = run_simulate(load_scenario("single_qubit_cavity"))
        summary = result.summary
        assert summary["max_norm_drift"] < 1e-10
        assert summary["max_cavity_population_drift"] < 1e-10
        assert 0.0 <= summary["final_entropy"] <= np.log(2) + 1e-12
        assert np.isfinite(summary["oracle_deviation"])

        assert result.column("P_Ec1")[0] == pytest.approx(0.36)
        assert np.max(np.abs(result.column("P_Ec2") - 0.64)) < 1e-10
        assert np.max(np.abs(result.column("S_cavity") - result.column("S_cavity_closed_form"))) < 1e-9
        assert np.max(np.abs(result.column("joint_norm") - 1.0)) < 1e-10
        assert "rhoC_1_2_re" in result.header
        assert "rhoQ1_1_2_im" in result.header

    def test_multiphoton_transfer_is_zero(self):
        result = run_simulate(load_scenario("multiphoton"))
        assert "Prob_psi0_to_Ec4" in result.header
        assert np.max(result.column("Prob_psi0_to_Ec4")) < 1e-20
        assert np.max(np.abs(result.column("P_Ec1") - 1.0)) < 1e-10

    def test_multiphoton_from_upper_level(self):
        """The transfer column follows the actual initial state, not level 1."""
        data = rabi_data(10.0, 101)
        data["initial_state"] = [0.0, 0.0, 1.0, 0.0]
        data["outputs"] = ["multiphoton"]
        result = run_simulate(Scenario.from_dict(data))
        assert result.header == ["time", "Prob_psi0_to_Ec2"]
        times = result.column("time")
        expected = np.cos(0.5 * times) ** 2
        assert np.max(np.abs(result.column("Prob_psi0_to_Ec2") - expected)) < 1e-9

    def test_two_qubit_columns(self):
        result = run_simulate(load_scenario("two_qubit"))
        assert "P_x1_q1" in result.header
        assert result.summary["max_norm_drift"] < 1e-10
        assert result.summary["propagator"] == "exp_integral"

    def test_independent_drive_reading(self):
        result = run_simulate(load_scenario("section4"))
        assert result.summary["max_norm_drift"] < 1e-10
        assert result.summary["max_cavity_population_drift"] < 1e-10

    def test_oracle_matches_closed_form_for_constant_parameters(self):
        scn = Scenario.from_dict(rabi_data(5.0, 33))
        closed = run_simulate(scn)
        oracle = run_simulate(scn.with_propagator("oracle", 256))
        assert oracle.summary["propagator"] == "oracle"
        assert np.max(np.abs(closed.column("P_x1") - oracle.column("P_x1"))) < 1e-10

    def test_no_oscillation_gives_null(self):
        data = rabi_data(5.0, 64)
        data["qubits"][0]["ts_mag"] = 0.0
        result = run_simulate(Scenario.from_dict(data))
        assert result.summary["rabi_omega"] is None

    def test_written_files(self, tmp_path):
        result = run_simulate(Scenario.from_dict(rabi_data(2.0, 5)))
        csv_path, json_path = write_simulation(result, str(tmp_path))
        lines = open(csv_path, encoding="utf-8").read().splitlines()
        assert lines[0] == "time,P_x1,P_x2"
        assert len(lines) == 6
        summary = json.load(open(json_path, encoding="utf-8"))
        assert summary["resolved_scenario"]["time"]["samples"] == 5


class TestEigen:
    """Tests for instantaneous block spectra."""

    def test_printed_energies_agree(self):
        report = run_eigen(load_scenario("single_qubit_cavity"), 1.3)
        assert report["time"] == 1.3
        assert len(report["blocks"]) == 2
        for block in report["blocks"]:
            assert np.allclose(block["energies"], block["printed_energies"], rtol=1e-12, atol=1e-12)
            assert max(block["residuals"]) < 1e-12

    def test_uncoupled_levels(self):
        report = run_eigen(load_scenario("rabi"))
        for n, block in enumerate(report["blocks"], start=1):
            ec = n - 0.5
            assert block["cavity_energy"] == pytest.approx(ec)
            assert np.allclose(block["energies"], [ec - 0.5, ec + 0.5], atol=1e-12)

    def test_two_qubit_blocks(self):
        report = run_eigen(load_scenario("two_qubit"), 0.0)
        block = report["blocks"][0]
        assert len(block["energies"]) == 4
        assert "printed_energies" not in block
        assert max(block["residuals"]) < 1e-12


class TestSweep:
    """Tests for parameter sweeps."""

    def test_rabi_frequency_tracks_hopping(self):
        scn = Scenario.from_dict(rabi_data(400.0, 1024))
        values = [0.1 * k for k in range(1, 11)]
        header, rows = run_sweep(scn, "qubits.0.ts_mag", values)
        assert header[0] == "qubits.0.ts_mag"
        assert [row[0] for row in rows] == values
        for value, row in zip(values, rows):
            assert row[header.index("rabi_omega")] == pytest.approx(2 * value, abs=1e-5)

    def test_workers_keep_order(self):
        scn = Scenario.from_dict(rabi_data(40.0, 128))
        values = [0.9, 0.3, 0.6]
        serial = run_sweep(scn, "qubits.0.ts_mag", values, workers=1)
        parallel = run_sweep(scn, "qubits.0.ts_mag", values, workers=3)
        assert serial == parallel

    def test_integer_parameter(self):
        """Sample counts swept as floats still load as integer fields."""
        scn = Scenario.from_dict(rabi_data(40.0, 128))
        header, rows = run_sweep(scn, "time.samples", [64.0, 128.0])
        assert [row[0] for row in rows] == [64.0, 128.0]
        for row in rows:
            assert row[header.index("max_norm_drift")] < 1e-9

    def test_empty_values(self):
        header, rows = run_sweep(load_scenario("rabi"), "qubits.0.ts_mag", [])
        assert rows == []
        assert header == ["qubits.0.ts_mag", "rabi_omega", "max_norm_drift",
                          "max_cavity_population_drift", "final_entropy"]

    def test_unknown_path(self):
        with pytest.raises(UnknownParameterPath):
            run_sweep(load_scenario("rabi"), "qubits.0.mass", [1.0])

    def test_uncoupled_cavity_stays_unentangled(self):
        data = shipped("single_qubit_cavity")
        data["qubits"][0]["couplings"] = [0.3, 0.0]
        data["time"]["samples"] = 101
        data["propagator"] = {"method": "closed_form"}
        header, rows = run_sweep(Scenario.from_dict(data), "qubits.0.couplings.0", [0.0, 0.5])
        entropy = header.index("final_entropy")
        assert rows[0][entropy] < 1e-10
        assert rows[1][entropy] > 1e-6


class TestMain:
    """Tests for the command-line entry point."""

    @pytest.mark.parametrize("name", list_scenarios())
    def test_simulate_is_deterministic(self, tmp_path, name):
        first, second = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", name, "--out", str(first)]) == 0
        assert main(["simulate", name, "--out", str(second)]) == 0
        for filename in ("timeseries.csv", "summary.json"):
            assert (first / filename).read_bytes() == (second / filename).read_bytes()

    def test_propagator_override(self, tmp_path):
        path = write_scenario(tmp_path, rabi_data(3.0, 16))
        assert main(["simulate", path, "--out", str(tmp_path), "--propagator", "oracle", "--oracle-steps", "64"]) == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["propagator"] == PropagatorMethod.ORACLE.value
        assert summary["resolved_scenario"]["propagator"]["oracle_steps"] == 64

    def test_eigen_output(self, tmp_path, capsys):
        assert main(["eigen", "rabi", "--time", "0.5", "--out", str(tmp_path)]) == 0
        printed = json.loads(capsys.readouterr().out)
        written = json.loads((tmp_path / "eigen.json").read_text())
        assert printed == written
        assert printed["time"] == 0.5

    def test_sweep_output(self, tmp_path):
        path = write_scenario(tmp_path, rabi_data(40.0, 128))
        assert main(["sweep", path, "--param", "qubits.0.ts_mag", "--values", "0.5,1.0",
                     "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[0].startswith("qubits.0.ts_mag,rabi_omega")
        assert len(lines) == 3

    def test_malformed_scenario_exits_2(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{ not json")
        assert main(["simulate", str(path), "--out", str(tmp_path)]) == 2
        assert "line 1" in capsys.readouterr().err

    def test_invalid_override_exits_2(self, tmp_path):
        assert main(["simulate", "two_qubit", "--out", str(tmp_path), "--propagator", "closed_form"]) == 2

    def test_unknown_sweep_path_exits_2(self, tmp_path):
        assert main(["sweep", "rabi", "--param", "cavity.colour", "--values", "1", "--out", str(tmp_path)]) == 2

    def test_degenerate_spectrum_exits_3(self, tmp_path):
        data = rabi_data(1.0, 3)
        data["qubits"][0]["ts_mag"] = 0.0
        assert main(["eigen", write_scenario(tmp_path, data)]) == 3
