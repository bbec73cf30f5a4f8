"""
Tests for closed-form, exponential-of-integral and time-ordered propagators

Run with: pytest tests/
"""

import sys
import os

import numpy as np
import pytest
from scipy.linalg import expm

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from core import (
    BlockDrive, BlockGenerator, CavityParams, DipoleQubit, QubitParams, StateVector,
    Constant, Sinusoid, Sum, Trig, DriveReading, PropagatorMethod, ModeParity,
    ConfigMismatch, DimensionMismatch, NormViolation,
    closed_form_from_integral, closed_form_block, closed_form_coefficients, printed_u11,
    exp_of_integral_block, time_ordered_oracle, build_propagator, propagate_state,
    identity_propagator, drives_for, drive_hamiltonian, default_oracle_steps,
    eigen_block, printed_block_energies, eigen_generator, pauli_decomposition,
    pauli_reconstruct, assemble_general, mode_signal, cavity_level_energy
)


def max_diff(a, b):
    return float(np.max(np.abs(a - b)))


def random_constant_drive(rng):
    qp = QubitParams.constant(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1.5), rng.uniform(-3, 3))
    return BlockDrive(Constant(rng.uniform(-1, 1)), Constant(rng.uniform(-1, 1)), rng.uniform(0, 3), qp)


def random_driven_block(rng):
    """A single-qubit block with sinusoidal drives and hopping."""
    alpha = Sinusoid(rng.uniform(-1, 1), rng.uniform(0.5, 2)) if rng.random() < 0.5 else Constant(rng.uniform(-3, 3))
    qp = QubitParams(
        Constant(rng.uniform(-1, 1)),
        Sum((Constant(rng.uniform(-1, 1)), Sinusoid(rng.uniform(0, 0.5), rng.uniform(0.5, 2), 0.0, Trig.COS))),
        Sum((Constant(rng.uniform(0.5, 1.0)), Sinusoid(rng.uniform(0, 0.4), rng.uniform(0.5, 2)))),
        alpha
    )
    d1 = Sinusoid(rng.uniform(-1, 1), rng.uniform(0.5, 3), rng.uniform(-1, 1))
    d2 = Sinusoid(rng.uniform(-1, 1), rng.uniform(0.5, 3), 0.0, Trig.COS)
    return BlockDrive(d1, d2, rng.uniform(0, 2), qp)


def ladder_block(amplitude):
    """d1 = -A sin 2t, d2 = +A sin 2t, unit real hopping."""
    drive = Sinusoid(amplitude, 2.0, 0.0, Trig.SIN)
    return BlockDrive(-drive, drive, 0.0, QubitParams.constant(0.0, 0.0, 1.0)).generator()


class TestClosedForm:
    """Tests for the analytic 2x2 propagator."""

    def test_identity_at_initial_time(self):
        rng = np.random.default_rng(41)
        bd = random_driven_block(rng)
        assert max_diff(closed_form_block(bd, 1.3, 1.3), np.eye(2)) < 1e-15

    def test_no_hopping_is_diagonal_phases(self):
        m = np.array([[0.7, 0.0], [0.0, -0.2]], dtype=complex)
        u = closed_form_from_integral(m)
        assert max_diff(u, np.diag(np.exp(-1j * np.array([0.7, -0.2])))) < 1e-15

    def test_pure_hopping_rotation(self):
        """M = tau X gives cos(tau) I - i sin(tau) X."""
        tau = 0.9
        u = closed_form_from_integral(np.array([[0, tau], [tau, 0]], dtype=complex))
        expected = np.array([[np.cos(tau), -1j * np.sin(tau)], [-1j * np.sin(tau), np.cos(tau)]])
        assert max_diff(u, expected) < 1e-15

    def test_matches_matrix_exponential(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            a, b = rng.uniform(-5, 5, 2)
            tau = complex(rng.normal(), rng.normal())
            m = np.array([[a, tau], [np.conj(tau), b]])
            hbar = rng.uniform(0.5, 2)
            assert max_diff(closed_form_from_integral(m, hbar), expm(m / (1j * hbar))) < 1e-12

    def test_series_limit_is_continuous(self):
        """Around R = 0 the series branch agrees with the exact exponential."""
        for r_scale in (1e-6, 1e-9, 1e-12, 0.0):
            m = np.array([[0.3 + r_scale, r_scale], [r_scale, 0.3]], dtype=complex)
            assert max_diff(closed_form_from_integral(m), expm(-1j * m)) < 1e-14

    def test_constant_parameters_match_single_oracle_step(self):
        """For constant H one midpoint step is the exact exponential."""
        rng = np.random.default_rng(43)
        for _ in range(100):
            bd = random_constant_drive(rng)
            t0, t1 = np.sort(rng.uniform(-3, 3, 2))
            analytic = closed_form_block(bd, t0, t1)
            oracle = time_ordered_oracle(bd.generator(), t0, t1, steps=1)
            assert max_diff(analytic, oracle) < 1e-10

    def test_matches_exponential_of_integral(self):
        """The two analytic methods agree on time-dependent blocks."""
        rng = np.random.default_rng(44)
        for _ in range(100):
            bd = random_driven_block(rng)
            t0, t1 = np.sort(rng.uniform(0, 5, 2))
            analytic = closed_form_block(bd, t0, t1)
            numeric = exp_of_integral_block(bd.generator(), t0, t1)
            assert max_diff(analytic, numeric) < 1e-11

    def test_unitary(self):
        rng = np.random.default_rng(45)
        for _ in range(50):
            u = closed_form_block(random_driven_block(rng), 0.0, rng.uniform(0, 20))
            assert max_diff(u.conj().T @ u, np.eye(2)) < 1e-13

    def test_printed_u11_matches(self):
        rng = np.random.default_rng(46)
        for _ in range(50):
            a, b = rng.uniform(-3, 3, 2)
            tau = complex(rng.normal(), rng.normal())
            m = np.array([[a, tau], [np.conj(tau), b]])
            u11 = closed_form_from_integral(m)[0, 0]
            assert abs(printed_u11(a, b, tau, np.conj(tau)) - u11) < 1e-12

    def test_printed_u11_singular_at_zero(self):
        with pytest.raises(ValueError):
            printed_u11(0.5, 0.5, 0.0, 0.0)


class TestCoefficients:
    """Tests for the single-qubit four-dimensional propagator."""

    def setup_method(self):
        self.cav = CavityParams(omega=1.0, n_levels=2, epsilon=2.0, mode_parity=ModeParity.SECTION2_EXAMPLES)
        self.dq = DipoleQubit(QubitParams.constant(0.1, -0.1, 0.4, 0.3), dipole_length=1.0, couplings=(0.3, 0.2))

    def test_component_formulas(self):
        drives = drives_for(self.cav, self.dq, DriveReading.SECTION2_SIGNED)
        c = closed_form_coefficients(drives, 0.0, 2.0)
        psi0 = StateVector(np.array([0.6, 0.0, 0.0, 0.8j]))
        prop = build_propagator(drive_hamiltonian(self.cav, self.dq, DriveReading.SECTION2_SIGNED),
                                0.0, 2.0, PropagatorMethod.CLOSED_FORM)
        psi = propagate_state(prop, psi0).amplitudes
        g = psi0.amplitudes
        assert psi[0] == pytest.approx(c["U11"] * g[0] + c["U12"] * g[1], abs=1e-14)
        assert psi[1] == pytest.approx(c["U21"] * g[0] + c["U22"] * g[1], abs=1e-14)
        assert psi[2] == pytest.approx(c["U33"] * g[2] + c["U34"] * g[3], abs=1e-14)
        assert psi[3] == pytest.approx(c["U43"] * g[2] + c["U44"] * g[3], abs=1e-14)

    def test_needs_two_blocks(self):
        drives = drives_for(self.cav, self.dq, DriveReading.SECTION2_SIGNED)
        with pytest.raises(DimensionMismatch):
            closed_form_coefficients(drives[:1], 0.0, 1.0)

    def test_signed_reading(self):
        drives = drives_for(self.cav, self.dq, DriveReading.SECTION2_SIGNED)
        t = 0.8
        e_f2 = mode_signal(self.cav, self.dq, 2)(t)
        assert drives[1].d1(t) == pytest.approx(-e_f2)
        assert drives[1].d2(t) == pytest.approx(e_f2)
        assert drives[1].ec == cavity_level_energy(self.cav, 2)

    def test_independent_reading(self):
        """Every block sees -E_f1 on site 1 and +E_f2 on site 2."""
        drives = drives_for(self.cav, self.dq, DriveReading.SECTION4_INDEPENDENT)
        t = 0.8
        for bd in drives:
            assert bd.d1(t) == pytest.approx(-mode_signal(self.cav, self.dq, 1)(t))
            assert bd.d2(t) == pytest.approx(mode_signal(self.cav, self.dq, 2)(t))

    def test_independent_reading_needs_two_levels(self):
        cav = CavityParams(omega=1.0, n_levels=1)
        dq = DipoleQubit(QubitParams.constant(0, 0, 1), couplings=(0.1,))
        with pytest.raises(ConfigMismatch):
            drives_for(cav, dq, DriveReading.SECTION4_INDEPENDENT)


class TestOracle:
    """Tests for the time-ordered midpoint product."""

    def test_unitary_for_any_step_count(self):
        rng = np.random.default_rng(47)
        gen = random_driven_block(rng).generator()
        for steps in (1, 7, 100, 5000):
            u = time_ordered_oracle(gen, 0.0, 3.0, steps)
            assert max_diff(u.conj().T @ u, np.eye(2)) < 1e-12

    def test_commuting_family_matches_exponential_of_integral(self):
        """H(t) = g(t) H0 commutes with itself, so both methods agree."""
        rng = np.random.default_rng(48)
        x = rng.uniform(-0.5, 0.5, (2, 2)) + 1j * rng.uniform(-0.5, 0.5, (2, 2))
        h0 = 0.5 * (x + x.conj().T)
        gen = BlockGenerator(2, 0.0, ((h0, Sinusoid(1.0, 1.0, 0.3, Trig.COS)),))
        exact = exp_of_integral_block(gen, 0.0, 1.0)
        oracle = time_ordered_oracle(gen, 0.0, 1.0, 2 ** 14)
        assert max_diff(exact, oracle) < 1e-9

    def test_gap_grows_with_drive(self):
        """For a non-commuting family the analytic methods drift from the oracle."""
        gaps = []
        for amplitude in (0.8, 0.4, 0.2, 0.1):
            gen = ladder_block(amplitude)
            gaps.append(max_diff(exp_of_integral_block(gen, 0.0, 1.0),
                                 time_ordered_oracle(gen, 0.0, 1.0, 2 ** 14)))
        assert all(g > 1e-6 for g in gaps)
        assert gaps == sorted(gaps, reverse=True)

    def test_second_order_convergence(self):
        gen = ladder_block(0.8)
        reference = time_ordered_oracle(gen, 0.0, 1.0, 2 ** 14)
        coarse = max_diff(time_ordered_oracle(gen, 0.0, 1.0, 2 ** 10), reference)
        fine = max_diff(time_ordered_oracle(gen, 0.0, 1.0, 2 ** 11), reference)
        assert 3.5 <= coarse / fine <= 4.5

    def test_composition(self):
        """U(t2, t1) U(t1, t0) = U(t2, t0) on matching midpoint grids."""
        rng = np.random.default_rng(49)
        gen = random_driven_block(rng).generator()
        first = time_ordered_oracle(gen, 0.0, 0.5, 1000)
        second = time_ordered_oracle(gen, 0.5, 1.0, 1000)
        whole = time_ordered_oracle(gen, 0.0, 1.0, 2000)
        assert max_diff(second @ first, whole) < 1e-12

    def test_batches_do_not_change_result(self):
        from core import NumericsConfig
        rng = np.random.default_rng(50)
        gen = random_driven_block(rng).generator()
        small = time_ordered_oracle(gen, 0.0, 2.0, 999, config=NumericsConfig(oracle_batch=64))
        large = time_ordered_oracle(gen, 0.0, 2.0, 999)
        assert max_diff(small, large) < 1e-13

    def test_block_entry_cap_limits_batches(self):
        """A cap of one 2x2 block per batch evaluates one step at a time."""
        from core import NumericsConfig
        rng = np.random.default_rng(51)
        gen = random_driven_block(rng).generator()
        tight = NumericsConfig(max_block_entries=4)
        assert gen.batch_size(tight) == 1
        small = time_ordered_oracle(gen, 0.0, 2.0, 333, config=tight)
        large = time_ordered_oracle(gen, 0.0, 2.0, 333)
        assert max_diff(small, large) < 1e-13
        assert gen.max_magnitude(0.0, 2.0, config=tight) == pytest.approx(gen.max_magnitude(0.0, 2.0), rel=1e-14)

    def test_rejects_zero_steps(self):
        gen = ladder_block(0.1)
        with pytest.raises(ValueError):
            time_ordered_oracle(gen, 0.0, 1.0, 0)

    def test_default_steps_are_capped(self):
        from core import NumericsConfig
        gen = ladder_block(0.8)
        config = NumericsConfig(oracle_max_steps=1000)
        assert default_oracle_steps(gen, 0.0, 100.0, config=config) == 1000
        assert default_oracle_steps(gen, 0.0, 0.01) == 4096


class TestBuildPropagator:
    """Tests for whole-Hamiltonian propagators and state application."""

    def test_methods_agree_on_constant_hamiltonian(self):
        rng = np.random.default_rng(51)
        cav = CavityParams(omega=1.0, n_levels=3)
        dq = DipoleQubit(QubitParams.constant(0.2, -0.3, 0.6, 1.0), dipole_length=1.0, couplings=(0.0, 0.0, 0.0))
        bh = assemble_general(cav, [dq])
        t1 = rng.uniform(1, 4)
        closed = build_propagator(bh, 0.0, t1, PropagatorMethod.CLOSED_FORM).full_matrix()
        integral = build_propagator(bh, 0.0, t1, PropagatorMethod.EXP_INTEGRAL).full_matrix()
        oracle = build_propagator(bh, 0.0, t1, PropagatorMethod.ORACLE, steps=1).full_matrix()
        assert max_diff(closed, integral) < 1e-12
        assert max_diff(closed, oracle) < 1e-12
        assert max_diff(closed, expm(-1j * bh.full_matrix(0.0) * t1)) < 1e-12

    def test_closed_form_rejects_large_blocks(self):
        rng = np.random.default_rng(52)
        cav = CavityParams(omega=1.0, n_levels=2)
        qubits = [DipoleQubit(QubitParams.constant(0, 0, 1), couplings=tuple(rng.uniform(0, 1, 2)))
                  for _ in range(2)]
        with pytest.raises(ConfigMismatch) as exc:
            build_propagator(assemble_general(cav, qubits), 0.0, 1.0, PropagatorMethod.CLOSED_FORM)
        assert exc.value.field == "propagator.method"

    def test_block_structure_preserved(self):
        """Population of each cavity block is unchanged by evolution."""
        rng = np.random.default_rng(53)
        cav = CavityParams(omega=1.0, n_levels=2)
        qubits = [DipoleQubit(QubitParams.constant(0.1, -0.2, 0.5), dipole_length=1.0,
                              couplings=tuple(rng.uniform(0, 1, 2))) for _ in range(2)]
        bh = assemble_general(cav, qubits)
        psi0 = StateVector(rng.normal(size=8) + 1j * rng.normal(size=8)).normalized()
        psi = propagate_state(build_propagator(bh, 0.0, 3.0, PropagatorMethod.EXP_INTEGRAL), psi0)
        for n in range(2):
            before = np.sum(np.abs(psi0.amplitudes[4 * n:4 * n + 4]) ** 2)
            after = np.sum(np.abs(psi.amplitudes[4 * n:4 * n + 4]) ** 2)
            assert after == pytest.approx(before, abs=1e-13)

    def test_identity_propagator(self):
        prop = identity_propagator(3, 2)
        psi0 = StateVector(np.ones(6) / np.sqrt(6))
        assert np.array_equal(propagate_state(prop, psi0).amplitudes, psi0.amplitudes)
        assert prop.unitarity_error() == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            propagate_state(identity_propagator(2, 2), StateVector([1.0, 0.0]))

    def test_unnormalized_state(self):
        with pytest.raises(NormViolation):
            propagate_state(identity_propagator(1, 2), StateVector([1.0, 1.0]))


class TestBlockSpectra:
    """Tests for instantaneous block eigen-analysis."""

    def test_printed_energies_match(self):
        rng = np.random.default_rng(54)
        for _ in range(100):
            ec = rng.uniform(0, 3)
            e_fn, ep1, ep2 = rng.uniform(-1, 1, 3)
            ts = rng.uniform(0.05, 1)
            bd = BlockDrive(Constant(-e_fn), Constant(e_fn), ec, QubitParams.constant(ep1, ep2, ts, rng.uniform(-3, 3)))
            energies, _ = eigen_block(bd, 0.0)
            printed = printed_block_energies(ec, e_fn, ep1, ep2, ts)
            assert np.allclose(energies, printed, rtol=1e-12, atol=1e-12)

    def test_eigen_block_residuals(self):
        rng = np.random.default_rng(55)
        bd = random_driven_block(rng)
        energies, states = eigen_block(bd, 1.1)
        h = bd.at(1.1)
        for e, psi in zip(energies, states):
            assert max_diff(h @ psi.amplitudes, e * psi.amplitudes) < 1e-12

    def test_eigen_generator_large_block(self):
        rng = np.random.default_rng(56)
        cav = CavityParams(omega=1.0, n_levels=2)
        qubits = [DipoleQubit(QubitParams.constant(0.1, -0.1, 0.5), dipole_length=1.0,
                              couplings=tuple(rng.uniform(0, 1, 2))) for _ in range(2)]
        gen = assemble_general(cav, qubits).block(2)
        energies, vectors = eigen_generator(gen, 0.3)
        h = gen.at(0.3)
        assert np.all(np.diff(energies) >= 0)
        for e, v in zip(energies, vectors):
            assert max_diff(h @ v, e * v) < 1e-12


class TestPauli:
    """Tests for the Pauli decomposition of block unitaries."""

    def test_rotation(self):
        """exp(-i theta X) = cos(theta) I - i sin(theta) X."""
        theta = 0.4
        u = closed_form_from_integral(np.array([[0, theta], [theta, 0]], dtype=complex))
        coeffs = pauli_decomposition(u, tol=1e-14)
        assert set(coeffs) == {"I", "X"}
        assert coeffs["I"] == pytest.approx(np.cos(theta))
        assert coeffs["X"] == pytest.approx(-1j * np.sin(theta))

    def test_two_qubit_reconstruction(self):
        rng = np.random.default_rng(57)
        x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        coeffs = pauli_decomposition(x)
        assert len(coeffs) == 16
        assert max_diff(pauli_reconstruct(coeffs), x) < 1e-12

    def test_rejects_non_power_of_two(self):
        with pytest.raises(DimensionMismatch):
            pauli_decomposition(np.eye(3))
