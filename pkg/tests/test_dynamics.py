"""Lindblad propagation, reference solutions, GHZ parity, short-time fits."""

import numpy as np
import pytest

from nvvm.dynamics import (
    DensityMatrix,
    LindbladChannel,
    NoiseModel,
    StepSizeError,
    extract_oscillation_frequency,
    full_drive_propagation,
    ghz_parity_direct,
    ghz_parity_expectation,
    heff_rabi,
    heff_ramsey,
    lindblad_generator,
    noise_operator_eigenbasis,
    propagate_lindblad,
    rabi_probability,
    ramsey_probability,
    rabi_setup,
    ramsey_setup,
    required_dt,
    short_time_fit,
)
from nvvm.nvmodel import NvParameters, ReferenceDcField, StaticField, eigensystem, ramsey_shift
from nvvm.rabi import MicrowaveDrive, rabi_exact
from nvvm.spinalg import matrix_exponential_action, pauli_operators

PARAMS = NvParameters()
FIELD = StaticField(8.0, np.deg2rad(40.0))
DRIVE = MicrowaveDrive(1.0, np.deg2rad(20.0), phi_mw=-np.pi / 2)
REFERENCE = ReferenceDcField(1.0, phi_r=-np.pi / 2)


def eigen_noise(field):
    return noise_operator_eigenbasis(eigensystem(field, PARAMS).states)


class TestPropagateLindblad:
    def test_unitary_limit_matches_matrix_exponential(self):
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        h = heff_rabi(lam)
        rho0 = np.zeros((3, 3), dtype=complex)
        rho0[0, 0] = 1.0
        noise = NoiseModel(0.0, (eigen_noise(FIELD),))
        t_final = 0.21
        traj = propagate_lindblad(h, noise, rho0, t_final, dt=1e-4)
        psi = matrix_exponential_action(h, traj.times[-1], np.array([1, 0, 0], complex))
        pops_exact = np.abs(psi) ** 2
        pops_rk4 = np.real(np.diag(traj.states[-1].matrix))
        assert np.max(np.abs(pops_rk4 - pops_exact)) <= 1e-8

    def test_pure_dephasing_closed_form(self):
        # H = 0, qubit sigma_z noise: off-diagonals decay at 4*gamma
        _, _, pz = pauli_operators()
        gamma = 0.7
        rho0 = np.full((2, 2), 0.5, dtype=complex)
        traj = propagate_lindblad(
            np.zeros((2, 2), complex), NoiseModel(gamma, (pz,)), rho0, 1.0, dt=0.01
        )
        final = traj.states[-1].matrix
        t = traj.times[-1]
        assert final[0, 0] == pytest.approx(0.5, abs=1e-12)
        assert final[0, 1] == pytest.approx(0.5 * np.exp(-4.0 * gamma * t), rel=1e-7)

    def test_trace_and_hermiticity_and_positivity_along_trajectory(self):
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        h = heff_rabi(lam)
        noise = NoiseModel(1.0, (eigen_noise(FIELD),))
        rho0 = np.zeros((3, 3), dtype=complex)
        rho0[0, 0] = 1.0
        traj = propagate_lindblad(h, noise, rho0, 0.5, dt=2e-4)
        for state in traj.states:
            state.validate(hermit_tol=1e-10, trace_tol=1e-9, positivity_floor=-1e-8)

    def test_step_halving_convergence(self):
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        h = heff_rabi(lam)
        noise = NoiseModel(1.0, (eigen_noise(FIELD),))
        rho0 = np.diag([0.6, 0.4, 0.0]).astype(complex)
        rho0[0, 1] = rho0[1, 0] = 0.2
        dt = 4e-4
        final = {}
        for scale in (1, 2, 4):
            traj = propagate_lindblad(h, noise, rho0, 0.2, dt=dt / scale)
            final[scale] = traj.states[-1].matrix
        assert np.max(np.abs(final[1] - final[2])) <= 1e-8
        err1 = np.max(np.abs(final[1] - final[2]))
        err2 = np.max(np.abs(final[2] - final[4]))
        order = np.log2(err1 / err2)
        assert order >= 3.8

    def test_purity_contraction_under_pure_dephasing(self):
        noise = NoiseModel(0.8, (eigen_noise(FIELD),))
        plus = np.array([1.0, 1.0, 0.0], complex) / np.sqrt(2.0)
        rho0 = np.outer(plus, plus.conj())
        traj = propagate_lindblad(
            np.zeros((3, 3), complex), noise, rho0, 0.6, dt=3e-4
        )
        purity = [float(np.real(np.trace(s.matrix @ s.matrix))) for s in traj.states]
        assert all(b <= a + 1e-12 for a, b in zip(purity, purity[1:]))

    def test_step_size_refused_with_suggestion(self):
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        h = heff_rabi(lam)
        noise = NoiseModel(1.0, (eigen_noise(FIELD),))
        with pytest.raises(StepSizeError) as err:
            propagate_lindblad(h, noise, np.eye(3, dtype=complex) / 3, 1.0, dt=0.5)
        assert err.value.suggested_dt <= required_dt(h, noise)

    def test_channel_agrees_with_rk4(self):
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        h = heff_rabi(lam)
        a = eigen_noise(FIELD)
        noise = NoiseModel(1.3, (a,))
        plus = np.array([1.0, 1.0, 0.0], complex) / np.sqrt(2.0)
        rho0 = np.outer(plus, plus.conj())
        traj = propagate_lindblad(h, noise, rho0, 0.3, dt=1e-4)
        ch = LindbladChannel(h, (a,), 1.3)
        rhos = ch.propagate(rho0, traj.times)
        err = max(
            np.max(np.abs(rhos[i] - traj.states[i].matrix))
            for i in range(len(traj.times))
        )
        assert err <= 1e-9

    def test_trajectory_csv_roundtrip(self, tmp_path):
        _, _, pz = pauli_operators()
        rho0 = np.full((2, 2), 0.5, dtype=complex)
        obs = {"pop_up": np.diag([1.0, 0.0]).astype(complex)}
        traj = propagate_lindblad(
            0.5 * pz, NoiseModel(0.0, ()), rho0, 0.1, dt=1e-3, observables=obs
        )
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "time_us,pop_up"
        assert len(lines) == len(traj.times) + 1
        assert float(lines[1].split(",")[1]) == pytest.approx(0.5)


class TestGeneratorChannel:
    def test_generator_matches_rhs(self):
        rng = np.random.default_rng(31)
        h = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = 0.5 * (h + h.conj().T)
        a = eigen_noise(FIELD)
        rho = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        gen = lindblad_generator(h, (a,), 0.9)
        from nvvm.dynamics import lindblad_rhs

        direct = lindblad_rhs(h, (a,), 0.9, rho)
        via_gen = (gen @ rho.reshape(-1)).reshape(3, 3)
        assert np.max(np.abs(direct - via_gen)) <= 1e-12 * np.max(np.abs(direct))

    def test_adjoint_preserves_expectations(self):
        h = heff_rabi(40.0)
        a = eigen_noise(FIELD)
        rho0 = np.diag([0.7, 0.3, 0.0]).astype(complex)
        obs = np.diag([1.0, -1.0, 0.0]).astype(complex)
        times = np.array([0.05, 0.11])
        forward = LindbladChannel(h, (a,), 1.1).expectation(rho0, obs, times)
        backward_ch = LindbladChannel(h, (a,), 1.1, adjoint=True)
        obs_t = backward_ch.propagate(obs, times)
        backward = [float(np.real(np.trace(o @ rho0))) for o in obs_t]
        assert np.allclose(forward, backward, atol=1e-11)


class TestSchemeProbabilities:
    def test_ramsey_unitary_closed_form(self):
        domega = ramsey_shift(FIELD, REFERENCE, PARAMS)
        for tau in (0.3 / domega, np.pi / (2 * domega), 4.0 / domega):
            p = ramsey_probability(FIELD, REFERENCE, PARAMS, 0.0, tau)
            assert p == pytest.approx(
                0.5 * (1.0 + np.sin(domega * tau)), abs=1e-8
            )

    def test_ramsey_quarter_period_unity(self):
        domega = ramsey_shift(FIELD, REFERENCE, PARAMS)
        p = ramsey_probability(FIELD, REFERENCE, PARAMS, 0.0, np.pi / (2 * domega))
        assert p == pytest.approx(1.0, abs=1e-8)

    def test_ramsey_even_harmonic_half(self):
        domega = ramsey_shift(FIELD, REFERENCE, PARAMS)
        p = ramsey_probability(FIELD, REFERENCE, PARAMS, 0.0, 2.0 * np.pi / domega)
        assert p == pytest.approx(0.5, abs=1e-8)

    def test_ramsey_linear_response_with_decay(self):
        # headline parameter set: P = (1 + c*domega')/2 by regression
        gamma = 1.0
        domega_a = ramsey_shift(FIELD, REFERENCE, PARAMS)
        tau = 2.0 * np.pi / domega_a
        probes = domega_a * (1.0 + 0.01 * np.linspace(-1.0, 1.0, 11))
        ps = np.array(
            [
                ramsey_probability(FIELD, REFERENCE, PARAMS, gamma, tau, domega=x)
                for x in probes
            ]
        )
        slope, intercept = np.polyfit(probes - domega_a, ps, 1)
        fit = intercept + slope * (probes - domega_a)
        r2 = 1.0 - np.sum((ps - fit) ** 2) / np.sum((ps - ps.mean()) ** 2)
        assert r2 >= 0.999
        assert slope > 0
        assert intercept == pytest.approx(0.5, abs=2e-3)

    def test_rabi_unitary_closed_form(self):
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        assert rabi_probability(FIELD, DRIVE, PARAMS, 0.0, np.pi / lam) == pytest.approx(
            0.0, abs=1e-8
        )
        assert rabi_probability(
            FIELD, DRIVE, PARAMS, 0.0, 2.0 * np.pi / lam
        ) == pytest.approx(1.0, abs=1e-8)

    def test_rabi_linear_response_with_decay(self):
        gamma = 1.0
        lam_a = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        tau = np.pi / (2.0 * lam_a)
        probes = lam_a * (1.0 + 0.01 * np.linspace(-1.0, 1.0, 11))
        ps = np.array(
            [
                rabi_probability(FIELD, DRIVE, PARAMS, gamma, tau, rabi_frequency=x)
                for x in probes
            ]
        )
        slope, intercept = np.polyfit(probes - lam_a, ps, 1)
        fit = intercept + slope * (probes - lam_a)
        r2 = 1.0 - np.sum((ps - fit) ** 2) / np.sum((ps - ps.mean()) ** 2)
        assert r2 >= 0.999
        # noise off-diagonals shift the working point by O(gamma*tau*percent)
        assert intercept == pytest.approx(0.5, abs=0.01)

    def test_positive_tau_required(self):
        with pytest.raises(ValueError):
            ramsey_probability(FIELD, REFERENCE, PARAMS, 0.0, 0.0)
        with pytest.raises(ValueError):
            rabi_probability(FIELD, DRIVE, PARAMS, 0.0, -1.0)


class TestFullDrive:
    def test_axial_target_matches_closed_form(self):
        field = StaticField(8.0, 0.0)
        traj = full_drive_propagation(field, DRIVE, PARAMS)
        expected = PARAMS.gamma_e * DRIVE.b_mw_perp / np.sqrt(2.0)
        extracted = extract_oscillation_frequency(
            traj.times, traj.observables["pop_g"]
        )
        assert abs(extracted - expected) / expected <= 0.02

    def test_weak_drive_tightens_rwa(self):
        drive = MicrowaveDrive(0.1, np.deg2rad(20.0), phi_mw=-np.pi / 2)
        lam = rabi_exact(FIELD, drive, PARAMS).frequency
        traj = full_drive_propagation(FIELD, drive, PARAMS)
        extracted = extract_oscillation_frequency(
            traj.times, traj.observables["pop_g"]
        )
        assert abs(extracted - lam) / lam <= 0.005

    def test_headline_parameters_within_two_percent(self):
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        traj = full_drive_propagation(FIELD, DRIVE, PARAMS)
        extracted = extract_oscillation_frequency(
            traj.times, traj.observables["pop_g"]
        )
        assert abs(extracted - lam) / lam <= 0.02

    def test_carrier_resolution_enforced(self):
        with pytest.raises(StepSizeError):
            full_drive_propagation(FIELD, DRIVE, PARAMS, dt=1e-3)


class TestGhzParity:
    def test_single_site_cosine(self):
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        t = 0.0173
        assert ghz_parity_expectation(
            1, FIELD, DRIVE, PARAMS, 0.0, t
        ) == pytest.approx(np.cos(lam * t), abs=1e-8)

    def test_quarter_period_zero_at_l4(self):
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        t = np.pi / (2.0 * 4.0 * lam)
        assert ghz_parity_expectation(
            4, FIELD, DRIVE, PARAMS, 0.0, t
        ) == pytest.approx(0.0, abs=1e-8)

    def test_frequency_multiplication_noiseless(self):
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        for L in range(1, 7):
            ts = np.linspace(1e-4, np.pi / (L * lam), 400)
            par = ghz_parity_expectation(L, FIELD, DRIVE, PARAMS, 0.0, ts)
            crossing = ts[np.argmax(par <= 0.0)]
            assert crossing == pytest.approx(np.pi / (2.0 * L * lam), rel=5e-3)

    @pytest.mark.parametrize("L", [1, 2, 3])
    def test_channel_matches_direct_master_equation(self, L):
        gamma = 1.0
        traj = ghz_parity_direct(L, FIELD, DRIVE, PARAMS, gamma, 0.05, dt=1e-5)
        channel = ghz_parity_expectation(L, FIELD, DRIVE, PARAMS, gamma, traj.times)
        assert np.max(np.abs(traj.observables["parity"] - channel)) <= 1e-9

    def test_decay_with_noise_bounded(self):
        par = ghz_parity_expectation(3, FIELD, DRIVE, PARAMS, 1.0, np.linspace(0.01, 1.0, 40))
        assert np.all(np.abs(par) <= 1.0 + 1e-10)

    def test_l_range_enforced(self):
        with pytest.raises(ValueError):
            ghz_parity_expectation(0, FIELD, DRIVE, PARAMS, 0.0, 0.1)
        with pytest.raises(ValueError):
            ghz_parity_expectation(11, FIELD, DRIVE, PARAMS, 0.0, 0.1)
        with pytest.raises(ValueError):
            ghz_parity_direct(5, FIELD, DRIVE, PARAMS, 0.0, 0.1, 1e-4)


class TestShortTimeFit:
    def test_noiseless_quadratic_only(self):
        field = StaticField(8.0, 0.0)
        lam = rabi_exact(field, DRIVE, PARAMS).frequency
        for L in (1, 3):
            fit = short_time_fit(L, field, DRIVE, PARAMS, gamma=0.0)
            assert fit.quadratic == pytest.approx(0.5 * L**2 * lam**2, rel=0.01)
            assert fit.cubic == pytest.approx(0.0, abs=1e-6 * lam**2)

    @pytest.mark.parametrize("L", [2, 4, 6])
    def test_axial_cubic_gain(self, L):
        field = StaticField(8.0, 0.0)
        lam = rabi_exact(field, DRIVE, PARAMS).frequency
        gamma = 1.0
        fit = short_time_fit(L, field, DRIVE, PARAMS, gamma=gamma)
        expected = L * (3 * L - 2) / 6.0 * gamma * lam**2
        assert fit.cubic == pytest.approx(expected, rel=0.05)

    @pytest.mark.parametrize("L", [2, 3, 6])
    def test_transverse_linear_decay_first_order_coefficient(self, L):
        # Independent oracle: first order in gamma, the parity picks up
        # -L*gamma*(1 + 3 sin(eta)^2)*t, with eta the ground/bright mixing
        # angle (tan(2 eta) = 2 gamma_e B_perp / D). The S_z leakage
        # element between the dark-like and bright-like states drives it.
        field = StaticField(8.0, np.pi / 2)
        gamma = 1.0
        fit = short_time_fit(L, field, DRIVE, PARAMS, gamma=gamma)
        eta = 0.5 * np.arctan(2.0 * PARAMS.gamma_e * field.b_perp / PARAMS.d)
        expected = L * gamma * (1.0 + 3.0 * np.sin(eta) ** 2)
        assert fit.linear == pytest.approx(expected, rel=0.05)

    def test_branch_selection(self):
        near_axis = short_time_fit(2, StaticField(8.0, 0.1), DRIVE, PARAMS, 1.0)
        assert near_axis.cubic is not None and near_axis.linear is None
        near_plane = short_time_fit(2, StaticField(8.0, 1.5), DRIVE, PARAMS, 1.0)
        assert near_plane.linear is not None and near_plane.cubic is None


class TestSchemeSetups:
    def test_setup_matrices_shapes(self):
        setup_r = ramsey_setup(FIELD, REFERENCE, PARAMS)
        setup_m = rabi_setup(FIELD, DRIVE, PARAMS)
        for setup in (setup_r, setup_m):
            assert setup.noise_op.shape == (3, 3)
            assert np.trace(setup.rho0) == pytest.approx(1.0)
        assert np.allclose(setup_r.h_of(2.0), heff_ramsey(2.0))
        assert np.allclose(setup_m.h_of(2.0), heff_rabi(2.0))

    def test_noise_model_validation(self):
        with pytest.raises(ValueError):
            NoiseModel(-0.1, ())

    def test_density_matrix_validation(self):
        good = DensityMatrix(np.diag([0.5, 0.5, 0.0]).astype(complex))
        good.validate()
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([0.6, 0.6, 0.0]).astype(complex)).validate()
        bad = np.diag([1.5, -0.5, 0.0]).astype(complex)
        with pytest.raises(ValueError):
            DensityMatrix(bad).validate()
