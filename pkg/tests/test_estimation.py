"""Uncertainty formulas, sensitivity derivatives, interrogation optimization."""

import warnings

import numpy as np
import pytest

from nvvm.estimation import (
    Candidate,
    SensingBudget,
    entangled_advantage_ratio,
    optimize_interrogation,
    sensitivity_derivative,
    uncertainty_at_tau,
    uncertainty_from_parity,
    uncertainty_from_probability,
)
from nvvm.nvmodel import (
    NvParameters,
    ReferenceDcField,
    StaticField,
    ramsey_shift_derivative,
)
from nvvm.rabi import MicrowaveDrive, rabi_exact

PARAMS = NvParameters()
FIELD = StaticField(8.0, np.deg2rad(40.0))
DRIVE = MicrowaveDrive(1.0, np.deg2rad(20.0), phi_mw=-np.pi / 2)
REFERENCE = ReferenceDcField(1.0, phi_r=-np.pi / 2)

# the linearity gate fires by design at large n (wide phase windows)
pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


class TestUncertaintyFormula:
    def test_direct_substitution(self):
        assert uncertainty_from_probability(0.5, 0.5, 1) == pytest.approx(1.0)

    def test_shot_noise_scaling(self):
        one = uncertainty_from_probability(0.3, 0.7, 100)
        four = uncertainty_from_probability(0.3, 0.7, 400)
        assert four == pytest.approx(one / 2.0, rel=1e-12)

    def test_infinite_uncertainty_signals(self):
        assert uncertainty_from_probability(0.0, 0.5, 10) == np.inf
        assert uncertainty_from_probability(1.0, 0.5, 10) == np.inf
        assert uncertainty_from_probability(0.5, 0.0, 10) == np.inf
        assert uncertainty_from_parity(1.0, 0.5, 10) == np.inf
        assert uncertainty_from_parity(0.0, 0.0, 10) == np.inf

    def test_parity_form(self):
        assert uncertainty_from_parity(0.0, 2.0, 4) == pytest.approx(0.25)

    def test_shot_count_validated(self):
        with pytest.raises(ValueError):
            uncertainty_from_probability(0.5, 0.5, 0.5)

    def test_budget(self):
        budget = SensingBudget(total_time=100.0, tau=0.5)
        assert budget.shots == pytest.approx(200.0)
        with pytest.raises(ValueError):
            SensingBudget(total_time=1.0, tau=2.0)


class TestSensitivityDerivative:
    def test_zero_at_parallel_reference(self):
        drive0 = MicrowaveDrive(1.0, np.deg2rad(20.0), phi_mw=0.0)
        ref0 = ReferenceDcField(1.0, phi_r=0.0)
        assert abs(
            sensitivity_derivative("d_lambda_d_phi", FIELD, drive0, PARAMS)
        ) <= 1e-6
        assert abs(
            sensitivity_derivative("d_domega_d_phi", FIELD, ref0, PARAMS)
        ) <= 1e-9

    def test_analytic_oracle_for_ramsey_shift(self):
        got = sensitivity_derivative("d_domega_d_phi", FIELD, REFERENCE, PARAMS)
        expected = ramsey_shift_derivative(FIELD, REFERENCE, PARAMS)
        assert got == pytest.approx(expected, rel=1e-8)

    def test_richardson_agreement(self):
        d1 = sensitivity_derivative("d_lambda_d_phi", FIELD, DRIVE, PARAMS, step=1e-4)
        d2 = sensitivity_derivative("d_lambda_d_phi", FIELD, DRIVE, PARAMS, step=2e-4)
        assert abs(d1 - d2) <= 1e-6 * abs(d1)

    def test_same_order_of_magnitude_across_schemes(self):
        # comparable reference amplitudes give comparable angular leverage
        for theta_deg in (10.0, 40.0, 80.0):
            fld = StaticField(8.0, np.deg2rad(theta_deg))
            dl = abs(sensitivity_derivative("d_lambda_d_phi", fld, DRIVE, PARAMS))
            dw = abs(sensitivity_derivative("d_domega_d_phi", fld, REFERENCE, PARAMS))
            assert 0.1 <= dl / dw <= 10.0

    def test_type_checks(self):
        with pytest.raises(TypeError):
            sensitivity_derivative("d_lambda_d_phi", FIELD, REFERENCE, PARAMS)
        with pytest.raises(TypeError):
            sensitivity_derivative("d_domega_d_phi", FIELD, DRIVE, PARAMS)
        with pytest.raises(ValueError):
            sensitivity_derivative("d_other", FIELD, DRIVE, PARAMS)


class TestOptimizeInterrogation:
    def test_noiseless_cap_binds(self):
        # Without decay the uncertainty keeps improving with n, so the cap
        # binds. The closed form 1/(deriv*sqrt(T*tau)) holds up to the
        # finite-window regression bias: the +-1% probe window spans a
        # phase excursion 0.01*(2n-1)*pi/2 whose sine bend softens the
        # fitted slope by a few percent at n = 16.
        n_max = 16
        result = optimize_interrogation(
            "rabi_mw", FIELD, DRIVE, PARAMS, 0.0, 1000.0, n_max=n_max
        )
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        tau_cap = (2 * n_max - 1) * np.pi / (2 * lam)
        deriv = abs(sensitivity_derivative("d_lambda_d_phi", FIELD, DRIVE, PARAMS))
        assert result.n == n_max
        assert result.tau == pytest.approx(tau_cap, rel=1e-12)
        assert result.delta == pytest.approx(
            1.0 / (deriv * np.sqrt(1000.0 * tau_cap)), rel=0.05
        )
        deltas = [c.delta for c in result.candidates]
        assert all(b < a for a, b in zip(deltas, deltas[1:]))

    def test_doubling_total_time_scales_exactly(self):
        a = optimize_interrogation(
            "rabi_mw", FIELD, DRIVE, PARAMS, 1.0, 500.0, n_max=12
        )
        b = optimize_interrogation(
            "rabi_mw", FIELD, DRIVE, PARAMS, 1.0, 1000.0, n_max=12
        )
        assert b.n == a.n
        assert b.delta == pytest.approx(a.delta / np.sqrt(2.0), rel=1e-12)

    def test_noisy_interior_minimum(self):
        result = optimize_interrogation(
            "rabi_mw", FIELD, DRIVE, PARAMS, 1.0, 1000.0, n_max=128
        )
        assert 1 < result.n < 128
        assert np.isfinite(result.delta)
        assert len(result.candidates) >= result.n
        deltas = [c.delta for c in result.candidates]
        assert min(deltas) == result.delta
        # coefficient sanity band: response per unit x never exceeds tau
        best = result.candidates[result.n - 1]
        assert isinstance(best, Candidate)
        assert 0.0 < best.coefficient <= best.tau * 1.0001

    def test_ramsey_uses_even_harmonics(self):
        domega = ramsey_shift_reference()
        result = optimize_interrogation(
            "ramsey_dc", FIELD, REFERENCE, PARAMS, 1.0, 1000.0, n_max=64
        )
        ratio = result.tau * domega / np.pi
        assert ratio == pytest.approx(2.0 * result.n, rel=1e-9)

    def test_zero_derivative_gives_infinite_uncertainty(self):
        drive0 = MicrowaveDrive(1.0, np.deg2rad(20.0), phi_mw=0.0)
        result = optimize_interrogation(
            "rabi_mw", FIELD, drive0, PARAMS, 1.0, 1000.0, n_max=8
        )
        assert result.delta == np.inf

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            optimize_interrogation("fancy", FIELD, DRIVE, PARAMS, 0.0, 100.0)


def ramsey_shift_reference():
    from nvvm.nvmodel import ramsey_shift

    return ramsey_shift(FIELD, REFERENCE, PARAMS)


class TestHeisenbergScaling:
    def test_fixed_tau_slope_minus_one(self):
        lam = rabi_exact(FIELD, DRIVE, PARAMS).frequency
        tau = 0.37 * np.pi / lam
        deltas = []
        for L in range(1, 7):
            r = uncertainty_at_tau(
                "ghz_rabi", FIELD, DRIVE, PARAMS, 0.0, 1000.0, tau, L=L
            )
            deltas.append(r.delta)
        slope = np.polyfit(np.log(np.arange(1, 7)), np.log(deltas), 1)[0]
        assert slope == pytest.approx(-1.0, abs=0.01)

    def test_ghz_l1_equals_single_spin_rabi(self):
        # exact identity in the leakage-free axial case; elsewhere the
        # parity and population readouts differ at the leakage scale
        field = StaticField(8.0, 0.0)
        lam = rabi_exact(field, DRIVE, PARAMS).frequency
        tau = 0.37 * np.pi / lam
        for gamma in (0.0, 1.0):
            single = uncertainty_at_tau(
                "rabi_mw", field, DRIVE, PARAMS, gamma, 1000.0, tau
            )
            ghz = uncertainty_at_tau(
                "ghz_rabi", field, DRIVE, PARAMS, gamma, 1000.0, tau, L=1
            )
            assert ghz.delta == pytest.approx(single.delta, rel=1e-9)

    def test_ghz_l1_near_single_spin_off_axis(self):
        single = optimize_interrogation(
            "rabi_mw", FIELD, DRIVE, PARAMS, 1.0, 1000.0, n_max=64
        )
        ghz = optimize_interrogation(
            "ghz_rabi", FIELD, DRIVE, PARAMS, 1.0, 1000.0, n_max=64, L=1
        )
        assert ghz.delta == pytest.approx(single.delta, rel=1e-4)


class TestAdvantageRatio:
    def test_l1_is_unity(self):
        assert entangled_advantage_ratio(
            1, FIELD, DRIVE, PARAMS, 0.0, 1000.0
        ) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("L", [2, 4])
    def test_noiseless_sqrt_l(self, L):
        ratio = entangled_advantage_ratio(L, FIELD, DRIVE, PARAMS, 0.0, 1000.0)
        assert ratio == pytest.approx(np.sqrt(L), rel=1e-9)

    def test_axial_uses_rabi_frequency_uncertainty(self):
        field = StaticField(8.0, 0.0)
        ratio = entangled_advantage_ratio(2, field, DRIVE, PARAMS, 0.0, 1000.0)
        assert ratio == pytest.approx(np.sqrt(2.0), rel=1e-9)

    def test_decay_reduces_advantage_below_ideal(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ratio = entangled_advantage_ratio(
                4, FIELD, DRIVE, PARAMS, 1.0, 1000.0, n_max=160
            )
        assert 0.9 < ratio < np.sqrt(4.0)


class TestDivergenceStructure:
    def test_uncertainty_diverges_exactly_where_derivative_vanishes(self):
        for phi_deg in (0.0, 180.0):
            drive = MicrowaveDrive(
                1.0, np.deg2rad(20.0), phi_mw=-np.deg2rad(phi_deg)
            )
            ref = ReferenceDcField(1.0, phi_r=-np.deg2rad(phi_deg))
            d_lam = sensitivity_derivative("d_lambda_d_phi", FIELD, drive, PARAMS)
            d_dw = sensitivity_derivative("d_domega_d_phi", FIELD, ref, PARAMS)
            assert abs(d_lam) <= 1e-6
            assert abs(d_dw) <= 1e-9
            mw = optimize_interrogation(
                "rabi_mw", FIELD, drive, PARAMS, 1.0, 1000.0, n_max=4
            )
            dc = optimize_interrogation(
                "ramsey_dc", FIELD, ref, PARAMS, 1.0, 1000.0, n_max=4
            )
            assert mw.delta == np.inf
            assert dc.delta == np.inf

    def test_finite_away_from_parallel(self):
        result = optimize_interrogation(
            "rabi_mw", FIELD, DRIVE, PARAMS, 1.0, 1000.0, n_max=32
        )
        assert np.isfinite(result.delta)
