import math
import random

import pytest

from mdiqkd import (
    FiniteKeyConfig,
    ParameterVector,
    PolarVector,
    RateInputs,
    Strategy,
    coordinate_descent,
    evaluate,
    fiber_padding,
    from_polar,
    secret_key_rate,
    to_polar,
)
from conftest import SEVEN_10_62, reference_model

FINITE = FiniteKeyConfig(1e-10, "finite")
ASYMPTOTIC = FiniteKeyConfig(1e-10, "asymptotic")


def random_locked_vector(rng):
    ratio = rng.uniform(0.05, 0.8)
    mu_a = rng.uniform(0.01, 0.6)
    mu_b = rng.uniform(0.01, 0.6)
    return ParameterVector(
        s_a=rng.uniform(0.01, 1.0),
        mu_a=mu_a,
        nu_a=mu_a * ratio,
        p_sa=rng.uniform(0.1, 0.6),
        p_mua=rng.uniform(0.01, 0.2),
        p_nua=rng.uniform(0.05, 0.3),
        s_b=rng.uniform(0.01, 1.0),
        mu_b=mu_b,
        nu_b=mu_b * ratio,
        p_sb=rng.uniform(0.1, 0.6),
        p_mub=rng.uniform(0.01, 0.2),
        p_nub=rng.uniform(0.05, 0.3),
    )


class TestPolarConversion:
    def test_symmetric_point(self):
        p = ParameterVector(
            s_a=0.3, mu_a=0.1, nu_a=0.02, p_sa=0.5, p_mua=0.1, p_nua=0.2,
            s_b=0.3, mu_b=0.1, nu_b=0.02, p_sb=0.5, p_mub=0.1, p_nub=0.2,
        )
        q = to_polar(p)
        assert q.theta_s == pytest.approx(math.pi / 4, rel=1e-12)
        assert q.r_s == pytest.approx(0.3 * math.sqrt(2), rel=1e-12)

    def test_reference_signal_coordinates(self):
        q = to_polar(SEVEN_10_62._replace_lock() if False else _locked_reference())
        assert q.r_s == pytest.approx(0.63683, abs=5e-5)
        assert q.theta_s == pytest.approx(0.26865, abs=5e-5)

    def test_roundtrip_identity(self):
        rng = random.Random(11)
        for _ in range(1000):
            p = random_locked_vector(rng)
            back = from_polar(to_polar(p))
            for name in (
                "s_a", "mu_a", "nu_a", "s_b", "mu_b", "nu_b",
                "p_sa", "p_mua", "p_nua", "p_sb", "p_mub", "p_nub",
            ):
                assert getattr(back, name) == pytest.approx(
                    getattr(p, name), rel=1e-12, abs=1e-15
                )

    def test_ratio_lock_violation_rejected(self):
        broken = ParameterVector(
            s_a=0.2, mu_a=0.1, nu_a=0.02, p_sa=0.5, p_mua=0.1, p_nua=0.2,
            s_b=0.5, mu_b=0.3, nu_b=0.09, p_sb=0.5, p_mub=0.1, p_nub=0.2,
        )
        with pytest.raises(ValueError, match="ratio lock"):
            to_polar(broken)

    def test_from_polar_satisfies_lock_exactly(self):
        q = PolarVector(
            r_s=0.7, theta_s=0.4, r_mu=0.3, r_nu=0.05, theta_mu_nu=0.9,
            p_sa=0.5, p_mua=0.1, p_nua=0.2, p_sb=0.5, p_mub=0.1, p_nub=0.2,
        )
        p = from_polar(q)
        assert p.nu_a / p.mu_a == pytest.approx(p.nu_b / p.mu_b, abs=1e-12)

    def test_inverse_of_symmetric(self):
        q = PolarVector(
            r_s=0.3 * math.sqrt(2), theta_s=math.pi / 4, r_mu=0.2, r_nu=0.05,
            theta_mu_nu=math.pi / 4,
            p_sa=0.5, p_mua=0.1, p_nua=0.2, p_sb=0.5, p_mub=0.1, p_nub=0.2,
        )
        p = from_polar(q)
        assert p.s_a == pytest.approx(0.3, rel=1e-12)
        assert p.s_b == pytest.approx(0.3, rel=1e-12)


def _locked_reference():
    # reference (10, 62) point with the decoy ratio locked exactly so the
    # polar form exists; the published settings are rounded to 3 digits
    ratio = 0.011 / 0.056
    return ParameterVector(
        s_a=0.169, mu_a=0.056, nu_a=0.056 * ratio,
        p_sa=0.599, p_mua=0.030, p_nua=0.254,
        s_b=0.614, mu_b=0.465, nu_b=0.465 * ratio,
        p_sb=0.600, p_mub=0.031, p_nub=0.248,
    )


class TestEvaluate:
    def test_compositional_consistency(self, model_10_62):
        res = evaluate(model_10_62, SEVEN_10_62, FINITE)
        direct = secret_key_rate(
            RateInputs(
                s_a=SEVEN_10_62.s_a, s_b=SEVEN_10_62.s_b,
                p_sa=SEVEN_10_62.p_sa, p_sb=SEVEN_10_62.p_sb,
                y11=res.bounds.y11_lower, e11=res.bounds.e11_upper,
                q_ss=res.observables.gain, e_ss=res.observables.qber,
                f=model_10_62.error_correction_efficiency,
            )
        )
        assert res.rate_per_pulse == direct

    @pytest.mark.parametrize("fk", [FINITE, ASYMPTOTIC])
    def test_reference_point_rate_scale(self, model_10_62, fk):
        res = evaluate(model_10_62, SEVEN_10_62, fk)
        assert 4.57e-6 / 3 <= res.rate_per_pulse <= 4.57e-6 * 3

    def test_depolarized_test_basis_kills_rate(self):
        model = reference_model(10, 62, misalignment_x=0.5)
        res = evaluate(model, SEVEN_10_62, ASYMPTOTIC)
        assert res.rate_per_pulse == 0.0

    def test_deterministic(self, model_10_62):
        a = evaluate(model_10_62, SEVEN_10_62, FINITE)
        b = evaluate(model_10_62, SEVEN_10_62, FINITE)
        assert a.rate_per_pulse == b.rate_per_pulse
        assert a.bounds == b.bounds


class TestFiberPadding:
    def test_pads_shorter_arm(self):
        model = fiber_padding(reference_model(10, 62))
        assert model.length_a_km == 62
        assert model.length_b_km == 62

    def test_symmetric_unchanged(self):
        model = fiber_padding(reference_model(40, 40))
        assert (model.length_a_km, model.length_b_km) == (40, 40)

    def test_single_arm_geometry(self):
        model = fiber_padding(reference_model(0, 100))
        assert model.length_a_km == 100


class TestCoordinateDescent:
    def test_deterministic_given_seed(self):
        model = reference_model(10, 62)
        a = coordinate_descent(model, Strategy.SEVEN_INTENSITY, FINITE, seed=3)
        b = coordinate_descent(model, Strategy.SEVEN_INTENSITY, FINITE, seed=3)
        assert a.params == b.params
        assert a.rate_per_pulse == b.rate_per_pulse
        assert a.bounds == b.bounds

    def test_emits_locked_feasible_parameters(self):
        model = reference_model(10, 62)
        res = coordinate_descent(model, Strategy.SEVEN_INTENSITY, FINITE, seed=3)
        p = res.params
        assert p.is_feasible()
        assert p.mu_a / p.nu_a == pytest.approx(p.mu_b / p.nu_b, abs=1e-9)

    def test_local_optimality_certificate(self):
        model = reference_model(10, 62)
        res = coordinate_descent(model, Strategy.SEVEN_INTENSITY, FINITE, seed=3)
        base = res.rate_per_pulse
        q = to_polar(res.params)
        coords = [
            "r_s", "theta_s", "r_mu", "r_nu", "theta_mu_nu",
            "p_sa", "p_mua", "p_nua", "p_sb", "p_mub", "p_nub",
        ]
        for name in coords:
            for factor in (0.99, 1.01):
                moved = q.__class__(**{
                    f: getattr(q, f) * (factor if f == name else 1.0) for f in coords
                } | {f: getattr(q, f) for f in () })
                candidate = from_polar(moved)
                if not candidate.is_feasible():
                    continue
                rate = evaluate(model, candidate, FINITE).rate_per_pulse
                assert rate <= base * 1.001

    def test_dominance_over_baselines(self):
        for la, lb in ((25, 25), (0, 50), (10, 62)):
            model = reference_model(la, lb)
            rates = {
                strat: coordinate_descent(model, strat, FINITE, seed=2).rate_per_pulse
                for strat in Strategy
            }
            r7 = rates[Strategy.SEVEN_INTENSITY]
            assert r7 >= rates[Strategy.FOUR_INTENSITY] - 1e-12
            assert r7 >= rates[Strategy.FOUR_INTENSITY_PLUS_FIBER] - 1e-12

    def test_decoy_flux_balance_trend(self):
        # at strong asymmetry the decoys balance the arriving flux while the
        # signal pair is free not to
        model = reference_model(10, 62)
        res = coordinate_descent(model, Strategy.SEVEN_INTENSITY, FINITE, seed=2)
        p = res.params
        eta_ratio = model.efficiency_b / model.efficiency_a
        assert 0.5 * eta_ratio <= p.mu_a / p.mu_b <= 2.0 * eta_ratio
        assert abs(p.s_a / p.s_b - eta_ratio) / eta_ratio > 0.20

    def test_symmetric_channel_degeneracy(self):
        model = reference_model(50, 50)
        seven = coordinate_descent(model, Strategy.SEVEN_INTENSITY, FINITE, seed=2)
        four = coordinate_descent(model, Strategy.FOUR_INTENSITY, FINITE, seed=2)
        p = seven.params
        for a, b in ((p.s_a, p.s_b), (p.mu_a, p.mu_b), (p.nu_a, p.nu_b)):
            assert abs(a - b) / max(a, b) <= 0.05
        assert seven.rate_per_pulse == pytest.approx(four.rate_per_pulse, rel=0.02)

    def test_symmetric_optimum_beats_brute_force_grid(self):
        # coarse 20^3 intensity grid at the four-intensity optimum's
        # probabilities must not beat the coordinate-descent result
        model = reference_model(50, 50)
        four = coordinate_descent(model, Strategy.FOUR_INTENSITY, FINITE, seed=2)
        probs = (four.params.p_sa, four.params.p_mua, four.params.p_nua)
        best = 0.0
        for i in range(20):
            s = 0.05 + (1.0 - 0.05) * i / 19
            for j in range(20):
                mu = 0.01 + (0.5 - 0.01) * j / 19
                if mu >= s:
                    continue
                for k in range(20):
                    nu = 0.002 + (0.2 - 0.002) * k / 19
                    if nu >= mu:
                        continue
                    p = ParameterVector(
                        s_a=s, mu_a=mu, nu_a=nu,
                        p_sa=probs[0], p_mua=probs[1], p_nua=probs[2],
                        s_b=s, mu_b=mu, nu_b=nu,
                        p_sb=probs[0], p_mub=probs[1], p_nub=probs[2],
                    )
                    rate = evaluate(model, p, FINITE).rate_per_pulse
                    best = max(best, rate)
        assert four.rate_per_pulse >= best * (1 - 1e-9)

    def test_zero_landscape_returns_zero_rate(self):
        # at extreme asymmetry and finite statistics no strategy extracts a
        # key from this model; the search must return cleanly with rate 0
        model = reference_model(0, 100)
        res = coordinate_descent(model, Strategy.FOUR_INTENSITY, FINITE, seed=2)
        assert res.rate_per_pulse == 0.0
        assert res.params.is_feasible()
