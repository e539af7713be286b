"""Coefficient functions: closed-form values, derived constants, transforms."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anthrafilter.model import (
    ModelParams,
    HiddenState,
    BoundaryError,
    eval_control,
    eval_rates,
    eval_drift,
    eval_diffusion,
    eval_obs_drift,
    noise_shape,
    to_obs_coords,
    from_obs_coords,
)

P = ModelParams()


class TestParams:
    def test_derived_b2_b3(self):
        # frozen from b2 = v_max ln(1e5 v_max (1 - eps*eta)) / 2 and
        # b3 = v_max ln(1e5 v_max), evaluated by hand at the defaults
        assert P.b2 == pytest.approx(5.756412734984948, abs=0, rel=1e-15)
        assert P.b3 == pytest.approx(11.512925464970229, abs=0, rel=1e-15)

    def test_derived_eta(self):
        assert P.eta_value == pytest.approx(1.0 / 1.0001, rel=1e-15)

    def test_b1_default(self):
        assert P.b1 == 5.0 * math.log(10.0)

    def test_overrides_respected(self):
        q = ModelParams(b2=1.0, b3=2.0, eta_value=0.5)
        assert (q.b2, q.b3, q.eta_value) == (1.0, 2.0, 0.5)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"sigma": 1.5},
            {"sigma": 0.0},
            {"v_max": -1.0},
            {"epsilon": 0.0},
            {"delta2": 0.0},
            {"eta_value": 1.5},
            {"p2_value": 0.0},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            ModelParams(**kwargs)


class TestControl:
    def test_vanishes_at_phi1(self):
        u, w = eval_control(0.4, P)
        assert u == 0.0 and w == 1.0

    def test_near_zero_at_resonant_point(self):
        # omega1 (0.6 - 0.4)^2 = pi up to rounding, so sin^2 is ~(pi eps)^2
        u, _ = eval_control(0.6, P)
        assert 0.0 <= u < 1e-29

    def test_closed_form(self):
        t = 0.3
        u_expected = math.sin(25 * math.pi * 0.01) ** 2 * math.exp(-10 * 0.09)
        u, w = eval_control(t, P)
        assert u == pytest.approx(u_expected, rel=1e-14)
        assert w == pytest.approx(1.0 / (1.0 - 0.9 * u_expected), rel=1e-14)

    def test_w_at_least_one(self):
        t = np.linspace(0, 1, 501)
        u, w = eval_control(t, P)
        assert np.all((0 <= u) & (u <= 1)) and np.all(w >= 1.0)


class TestRates:
    def test_alpha_zero_at_d1(self):
        alpha, beta, _, _ = eval_rates(0.75, HiddenState(0.3, 0.3, 0.1), P)
        assert alpha == 0.0 and beta == 0.0

    def test_alpha_closed_form(self):
        t = 0.5
        alpha, _, _, _ = eval_rates(t, HiddenState(0, 0, 0), P)
        expected = 5 * math.log(10) * (1 - math.cos(5 * math.pi)) * 0.0625
        assert alpha == pytest.approx(expected, rel=1e-14)

    def test_beta_closed_form(self):
        t = 0.5
        _, beta, _, _ = eval_rates(t, HiddenState(0, 0, 0), P)
        expected = P.b2 * (1 - math.cos(5 * math.pi)) * 0.0625
        assert beta == pytest.approx(expected, rel=1e-14)

    def test_gamma_floored_when_rho_dominates(self):
        # theta - kappa rho < 0 would make the infection rate negative
        _, _, gamma, _ = eval_rates(0.5, HiddenState(0.2, 0.5, 0.9), P)
        assert gamma == 0.0

    def test_gamma_closed_form(self):
        t, theta, v, rho = 0.5, 0.8, 0.4, 0.3
        _, _, gamma, _ = eval_rates(t, HiddenState(theta, v, rho), P)
        expected = P.b3 * (1 - math.cos(5 * math.pi)) * 0.0625 * (0.8 - 0.3) * 0.4
        assert gamma == pytest.approx(expected, rel=1e-14)

    def test_nonnegative_rates(self):
        rng = np.random.default_rng(0)
        t = rng.random(100)
        s = HiddenState(rng.random(100), rng.random(100), rng.random(100))
        alpha, beta, gamma, eta = eval_rates(t, s, P)
        assert np.all(alpha >= 0) and np.all(beta >= 0) and np.all(gamma >= 0)
        assert 0 < eta <= 1


class TestDrift:
    def test_f1_zero_at_equilibrium(self):
        for t in (0.1, 0.33, 0.8):
            _, w = eval_control(t, P)
            alpha, _, _, _ = eval_rates(t, HiddenState(0, 0, 0), P)
            f1, _, _ = eval_drift(t, HiddenState(1.0 / w, 0.5, 0.2), P)
            assert abs(f1) <= 1e-15 * max(alpha, 1.0)

    def test_f3_closed_form(self):
        s = HiddenState(0.8, 0.4, 0.3)
        _, _, gamma, _ = eval_rates(0.5, s, P)
        _, _, f3 = eval_drift(0.5, s, P)
        assert f3 == pytest.approx(gamma * 0.7, rel=1e-14)

    def test_f2_sign(self):
        # volume grows below the theta-limited ceiling, shrinks above it
        t = 0.5
        _, f2_low, _ = eval_drift(t, HiddenState(0.5, 0.1, 0.2), P)
        _, f2_high, _ = eval_drift(t, HiddenState(0.9, 0.99, 0.2), P)
        assert f2_low > 0 > f2_high


class TestDiffusion:
    def test_noise_shape_endpoints(self):
        assert noise_shape(0.0) == 0.0
        assert noise_shape(1.0) == 0.0
        assert noise_shape(0.5) == 0.25
        assert noise_shape(-0.2) == 0.0
        assert noise_shape(1.3) == 0.0

    def test_noise_shape_array(self):
        out = noise_shape(np.array([-1.0, 0.25, 2.0]))
        assert out.tolist() == [0.0, 0.1875, 0.0]

    @given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
    def test_noise_shape_positive_inside(self, x):
        assert 0 < noise_shape(x) <= 0.25

    def test_g2_scaled_by_vmax(self):
        q = ModelParams(v_max=2.0)
        _, g2, _ = eval_diffusion(0.1, HiddenState(0.5, 1.0, 0.5), q)
        assert g2 == pytest.approx(q.delta2 * 0.25, rel=1e-14)

    def test_vanishes_at_bounds(self):
        g1, g2, g3 = eval_diffusion(0.1, HiddenState(0.0, 1.0, 1.0), P)
        assert g1 == g2 == g3 == 0.0


class TestObsTransforms:
    def test_midpoint_maps_to_origin(self):
        X, Y = to_obs_coords(0.5, 0.5, P)
        assert X == 0.0 and Y == 0.0

    @pytest.mark.parametrize("v,rho", [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.0)])
    def test_boundary_rejected(self, v, rho):
        with pytest.raises(BoundaryError):
            to_obs_coords(v, rho, P)

    @given(
        st.floats(min_value=1e-6, max_value=1 - 1e-6),
        st.floats(min_value=1e-6, max_value=1 - 1e-6),
    )
    def test_round_trip(self, v, rho):
        X, Y = to_obs_coords(v, rho, P)
        v2, rho2 = from_obs_coords(X, Y, P)
        assert v2 == pytest.approx(v, rel=1e-12)
        assert rho2 == pytest.approx(rho, rel=1e-12)

    def test_round_trip_nonunit_vmax(self):
        q = ModelParams(v_max=3.0)
        X, Y = to_obs_coords(1.2, 0.7, q)
        v2, rho2 = from_obs_coords(X, Y, q)
        assert v2 == pytest.approx(1.2, rel=1e-12)
        assert rho2 == pytest.approx(0.7, rel=1e-12)


class TestObsDrift:
    def test_chain_rule_identity(self):
        """f must be the logit-coordinate image of the volume drift f2.

        d/dt logit(vbar/v_max) = f2(t, vbar, theta) * v_max / (vbar (v_max - vbar)),
        and likewise g = f3 / (rhobar (1 - rhobar)).
        """
        rng = np.random.default_rng(3)
        for _ in range(25):
            t = float(rng.uniform(0, 1))
            vbar = float(rng.uniform(0.05, 0.95)) * P.v_max
            rhobar = float(rng.uniform(0.05, 0.95))
            theta = float(rng.uniform(0.0, 0.95))
            X, Y = to_obs_coords(vbar, rhobar, P)
            f, g = eval_obs_drift(t, X, Y, theta, P)
            _, f2, f3 = eval_drift(t, HiddenState(theta, vbar, rhobar), P)
            f_expected = f2 * P.v_max / (vbar * (P.v_max - vbar))
            g_expected = f3 / (rhobar * (1.0 - rhobar))
            assert f == pytest.approx(f_expected, rel=1e-10, abs=1e-12)
            assert g == pytest.approx(g_expected, rel=1e-10, abs=1e-12)

    def test_cap_keeps_values_finite(self):
        f, g = eval_obs_drift(0.5, 1e6, -1e6, 0.5, P)
        assert math.isfinite(f) and math.isfinite(g)

    def test_broadcasts_over_theta_grid(self):
        theta = np.linspace(0, 1, 11)
        f, g = eval_obs_drift(0.5, 0.1, -0.2, theta, P)
        assert f.shape == theta.shape and g.shape == theta.shape
