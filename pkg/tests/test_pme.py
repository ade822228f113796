"""Porous-medium closed forms against their quadrature oracles."""

from math import log, pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontlab import pme
from frontlab.errors import DomainError, WindowError

SQRT2 = sqrt(2.0)


class TestSelectedSpeed:
    def test_continuity_at_transition(self):
        assert pme.c_pm(0.5) == pytest.approx(SQRT2, abs=1e-15)
        assert pme.c_pm(0.5 - 1e-12) == pytest.approx(pme.c_pm(0.5 + 1e-12), abs=1e-11)

    def test_pulled_branch(self):
        assert pme.c_pm(1.0) == pytest.approx(2.0)

    def test_pushed_branch(self):
        assert pme.c_pm(0.25) == pytest.approx(1.0 / SQRT2 + SQRT2 / 4.0)


class TestFrontInverse:
    def test_half_point_any_d1(self):
        for d1 in (0.1, 0.3, 0.5):
            assert pme.front_inverse_psi(0.5, d1) == pytest.approx(-SQRT2 * log(2.0),
                                                                   abs=1e-15)

    def test_monotone_limits(self):
        # psi ~ -sqrt(2) d1 log u as u -> 0+, ~ sqrt(2)(1+d1) log(1-u) as u -> 1-
        assert pme.front_inverse_psi(1e-12, 0.3) > 10.0
        assert pme.front_inverse_psi(1e-30, 0.3) > pme.front_inverse_psi(1e-12, 0.3)
        assert pme.front_inverse_psi(1.0 - 1e-12, 0.3) < -30.0

    def test_direct_value(self):
        val = SQRT2 * (1.5 * log(0.75) - 0.5 * log(0.25))
        assert pme.front_inverse_psi(0.25, 0.5) == pytest.approx(val, abs=1e-15)
        assert pme.front_profile(val, 0.5) == pytest.approx(0.25, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            pme.front_inverse_psi(0.0, 0.3)
        with pytest.raises(DomainError):
            pme.front_inverse_psi(1.0, 0.3)

    @settings(max_examples=60, deadline=None)
    @given(u=st.floats(0.01, 0.99), d1=st.floats(0.05, 0.5))
    def test_roundtrip_property(self, u, d1):
        x = pme.front_inverse_psi(u, d1)
        assert pme.front_profile(x, d1) == pytest.approx(u, abs=1e-12)


class TestFrontProfile:
    def test_half_height(self):
        assert pme.front_profile(pme.X_HALF, 0.3) == pytest.approx(0.5, abs=1e-13)

    def test_boundary_limits(self):
        assert pme.front_profile(60.0, 0.3) < 1e-50
        assert pme.front_profile(-60.0, 0.3) > 1.0 - 1e-12

    def test_root_at_origin(self):
        # unique root of psi(u) = 0 at d1 = 0.5 satisfies (1-u)^3 = u;
        # value frozen from the bisection oracle
        u = pme.front_profile(0.0, 0.5)
        assert u == pytest.approx(0.3176721961719806, abs=1e-12)
        assert abs(pme.front_inverse_psi(u, 0.5)) < 1e-12
        assert abs((1.0 - u) ** 3 - u) < 1e-12

    def test_strictly_decreasing(self):
        x = np.linspace(-20.0, 20.0, 401)
        u = pme.front_profile(x, 0.4)
        assert np.all(np.diff(u) < 0)


class TestDerivatives:
    def test_first_derivative_value(self):
        assert pme.front_derivatives_in_u(0.5, 0.5, 1) == pytest.approx(
            -0.25 / SQRT2, abs=1e-15)

    def test_tail_flatness(self):
        for order in (1, 2, 3, 4):
            assert abs(pme.front_derivatives_in_u(1e-14, 0.3, order)) < 1e-12

    def test_order2_matches_reduced_ode(self):
        rng = np.random.default_rng(1)
        for d1 in (0.2, 0.35, 0.5):
            u = rng.uniform(0.01, 0.99, 100)
            c = pme.c_pm(d1)
            d1u = pme.front_derivatives_in_u(u, d1, 1)
            d2u = pme.front_derivatives_in_u(u, d1, 2)
            ode = -(c * d1u + d1u**2 + u * (1.0 - u)) / (d1 + u)
            assert np.max(np.abs(d2u - ode)) < 1e-12

    def test_pme_residual_chebyshev(self):
        """Explicit front satisfies the degenerate-diffusion equation to
        1e-10 at 200 Chebyshev-distributed u values."""
        k = np.arange(1, 201)
        u = 0.5 * (1.0 + np.cos((2.0 * k - 1.0) * np.pi / 400.0))
        u = np.clip(u, 1e-9, 1.0 - 1e-9)
        for d1 in (0.1, 0.3, 0.5):
            c = pme.c_pm(d1)
            D1 = pme.front_derivatives_in_u(u, d1, 1)
            D2 = pme.front_derivatives_in_u(u, d1, 2)
            res = d1 * D2 + c * D1 + u * D2 + D1**2 + u - u**2
            assert np.max(np.abs(res)) < 1e-10

    def test_order_domain(self):
        with pytest.raises(DomainError):
            pme.front_derivatives_in_u(0.5, 0.3, 5)


class TestCokernel:
    def test_base_point_normalization(self):
        ck = pme.cokernel(0.3)
        assert ck.rho(pme.X_HALF) == pytest.approx(1.0, abs=1e-12)

    def test_m_tilde_agreement(self):
        """Quadrature route equals the transition closed form to 1e-10."""
        ck = pme.cokernel(0.5)
        for u in (0.05, 0.2, 0.5, 0.8, 0.95):
            assert ck.m_of_u(u) == pytest.approx(pme.m_tilde_closed(u), abs=1e-10)

    def test_m_closed_general_d1(self):
        for d1 in (0.2, 0.35, 0.45):
            ck = pme.cokernel(d1)
            c = pme.c_pm(d1)
            for u in (0.1, 0.5, 0.9):
                assert ck.m_of_u(u) == pytest.approx(pme._m_closed(u, d1, c), abs=1e-10)

    def test_phi_pointwise_formula(self):
        ck = pme.cokernel(0.3)
        for x in (-1.0, 0.5, 2.0):
            u = pme.front_profile(x, 0.3)
            expected = ck.rho(x) ** 2 * pme.front_derivatives_in_u(u, 0.3, 1) / (0.3 + u)
            assert ck.phi(x) == pytest.approx(expected, rel=1e-12)

    def test_explicit_branch_only(self):
        with pytest.raises(DomainError):
            pme.cokernel(0.7)

    def test_farfield_limit(self):
        assert pme.farfield_cokernel_limit() == pytest.approx(-1.0 / SQRT2, abs=1e-9)

    def test_farfield_density_constant(self):
        # the conjugated transition cokernel density is the constant -1/sqrt(2)
        u = np.geomspace(1e-8, 0.9, 25)
        vals = pme.farfield_tilde_phi(u)
        assert np.max(np.abs(vals + 1.0 / SQRT2)) < 1e-10


class TestInnerProducts:
    def test_dxu_value_quarter(self):
        val = 4.0 * SQRT2 * pi * 0.25 * 1.25 / np.sin(pi / 2.0) / 4.5
        assert pme.inner_product_dxu_phi(0.25) == pytest.approx(val, rel=1e-15)
        assert val == pytest.approx(1.2341341494880025, rel=1e-12)

    def test_positivity(self):
        for d1 in np.linspace(0.05, 0.45, 9):
            assert pme.inner_product_dxu_phi(d1) > 0.0

    @pytest.mark.parametrize("d1", [0.1, 0.2, 0.3, 0.4, 0.45])
    def test_oracle_agreement(self, d1):
        cf = pme.inner_product_dxu_phi(d1)
        orc = pme.inner_product_dxu_phi(d1, oracle=True)
        assert abs(cf - orc) <= 1e-8 * abs(cf)
        cf2 = pme.inner_product_flux_phi(d1)
        orc2 = pme.inner_product_flux_phi(d1, oracle=True)
        assert abs(cf2 - orc2) <= 1e-8 * abs(cf2)

    def test_pole_domain(self):
        with pytest.raises(DomainError):
            pme.inner_product_dxu_phi(0.5)
        with pytest.raises(DomainError):
            pme.inner_product_flux_phi(0.6)

    def test_transition_flux_value(self):
        closed = pme.transition_flux_value()
        assert closed == pytest.approx(-0.0324129, abs=5e-7)
        assert closed == pytest.approx(pme.transition_flux_value(oracle=True), abs=1e-10)

    def test_transition_marginal_is_one(self):
        assert pme.transition_marginal_value() == 1.0
        assert pme.transition_marginal_value(oracle=True) == pytest.approx(1.0, abs=1e-8)


class TestSpeedCoefficients:
    def test_cps2_vanishes_at_transition(self):
        assert abs(pme.c_ps2(0.5)) < 1e-10

    def test_cps2_sign_structure(self):
        assert pme.c_ps2(0.48) > 0.0
        assert pme.c_ps2(0.45) > 0.0
        assert pme.c_ps2(0.25) < 0.0
        assert pme.c_ps2(0.1) < 0.0

    def test_cps2_ratio_oracle(self):
        for d1 in (0.1, 0.25, 0.45):
            ratio = (-pme.inner_product_flux_phi(d1, oracle=True)
                     / pme.inner_product_dxu_phi(d1, oracle=True))
            assert pme.c_ps2(d1) == pytest.approx(ratio, rel=1e-8)

    def test_ratio_regularity_toward_transition(self):
        v1 = abs(pme.c_ps2(0.49))
        v2 = abs(pme.c_ps2(0.499))
        assert v2 < v1 < 5e-3

    def test_pushed_speed_expansion(self):
        d1 = 0.45
        assert pme.pushed_speed_expansion(d1, 0.0) == pytest.approx(pme.c_pm(d1))
        val = pme.pushed_speed_expansion(d1, sqrt(0.1))
        assert val == pytest.approx(pme.c_pm(d1) + 0.1 * pme.c_ps2(d1), rel=1e-14)


class TestTransitionCoefficient:
    def test_d12_value(self):
        assert pme.d12() == pytest.approx(0.0648259, abs=1e-6)
        assert pme.d12() == pytest.approx((268.0 - 243.0 * log(3.0)) / 16.0, rel=1e-15)

    def test_d12_from_ingredients(self):
        assert abs(pme.d12() - pme.d12(from_ingredients=True)) < 1e-10

    def test_ingredient_identity(self):
        # -M1 / (M2 + farfield) with M2 = 1 and farfield = -1/2
        m1 = pme.transition_flux_value()
        assert -m1 / (1.0 - 0.5) == pytest.approx(pme.d12(), abs=1e-12)

    def test_transition_expansion(self):
        assert pme.transition_expansion(0.0) == 0.5
        assert pme.transition_expansion(sqrt(0.1)) == pytest.approx(
            0.5 + 0.1 * pme.d12(), rel=1e-14)


class TestNagumoInvariance:
    def test_exact_solution(self):
        for d1 in (0.2, 0.5, 1.0):
            alpha = 1.0 / SQRT2
            c = alpha + d1 / alpha
            const, lin = pme.nagumo_invariance_check(alpha, c, d1)
            assert abs(const) < 1e-14
            assert abs(lin) < 1e-14

    def test_generic_nonsolution(self):
        const, lin = pme.nagumo_invariance_check(1.0, 1.0, 1.0)
        assert const != 0.0 and lin != 0.0

    @settings(max_examples=60, deadline=None)
    @given(alpha=st.floats(0.2, 2.0), c=st.floats(0.1, 3.0), d1=st.floats(0.05, 2.0))
    def test_linear_coefficient_identity(self, alpha, c, d1):
        _const, lin = pme.nagumo_invariance_check(alpha, c, d1)
        assert lin == pytest.approx(1.0 - 2.0 * alpha**2, abs=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(alpha=st.floats(0.3, 1.5), c=st.floats(0.5, 2.5), d1=st.floats(0.1, 1.0))
    def test_coefficients_reproduce_substitution(self, alpha, c, d1):
        """Substituting the parabola into the transformed system leaves a
        residual that is exactly const + lin * U, checked numerically."""
        const, lin = pme.nagumo_invariance_check(alpha, c, d1)
        for U in (0.2, 0.7):
            # chain rule along the parabola gives alpha^2 (1 - 2U) on the
            # left and c alpha - (d1 + U) on the right after dividing by
            # U (1 - U); their difference is the invariance residual
            resid = alpha**2 * (1.0 - 2.0 * U) - (c * alpha - (d1 + U))
            assert resid == pytest.approx(const + lin * U, abs=1e-12)


class TestPulledTails:
    def test_synthetic_fit(self):
        eta = 1.0
        x = np.linspace(5.0, 40.0, 600)
        u = (3.0 * x + 2.0) * np.exp(-eta * x)
        a, b = pme.pulled_tail_asymptotics((x, u), d1=1.0, u_window=(1e-14, 1e-1))
        assert a == pytest.approx(3.0, abs=1e-9)
        assert b == pytest.approx(2.0, abs=1e-7)

    def test_pulled_front_positive_a(self):
        for d1 in (0.7, 1.0):
            front = pme.PmeFront.pulled(d1)
            a, _b = pme.pulled_tail_asymptotics(front)
            assert a > 0.0

    def test_transition_pure_exponential(self):
        front = pme.PmeFront.explicit(0.5)
        a, b = pme.pulled_tail_asymptotics(front)
        assert abs(a) < 1e-6
        assert b == pytest.approx(1.0, abs=1e-3)

    def test_window_error(self):
        x = np.linspace(0.0, 1.0, 30)
        u = np.exp(-x)
        with pytest.raises(WindowError):
            pme.pulled_tail_asymptotics((x, u), d1=1.0)

    def test_pulled_profile_decreasing(self):
        x, u = pme.pulled_front_profile(0.8)
        assert u[0] > 0.99 and u[-1] < 1e-10
        assert np.all(np.diff(u) < 0)
