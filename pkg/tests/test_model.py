"""Dispersion relation, linear spreading speed, and essential-spectrum curves."""

from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontlab.errors import DomainError
from frontlab.model import (
    ModelParams,
    dispersion,
    dispersion_first_factor,
    essential_spectrum,
    linear_spreading_speed,
)


class TestModelParams:
    def test_valid(self):
        p = ModelParams(0.5, 0.3, 1.4)
        assert p.delta2 == pytest.approx(0.09)
        assert p.eta_lin == pytest.approx(sqrt(2.0))

    @pytest.mark.parametrize("d1,delta,c", [(-1.0, 0.0, 1.0), (0.0, 0.0, 1.0),
                                            (1.0, -0.1, 1.0), (1.0, np.inf, 1.0),
                                            (1.0, 0.0, np.nan)])
    def test_invalid(self, d1, delta, c):
        with pytest.raises(DomainError):
            ModelParams(d1, delta, c)

    def test_cap(self):
        with pytest.raises(DomainError):
            ModelParams(1e-5, 0.0, 1.0, d1_cap=100.0)


class TestDispersion:
    def test_constant_terms_only(self):
        # (1)(-1) at the origin of both arguments
        p = ModelParams(1.0, 0.0, 2.0)
        assert dispersion(0.0, 0.0, p) == pytest.approx(-1.0)

    def test_double_root_point(self):
        p = ModelParams(1.0, 0.0, 2.0)
        assert abs(dispersion(0.0, -1.0, p)) < 1e-15

    def test_first_factor_vanishes_with_delta(self):
        p = ModelParams(1.0, 0.5, 2.0)
        assert abs(dispersion(0.0, -1.0, p)) < 1e-15
        assert abs(dispersion_first_factor(0.0, -1.0, p)) < 1e-15

    @settings(max_examples=100, deadline=None)
    @given(lam_re=st.floats(-3, 3), lam_im=st.floats(-3, 3),
           nu_re=st.floats(-3, 3), nu_im=st.floats(-3, 3),
           d1=st.floats(0.1, 5.0), delta=st.floats(0.0, 1.0), c=st.floats(-3, 3))
    def test_factorization(self, lam_re, lam_im, nu_re, nu_im, d1, delta, c):
        p = ModelParams(d1, delta, c)
        lam = complex(lam_re, lam_im)
        nu = complex(nu_re, nu_im)
        f1 = dispersion_first_factor(lam, nu, p)
        f2 = p.delta2 * nu**2 - 1.0
        assert dispersion(lam, nu, p) == f1 * f2


class TestLinearSpreadingSpeed:
    @pytest.mark.parametrize("d1,delta,c_exp,nu_exp", [
        (1.0, 0.0, 2.0, -1.0),
        (4.0, 0.0, 4.0, -0.5),
        (0.5, 0.3, sqrt(2.0), -sqrt(2.0)),
    ])
    def test_closed_form(self, d1, delta, c_exp, nu_exp):
        c_lin, root, coeffs = linear_spreading_speed(d1, delta)
        assert c_lin == pytest.approx(c_exp, abs=1e-12)
        assert root.nu.real == pytest.approx(nu_exp, abs=1e-12)
        assert root.lam == 0.0
        assert root.is_double
        assert root.is_pinched

    def test_expansion_coefficients(self):
        # d10 = 1 - delta^2 nu^2 at d1 = 0.5, delta = 0.3: 1 - 0.09*2 = 0.82
        _c, _root, coeffs = linear_spreading_speed(0.5, 0.3)
        assert coeffs["d10"] == pytest.approx(0.82, abs=1e-12)
        assert coeffs["d02"] == pytest.approx(0.5 * 0.82, abs=1e-12)

    def test_double_root_sweep(self):
        """Newton-found pinched double root matches the closed form to 1e-12
        across a log-spaced d1 sweep and the delta set."""
        for d1 in np.geomspace(0.1, 10.0, 9):
            for delta in (0.0, 0.3, 0.7):
                if abs(delta**2 / d1 - 1.0) < 1e-6:
                    continue  # second-factor degeneracy excluded by design
                c_lin, root, _ = linear_spreading_speed(d1, delta)
                assert abs(c_lin - 2.0 * sqrt(d1)) < 1e-12
                assert abs(root.nu.real + 1.0 / sqrt(d1)) < 1e-12
                assert abs(root.lam) < 1e-12
                assert root.is_pinched
                root.validate(ModelParams(d1, delta, c_lin))


class TestEssentialSpectrum:
    def test_leading_edge_marginal_weight(self):
        """With the double-root weight the curve is exactly -d1 k^2: maximal
        real part zero, attained only at k = 0."""
        for d1 in np.geomspace(0.1, 10.0, 5):
            p = ModelParams.at_linear_speed(d1, 0.0)
            (curve,) = essential_spectrum(p, "leading_edge", p.eta_lin,
                                          (-5.0, 5.0), 201)
            assert np.max(np.abs(curve.lam - (-d1 * curve.k**2))) < 1e-12
            assert curve.max_real_part == pytest.approx(0.0, abs=1e-12)
            k_at_max = curve.k[np.argmax(curve.lam.real)]
            assert abs(k_at_max) < 1e-12

    def test_leading_edge_example(self):
        # substitute nu = i - sqrt(2) at d1 = 0.5, c = c_lin
        p = ModelParams.at_linear_speed(0.5, 0.0)
        (curve,) = essential_spectrum(p, "leading_edge", sqrt(2.0), (1.0, 2.0), 2)
        assert curve.lam[0] == pytest.approx(-0.5, abs=1e-12)

    def test_wake_at_k0(self):
        p = ModelParams.at_linear_speed(1.0, 0.0)
        (curve,) = essential_spectrum(p, "wake", 0.0, (0.0, 1.0), 2)
        assert curve.lam[0] == pytest.approx(-1.0, abs=1e-12)

    def test_wake_strictly_stable_sweep(self):
        for d1 in np.geomspace(0.1, 10.0, 7):
            for delta in (0.0, 0.3):
                p = ModelParams.at_linear_speed(d1, delta)
                (curve,) = essential_spectrum(p, "wake", 0.0, (-10.0, 10.0), 401)
                assert curve.max_real_part <= -1.0 + 1e-12

    def test_unweighted_leading_edge_unstable(self):
        p = ModelParams.at_linear_speed(1.0, 0.0)
        (curve,) = essential_spectrum(p, "leading_edge", 0.0, (-1.0, 1.0), 21)
        assert curve.max_real_part > 0.5  # lambda(0) = 1

    def test_eta_near_chemical_pole_rejected(self):
        p = ModelParams.at_linear_speed(1.0, 0.5)
        with pytest.raises(DomainError):
            essential_spectrum(p, "leading_edge", 2.0 + 1e-9, (-1.0, 1.0), 11)

    def test_samples_increasing_required(self):
        p = ModelParams.at_linear_speed(1.0, 0.0)
        with pytest.raises(DomainError):
            essential_spectrum(p, "leading_edge", 1.0, (0.0, 1.0), 1)
