"""Far-field/core solver: residual structure, solves, transition hunting,
sweeps, and fits."""

from math import sqrt

import numpy as np
import pytest

from frontlab import continuation as ct, pme
from frontlab.errors import DomainError, IllConditioned, NoBracket


class TestGrid:
    def test_defaults(self):
        g = ct.Grid()
        assert g.n == 401
        assert g.x[0] == -20.0 and g.x[-1] == 20.0
        assert abs(g.dx * (g.n - 1) - 2 * g.L) < 1e-12

    def test_too_coarse(self):
        with pytest.raises(DomainError):
            ct.Grid(L=1.0, dx=0.1)

    def test_collar_start(self):
        g = ct.Grid()
        assert g.x[g.collar_start] == pytest.approx(18.0)


class TestCutoffs:
    def test_plateaus(self):
        x = np.array([-5.0, -3.0, -2.0, 0.0, 2.0, 3.0, 5.0])
        cm = ct.chi_minus(x)[0]
        cp = ct.chi_plus(x)[0]
        assert np.allclose(cm, [1, 1, 0, 0, 0, 0, 0])
        assert np.allclose(cp, [0, 0, 0, 0, 0, 1, 1])

    def test_mirror_symmetry(self):
        x = np.linspace(-4.0, 4.0, 81)
        assert np.allclose(ct.chi_minus(x)[0], ct.chi_plus(-x)[0])


class TestResidualStructure:
    def test_exact_front_floor_and_refinement(self, grid):
        """Sampled exact front: the measured residual floor is pure
        truncation and drops by ~16x under dx halving (4th-order Laplacian
        dominated)."""
        floors = {}
        for dx in (0.1, 0.05):
            g = ct.Grid(L=20.0, dx=dx)
            d1, c = 0.5, sqrt(2.0)
            x = g.x
            u_ex = pme.front_profile(x, d1)
            tail = ct._Tail("pulled", 0.0, nu=-sqrt(2.0), a=0.0, b=1.0, d1=d1, c=c)
            Bu = ct.chi_minus(x)[0] + ct.chi_plus(x)[0] * tail.u_tail(x)[0]
            w = u_ex - Bu
            # beyond x ~ 12 the true core is below 1e-17 while the float
            # cancellation noise of u_ex - Bu survives weighting; zero it
            w[g.x >= 12.0] = 0.0
            ref = ct._phase_ref_from(u_ex, g)
            eta_w = ct._core_weight_rate("pulled", d1, c)
            bvp = ct._FrontBVP(g, d1, 0.0, "pulled", c, ref, tail, (eta_w, eta_w))
            X = bvp.pack(bvp.omega * w, None, tail, c)
            R = bvp.residual(X)
            # stencil truncation only: the pin rows carry the (exponentially
            # small) domain-truncation values, the phase row is gauge
            floors[dx] = np.linalg.norm(R[:g.n][bvp.pde_mask])
        assert floors[0.1] < 1e-4  # measured floor at the paper's resolution
        assert floors[0.1] / floors[0.05] > 8.0  # 4th-order dominated

    def test_cutoff_alone_not_a_solution(self, grid):
        d1, c = 0.5, sqrt(2.0)
        tail = ct._Tail("pulled", 0.0, nu=-sqrt(2.0), a=0.0, b=0.0, d1=d1, c=c)
        u0 = ct.chi_minus(grid.x)[0]
        ref = ct._phase_ref_from(u0, grid)
        eta_w = ct._core_weight_rate("pulled", d1, c)
        bvp = ct._FrontBVP(grid, d1, 0.0, "pulled", c, ref, tail, (eta_w, eta_w))
        X = bvp.pack(np.zeros(grid.n), None, tail, c)
        R = bvp.residual(X)
        x = grid.x
        interface = np.abs(R[:grid.n])[(x > -3.5) & (x < -1.5)]
        elsewhere = np.abs(R[:grid.n])[(x > 5.0) & (x < 15.0)]
        assert interface.max() > 0.1
        assert interface.max() > 100.0 * elsewhere.max()

    def test_jacobian_matches_finite_differences(self, grid):
        d1 = 0.45
        delta = sqrt(0.05)
        sol = ct.solve_pushed(d1, delta, grid)
        tail = ct._Tail("pushed", delta, eta=sol.eta_ps, b=sol.b, d1=d1, c=sol.c)
        eta_w = ct._core_weight_rate("pushed", d1, sol.c)
        bvp = ct._FrontBVP(grid, d1, delta, "pushed", sol.c, sol.phase_ref, tail,
                           (eta_w, min(eta_w, 0.9 / delta)))
        X = bvp.pack(bvp.omega * sol.w_u, bvp.omega_v * sol.w_v, tail, sol.c)
        J = bvp.jacobian(X).toarray()
        rng = np.random.default_rng(7)
        for j in rng.choice(bvp.size, size=8, replace=False).tolist() + [bvp.size - 3,
                                                                         bvp.size - 2,
                                                                         bvp.size - 1]:
            h = 1e-7 * max(1.0, abs(X[j]))
            Xp, Xm = X.copy(), X.copy()
            Xp[j] += h
            Xm[j] -= h
            col = (bvp.residual(Xp) - bvp.residual(Xm)) / (2.0 * h)
            scale = max(1.0, np.max(np.abs(J[:, j])))
            assert np.max(np.abs(col - J[:, j])) / scale < 1e-5


class TestPulledSolves:
    def test_transition_neighborhood(self, pulled_05_delta0):
        sol = pulled_05_delta0
        assert abs(sol.a) < 1e-5
        assert sol.b == pytest.approx(1.0, abs=1e-3)
        assert sol.residual_norm <= 1e-10
        assert sol.c == 2.0 * sqrt(0.5)

    def test_generic_pulled_positive_a(self, pulled_1_delta0):
        sol = pulled_1_delta0
        assert sol.a > 0.5
        assert sol.min_u > 0.0
        assert sol.min_v > 0.0
        assert sol.nu_farfield == pytest.approx(-1.0, abs=1e-15)

    def test_sign_consistency_above_transition(self, grid, transition_delta2_01):
        sol = ct.solve_pulled(0.52, sqrt(0.1), grid)
        assert np.sign(sol.a) == np.sign(0.52 - transition_delta2_01.d1_star)

    def test_speed_pinned(self, grid):
        sol = ct.solve_pulled(0.7, 0.0, grid)
        assert sol.c == 2.0 * sqrt(0.7)


class TestPushedSolves:
    def test_delta0_speed(self, pushed_04_delta0):
        sol = pushed_04_delta0
        assert sol.c == pytest.approx(pme.c_pm(0.4), abs=5e-6)
        assert sol.eta_ps == pytest.approx(1.0 / (sqrt(2.0) * 0.4), abs=1e-4)
        assert sol.a == 0.0
        assert sol.residual_norm <= 1e-10
        assert sol.min_u > 0.0

    def test_speed_deviation_signs(self, grid):
        up = ct.solve_pushed(0.45, sqrt(0.1), grid)
        assert up.c - pme.c_pm(0.45) > 0.0
        down = ct.solve_pushed(0.2, sqrt(0.1), grid)
        assert down.c - pme.c_pm(0.2) < 0.0

    def test_delta0_requires_pushed_range(self, grid):
        with pytest.raises(DomainError):
            ct.solve_pushed(0.6, 0.0, grid)


class TestTransition:
    def test_delta0_location(self, transition_delta0):
        assert transition_delta0.d1_star == pytest.approx(0.5, abs=5e-6)

    def test_slope_magnitude_matches_bracket_calculus(self, transition_delta0):
        """|da/d d1| at the porous-medium transition evaluates to sqrt(2)
        through the cokernel brackets; the solver's gauge sits close to the
        explicit-front translate, so the measured slope magnitude lands
        within a few percent."""
        assert abs(transition_delta0.a_slope) == pytest.approx(sqrt(2.0), rel=0.05)

    def test_linear_prediction_delta2_01(self, transition_delta2_01):
        pred = pme.transition_expansion(sqrt(0.1))
        assert transition_delta2_01.d1_star == pytest.approx(pred, abs=2e-4)

    def test_no_bracket(self, grid):
        with pytest.raises(NoBracket):
            ct.find_transition(0.0, grid, bracket=(0.6, 0.7))

    def test_gauge_invariance_of_root(self, grid, transition_delta0):
        """Shifting the reference profile by whole grid cells changes the
        gauge, not the located transition."""
        shift_cells = 5
        u0 = ct._delta0_profile(0.5, grid)
        u_s = np.roll(u0, -shift_cells)
        u_s[-shift_cells:] = u0[-1]
        ref = ct._phase_ref_from(u_s, grid)
        tp = ct.find_transition(0.0, grid, phase_ref=ref)
        # the root is gauge-invariant up to the per-translate discretization
        # error (the profile shifts relative to the grid)
        assert tp.d1_star == pytest.approx(transition_delta0.d1_star, abs=5e-6)

    def test_gauge_scaling_of_a(self, grid):
        """Translating the reference rescales a by e^{eta_lin * shift}:
        speed and the sign of a are the physics, a's magnitude is gauge."""
        d1 = 0.55
        s1 = ct.solve_pulled(d1, 0.0, grid)
        shift_cells = 5
        shift = shift_cells * grid.dx
        u_ref, _ = s1.phase_ref
        u_s = np.roll(u_ref, -shift_cells)
        u_s[-shift_cells:] = u_ref[-1]
        s2 = ct.solve_pulled(d1, 0.0, grid, phase_ref=ct._phase_ref_from(u_s, grid))
        assert s2.c == s1.c
        # rolling the reference left by the shift makes the solution follow,
        # scaling the tail coefficients by e^{-shift eta_lin}
        factor = np.exp(-shift / sqrt(d1))
        assert s2.a == pytest.approx(s1.a * factor, rel=5e-3)
        assert np.sign(s2.a) == np.sign(s1.a)


class TestSweepAndFit:
    def test_empty_plan(self):
        plan = ct.SweepPlan(vary="d1", start=0.4, stop=0.3, step=0.01, solve="pushed")
        assert ct.sweep(plan) == []

    def test_pushed_sweep_zero_crossing(self, grid):
        """Speed deviation at delta^2 = 0.1 crosses zero once inside
        (0.4, 0.5): negative below, positive near the transition."""
        plan = ct.SweepPlan(vary="d1", start=0.30, stop=0.48, step=0.03,
                            solve="pushed", fixed=0.1)
        rows = ct.sweep(plan, grid)
        devs = [(r["d1"], r["c_numeric"] - pme.c_pm(r["d1"]))
                for r in rows if not r["error"]]
        assert len(devs) == len(rows)
        signs = [np.sign(d) for _d1, d in devs]
        assert signs[0] < 0 and signs[-1] > 0
        assert sum(1 for a, b in zip(signs, signs[1:]) if a != b) == 1

    def test_quadratic_fit_recovers_planted(self):
        t = np.linspace(0.0, 0.4, 9)
        d = 0.5 + 0.0648 * t + 0.0078 * t**2
        (c0, c1, c2), diag = ct.quadratic_fit(list(zip(t, d)))
        assert c0 == pytest.approx(0.5, abs=1e-12)
        assert c1 == pytest.approx(0.0648, abs=1e-12)
        assert c2 == pytest.approx(0.0078, abs=1e-12)

    def test_quadratic_fit_needs_points(self):
        with pytest.raises(DomainError):
            ct.quadratic_fit([(0.0, 0.5), (0.1, 0.51)])

    def test_quadratic_fit_ill_conditioned(self):
        pts = [(0.1, 0.5)] * 6
        with pytest.raises(IllConditioned):
            ct.quadratic_fit(pts)


class TestDeltaContinuity:
    def test_speed_and_profile_converge_to_pme(self, grid):
        # d1 = 0.25: the quadratic speed coefficient is large there, so the
        # delta^2 scaling is visible above the quartic corrections
        d1 = 0.25
        sol0 = ct.solve_pushed(d1, 0.0, grid)
        u0 = sol0.profiles()[0]
        errs_c, errs_u = [], []
        for d2 in (0.08, 0.02):
            sol = ct.solve_pushed(d1, sqrt(d2), grid)
            errs_c.append(abs(sol.c - sol0.c))
            errs_u.append(np.max(np.abs(sol.profiles()[0] - u0)))
        assert errs_c[1] < 0.6 * errs_c[0]
        assert errs_u[1] < 0.6 * errs_u[0]
        assert errs_c[1] < 5e-3 and errs_u[1] < 5e-2


class TestDegenerateDecay:
    def test_weak_branch_rejected(self, grid):
        """A pushed solution whose decay rate lands on the weak side of the
        double root is not a pushed front."""
        from frontlab.errors import DegenerateDecay

        d1, c = 0.4, pme.c_pm(0.4)
        weak_eta = 0.5 * (sqrt(2.0) + 1.0 / sqrt(d1))  # below c/(2 d1)
        tail = ct._Tail("pushed", 0.0, eta=weak_eta, b=1.0, d1=d1, c=c)
        with pytest.raises(DegenerateDecay):
            ct._pack_pushed(grid, d1, 0.0, c, np.zeros(grid.n), None, tail,
                            0.0, 1, None, np.nan)
