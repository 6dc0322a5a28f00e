"""Reference solutions, entropy residuals and L1 errors."""
import math

import numpy as np
import pytest
from scipy.integrate import quad

from hipster.densities import PiecewisePolynomial
from hipster.entropy import (EntropySolution, TestFunction, battery_csv, calibrate_tolerance, cell_average_l1,
                             entropy_residual, eval_solution, l1_constant_vs_poly, l1_error,
                             residual_battery, solution_value)

BURGERS = EntropySolution("burgers", eps=0.25, T=1.0, q=0.5)
PME = EntropySolution("pme", eps=0.25, T=1.0)


class TestSolutions:
    def test_burgers_example(self):
        sol = EntropySolution("burgers", eps=0.5, T=1.0, q=0.5)
        assert solution_value(sol, 1.0, 0.5) == pytest.approx(1.0)
        assert sol.support(0.5) == pytest.approx((0.0, math.sqrt(2)))
        assert sol.profile(0.5).integral(0, 2) == pytest.approx(1.0, abs=1e-14)

    def test_pme_example(self):
        sol = EntropySolution("pme", eps=2 / 9, T=1.0)
        assert solution_value(sol, 0.0, 0.0) == pytest.approx(0.75)
        assert solution_value(sol, 0.5, 0.0) == pytest.approx(0.75 * (1 - 0.25))
        assert sol.support(0.0) == pytest.approx((-1.0, 1.0))

    def test_zero_outside_support(self):
        for sol in (BURGERS, PME):
            lo, hi = sol.support(0.3)
            assert solution_value(sol, [lo - 0.1, hi + 0.1], 0.3).tolist() == [0.0, 0.0]

    def test_horizon(self):
        with pytest.raises(ValueError):
            eval_solution(BURGERS, 0.0, 1.5)
        with pytest.raises(ValueError):
            EntropySolution("heat")
        with pytest.raises(ValueError):
            EntropySolution("pme", eps=1.0)

    @pytest.mark.parametrize("sol", [BURGERS, PME])
    def test_unit_mass_at_100_times(self, sol):
        for t in np.linspace(0.0, sol.T, 100):
            lo, hi = sol.support(t)
            assert sol.profile(t).integral(lo - 1, hi + 1) == pytest.approx(1.0, abs=1e-12)

    def test_sup_is_attained(self):
        for sol in (BURGERS, PME):
            lo, hi = sol.support(0.2)
            x = np.linspace(lo, hi, 100001)
            assert solution_value(sol, x, 0.2).max() == pytest.approx(sol.sup(0.2), rel=1e-4)

    def test_self_similarity(self):
        rng = np.random.default_rng(0)
        for sol, a in ((BURGERS, 0.5), (PME, 1.0 / 3.0)):
            for _ in range(50):
                t = rng.uniform(0, sol.T)
                y = rng.uniform(-1.5, 1.5)
                tau = t + sol.eps
                g = tau ** a * solution_value(sol, y * tau ** a, t)
                g0 = sol.eps ** a * solution_value(sol, y * sol.eps ** a, 0.0)
                assert g == pytest.approx(g0, abs=1e-12)

    def test_gradient_is_derivative(self):
        for sol in (BURGERS, PME):
            lo, hi = sol.support(0.4)
            x = np.linspace(lo, hi, 13)[1:-1]
            h = 1e-6
            num = (solution_value(sol, x + h, 0.4) - solution_value(sol, x - h, 0.4)) / (2 * h)
            assert np.allclose(eval_solution(sol, x, 0.4)[1], num, atol=1e-6)

    def test_solves_pde_in_smooth_region(self):
        # u_t + f(u)_x = K(u)_xx checked by finite differences at interior points
        h = 1e-4
        for sol in (BURGERS, PME):
            lo, hi = sol.support(0.5)
            for x in np.linspace(lo, hi, 7)[1:-1]:
                ut = (solution_value(sol, x, 0.5 + h) - solution_value(sol, x, 0.5 - h)) / (2 * h)
                F = lambda y: float(sol.f(solution_value(sol, y, 0.5)))
                fx = (F(x + h) - F(x - h)) / (2 * h)
                K = lambda y: 0.5 * solution_value(sol, y, 0.5) ** 2 if sol.family == "pme" else 0.0
                kxx = (K(x + h) - 2 * K(x) + K(x - h)) / h ** 2
                assert ut + fx - kxx == pytest.approx(0.0, abs=1e-5)


class TestTestFunction:
    def test_support_and_gradient(self):
        phi = TestFunction(0.2, 0.4, 0.3, 0.2)
        assert phi(0.6, 0.4) == 0.0 and phi(0.2, 0.7) == 0.0
        assert phi(0.2, 0.4) == pytest.approx(math.exp(-2))
        h = 1e-6
        px, pt = phi.grad(0.3, 0.45)
        assert px == pytest.approx((phi(0.3 + h, 0.45) - phi(0.3 - h, 0.45)) / (2 * h), abs=1e-6)
        assert pt == pytest.approx((phi(0.3, 0.45 + h) - phi(0.3, 0.45 - h)) / (2 * h), abs=1e-6)

    def test_must_vanish_at_horizon(self):
        with pytest.raises(ValueError):
            entropy_residual(BURGERS, TestFunction(0.5, 0.9, 0.2, 0.2), 0.0)
        with pytest.raises(ValueError):
            TestFunction(0, 0, 0, 1)


class TestResidual:
    @pytest.mark.parametrize("sol", [BURGERS, PME])
    def test_identity_cases_vanish(self, sol):
        phi = TestFunction(sol.support(0.3)[1] * 0.7, 0.3, 0.5, 0.2)
        for c in (0.0, sol.sup(0.0) * 1.2):
            assert abs(entropy_residual(sol, phi, c, 256)) <= 1e-5

    def test_identity_converges(self):
        phi = TestFunction(0.8, 0.3, 0.5, 0.25)
        r = [abs(entropy_residual(BURGERS, phi, 0.0, n)) for n in (16, 64, 256)]
        assert r[2] < r[1] < r[0]

    def test_initial_term_included(self):
        phi = TestFunction(0.5, 0.0, 0.4, 0.2)
        assert abs(entropy_residual(BURGERS, phi, 0.0, 256)) <= 1e-5

    def test_shock_bump_strictly_positive(self):
        t0 = 0.4
        shock = BURGERS.support(t0)[1]
        phi = TestFunction(shock, t0, 0.3, 0.2)
        c = 0.5 * BURGERS.sup(t0)
        assert entropy_residual(BURGERS, phi, c, 256) > 1e-3

    def test_calibration_constant(self):
        phi = TestFunction(0.8, 0.3, 0.5, 0.25)
        assert calibrate_tolerance(BURGERS, phi, 64) < 1.0

    def test_small_battery(self):
        rows = residual_battery(PME, count=10, quad_n=128, seed=3)
        assert len(rows) == 10
        assert min(r["residual"] for r in rows) >= -1e-4
        csv_text = battery_csv(rows)
        assert csv_text.splitlines()[0] == "family,c,x0,t0,residual"
        assert len(csv_text.splitlines()) == 11


class TestL1:
    def test_exact_against_quadrature(self):
        rho = PiecewisePolynomial((-1.0, 0.0, 1.0), ([0.5, 0.0, -0.3], [0.5, 1.0, -0.8]))
        edges = np.linspace(-1.25, 1.25, 6)
        values = np.array([0.1, 0.6, 0.2, 0.7, 0.0])
        U = lambda x: values[np.searchsorted(edges, x, side="right") - 1] if edges[0] <= x < edges[-1] else 0.0
        R = lambda x: float(rho(x))
        pts = sorted(set(edges.tolist()) | {-1.0, 0.0, 1.0})
        ref = sum(quad(lambda x: abs(U(x) - R(x)), a, b, epsabs=1e-13)[0] for a, b in zip(pts, pts[1:]))
        assert l1_constant_vs_poly(edges, values, rho, (-1.25, 1.25)) == pytest.approx(ref, abs=1e-10)

    def test_disjoint_window(self):
        rho = BURGERS.profile(0.0)
        assert l1_constant_vs_poly([0.0, 0.5], [1.0], rho, (5.0, 6.0)) == 0.0

    def test_projection_is_order_one_over_m(self):
        # |P_M u - u| <= Lip * h / 2 per cell inside the support plus O(h) at the edge
        a = cell_average_l1(BURGERS, 0.25, 64, (-1, 3))
        b = cell_average_l1(BURGERS, 0.25, 256, (-1, 3))
        lip = 1.0 / (2 * BURGERS.q * 0.5)
        assert b <= lip * 2.0 / 256
        assert b < a

    def test_bad_time_window(self):
        with pytest.raises(ValueError):
            l1_error(BURGERS, 8, (0, 1), (0.5, 2.0))

    def test_decreasing(self):
        e = [l1_error(PME, M, (-2, 2), (0.0, 0.1), t_nodes=8) for M in (8, 16, 32)]
        assert e[0] > e[1] > e[2]
