import math
from fractions import Fraction

import numpy as np
import pytest

from hermite_obs import basis, estimates as est
from hermite_obs.basis import ContractViolation
from hermite_obs.quadrature import composite_gauss_legendre


def chebyshev_first_exact(d, x):
    """Oracle: the explicit sum T_d(X) = sum_k C(d,2k) (X^2-1)^k X^(d-2k),
    evaluated in exact rational arithmetic."""
    x = Fraction(x)
    total = Fraction(0)
    for k in range(d // 2 + 1):
        total += math.comb(d, 2 * k) * (x * x - 1) ** k * x ** (d - 2 * k)
    return total


class TestChebyshev:
    def test_t3_at_two(self):
        assert est.chebyshev_value("first", 3, 2.0) == pytest.approx(26.0)

    def test_u2_at_three(self):
        assert est.chebyshev_value("second", 2, 3.0) == pytest.approx(35.0)

    @pytest.mark.parametrize("d", range(0, 51, 5))
    def test_value_one_at_one(self, d):
        assert est.chebyshev_value("first", d, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_recurrence_matches_exact_sum(self):
        xs = [Fraction(i, 7) for i in range(-20, 21, 2)] + [Fraction(5, 2), Fraction(9, 4)]
        for d in range(31):
            for x in xs[:20]:
                want = float(chebyshev_first_exact(d, x))
                got = est.chebyshev_value("first", d, float(x))
                assert got == pytest.approx(want, rel=1e-9, abs=1e-9)

    def test_second_kind_is_derivative_of_first(self):
        # U_{d-1} = T_d' / d, with T_d' computed by differentiating the
        # recurrence (p' obeys p'_{d+1} = 2 p_d + 2x p'_d - p'_{d-1})
        for d in range(1, 12):
            for x in (-1.5, 0.3, 2.0):
                p_prev, p_cur = 1.0, x
                dp_prev, dp_cur = 0.0, 1.0
                for _ in range(d - 1):
                    p_prev, p_cur = p_cur, 2 * x * p_cur - p_prev
                    dp_prev, dp_cur = dp_cur, 2 * p_prev + 2 * x * dp_cur - dp_prev
                t_prime = dp_cur if d >= 1 else 0.0
                assert est.chebyshev_value("second", d - 1, x) == pytest.approx(
                    t_prime / d, rel=1e-11, abs=1e-11
                )


class TestRemez:
    def test_fraction_one_half_dim_one(self):
        assert est.remez_fraction(1, 0.5) == pytest.approx(3.0)

    def test_fraction_dim_two(self):
        assert est.remez_fraction(2, 0.75) == pytest.approx(3.0)

    def test_degree_one_bound(self):
        assert est.remez_bound(1, 1, 0.5) == pytest.approx(3.0)

    def test_classical_interval_consistency(self):
        # |E| = 1 inside [-1, 1] gives T_d((4-|E|)/|E|) = T_d(3) = T_d(F(1/2))
        for d in range(8):
            classical = est.chebyshev_value("first", d, 3.0)
            assert est.remez_bound(1, d, 0.5) == pytest.approx(classical, rel=1e-12)

    def test_ball_bound_plugin(self):
        assert est.remez_ball_bound(1, 0, 1.0) == pytest.approx(2 * 2 / math.sqrt(3))

    def test_ball_bound_monotone_in_measure(self):
        vals = [est.remez_ball_bound(1, 4, rho) for rho in (0.1, 0.3, 0.6, 1.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_domain_errors(self):
        with pytest.raises(ContractViolation):
            est.remez_fraction(1, 0.0)
        with pytest.raises(ContractViolation):
            est.remez_ball_bound(1, 2, 1.5)

    def test_empirical_dominance_on_subintervals(self):
        # 200 random real polynomials of degree <= 6: the L2 ball bound must
        # dominate the dense-grid norm ratio for interval unions
        rng = np.random.default_rng(2024)
        R = 1.0
        grid = np.linspace(-R, R, 4001)
        trials = 0
        for _ in range(200):
            d = int(rng.integers(0, 7))
            coeffs = rng.uniform(-1, 1, size=d + 1)
            vals = np.polynomial.polynomial.polyval(grid, coeffs)
            pieces = sorted(rng.uniform(-R, R, size=4))
            mask = ((grid >= pieces[0]) & (grid <= pieces[1])) | (
                (grid >= pieces[2]) & (grid <= pieces[3])
            )
            meas = float(np.sum(mask)) / len(grid) * 2 * R
            if meas < 0.05:
                continue
            trials += 1
            norm_ball = math.sqrt(np.trapezoid(vals**2, grid))
            norm_sub = math.sqrt(np.trapezoid(np.where(mask, vals, 0.0) ** 2, grid))
            if norm_sub == 0.0:
                continue
            rho = meas / (2 * R)
            assert norm_ball <= est.remez_ball_bound(1, d, rho) * norm_sub * (1 + 1e-9)
        assert trials > 150


class TestIntervalLemma:
    def test_m_equal_one(self):
        assert est.kovrijkine_interval_bound(300.0, 0.37, 1.0) == pytest.approx(1.0)

    def test_exponent_one_case(self):
        # C/|E| = 4 with log M / log 2 = 1 gives exactly 4
        assert est.kovrijkine_interval_bound(2.0, 0.5, 2.0) == pytest.approx(4.0)

    def test_rejects_small_m(self):
        with pytest.raises(ContractViolation):
            est.kovrijkine_interval_bound(300.0, 0.5, 0.9)

    def test_empirical_dominance_for_cosines(self):
        # phi(z) = cos(a z), |phi(0)| = 1, M = cosh(4a); dyadic subset grids
        xs = np.linspace(0.0, 1.0, 2049)
        for a in (0.25, 0.5, 0.75, 1.0):
            vals = np.abs(np.cos(a * xs))
            sup_I = float(vals.max())
            m_value = math.cosh(4 * a)
            for frac in (0.5, 0.25, 0.125):
                step = int(1 / frac)
                sub = vals[::step]
                bound = est.kovrijkine_interval_bound(300.0, frac, m_value)
                assert sup_I <= bound * float(sub.max()) * (1 + 1e-9)


class TestBernstein:
    def test_ground_state_first_derivative(self):
        # phi_0' = -(1/sqrt 2) phi_1, so the lhs is exactly 1/sqrt(2)
        f = basis.unit_expansion(1, 0, (0,))
        r = est.bernstein_check(f, 1.0, (1,))
        assert r.lhs == pytest.approx(1 / math.sqrt(2), rel=1e-13)
        assert r.rhs == pytest.approx(math.exp(math.e / 2) * 2.0, rel=1e-13)
        assert r.passed

    def test_zero_multiindex_trivial(self):
        rng = np.random.default_rng(5)
        f = basis.random_expansion(2, 6, rng)
        r = est.bernstein_check(f, 0.5, (0, 0))
        assert r.lhs == pytest.approx(f.norm(), rel=1e-13)
        assert r.passed

    def test_randomized_suite(self):
        rng = np.random.default_rng(99)
        betas = [(1, 0), (0, 1), (1, 1), (2, 0), (2, 1), (0, 3)]
        for _ in range(60):
            f = basis.random_expansion(2, 12, rng)
            delta = float(rng.choice([0.25, 0.5, 1.0]))
            beta = betas[int(rng.integers(0, len(betas)))]
            assert est.bernstein_check(f, delta, beta).passed


class TestWeighted:
    def test_gaussian_ground_state(self):
        # ||exp(d x^2) phi_0||^2 = (1 - 2 d)^(-1/2) in closed form
        f = basis.unit_expansion(1, 0, (0,))
        r = est.weighted_check(f, 1.0 / 64, (0,))
        assert r.certified
        assert r.lhs_x == pytest.approx((1 - 2 / 64) ** -0.25, abs=1e-6)
        assert r.rhs == pytest.approx(4.0)
        assert r.passed

    def test_fourier_symmetry_identity(self):
        rng = np.random.default_rng(17)
        f = basis.random_expansion(1, 8, rng)
        r = est.weighted_check(f, 1.0 / 80, (0,))
        lev = basis.index_levels(1, 8)
        twisted = basis.HermiteExpansion(1, 8, f.coeffs * (-1j) ** lev)
        r2 = est.weighted_check(twisted, 1.0 / 80, (0,))
        assert r.lhs_xi == pytest.approx(r2.lhs_x, rel=1e-9)

    def test_top_mode_growth_below_rhs_scale(self):
        # rhs grows like 2^(N/2); the measured weighted norm of a pure top
        # mode grows strictly slower for small delta
        delta = 1.0 / 200
        ratios = []
        for N in (4, 8, 12):
            f = basis.unit_expansion(1, N, (N,))
            r = est.weighted_check(f, delta, (0,))
            assert r.certified and r.passed
            ratios.append(r.lhs_x / 2.0 ** (N / 2.0))
        assert ratios[0] > ratios[1] > ratios[2]

    def test_randomized_suite(self):
        rng = np.random.default_rng(1234)
        for _ in range(25):
            n = int(rng.integers(1, 3))
            N = int(rng.integers(0, 9))
            f = basis.random_expansion(n, N, rng)
            delta = float(rng.uniform(0.2, 0.9)) / (32 * n)
            beta = tuple(int(b) for b in rng.integers(0, 2, size=n))
            r = est.weighted_check(f, delta, beta)
            assert r.certified
            assert r.passed


class TestTails:
    def test_erfc_oracle_a1(self):
        exact, bound = est.hermite_tail_bound(0, 1.0)
        assert exact == pytest.approx(math.erfc(1.0), abs=1e-12)
        assert bound == pytest.approx(2 / math.sqrt(math.pi) * math.exp(-1), rel=1e-12)
        assert exact <= bound

    def test_erfc_oracle_a3(self):
        exact, bound = est.hermite_tail_bound(0, 3.0)
        assert exact == pytest.approx(math.erfc(3.0), abs=1e-12)
        assert exact <= bound

    def test_degree_five(self):
        exact, bound = est.hermite_tail_bound(5, math.sqrt(11.0))
        assert exact <= bound

    def test_grid_dominance(self):
        for k in range(0, 21, 4):
            for shift in (0.0, 0.8, 2.5):
                a = math.sqrt(2 * k + 1) + shift
                exact, bound = est.hermite_tail_bound(k, a)
                assert exact <= bound + 1e-14

    def test_validity_threshold(self):
        with pytest.raises(ContractViolation):
            est.hermite_tail_bound(5, 1.0)


class TestTailConstant:
    def test_floor(self):
        for n in (1, 2, 3):
            c = est.tail_constant_cn(n)
            assert c.c >= math.sqrt(2 * n * math.log(8.0)) - 1e-12

    def test_certificate(self):
        c = est.tail_constant_cn(2)
        assert all(v <= 0.25 + 1e-12 for _, v in c.certificate)
        assert c.worst_case == c.certificate[0][1]

    def test_empirical_quarter_mass(self):
        # 50 random expansions: the tail mass past c_1 sqrt(N+1) stays below
        # a quarter of the squared norm (oracle: panel quadrature of |f|^2)
        rng = np.random.default_rng(31)
        c1 = est.tail_constant_cn(1).c
        for _ in range(50):
            N = int(rng.integers(0, 31))
            f = basis.random_expansion(1, N, rng)
            a = c1 * math.sqrt(N + 1)

            def density(x):
                return np.abs(f.evaluate(x)) ** 2

            span = math.sqrt(2 * N + 1) + 12.0
            hi, _, _ = composite_gauss_legendre(
                density, a, max(a + 1e-6, span), abs_tol=1e-12,
                min_panels=max(4, N)
            )
            lo, _, _ = composite_gauss_legendre(
                density, -max(a + 1e-6, span), -a, abs_tol=1e-12,
                min_panels=max(4, N)
            )
            assert hi + lo <= 0.25 * f.norm() ** 2 + 1e-9
