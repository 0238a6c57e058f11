"""Chebyshev/Remez machinery, analytic-interval bounds, Bernstein-type and
weighted estimates for Hermite combinations, and Hermite tail constants.

The quantitative inequalities implemented here control polynomials on small
sets (Remez, Chebyshev growth, analytic-function interval bounds) and control
derivatives / Gaussian-weighted norms of finite Hermite combinations.  They
feed the explicit spectral-constant bounds in :mod:`hermite_obs.gram`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import basis
from .basis import ContractViolation, HermiteExpansion, LadderMap, apply_ladder
from .quadrature import composite_gauss_legendre

__all__ = [
    "chebyshev_value",
    "remez_fraction",
    "remez_bound",
    "remez_ball_bound",
    "kovrijkine_interval_bound",
    "bernstein_check",
    "weighted_check",
    "hermite_tail_bound",
    "tail_constant_cn",
    "tail_mass_rhs_log",
    "TailConstants",
]


def chebyshev_value(kind, d, x):
    """Chebyshev polynomial value by the stable three-term recurrence.

    kind 'first' evaluates T_d, kind 'second' evaluates U_d; both satisfy
    p_{d+1} = 2 x p_d - p_{d-1} and differ only in the degree-one seed.
    """
    if d < 0:
        raise ContractViolation("degree must be >= 0")
    if kind not in ("first", "second"):
        raise ContractViolation("kind must be 'first' or 'second'")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if d == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p_cur = x.copy() if kind == "first" else 2.0 * x
    for _ in range(d - 1):
        p_prev, p_cur = p_cur, 2.0 * x * p_cur - p_prev
    return p_cur if p_cur.ndim else float(p_cur)


def remez_fraction(n, t):
    """The decreasing function F(t) = (1 + (1-t)^(1/n)) / (1 - (1-t)^(1/n)).

    F(t) >= 1 on (0, 1]; it measures how far a measurable subset of relative
    measure t sits from filling a convex body in R^n.
    """
    if not 0.0 < t <= 1.0:
        raise ContractViolation("relative measure t must lie in (0, 1]")
    if t == 1.0:
        return 1.0
    s = (1.0 - t) ** (1.0 / n)
    return (1.0 + s) / (1.0 - s)


def remez_bound(n, d, t, complex_poly=False):
    """Remez growth factor for degree-d polynomials on a convex body.

    For a measurable subset E of a convex body K in R^n with |E|/|K| = t,
    sup_K |P| <= remez_bound(n, d, t) * sup_E |P|.  The real-polynomial
    factor is T_d(F(t)); for complex polynomials the factor weakens to
    2^(2d+1) F(t)^d.
    """
    if not 0.0 < t < 1.0 and not (t == 1.0 and not complex_poly):
        if not 0.0 < t <= 1.0:
            raise ContractViolation("ratio t must lie in (0, 1)")
    if d < 0:
        raise ContractViolation("degree must be >= 0")
    F = remez_fraction(n, t)
    if complex_poly:
        return 2.0 ** (2 * d + 1) * F**d
    return float(chebyshev_value("first", d, F))


def remez_ball_bound(n, d, rho):
    """L2 Remez factor on a ball: ||P||_{L2(B)} vs ||P||_{L2(w cap B)}.

    ``rho`` is the relative measure |w cap B| / |B| of the subset inside the
    ball.  The bound (2^(2d+1)/sqrt 3) sqrt(4/rho) F(rho/4)^d holds for all
    complex polynomials of degree d.
    """
    if not 0.0 < rho <= 1.0:
        raise ContractViolation("relative measure rho must lie in (0, 1]")
    if d < 0:
        raise ContractViolation("degree must be >= 0")
    return (
        2.0 ** (2 * d + 1)
        / math.sqrt(3.0)
        * math.sqrt(4.0 / rho)
        * remez_fraction(n, rho / 4.0) ** d
    )


def remez_ball_bound_log(n, d, rho):
    """log of remez_ball_bound, safe for large degrees."""
    if not 0.0 < rho <= 1.0:
        raise ContractViolation("relative measure rho must lie in (0, 1]")
    return (
        (2 * d + 1) * math.log(2.0)
        - 0.5 * math.log(3.0)
        + 0.5 * math.log(4.0 / rho)
        + d * math.log(remez_fraction(n, rho / 4.0))
    )


def kovrijkine_interval_bound(c_kov, measure, m_value):
    """Propagation factor for analytic functions on a unit interval.

    For an analytic function with |phi(0)| >= 1 on B(0,5) and
    M = sup_{|z|<=4} |phi| >= 1, the sup over the unit interval is bounded by
    (C/|E|)^(log M / log 2) times the sup over any subset E of measure |E|.
    The constant C > 1 is not computed here; it is a parameter (default 300
    elsewhere in the package).
    """
    if m_value < 1.0:
        raise ContractViolation("the interval lemma requires M >= 1")
    if not 0.0 < measure <= 1.0:
        raise ContractViolation("subset measure must lie in (0, 1]")
    if c_kov <= 1.0:
        raise ContractViolation("constant must exceed 1")
    return (c_kov / measure) ** (math.log(m_value) / math.log(2.0))


# -- Bernstein-type and weighted estimates ------------------------------------


@dataclass(frozen=True)
class CheckResult:
    lhs: float
    rhs: float
    passed: bool


@dataclass(frozen=True)
class WeightedResult:
    lhs_x: float
    lhs_xi: float
    rhs: float
    passed: bool          # False also when inconclusive
    certified: bool       # series tails certified below the tolerance
    tail_bound: float


def _apply_derivatives(f, beta):
    """d^beta f through the ladder algebra; cutoff grows by |beta|, exact."""
    g = f
    for j, b in enumerate(beta):
        for _ in range(b):
            g = apply_ladder(LadderMap(basis.DERIVATIVE, j, g.N), g)
    return g


def bernstein_check(f: HermiteExpansion, delta, beta):
    """Check the derivative growth estimate for one Hermite combination.

    lhs = ||d^beta f||_{L2}, computed exactly on coefficients;
    rhs = e^(e/(2 delta^2)) (2 delta)^{|beta|} |beta|! e^(sqrt(N)/delta) ||f||.
    """
    if not 0.0 < delta <= 1.0:
        raise ContractViolation("delta must lie in (0, 1]")
    if len(beta) != f.n:
        raise ContractViolation("beta has wrong length")
    if f.norm() == 0.0:
        raise ContractViolation("f must be nonzero")
    lhs = _apply_derivatives(f, beta).norm()
    tot = int(sum(beta))
    rhs = (
        math.exp(math.e / (2.0 * delta * delta))
        * (2.0 * delta) ** tot
        * math.factorial(tot)
        * math.exp(math.sqrt(f.N) / delta)
        * f.norm()
    )
    return CheckResult(lhs, rhs, lhs <= rhs)


def _gaussian_weighted_norm(g, f_norm, N_f, beta_tot, delta, n, rel_tol):
    """||exp(delta |x|^2) g|| by summing the power series of the weight.

    Terms t_m = delta^m |x|^(2m) g / m! are generated through the position
    ladder (each step enlarges the cutoff by two, exactly).  The neglected
    tail past order m is certified by the closed-form majorant
    pref * 2^(n-1) (32 n delta)^(m+1) / (1 - 32 n delta), which requires
    delta < 1/(32 n).
    """
    pref = (
        2.0 ** (0.5 * N_f)
        * 2.0 ** (1.5 * beta_tot)
        * math.sqrt(math.factorial(beta_tot))
        * f_norm
    )
    ratio = 32.0 * n * delta
    term = g
    total = g
    tail = math.inf
    for m in range(400):
        tail = pref * 2.0 ** (n - 1) * ratio ** (m + 1) / (1.0 - ratio)
        if tail <= rel_tol * max(total.norm(), 1e-300):
            return total.norm(), tail, True
        nxt = None
        for j in range(n):
            xj = apply_ladder(LadderMap(basis.POSITION, j, term.N), term)
            xjj = apply_ladder(LadderMap(basis.POSITION, j, xj.N), xj)
            nxt = xjj if nxt is None else nxt + xjj
        term = nxt.scaled(delta / (m + 1.0))
        total = total.padded(term.N) + term
    return total.norm(), tail, False


def weighted_check(f: HermiteExpansion, delta, beta, rel_tol=1e-8):
    """Check the Gaussian-weighted two-sided estimate for f in E_N.

    lhs_x  = ||exp(delta |x|^2) d^beta f||   (series through the ladder algebra)
    lhs_xi = ||exp(delta |D|^2) x^beta f||   (via the Fourier symmetry of the
             basis: Phi_alpha maps to (-i)^{|alpha|} Phi_alpha up to the
             Parseval factor, so the xi-side equals the x-side computation on
             the phase-twisted coefficients)
    rhs    = 2^n/(1 - 32 n delta) * 2^(N/2) * 2^(3|beta|/2) sqrt(|beta|!) ||f||

    An uncertifiable series truncation is reported as not passed with
    ``certified=False``; it is never silently treated as a pass.
    """
    n = f.n
    if not 0.0 < delta < 1.0 / (32.0 * n):
        raise ContractViolation("delta must lie in (0, 1/(32 n))")
    if len(beta) != n:
        raise ContractViolation("beta has wrong length")
    beta_tot = int(sum(beta))
    f_norm = f.norm()

    g_x = _apply_derivatives(f, beta)
    lhs_x, tail_x, ok_x = _gaussian_weighted_norm(
        g_x, f_norm, f.N, beta_tot, delta, n, rel_tol
    )

    levels = basis.index_levels(n, f.N)
    twisted = HermiteExpansion(n, f.N, f.coeffs * (-1j) ** levels)
    g_xi = _apply_derivatives(twisted, beta)
    lhs_xi, tail_xi, ok_xi = _gaussian_weighted_norm(
        g_xi, f_norm, f.N, beta_tot, delta, n, rel_tol
    )

    rhs = (
        2.0**n
        / (1.0 - 32.0 * n * delta)
        * 2.0 ** (0.5 * f.N)
        * 2.0 ** (1.5 * beta_tot)
        * math.sqrt(math.factorial(beta_tot))
        * f_norm
    )
    certified = ok_x and ok_xi
    passed = certified and (lhs_x + lhs_xi <= rhs)
    return WeightedResult(lhs_x, lhs_xi, rhs, passed, certified, max(tail_x, tail_xi))


# -- Hermite tails -------------------------------------------------------------


def hermite_tail_bound_log(k, a):
    """log of the closed-form tail majorant (2^(k+1)/(k! sqrt pi)) a^(2k-1) e^(-a^2)."""
    return (
        (k + 1) * math.log(2.0)
        - math.lgamma(k + 1.0)
        - 0.5 * math.log(math.pi)
        + (2 * k - 1) * math.log(a)
        - a * a
    )


def hermite_tail_bound(k, a):
    """Tail mass of phi_k^2 beyond |x| >= a and its closed-form majorant.

    Valid for a >= sqrt(2k+1), i.e. past the classically allowed region.
    The exact value is computed by adaptive Gauss-Legendre panels (absolute
    tolerance 1e-14); the bound decays like a^(2k-1) e^(-a^2).

    Returns (exact, bound).
    """
    if k < 0:
        raise ContractViolation("degree k must be >= 0")
    turning = math.sqrt(2.0 * k + 1.0)
    if a < turning:
        raise ContractViolation("tail bound requires a >= sqrt(2k+1)")
    b = turning + 10.0

    def integrand(x):
        return basis.hermite_values(k, x)[k] ** 2

    if b <= a:
        exact, err = 0.0, 0.0
    else:
        min_panels = max(1, int((b - a) * turning / 4.0) + 1)
        exact_half, err, _ = composite_gauss_legendre(
            integrand, a, b, abs_tol=5e-15, min_panels=min_panels
        )
        exact = 2.0 * exact_half
    bound = math.exp(hermite_tail_bound_log(k, a))
    return exact, bound


def tail_mass_rhs_log(n, N, a):
    """log of the E_N tail-mass majorant at radius a.

    For f in E_N in n variables and a >= sqrt(n) sqrt(2N+1), the mass of f
    outside the ball of radius a is at most
    (2^n n^(3/2) / sqrt(pi)) * e^(-a^2/(2n)) / a * 8^N * ||f||^2.
    """
    if a < math.sqrt(n) * math.sqrt(2.0 * N + 1.0):
        raise ContractViolation("radius below the validity threshold")
    return (
        n * math.log(2.0)
        + 1.5 * math.log(n)
        - 0.5 * math.log(math.pi)
        - a * a / (2.0 * n)
        - math.log(a)
        + N * math.log(8.0)
    )


@dataclass(frozen=True)
class TailConstants:
    """Certified radius constant c_n for the quarter-mass tail property.

    For every N and every f in E_N, the mass of f outside the ball of radius
    c_n sqrt(N+1) is at most ||f||^2 / 4.  The certificate lists the
    majorant value at a grid of cutoffs; monotonicity in N holds analytically
    once c_n^2 >= 2 n log 8, so the worst case is N = 0.
    """

    n: int
    c: float
    certificate: tuple = field(default_factory=tuple)

    @property
    def worst_case(self):
        return max(v for _, v in self.certificate)


def _quarter_mass_log(n, c, N):
    a = c * math.sqrt(N + 1.0)
    return tail_mass_rhs_log(n, N, a)


@lru_cache(maxsize=None)
def tail_constant_cn(n, certificate_depth=60):
    """Smallest certified c >= sqrt(2 n log 8) with the quarter-mass property.

    The majorant at a = c sqrt(N+1) is decreasing in N whenever
    c^2 >= 2 n log 8 (the Gaussian factor then beats the 8^N growth), so it
    suffices to pin the N = 0 value below 1/4; a bisection finds the smallest
    such c when the floor value does not already qualify.
    """
    if n < 1:
        raise ContractViolation("dimension n must be >= 1")
    floor = math.sqrt(2.0 * n * math.log(8.0))
    log_quarter = math.log(0.25)
    if _quarter_mass_log(n, floor, 0) <= log_quarter:
        c = floor
    else:
        lo, hi = floor, floor
        while _quarter_mass_log(n, hi, 0) > log_quarter:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _quarter_mass_log(n, mid, 0) > log_quarter:
                lo = mid
            else:
                hi = mid
        c = hi
    cert = tuple(
        (N, math.exp(_quarter_mass_log(n, c, N))) for N in range(certificate_depth + 1)
    )
    if any(v > 0.25 + 1e-15 for _, v in cert):
        raise AssertionError("tail certificate failed; this is a bug")
    return TailConstants(n, c, cert)
