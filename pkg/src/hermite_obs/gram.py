"""Restriction Gram operators on E_N, sharp spectral constants, explicit
theoretical bounds and scaling studies.

For a region w and the space E_N of Hermite combinations, the Gram matrix
``G[a, b] = int_w Phi_a Phi_b`` represents the quadratic form
``||f||_{L2(w)}^2 = c^H G c`` while ``||f||_{L2(R^n)}^2 = ||c||^2``.  The
sharp constant in ``||f|| <= C_N(w) ||f||_{L2(w)}`` on E_N is therefore
``C_N = lambda_min(G)^(-1/2)``.  Since lambda_min decays exponentially for
sparse regions, the eigenproblem escalates to software floating point with a
configurable mantissa, and the Gram entries are then rebuilt in the same
precision from closed forms (Wronskian identity plus the erf-seeded diagonal
recurrence), because double-precision entries would drown such eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
from mpmath import mp

from . import basis, regions
from .basis import ContractViolation
from .estimates import remez_fraction, tail_constant_cn
from .regions import Region

DEFAULT_C_SOBOLEV = 10.0
DEFAULT_C_KOV = 300.0


def sphere_area(n):
    """Surface measure of the unit sphere in R^n (equals 2 when n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _pair_tail_log(j, k, a):
    """log majorant of |int_{|x|>=a} phi_j phi_k| (one dimension)."""
    return (
        0.5 * (j + k) * math.log(2.0)
        + math.log(2.0)
        - 0.5 * math.log(math.pi)
        - 0.5 * (math.lgamma(j + 1.0) + math.lgamma(k + 1.0))
        + (j + k - 1) * math.log(a)
        - a * a
    )


def truncation_entry_error(n, N, radius):
    """Bound on the neglected |x| > radius part of any Gram entry."""
    a = radius / math.sqrt(n)
    if a < math.sqrt(2.0 * N + 1.0):
        return math.inf
    return n * math.exp(min(_pair_tail_log(N, N, a), 700.0))


@dataclass
class GramOperator:
    """Hermitian PSD matrix of the restriction form on E_N."""

    n: int
    N: int
    matrix: np.ndarray
    entry_error: float
    region: Region
    precision_bits: int = 53

    @property
    def size(self):
        return self.matrix.shape[0]


def _require_radius(region, n, N):
    required = regions.truncate_radius(N, n, safety=1.5)
    if region.trunc_radius + 1e-9 < required:
        raise ContractViolation(
            "region truncated at %.6g but cutoff N=%d needs radius >= %.6g"
            % (region.trunc_radius, N, required)
        )


def gram_matrix(region: Region, n, N) -> GramOperator:
    """Assemble G[a, b] = int_region Phi_a Phi_b by tensorized 1-D integrals.

    Requires the region to be truncated at least at safety 1.5 times the
    quarter-mass radius for E_N; the neglected tail is added to the entry
    error budget together with the quadrature errors.
    """
    if region.n != n:
        raise ContractViolation("region dimension mismatch")
    _require_radius(region, n, N)
    idx = basis.multi_indices(n, N)
    dim = len(idx)
    axes_per_idx = [np.array([alpha[j] for alpha in idx]) for j in range(n)]
    G = np.zeros((dim, dim))
    E = np.zeros((dim, dim))
    for lo, hi in zip(region.lows, region.highs):
        vals_prod = np.ones((dim, dim))
        upper_prod = np.ones((dim, dim))
        for j in range(n):
            vals, errs = regions.interval_pair_tables(lo[j], hi[j], N)
            sub = vals[np.ix_(axes_per_idx[j], axes_per_idx[j])]
            sub_err = errs[np.ix_(axes_per_idx[j], axes_per_idx[j])]
            vals_prod = vals_prod * sub
            upper_prod = upper_prod * (np.abs(sub) + sub_err)
        G += vals_prod
        E += upper_prod - np.abs(vals_prod)
    G = 0.5 * (G + G.T)
    entry_error = float(np.max(E)) + truncation_entry_error(n, N, region.trunc_radius)
    return GramOperator(n, N, G, entry_error, region)


def gram_matrix_mp(region: Region, n, N):
    """Gram matrix at the current mpmath precision (closed-form entries)."""
    _require_radius(region, n, N)
    idx = basis.multi_indices(n, N)
    dim = len(idx)
    G = mp.zeros(dim, dim)
    for lo, hi in zip(region.lows, region.highs):
        tables = [regions.interval_pair_table_mp(lo[j], hi[j], N, mp) for j in range(n)]
        for irow, alpha in enumerate(idx):
            for icol in range(irow + 1):
                beta = idx[icol]
                term = mp.mpf(1)
                for j in range(n):
                    term *= tables[j][alpha[j]][beta[j]]
                G[irow, icol] += term
    for irow in range(dim):
        for icol in range(irow):
            G[icol, irow] = G[irow, icol]
    return G


@dataclass(frozen=True)
class SpectralResult:
    """Measured spectral constant C_N = lambda_min(G)^(-1/2)."""

    c_value: float
    c_log: float
    lam_min: float
    lam_min_log: float
    lam_max: float
    precision_bits: int
    flag: str  # 'ok' or 'singular_floor' (value is then a lower bound on C_N)


def spectral_constant(G: GramOperator, start_bits=256, max_bits=4096) -> SpectralResult:
    """Sharp constant of the spectral inequality on E_N for G's region.

    Tries the double-precision eigensolve first and escalates to software
    floating point (rebuilding the Gram entries in the same precision) once
    lambda_min sinks under 1e3 * eps * lambda_max or under the accumulated
    entry error; bits double until the eigenvalue clears the noise floor.
    If even the largest mantissa cannot separate lambda_min from the entry
    noise, the result is flagged and is a certified lower bound on C_N.
    """
    lam = scipy.linalg.eigvalsh(G.matrix)
    lam_min, lam_max = float(lam[0]), float(lam[-1])
    eps = np.finfo(float).eps
    floor = max(1e3 * eps * max(lam_max, 0.0), G.size * G.entry_error)
    if lam_min > floor:
        return SpectralResult(
            lam_min ** -0.5, -0.5 * math.log(lam_min), lam_min, math.log(lam_min),
            lam_max, 53, "ok",
        )

    bits = start_bits
    tail = truncation_entry_error(G.n, G.N, G.region.trunc_radius)
    while True:
        old_prec = mp.prec
        try:
            mp.prec = bits + 16
            Gm = gram_matrix_mp(G.region, G.n, G.N)
            ev = mp.eigsy(Gm, eigvals_only=True)
            lam_min_mp = ev[0]
            lam_max_mp = ev[ev.rows - 1]
            noise = 1e3 * mp.mpf(2) ** (-bits) * lam_max_mp + G.size * tail
            if lam_min_mp > noise:
                return SpectralResult(
                    float(lam_min_mp ** mp.mpf("-0.5")),
                    float(-mp.log(lam_min_mp) / 2),
                    float(lam_min_mp),
                    float(mp.log(lam_min_mp)),
                    float(lam_max_mp),
                    bits,
                    "ok",
                )
            if bits >= max_bits:
                lower = float(noise)
                return SpectralResult(
                    lower ** -0.5, -0.5 * math.log(lower), lower, math.log(lower),
                    float(lam_max_mp), bits, "singular_floor",
                )
            bits *= 2
        finally:
            mp.prec = old_prec


# -- explicit bounds -----------------------------------------------------------


@dataclass(frozen=True)
class BoundParams:
    """Hypothesis class and auxiliary constants for the explicit bounds.

    variant 'open'    : region contains the ball B(x0, r)
    variant 'density' : |w cap B(0,R)|/|B(0,R)| >= delta for R >= R0
    variant 'thick'   : w is gamma-thick at scale L

    The Sobolev embedding constant and the analytic-interval-lemma constant
    are never pinned down by the theory; they are parameters with documented
    defaults, recorded in every output artifact.
    """

    n: int
    variant: str
    x0: tuple = ()
    r: float = 0.0
    delta: float = 0.0
    R0: float = 0.0
    L: float = 0.0
    gamma: float = 0.0
    c_n: Optional[float] = None
    C_sobolev: float = DEFAULT_C_SOBOLEV
    C_kov: float = DEFAULT_C_KOV

    def tail_c(self):
        return self.c_n if self.c_n is not None else tail_constant_cn(self.n).c


def open_params(n, x0, r, **kw):
    if r <= 0:
        raise ContractViolation("ball radius must be positive")
    return BoundParams(n, "open", x0=tuple(x0), r=float(r), **kw)


def density_params(n, delta, R0=0.0, **kw):
    if not 0.0 < delta <= 1.0:
        raise ContractViolation("density fraction must lie in (0, 1]")
    return BoundParams(n, "density", delta=float(delta), R0=float(R0), **kw)


def thick_params(n, L, gamma, **kw):
    if not 0.0 < gamma <= 1.0 or L <= 0:
        raise ContractViolation("need 0 < gamma <= 1 and L > 0")
    return BoundParams(n, "thick", L=float(L), gamma=float(gamma), **kw)


def _sum_weighted_factorials(n, ratio):
    """sum over multi-indices |b| <= n of ratio^{|b|} (|b|!)^2."""
    total = 0.0
    for k in range(n + 1):
        count = math.comb(k + n - 1, n - 1)
        total += count * ratio**k * math.factorial(k) ** 2
    return total


def delta_weight_scale(n):
    """The fixed derivative-weight scale 2 sqrt(2^11 n^3 (2^n + 1))."""
    return 2.0 * math.sqrt(2.0**11 * n**3 * (2.0**n + 1.0))


def sobolev_chain_constant_log(n, delta, C_sobolev):
    """log of the good-cube sup-norm chain constant at weight delta."""
    ratio = 32.0 * delta * delta * (2.0**n + 1.0)
    return (
        math.log(C_sobolev)
        + math.e / (2.0 * delta * delta)
        + 0.5 * math.log(_sum_weighted_factorials(n, ratio))
    )


def theoretical_bound_log(p: BoundParams, N):
    """log of the explicit spectral-constant bound; None when N is outside
    the validity range of the variant's derivation."""
    n = p.n
    c_n = p.tail_c()
    root = c_n * math.sqrt(N + 1.0)
    if p.variant == "open":
        x0_norm = math.sqrt(sum(v * v for v in p.x0))
        if root <= 2.0 * x0_norm + p.r:
            return None
        t = (
            (n - 1) * math.log(root + x0_norm)
            + (12 * N + n + 4) * math.log(2.0)
            - math.log(3.0)
            - (2 * N + n) * math.log(p.r)
            + (2 * N + 1) * math.log(root + x0_norm - p.r / 2.0)
        )
        return (
            math.log(2.0 / math.sqrt(3.0))
            + 0.5 * (x0_norm + p.r) ** 2
            + 0.5 * float(np.logaddexp(0.0, t))
        )
    if p.variant == "density":
        if root < p.R0:
            return None
        return (
            0.5 * ((4 * N + 6) * math.log(2.0) - math.log(9.0 * p.delta))
            + N * math.log(remez_fraction(n, p.delta / 4.0))
            + 0.5 * c_n * c_n * (N + 1.0)
        )
    if p.variant == "thick":
        dn = delta_weight_scale(n)
        theta = math.log(2.0 * p.C_kov * n ** (n / 2.0) * sphere_area(n) / p.gamma) / math.log(2.0)
        inner = (
            0.5 * n * math.log(4.0 * p.L)
            + sobolev_chain_constant_log(n, 1.0 / (dn * p.L), p.C_sobolev)
            + dn * p.L * math.sqrt(N)
        )
        return 1.5 * math.log(2.0) - 0.5 * math.log(p.gamma) + theta * inner
    raise ContractViolation("unknown bound variant %r" % p.variant)


def theoretical_bound(p: BoundParams, N):
    """The explicit bound as a float (inf past the double range); None when
    the variant's validity condition excludes this N."""
    lg = theoretical_bound_log(p, N)
    if lg is None:
        return None
    return math.exp(lg) if lg < 709.0 else math.inf


# -- scaling studies -----------------------------------------------------------


def _least_squares(g, y):
    A = np.column_stack([g, np.ones_like(g)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ssr = float(resid @ resid)
    tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ssr / tot if tot > 0 else 1.0
    return float(coef[0]), float(coef[1]), ssr, r2


SCALING_MODELS = ("sqrtN", "N", "NlnN")


def _model_values(name, Ns):
    Ns = np.asarray(Ns, dtype=float)
    if name == "sqrtN":
        return np.sqrt(Ns)
    if name == "N":
        return Ns
    if name == "NlnN":
        return Ns * np.log(Ns)
    raise ContractViolation("unknown model %r" % name)


@dataclass
class ScalingReport:
    """Measured constants over a range of cutoffs plus growth-model fits."""

    region_desc: dict
    n: int
    rows: list = field(default_factory=list)  # dicts per N
    fits: dict = field(default_factory=dict)
    best_model: str = ""
    exponent_p: float = math.nan
    bound_variant: str = ""
    dominance_ok: bool = True
    aux_constants: dict = field(default_factory=dict)

    def csv_rows(self):
        header = ["N", "dim", "C_measured", "lambda_min", "bound", "bound_variant",
                  "precision_bits"]
        table = [
            [
                row["N"],
                self.n,
                row["C_measured"],
                row["lambda_min"],
                row["bound"],
                self.bound_variant,
                row["precision_bits"],
            ]
            for row in self.rows
        ]
        return header, table


def scaling_study(region: Region, n, N_list, bound: Optional[BoundParams] = None,
                  start_bits=256) -> ScalingReport:
    """Measure C_N over increasing cutoffs, fit growth models, check bounds.

    Fits log C_N against sqrt(N), N and N log N; also fits the free exponent
    p in log C_N ~ N^p (over the cutoffs where log C_N is usefully positive).
    When a bound-parameter object is supplied, every measured constant is
    compared in log domain against the explicit bound and violations are
    recorded (never silently dropped); cutoffs whose Gram is numerically
    singular even at maximal precision are reported with flags.
    """
    N_list = list(N_list)
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ContractViolation("N_list must be strictly increasing")
    report = ScalingReport(region.to_json_dict()["generator"], n)
    if bound is not None:
        report.bound_variant = bound.variant
        report.aux_constants = {
            "c_n": bound.tail_c(),
            "C_sobolev": bound.C_sobolev,
            "C_kov": bound.C_kov,
        }
    bits = start_bits
    for N in N_list:
        G = gram_matrix(region, n, N)
        res = spectral_constant(G, start_bits=bits)
        bits = max(bits, res.precision_bits)  # lambda_min shrinks with N
        row = {
            "N": N,
            "C_measured": res.c_value,
            "C_log": res.c_log,
            "lambda_min": res.lam_min,
            "lambda_min_log": res.lam_min_log,
            "precision_bits": res.precision_bits,
            "flag": res.flag,
            "bound": math.nan,
            "bound_log": math.nan,
        }
        if bound is not None:
            blog = theoretical_bound_log(bound, N)
            if blog is not None:
                row["bound_log"] = blog
                row["bound"] = math.exp(blog) if blog < 709.0 else math.inf
                if res.flag == "ok" and res.c_log > blog:
                    report.dominance_ok = False
        report.rows.append(row)

    Ns = np.array([r["N"] for r in report.rows if r["flag"] == "ok"], dtype=float)
    logs = np.array([r["C_log"] for r in report.rows if r["flag"] == "ok"])
    if len(Ns) >= 3:
        for name in SCALING_MODELS:
            slope, intercept, ssr, r2 = _least_squares(_model_values(name, Ns), logs)
            report.fits[name] = {
                "slope": slope, "intercept": intercept, "ssr": ssr, "r2": r2,
            }
        report.best_model = min(report.fits, key=lambda k: report.fits[k]["ssr"])
        mask = logs > 0.1
        if mask.sum() >= 3:
            p_slope, _, _, _ = _least_squares(np.log(Ns[mask]), np.log(logs[mask]))
            report.exponent_p = p_slope
    return report
