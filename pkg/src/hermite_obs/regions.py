"""Measurable control regions as finite axis-aligned box unions.

A region is always normalized to a finite union of pairwise-disjoint boxes
inside a truncation ball; geometric diagnostics (thickness, density ratios)
are exact box arithmetic, and integrals of Hermite-function pairs over a
region reduce per axis to one-dimensional integrals over intervals:

* ``j != k``: exact through the Wronskian identity
  ``int_a^b phi_j phi_k = [phi_j phi_k' - phi_j' phi_k]_a^b / (2 (j - k))``,
  a consequence of both factors solving the oscillator equation.
* ``j == k``: adaptive composite Gauss-Legendre panels, or (in the
  arbitrary-precision path) a forward recurrence seeded by the error
  function, in which the diagonal at degree k+1 is expressed with the
  diagonal at k plus boundary terms and Wronskian-exact off-diagonals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import basis
from .basis import ContractViolation
from .estimates import tail_constant_cn
from .quadrature import composite_gauss_legendre

WRONSKIAN_EXACT = "wronskian_exact"


@dataclass(frozen=True)
class QuadratureAccount:
    """A numeric value together with an honest absolute error bound."""

    value: float
    abs_error_bound: float
    method: str

    def __post_init__(self):
        if self.abs_error_bound < 0:
            raise ContractViolation("error bound must be nonnegative")


def truncate_radius(N, n, safety=1.5):
    """Radius past which any f in E_N keeps at most a quarter of its mass.

    Returns ``safety * c_n * sqrt(N+1)`` with the certified dimensional
    constant c_n; safety > 1 shrinks the neglected mass far below the
    quarter-mass guarantee (the majorant exponent scales with safety^2).
    """
    if N < 0 or n < 1:
        raise ContractViolation("need N >= 0 and n >= 1")
    if safety < 1.0:
        raise ContractViolation("safety factor must be >= 1")
    return safety * tail_constant_cn(n).c * math.sqrt(N + 1.0)


def _merge_intervals(lows, highs, tol=1e-12):
    order = np.argsort(lows)
    lo, hi = [], []
    for i in order:
        if lo and lows[i] <= hi[-1] + tol:
            hi[-1] = max(hi[-1], highs[i])
        else:
            lo.append(lows[i])
            hi.append(highs[i])
    return np.array(lo), np.array(hi)


class Region:
    """Finite union of disjoint axis-aligned boxes in R^n.

    Attributes
    ----------
    n : spatial dimension
    lows, highs : arrays of shape (K, n), box corners
    generator : dict describing how the region was produced
    trunc_radius : radius of the ball inside which the region is faithful
    """

    def __init__(self, n, lows, highs, generator=None, trunc_radius=None):
        lows = np.atleast_2d(np.asarray(lows, dtype=float))
        highs = np.atleast_2d(np.asarray(highs, dtype=float))
        if lows.shape != highs.shape or (lows.size and lows.shape[1] != n):
            raise ContractViolation("box arrays must have shape (K, n)")
        if np.any(highs < lows):
            raise ContractViolation("box with negative side length")
        if not np.all(np.isfinite(lows)) or not np.all(np.isfinite(highs)):
            raise ContractViolation("box bounds must be finite")
        if n == 1 and lows.size:
            lo, hi = _merge_intervals(lows[:, 0], highs[:, 0])
            lows, highs = lo.reshape(-1, 1), hi.reshape(-1, 1)
        self.n = n
        self.lows = lows
        self.highs = highs
        self.generator = dict(generator or {"kind": "explicit"})
        if trunc_radius is None:
            trunc_radius = float(np.max(np.abs(np.concatenate([lows, highs])))) if lows.size else 0.0
        self.trunc_radius = float(trunc_radius)
        self._check_disjoint()
        self.lows.flags.writeable = False
        self.highs.flags.writeable = False

    def _check_disjoint(self):
        K = self.lows.shape[0]
        if K < 2:
            return
        vols = np.prod(self.highs - self.lows, axis=1)
        floor = 1e-12 * max(np.min(vols[vols > 0], initial=1.0), 1e-300)
        for i in range(K):
            for j in range(i + 1, K):
                lo = np.maximum(self.lows[i], self.lows[j])
                hi = np.minimum(self.highs[i], self.highs[j])
                if np.all(hi > lo) and np.prod(hi - lo) > floor:
                    raise ContractViolation("boxes overlap beyond tolerance")

    # -- measures -----------------------------------------------------------

    @property
    def box_count(self):
        return self.lows.shape[0]

    def measure(self):
        if not self.lows.size:
            return 0.0
        return float(np.sum(np.prod(self.highs - self.lows, axis=1)))

    def measure_in_cube(self, corner, side):
        """Exact |region cap (corner + [0, side]^n)| by box clipping."""
        corner = np.asarray(corner, dtype=float)
        if not self.lows.size:
            return 0.0
        lo = np.maximum(self.lows, corner)
        hi = np.minimum(self.highs, corner + side)
        edges = np.clip(hi - lo, 0.0, None)
        return float(np.sum(np.prod(edges, axis=1)))

    def intersect_interval(self, a, b):
        """1-D only: total length of region cap [a, b]."""
        if self.n != 1:
            raise ContractViolation("intersect_interval is one-dimensional")
        lo = np.maximum(self.lows[:, 0], a)
        hi = np.minimum(self.highs[:, 0], b)
        return float(np.sum(np.clip(hi - lo, 0.0, None)))

    def to_json_dict(self):
        return {
            "n": self.n,
            "generator": self.generator,
            "trunc_radius": self.trunc_radius,
            "boxes": [
                [list(map(float, lo)), list(map(float, hi))]
                for lo, hi in zip(self.lows, self.highs)
            ],
        }

    @staticmethod
    def from_json_dict(doc):
        lows = [b[0] for b in doc["boxes"]]
        highs = [b[1] for b in doc["boxes"]]
        return Region(doc["n"], lows, highs, doc.get("generator"),
                      doc.get("trunc_radius"))


# -- generators ---------------------------------------------------------------


def make_periodic_thick(n, L, gamma, r_trunc):
    """Periodic thick pattern: one corner sub-box of side gamma^(1/n) L per cell.

    Every lattice cell ``alpha + [0, L]^n`` meeting the ball B(0, r_trunc)
    contributes the sub-box anchored at its corner, so the region is exactly
    gamma-thick at scale L inside the truncation radius.
    """
    if not 0.0 < gamma <= 1.0:
        raise ContractViolation("thickness fraction gamma must lie in (0, 1]")
    if L <= 0.0 or r_trunc <= 0.0:
        raise ContractViolation("scale L and truncation radius must be positive")
    side = gamma ** (1.0 / n) * L
    jmax = int(math.floor(r_trunc / L)) + 1
    axes = range(-jmax - 1, jmax + 1)
    lows, highs = [], []

    def cells(prefix, depth):
        if depth == n:
            yield tuple(prefix)
            return
        for j in axes:
            yield from cells(prefix + (j,), depth + 1)

    for cell in cells((), 0):
        corner = np.array(cell, dtype=float) * L
        nearest = np.where(corner > 0, corner, np.minimum(corner + L, 0.0))
        if np.linalg.norm(nearest) >= r_trunc:
            continue
        lows.append(corner)
        highs.append(corner + side)
    return Region(
        n,
        np.array(lows),
        np.array(highs),
        {"kind": "periodic_thick", "L": L, "gamma": gamma},
        trunc_radius=r_trunc,
    )


def half_space(n, axis, c, r_trunc):
    """{x_axis > c} clipped to the truncation box [-R, R]^n."""
    if r_trunc <= 0 or c >= r_trunc:
        raise ContractViolation("truncation radius too small for the half-space")
    lo = np.full(n, -r_trunc)
    hi = np.full(n, r_trunc)
    lo[axis] = c
    return Region(n, lo[None, :], hi[None, :],
                  {"kind": "half_space", "axis": axis, "c": c},
                  trunc_radius=r_trunc)


def half_line(r_trunc):
    return half_space(1, 0, 0.0, r_trunc)


def full_space(n, r_trunc):
    """R^n truncated to the box [-R, R]^n."""
    lo = np.full((1, n), -float(r_trunc))
    hi = np.full((1, n), float(r_trunc))
    return Region(n, lo, hi, {"kind": "full"}, trunc_radius=r_trunc)


def interval_region(a, b, trunc_radius=None):
    """A single interval [a, b] in one dimension (e.g. a 1-D ball)."""
    return Region(1, [[a]], [[b]], {"kind": "explicit"},
                  trunc_radius=trunc_radius or max(abs(a), abs(b)))


def box_region(lo, hi, trunc_radius=None):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return Region(len(lo), lo[None, :], hi[None, :], {"kind": "explicit"},
                  trunc_radius=trunc_radius)


def ball_complement(r0, r_trunc):
    """1-D complement of (-r0, r0), truncated: two symmetric intervals."""
    if r0 <= 0 or r_trunc <= r0:
        raise ContractViolation("need 0 < r0 < truncation radius")
    return Region(
        1,
        [[-r_trunc], [r0]],
        [[-r0], [r_trunc]],
        {"kind": "ball_complement", "r0": r0},
        trunc_radius=r_trunc,
    )


def union(a: Region, b: Region):
    """Union of two regions with disjoint boxes (validated on construction)."""
    if a.n != b.n:
        raise ContractViolation("dimension mismatch")
    return Region(
        a.n,
        np.vstack([a.lows, b.lows]),
        np.vstack([a.highs, b.highs]),
        {"kind": "union"},
        trunc_radius=max(a.trunc_radius, b.trunc_radius),
    )


# -- geometric diagnostics -----------------------------------------------------


def thickness_check(region: Region, L, m=4):
    """Certified lower estimate of the thickness fraction at scale L.

    Minimizes |region cap (x + [0,L]^n)| / L^n over corners x on a lattice of
    pitch L/m, restricted to cubes lying inside the truncation ball (outside
    it the region is artificially empty).  Box clipping makes each cube
    measure exact.
    """
    if L <= 0 or m < 1:
        raise ContractViolation("need L > 0 and m >= 1")
    R = region.trunc_radius
    if math.sqrt(region.n) * L >= 2 * R:
        raise ContractViolation("truncation ball too small for scale L")
    pitch = L / m
    half_span = R / math.sqrt(region.n)  # cube inside the ball
    lo_corner = -half_span
    hi_corner = half_span - L
    count = int(math.floor((hi_corner - lo_corner) / pitch)) + 1
    if count < 1:
        raise ContractViolation("no admissible cube positions")
    best = math.inf
    grid = [lo_corner + pitch * i for i in range(count)]

    def corners(prefix, depth):
        if depth == region.n:
            yield tuple(prefix)
            return
        for g in grid:
            yield from corners(prefix + (g,), depth + 1)

    for corner in corners((), 0):
        frac = region.measure_in_cube(np.array(corner), L) / L**region.n
        if frac < best:
            best = frac
    return best


def _clip_length(lo, hi, s):
    """Vectorized |[lo, hi] cap [-s, s]|."""
    return np.clip(np.minimum(hi, s) - np.maximum(lo, -s), 0.0, None)


def _box_ball_overlap(lo, hi, R, tol):
    """|box cap B(0,R)| by slicing along the first axis.

    The slice at x has overlap equal to a (d-1)-dimensional box/ball overlap
    at radius sqrt(R^2 - x^2); in two dimensions that inner overlap is a
    closed-form clipped interval length, so the outer integral is a single
    adaptive panel quadrature with an honest doubling estimate.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    a = max(lo[0], -R)
    b = min(hi[0], R)
    if b <= a or R <= 0:
        return 0.0, 0.0
    if len(lo) == 1:
        return b - a, 0.0
    if len(lo) == 2:
        def f(x):
            s = np.sqrt(np.clip(R * R - x * x, 0.0, None))
            return _clip_length(lo[1], hi[1], s)
    else:
        def f(x):
            out = np.empty_like(x)
            for i, xi in enumerate(np.atleast_1d(x)):
                r2 = R * R - xi * xi
                if r2 <= 0.0:
                    out[i] = 0.0
                else:
                    out[i] = _box_ball_overlap(lo[1:], hi[1:], math.sqrt(r2), tol / 10)[0]
            return out
    v, e, _ = composite_gauss_legendre(f, a, b, abs_tol=tol, min_panels=32)
    return v, e


def density_ratio(region: Region, R, tol=1e-7):
    """|region cap B(0,R)| / |B(0,R)|.

    Exact interval arithmetic in one dimension; in higher dimension each box
    is sliced against the ball with adaptive quadrature whose doubling
    estimate certifies the error below ``tol`` of the ball volume.
    """
    if R <= 0:
        raise ContractViolation("radius must be positive")
    if R > region.trunc_radius + 1e-12:
        raise ContractViolation("radius exceeds the truncation radius")
    if region.n == 1:
        return region.intersect_interval(-R, R) / (2.0 * R)
    ball_vol = math.pi ** (region.n / 2.0) / math.gamma(region.n / 2.0 + 1.0) * R**region.n
    total, err = 0.0, 0.0
    budget = tol * ball_vol / max(region.box_count, 1)
    for lo, hi in zip(region.lows, region.highs):
        v, e = _box_ball_overlap(lo, hi, R, budget)
        total += v
        err += e
    if err > tol * ball_vol * max(region.box_count, 1) * 1.001:
        raise ContractViolation("slicing failed to certify the requested tolerance")
    return total / ball_vol


# -- Hermite pair integration ---------------------------------------------------


def _wronskian_offdiag(j, k, va, vb, da, db):
    """int_a^b phi_j phi_k from boundary data, for j != k."""
    upper = vb[j] * db[k] - db[j] * vb[k]
    lower = va[j] * da[k] - da[j] * va[k]
    return (upper - lower) / (2.0 * (j - k))


def interval_pair_tables(a, b, N):
    """All integrals int_a^b phi_j phi_k for j, k <= N, with error bounds.

    Off-diagonal entries use the Wronskian identity (exact up to rounding of
    the boundary evaluations); diagonal entries use shared-grid composite
    Gauss-Legendre panels, doubled until every diagonal stabilizes.
    Returns (values, error_bounds) as (N+1, N+1) arrays.
    """
    eps = np.finfo(float).eps
    va = basis.hermite_values(N + 2, np.array(a))
    vb = basis.hermite_values(N + 2, np.array(b))
    da = basis.hermite_derivatives(N + 1, np.array(a), values=va)
    db = basis.hermite_derivatives(N + 1, np.array(b), values=vb)

    vals = np.zeros((N + 1, N + 1))
    errs = np.zeros((N + 1, N + 1))
    for j in range(N + 1):
        for k in range(j):
            v = _wronskian_offdiag(j, k, va, vb, da, db)
            scale = (
                abs(vb[j] * db[k]) + abs(db[j] * vb[k])
                + abs(va[j] * da[k]) + abs(da[j] * va[k])
            )
            e = 8.0 * eps * (scale / (2.0 * abs(j - k)) + abs(v))
            vals[j, k] = vals[k, j] = v
            errs[j, k] = errs[k, j] = e

    # diagonals on a shared panel grid
    panels = max(1, int((b - a) * math.sqrt(2.0 * N + 1.0) / 4.0) + 1)
    x, w = np.polynomial.legendre.leggauss(20)
    prev = None
    diag = np.ones(N + 1)
    diag_err = np.full(N + 1, math.inf)
    for _ in range(14):
        edges = np.linspace(a, b, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        tab = basis.hermite_values(N, pts)
        weights = (half[:, None] * w[None, :]).ravel()
        diag = (tab * tab) @ weights
        if prev is not None:
            diag_err = np.abs(diag - prev)
            if np.all(diag_err <= 1e-13):
                break
        prev = diag
        panels *= 2
    for k in range(N + 1):
        vals[k, k] = diag[k]
        errs[k, k] = max(diag_err[k], 1e-300)
    return vals, errs


def integrate_pair(region: Region, j, k):
    """int over a 1-D region of phi_j phi_k, with an honest error account.

    The result is the sum over the region's intervals; the method tag records
    whether the value came out of the exact Wronskian identity (j != k) or
    from adaptive Gauss-Legendre panels (j == k).
    """
    if region.n != 1:
        raise ContractViolation("integrate_pair is a one-dimensional building block")
    if j < 0 or k < 0:
        raise ContractViolation("degrees must be >= 0")
    eps = np.finfo(float).eps
    total, err = 0.0, 0.0
    if j != k:
        for lo, hi in zip(region.lows[:, 0], region.highs[:, 0]):
            va = basis.hermite_values(max(j, k) + 1, np.array(lo))
            vb = basis.hermite_values(max(j, k) + 1, np.array(hi))
            da = basis.hermite_derivatives(max(j, k), np.array(lo), values=va)
            db = basis.hermite_derivatives(max(j, k), np.array(hi), values=vb)
            v = _wronskian_offdiag(j, k, va, vb, da, db)
            scale = (
                abs(vb[j] * db[k]) + abs(db[j] * vb[k])
                + abs(va[j] * da[k]) + abs(da[j] * va[k])
            )
            total += v
            err += 8.0 * eps * (scale / (2.0 * abs(j - k)) + abs(v))
        return QuadratureAccount(float(total), float(err), WRONSKIAN_EXACT)

    order = 20
    panel_count = 0
    for lo, hi in zip(region.lows[:, 0], region.highs[:, 0]):
        def integrand(x):
            return basis.hermite_values(j, x)[j] ** 2

        min_panels = max(1, int((hi - lo) * math.sqrt(2.0 * j + 1.0) / 4.0) + 1)
        v, e, p = composite_gauss_legendre(
            integrand, lo, hi, abs_tol=1e-13, order=order, min_panels=min_panels
        )
        total += v
        err += e
        panel_count += p
    return QuadratureAccount(
        float(total), float(err), "panel_gl(order=%d, panels=%d)" % (order, panel_count)
    )


def interval_pair_table_mp(a, b, N, mp):
    """Arbitrary-precision table of int_a^b phi_j phi_k, j, k <= N.

    All entries are closed-form in the working precision: off-diagonals by
    the Wronskian identity and diagonals by the forward recurrence

        I_{k+1} = I_k - sqrt(2/(k+1)) [phi_k phi_{k+1}]_a^b
                  + sqrt(k/(k+1)) J_{k-1,k+1} - sqrt((k+2)/(k+1)) J_{k,k+2},

    seeded with I_0 = (erf(b) - erf(a)) / 2.
    """

    def phi_values(x, top):
        x = mp.mpf(x)
        vals = [mp.pi ** mp.mpf("-0.25") * mp.e ** (-x * x / 2)]
        if top >= 1:
            vals.append(x * mp.sqrt(2) * vals[0])
        for k in range(1, top):
            vals.append(
                x * mp.sqrt(mp.mpf(2) / (k + 1)) * vals[k]
                - mp.sqrt(mp.mpf(k) / (k + 1)) * vals[k - 1]
            )
        return vals

    top = N + 3
    va = phi_values(a, top)
    vb = phi_values(b, top)

    def derivs(vals):
        out = []
        for k in range(N + 2):
            low = mp.sqrt(k) * vals[k - 1] if k > 0 else mp.mpf(0)
            out.append((low - mp.sqrt(k + 1) * vals[k + 1]) / mp.sqrt(2))
        return out

    da = derivs(va)
    db = derivs(vb)

    def offdiag(j, k):
        upper = vb[j] * db[k] - db[j] * vb[k]
        lower = va[j] * da[k] - da[j] * va[k]
        return (upper - lower) / (2 * (j - k))

    table = [[mp.mpf(0)] * (N + 1) for _ in range(N + 1)]
    for j in range(N + 1):
        for k in range(j):
            v = offdiag(j, k)
            table[j][k] = v
            table[k][j] = v

    I = (mp.erf(b) - mp.erf(a)) / 2
    table[0][0] = I
    for k in range(N):
        boundary = vb[k] * vb[k + 1] - va[k] * va[k + 1]
        I = I - mp.sqrt(mp.mpf(2) / (k + 1)) * boundary
        if k >= 1:
            I += mp.sqrt(mp.mpf(k) / (k + 1)) * offdiag(k - 1, k + 1)
        I -= mp.sqrt(mp.mpf(k + 2) / (k + 1)) * offdiag(k, k + 2)
        table[k + 1][k + 1] = I
    return table
