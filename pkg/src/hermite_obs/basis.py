"""Hermite basis machinery: multi-indices, stable function evaluation,
ladder-operator algebra and finite expansions.

Everything downstream (restriction Gram matrices, Weyl-quantized operators,
semigroup propagation) is expressed in the orthonormal basis of Hermite
functions ``Phi_alpha(x) = prod_j phi_{alpha_j}(x_j)``, where ``phi_k`` is the
k-th one-dimensional Hermite function, i.e. the k-th eigenfunction of the
harmonic oscillator ``-d^2/dx^2 + x^2`` with eigenvalue ``2k + 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SQRT2 = math.sqrt(2.0)

# Ladder map kinds.
RAISE = "raise"
LOWER = "lower"
POSITION = "position"
DERIVATIVE = "derivative"

_KINDS = (RAISE, LOWER, POSITION, DERIVATIVE)


class ContractViolation(ValueError):
    """An operation was called outside its documented contract."""


def space_dimension(n, N):
    """Dimension of E_N in n variables: binomial(N + n, n)."""
    return math.comb(N + n, n)


@lru_cache(maxsize=None)
def multi_indices(n, N):
    """All multi-indices alpha in N^n with |alpha| <= N, graded-lex ordered.

    Ordering is by total order |alpha| first, then lexicographic on the
    entry tuple.  The order is fixed globally so that every matrix built on
    E_N is reproducible byte for byte and so that E_k is always a leading
    block of E_N for k <= N.
    """
    if n < 1:
        raise ContractViolation("dimension n must be >= 1")
    if N < 0:
        raise ContractViolation("cutoff N must be >= 0")

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for rest in compositions(total - head, parts - 1):
                yield (head,) + rest

    out = []
    for k in range(N + 1):
        out.extend(sorted(compositions(k, n)))
    assert len(out) == space_dimension(n, N)
    return tuple(out)


@lru_cache(maxsize=None)
def index_positions(n, N):
    """Dict mapping each multi-index of E_N to its row in the graded order."""
    return {alpha: i for i, alpha in enumerate(multi_indices(n, N))}


@lru_cache(maxsize=None)
def index_levels(n, N):
    """Array of |alpha| per basis position (read-only)."""
    lev = np.array([sum(a) for a in multi_indices(n, N)], dtype=np.int64)
    lev.flags.writeable = False
    return lev


def hermite_values(N, x):
    """Values phi_0(x) .. phi_N(x) of the weighted Hermite functions.

    Uses the normalized three-term recurrence with the Gaussian weight
    included,

        phi_{k+1} = x sqrt(2/(k+1)) phi_k - sqrt(k/(k+1)) phi_{k-1},

    seeded with phi_0 = pi^(-1/4) exp(-x^2/2).  Keeping the weight inside
    the recurrence keeps every iterate O(1) and avoids the factorial
    overflow of the bare Hermite polynomials.

    Parameters
    ----------
    N : int
        Highest degree to evaluate.
    x : float or ndarray
        Evaluation point(s).

    Returns
    -------
    ndarray of shape (N + 1,) + shape(x).
    """
    x = np.asarray(x, dtype=float)
    vals = np.empty((N + 1,) + x.shape, dtype=float)
    vals[0] = math.pi ** (-0.25) * np.exp(-0.5 * x * x)
    if N >= 1:
        vals[1] = x * SQRT2 * vals[0]
    for k in range(1, N):
        vals[k + 1] = x * math.sqrt(2.0 / (k + 1)) * vals[k] - math.sqrt(
            k / (k + 1.0)
        ) * vals[k - 1]
    return vals


def hermite_derivatives(N, x, values=None):
    """Values of phi_k'(x) for k = 0..N.

    phi_k' = (sqrt(k) phi_{k-1} - sqrt(k+1) phi_{k+1}) / sqrt(2), which is the
    annihilation-minus-creation combination of neighbouring degrees.
    """
    x = np.asarray(x, dtype=float)
    if values is None or values.shape[0] < N + 2:
        values = hermite_values(N + 1, x)
    der = np.empty((N + 1,) + x.shape, dtype=float)
    for k in range(N + 1):
        lower = math.sqrt(k) * values[k - 1] if k > 0 else 0.0
        der[k] = (lower - math.sqrt(k + 1.0) * values[k + 1]) / SQRT2
    return der


def eval_hermite_1d(k, x):
    """phi_k(x) for a single degree k >= 0."""
    if k < 0:
        raise ContractViolation("degree k must be >= 0")
    return hermite_values(k, x)[k]


@dataclass(frozen=True)
class HermiteExpansion:
    """A finite Hermite combination f = sum_{|alpha| <= N} c_alpha Phi_alpha.

    Coefficients follow the global graded-lex order of ``multi_indices``.
    By Parseval over the orthonormal family, the L2(R^n) norm of f equals the
    Euclidean norm of the coefficient vector.  Instances are immutable.
    """

    n: int
    N: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (space_dimension(self.n, self.N),):
            raise ContractViolation(
                "expected %d coefficients for n=%d, N=%d, got shape %s"
                % (space_dimension(self.n, self.N), self.n, self.N, c.shape)
            )
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    # -- vector-space operations ------------------------------------------

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other):
        """<f, g> = sum c_alpha conj(d_alpha)."""
        self._check_compatible(other)
        return complex(np.vdot(other.coeffs, self.coeffs))

    def scaled(self, z):
        return HermiteExpansion(self.n, self.N, self.coeffs * z)

    def add(self, other):
        if other.N != self.N:
            M = max(self.N, other.N)
            return self.padded(M).add(other.padded(M))
        self._check_compatible(other)
        return HermiteExpansion(self.n, self.N, self.coeffs + other.coeffs)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.add(other.scaled(-1.0))

    def _check_compatible(self, other):
        if other.n != self.n or other.N != self.N:
            raise ContractViolation("expansions live on different spaces")

    def padded(self, new_N):
        """Embed into E_{new_N} (new_N >= N); coefficients are preserved."""
        if new_N < self.N:
            raise ContractViolation("padded() cannot shrink the cutoff")
        if new_N == self.N:
            return self
        out = np.zeros(space_dimension(self.n, new_N), dtype=complex)
        pos = index_positions(self.n, new_N)
        for i, alpha in enumerate(multi_indices(self.n, self.N)):
            out[pos[alpha]] = self.coeffs[i]
        return HermiteExpansion(self.n, new_N, out)

    def truncated(self, new_N):
        """Orthogonal projection onto E_{new_N} (new_N <= N)."""
        if new_N > self.N:
            return self.padded(new_N)
        dim = space_dimension(self.n, new_N)
        return HermiteExpansion(self.n, new_N, self.coeffs[:dim])

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, x):
        """Pointwise values of f.

        ``x`` is a point of R^n or an array of shape (m, n); 1-d input in
        dimension one is treated as a batch of scalar points.  The 1-d factor
        values phi_k(x_j) are shared across all multi-indices.
        """
        pts = np.asarray(x, dtype=float)
        scalar = False
        if self.n == 1:
            if pts.ndim == 0:
                scalar = True
            pts = pts.reshape(-1, 1)
        else:
            if pts.ndim == 1:
                scalar = True
                pts = pts.reshape(1, -1)
        if pts.shape[1] != self.n:
            raise ContractViolation("points have wrong spatial dimension")
        tables = [hermite_values(self.N, pts[:, j]) for j in range(self.n)]
        out = np.zeros(pts.shape[0], dtype=complex)
        for i, alpha in enumerate(multi_indices(self.n, self.N)):
            c = self.coeffs[i]
            if c == 0:
                continue
            term = tables[0][alpha[0]].copy()
            for j in range(1, self.n):
                term *= tables[j][alpha[j]]
            out += c * term
        return out[0] if scalar else out

    # -- serialization ------------------------------------------------------

    def to_json(self):
        return json.dumps(
            {
                "n": self.n,
                "N": self.N,
                "order": "grlex",
                "coeffs": [[float(z.real), float(z.imag)] for z in self.coeffs],
            }
        )

    @staticmethod
    def from_json(text):
        doc = json.loads(text)
        if doc.get("order") != "grlex":
            raise ContractViolation("unsupported coefficient order %r" % doc.get("order"))
        coeffs = np.array([complex(re, im) for re, im in doc["coeffs"]])
        return HermiteExpansion(doc["n"], doc["N"], coeffs)


def unit_expansion(n, N, alpha):
    """The basis expansion Phi_alpha inside E_N."""
    alpha = tuple(alpha)
    c = np.zeros(space_dimension(n, N), dtype=complex)
    c[index_positions(n, N)[alpha]] = 1.0
    return HermiteExpansion(n, N, c)


def random_expansion(n, N, rng, complex_coeffs=True):
    dim = space_dimension(n, N)
    c = rng.standard_normal(dim)
    if complex_coeffs:
        c = c + 1j * rng.standard_normal(dim)
    return HermiteExpansion(n, N, c)


# -- ladder maps -------------------------------------------------------------


@dataclass(frozen=True)
class LadderMap:
    """One creation/annihilation-type map along a fixed axis.

    kind 'raise'      a_{j,+}: Phi_alpha -> sqrt(alpha_j + 1) Phi_{alpha+e_j}
    kind 'lower'      a_{j,-}: Phi_alpha -> sqrt(alpha_j) Phi_{alpha-e_j}
    kind 'position'   x_j   = (a_+ + a_-)/sqrt(2)
    kind 'derivative' d/dx_j = (a_- - a_+)/sqrt(2)

    Raise/position/derivative enlarge the cutoff by one; lower shrinks it.
    """

    kind: str
    axis: int
    source_cutoff: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ContractViolation("unknown ladder kind %r" % self.kind)
        if self.source_cutoff < 0:
            raise ContractViolation("source cutoff must be >= 0")

    @property
    def target_cutoff(self):
        if self.kind == LOWER:
            return max(self.source_cutoff - 1, 0)
        return self.source_cutoff + 1


def apply_ladder(m: LadderMap, f: HermiteExpansion) -> HermiteExpansion:
    """Apply a ladder map to an expansion, coefficient-exactly."""
    if f.N != m.source_cutoff:
        raise ContractViolation(
            "expansion cutoff %d does not match ladder source %d" % (f.N, m.source_cutoff)
        )
    if m.axis < 0 or m.axis >= f.n:
        raise ContractViolation("axis out of range")
    if m.kind == POSITION:
        up = apply_ladder(LadderMap(RAISE, m.axis, f.N), f)
        down = apply_ladder(LadderMap(LOWER, m.axis, f.N), f).padded(up.N)
        return (up + down).scaled(1.0 / SQRT2)
    if m.kind == DERIVATIVE:
        up = apply_ladder(LadderMap(RAISE, m.axis, f.N), f)
        down = apply_ladder(LadderMap(LOWER, m.axis, f.N), f).padded(up.N)
        return (down - up).scaled(1.0 / SQRT2)

    n, j = f.n, m.axis
    N_out = m.target_cutoff
    out = np.zeros(space_dimension(n, N_out), dtype=complex)
    pos_out = index_positions(n, N_out)
    for i, alpha in enumerate(multi_indices(n, f.N)):
        c = f.coeffs[i]
        if c == 0:
            continue
        if m.kind == RAISE:
            beta = alpha[:j] + (alpha[j] + 1,) + alpha[j + 1 :]
            out[pos_out[beta]] += math.sqrt(alpha[j] + 1.0) * c
        else:  # LOWER
            if alpha[j] == 0:
                continue
            beta = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1 :]
            out[pos_out[beta]] += math.sqrt(alpha[j]) * c
    return HermiteExpansion(n, N_out, out)


@lru_cache(maxsize=None)
def raise_matrix(n, M, axis):
    """Matrix of a_{axis,+} on E_M (images beyond level M are dropped).

    Compose ladder matrices only on a buffered cutoff: a product of p
    raise-type factors applied to columns with |alpha| <= M - p is exact.
    """
    idx = multi_indices(n, M)
    pos = index_positions(n, M)
    A = np.zeros((len(idx), len(idx)))
    for i, alpha in enumerate(idx):
        if sum(alpha) == M:
            continue
        beta = alpha[:axis] + (alpha[axis] + 1,) + alpha[axis + 1 :]
        A[pos[beta], i] = math.sqrt(alpha[axis] + 1.0)
    A.flags.writeable = False
    return A


def lower_matrix(n, M, axis):
    return raise_matrix(n, M, axis).T


def position_matrix(n, M, axis):
    R = raise_matrix(n, M, axis)
    return (R + R.T) / SQRT2


def derivative_matrix(n, M, axis):
    R = raise_matrix(n, M, axis)
    return (R.T - R) / SQRT2


def momentum_matrix(n, M, axis):
    """Matrix of D_j = -i d/dx_j = i (a_+ - a_-)/sqrt(2) on E_M."""
    R = raise_matrix(n, M, axis)
    return 1j * (R - R.T) / SQRT2


def project_energy(f: HermiteExpansion, k, mode="cumulative") -> HermiteExpansion:
    """Energy-level projections of the harmonic oscillator.

    mode 'single' keeps the level |alpha| = k; mode 'cumulative' keeps all
    levels |alpha| <= k.  Both are idempotent and return an expansion with
    the same cutoff as the input.
    """
    if k < 0:
        raise ContractViolation("level k must be >= 0")
    if mode not in ("single", "cumulative"):
        raise ContractViolation("mode must be 'single' or 'cumulative'")
    lev = index_levels(f.n, f.N)
    keep = lev == k if mode == "single" else lev <= k
    return HermiteExpansion(f.n, f.N, np.where(keep, f.coeffs, 0.0))
