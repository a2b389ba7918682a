"""The analytic Gamma-process whose boundary value is fractional Brownian motion.

Builds the upper-half-plane basis functions f_k, their integrals F_k, the
covariance kernel (partial sums and closed form), the boundary covariance
function, and the seeded series samplers.  The engine behind everything is a
Karhunen-Loeve-type expansion in the Cayley variable zeta = (z-i)/(z+i): on
the unit disk the basis is a weighted power basis, so partial sums, kernels
and quadrature all reduce to geometric-type series plus principal-branch
power prefactors.

Normalization: the coefficient components xi_k^1, xi_k^2 have variance
``sigma_component`` (default 1/2, i.e. E|xi_k^+|^2 = 1), which makes the
boundary process match the standard FBM covariance
(|s|^2a + |t|^2a - |t-s|^2a)/2 with Var B_1 = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .specfun import BranchCutError, PoleError, principal_pow

__all__ = [
    "DomainError",
    "ModelParams",
    "GaussianDraw",
    "PathSample",
    "gaussian_draw",
    "cayley",
    "cayley_inv",
    "f_k",
    "F_k",
    "fk_table",
    "kernel_closed",
    "kernel_partial_sum",
    "kernel_terms_needed",
    "cov_C",
    "cov_fbm",
    "sample_gamma_plus",
    "sample_fbm_series",
    "series_truncation_experiment",
]


class DomainError(ValueError):
    """Input outside the half-plane / grid domain of an operation."""


# ---------------------------------------------------------------------------
# parameters and draws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Hurst exponent and coefficient normalization.

    alpha must lie in (0,1) and differ from 1/2 exactly (the kernel prefactor
    degenerates to 0/0 there); values within 1e-6 of 1/2 trigger a warning
    because cos(pi*alpha) amplifies rounding.
    """

    alpha: float
    sigma_component: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.alpha == 0.5:
            raise ValueError("alpha = 1/2 is rejected: the kernel prefactor is 0/0")
        if abs(self.alpha - 0.5) < 1e-6:
            warnings.warn(
                f"alpha={self.alpha} is within 1e-6 of 1/2; cos(pi*alpha) "
                "amplifies rounding error",
                stacklevel=2,
            )
        if self.sigma_component <= 0:
            raise ValueError(f"sigma_component must be > 0, got {self.sigma_component}")

    @property
    def kappa(self):
        """Kernel prefactor alpha(1-2 alpha) / (2 cos(pi alpha)); positive on (0,1)\\{1/2}."""
        return self.alpha * (1.0 - 2.0 * self.alpha) / (2.0 * math.cos(math.pi * self.alpha))

    @property
    def normalization(self):
        """E|xi_k^+|^2 = 2 * sigma_component."""
        return 2.0 * self.sigma_component


@dataclass(frozen=True, eq=False)
class GaussianDraw:
    """Seeded coefficient array xi_k^+ = xi_k^1 + i xi_k^2, k < n_terms."""

    seed: int
    n_terms: int
    xi_plus: np.ndarray = field(repr=False)


def gaussian_draw(seed, n_terms, params, stream=0):
    """Draw the first ``n_terms`` complex coefficients of a seeded stream.

    Counter-based (Philox keyed by (seed, stream)), so identical (seed, n)
    reproduce bit-identical arrays, extending n keeps the leading
    coefficients unchanged, and distinct streams are independent.
    """
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative integers")
    key = np.array([seed, stream], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    raw = rng.standard_normal(2 * n_terms)
    scale = math.sqrt(params.sigma_component)
    xi = scale * (raw[0::2] + 1j * raw[1::2])
    return GaussianDraw(seed=int(seed), n_terms=int(n_terms), xi_plus=xi)


@dataclass(frozen=True, eq=False)
class PathSample:
    """Process values on a grid, with the sampler that produced them."""

    grid: np.ndarray
    values: np.ndarray
    n_terms: int
    provenance: str  # "series" | "cholesky"

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise ValueError("grid and values must have equal length")


# ---------------------------------------------------------------------------
# Cayley transform and basis functions
# ---------------------------------------------------------------------------

def cayley(t):
    """Moebius map t -> (t-i)/(t+i); upper half-plane onto the unit disk."""
    t = complex(t)
    if t == -1j:
        raise PoleError("cayley has a pole at t = -i")
    return (t - 1j) / (t + 1j)


def cayley_inv(z):
    """Inverse Cayley map z -> i(1+z)/(1-z)."""
    z = complex(z)
    if z == 1:
        raise PoleError("cayley_inv has a pole at z = 1")
    return 1j * (1.0 + z) / (1.0 - z)


def _sqrt_poch_ratio(alpha, ks):
    # sqrt((2-2a)_k / k!) for an integer array ks, via log-Gamma (no overflow)
    ks = np.asarray(ks, dtype=float)
    x = 2.0 - 2.0 * alpha
    return np.exp(0.5 * (gammaln(x + ks) - gammaln(x) - gammaln(1.0 + ks)))


def _fk_prefactor(params):
    return 2.0 ** (params.alpha - 1.0) * math.sqrt(params.kappa)


def f_k(k, z, params):
    """Basis function f_k(z), analytic for Im z > -1.

    2^(a-1) sqrt(kappa) sqrt((2-2a)_k/k!) ((z+i)/(2i))^(2a-2) ((z-i)/(z+i))^k
    with every fractional power on the principal branch.
    """
    z = complex(z)
    if z.imag <= -1.0:
        raise BranchCutError(
            f"f_k prefactor hits the branch cut for Im z <= -1 (z={z})"
        )
    base = (z + 1j) / (2j)  # Re = (1 + Im z)/2 > 0, off the cut
    pref = principal_pow(base, 2.0 * params.alpha - 2.0)
    zeta = (z - 1j) / (z + 1j)
    spr = float(_sqrt_poch_ratio(params.alpha, [k])[0])
    return _fk_prefactor(params) * spr * pref * zeta ** int(k)


# ---------------------------------------------------------------------------
# kernel identity
# ---------------------------------------------------------------------------

def kernel_closed(z, w, params):
    """Closed-form kernel kappa * (-i(z - conj w))^(2a-2) on the open UHP."""
    z, w = complex(z), complex(w)
    if z.imag <= 0 or w.imag <= 0:
        raise DomainError(f"kernel requires Im z > 0 and Im w > 0 (z={z}, w={w})")
    return params.kappa * principal_pow(-1j * (z - w.conjugate()), 2.0 * params.alpha - 2.0)


def kernel_partial_sum(z, w, N, params):
    """Partial sum sum_(k<N) f_k(z) conj(f_k(w)); converges to kernel_closed."""
    z, w = complex(z), complex(w)
    if z.imag <= 0 or w.imag <= 0:
        raise DomainError(f"kernel requires Im z > 0 and Im w > 0 (z={z}, w={w})")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    a = params.alpha
    pref = (
        _fk_prefactor(params) ** 2
        * principal_pow((z + 1j) / 2j, 2 * a - 2)
        * np.conj(principal_pow((w + 1j) / 2j, 2 * a - 2))
    )
    r = cayley(z) * np.conj(cayley(w))
    # (2-2a)_k / k! by the stable forward recurrence
    ks = np.arange(N)
    ratios = np.ones(N)
    if N > 1:
        ratios[1:] = (2.0 - 2.0 * a + ks[:-1]) / (1.0 + ks[:-1])
    poch = np.cumprod(ratios)
    return pref * np.sum(poch * r ** ks)


def kernel_terms_needed(z, w, params, tol=1e-9):
    """Number of series terms for a partial-sum error below tol.

    Geometric-tail estimate at ratio r = |cayley(z) cayley(w)| with a safety
    factor absorbing the polynomial Pochhammer growth.
    """
    r = abs(cayley(z) * cayley(w))
    if r >= 1.0:
        raise DomainError(f"series does not converge at |cayley(z)cayley(w)|={r}")
    if r == 0.0:
        return 8
    lead = abs(kernel_closed(z, w, params)) + 1.0
    n = math.log(tol * (1.0 - r) / (500.0 * lead)) / math.log(r)
    return max(8, int(math.ceil(n)) + 64)


# ---------------------------------------------------------------------------
# integrated basis functions F_k
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_PHASE_PER_PANEL = 25.0  # max k*arg sweep per 64-node panel (~4 cycles)


def _segment_phase(p, q, samples=33):
    # upper bound on the arg sweep of cayley(u) along [p, q]:
    # |d arg zeta| <= |zeta'/zeta| |du| = 2/|u^2+1| |du|.  The image of a
    # straight segment is a circular arc, so the true sweep never exceeds
    # 2 pi; the cap keeps the estimate finite when the segment grazes the
    # zero of cayley at u = i.
    ts = (np.arange(samples) + 0.5) / samples
    u = p + (q - p) * ts
    est = 1.3 * abs(q - p) * float(np.mean(2.0 / np.abs(u * u + 1.0)))
    return min(est, 8.0)


def _segment_nodes(p, q, panels):
    edges = p + (q - p) * np.linspace(0.0, 1.0, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    nodes = (mid + half * _GL_NODES[None, :]).ravel()
    weights = (half * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def _fk_segment_integrals(ks, p, q, params):
    # integral of f_k over the straight segment [p, q] for every k in ks,
    # sharing one set of quadrature nodes across k.  ks must be contiguous
    # 0..n-1 or a small explicit list; powers of cayley(u) are built by the
    # running product, which is branch-free for integer exponents.
    kmax = int(max(ks))
    phase = _segment_phase(p, q)
    panels = max(1, math.ceil(abs(q - p) / 4.0), math.ceil(max(1, kmax) * phase / _PHASE_PER_PANEL))
    nodes, weights = _segment_nodes(p, q, panels)
    base = np.exp((2.0 * params.alpha - 2.0) * np.log((nodes + 1j) / 2j))
    zeta = (nodes - 1j) / (nodes + 1j)
    wb = weights * base
    if len(ks) <= 8:
        # few rows: direct powers (exact for integer exponents on any branch)
        powers = np.exp(np.outer(ks, np.log(zeta)))
        out = powers @ wb
    else:
        wanted = {int(k): i for i, k in enumerate(ks)}
        out = np.empty(len(ks), dtype=complex)
        cur = wb
        for k in range(kmax + 1):
            if k:
                cur = cur * zeta
            if k in wanted:
                out[wanted[k]] = cur.sum()
    return _fk_prefactor(params) * _sqrt_poch_ratio(params.alpha, ks) * out


def F_k(k, z, params):
    """F_k(z) = integral of f_k over the straight segment [0, z].

    Gauss-Legendre panels, with the panel count scaled to the oscillation
    k * arg cayley(u) along the segment so accuracy is uniform in k.
    """
    z = complex(z)
    if z == 0:
        return 0j
    if z.imag <= -1.0:
        raise BranchCutError(f"F_k requires Im z > -1 along [0, z] (z={z})")
    return complex(_fk_segment_integrals(np.array([int(k)]), 0j, z, params)[0])


def fk_table(n_terms, points, params):
    """F_k at each point of the polyline 0 -> points[0] -> points[1] -> ...

    Path independence (f_k is analytic for Im z > -1) makes the cumulative
    polyline integral equal to the straight-segment F_k at every vertex; the
    polyline form shares quadrature nodes across all k and all points, which
    is what the samplers need.  A vertex equal to 0 resets the accumulator,
    so F_k(0) = 0 holds exactly.

    Returns a complex array of shape (n_terms, len(points)).
    """
    pts = np.asarray(points, dtype=complex)
    if pts.ndim != 1 or len(pts) == 0:
        raise ValueError("points must be a non-empty 1-d sequence")
    if np.any(pts.imag <= -1.0):
        raise BranchCutError("fk_table requires Im z > -1 at every vertex")
    ks = np.arange(n_terms)
    out = np.empty((n_terms, len(pts)), dtype=complex)
    acc = np.zeros(n_terms, dtype=complex)
    prev = 0j
    for j, q in enumerate(pts):
        if q == 0:
            acc = np.zeros(n_terms, dtype=complex)
        elif q != prev:
            acc = acc + _fk_segment_integrals(ks, prev, q, params)
        out[:, j] = acc
        prev = q
    return out


# ---------------------------------------------------------------------------
# covariance function of the boundary process
# ---------------------------------------------------------------------------

def cov_C(s, t, params):
    """Complex covariance sum_k F_k(s) conj(F_k(t)) in closed form.

    (e^(-i pi a sgn s)|s|^2a + e^(i pi a sgn t)|t|^2a
     - e^(i pi a sgn(t-s))|t-s|^2a) / (4 cos pi a).
    """
    a = params.alpha

    def phased(x):
        if x == 0.0:
            return 0j
        return abs(x) ** (2 * a) * np.exp(1j * math.pi * a * math.copysign(1.0, x))

    return (np.conj(phased(s)) + phased(t) - phased(t - s)) / (4.0 * math.cos(math.pi * a))


def cov_fbm(s, t, params):
    """Boundary covariance E[B_s B_t] = normalization * 2 Re cov_C(s, t)."""
    return params.normalization * 2.0 * cov_C(s, t, params).real


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def sample_gamma_plus(draw, points, params):
    """Integrated process sum_k F_k(z) xi_k^+ at points of the closed UHP.

    The points are visited in the given order as a polyline starting at 0;
    path independence makes the values independent of that order.
    """
    pts = np.asarray(points, dtype=complex)
    if np.any(pts.imag < 0):
        raise DomainError("sample_gamma_plus requires Im z >= 0 at every point")
    table = fk_table(draw.n_terms, pts, params)
    values = draw.xi_plus @ table
    return PathSample(grid=pts, values=values, n_terms=draw.n_terms, provenance="series")


def sample_fbm_series(draw, grid, params):
    """Real FBM path 2 Re sum_(k<N) F_k(t) xi_k^+ on a sorted real grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("grid must be a non-empty 1-d array")
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted ascending")
    plus = sample_gamma_plus(draw, grid.astype(complex), params)
    return PathSample(
        grid=grid,
        values=2.0 * plus.values.real,
        n_terms=draw.n_terms,
        provenance="series",
    )


# ---------------------------------------------------------------------------
# series truncation rate experiment
# ---------------------------------------------------------------------------

def series_truncation_experiment(params, n_list, n_ref, n_mc, grid, seed):
    """Monte Carlo E[sup_grid |B^(N) - B^(n_ref)|] for each N in n_list.

    Coupled estimates: every replicate reuses one coefficient stream for all
    truncation levels, so the differences isolate the tail sum.  Returns
    (rows, slope) where rows are (N, e_sup) pairs and slope is the
    least-squares slope of log e_sup against log N (nan if unfittable).
    """
    n_list = [int(n) for n in n_list]
    if any(n >= n_ref for n in n_list):
        raise ValueError("every N must be < n_ref")
    grid = np.asarray(grid, dtype=float)
    table = fk_table(n_ref, grid.astype(complex), params)
    sups = np.zeros((len(n_list), n_mc))
    for r in range(n_mc):
        xi = gaussian_draw(seed, n_ref, params, stream=r).xi_plus
        ref = 2.0 * (xi @ table).real
        for i, n in enumerate(n_list):
            path = 2.0 * (xi[:n] @ table[:n]).real
            sups[i, r] = np.max(np.abs(path - ref))
    esup = sups.mean(axis=1)
    rows = list(zip(n_list, esup))
    slope = float("nan")
    if len(n_list) >= 2:
        slope = float(np.polyfit(np.log(n_list), np.log(esup), 1)[0])
    return rows, slope
