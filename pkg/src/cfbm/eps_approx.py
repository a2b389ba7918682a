"""The eps-regularized process: exact covariances, a Cholesky sampler, and
the uniform-approximation experiments.

Gamma(eps)_t is the boundary process evaluated after shifting time by
i*eps into the upper half-plane.  Its covariance with any other shifted value
is an explicit four-term power expression, so grids admit exact Gaussian
sampling (the oracle for the series sampler) and exact L2 error laws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .gamma_process import (
    DomainError,
    PathSample,
    fk_table,
    gaussian_draw,
)

__all__ = [
    "EpsApproxSpec",
    "cov_eps",
    "covariance_matrix",
    "cholesky_factor",
    "sample_gamma_eps_exact",
    "l2_error_law",
    "sup_error_experiment",
    "contour_vv_piece",
    "contour_kernel_pieces",
    "contour_kernel_integral",
]


@dataclass(frozen=True)
class EpsApproxSpec:
    """Imaginary shift and evaluation grid for the regularized process."""

    alpha: float
    eps: float
    grid: tuple

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or len(g) == 0:
            raise ValueError("grid must be a non-empty 1-d sequence")
        if len(np.unique(g)) != len(g):
            raise ValueError("grid points must be distinct")


def _pow0(base, expo):
    # principal power with the continuous value 0 at base = 0; bases here
    # always satisfy Re >= 0, so the cut is never touched.
    base = np.asarray(base, dtype=complex)
    out = np.zeros_like(base)
    nz = base != 0
    out[nz] = np.exp(expo * np.log(base[nz]))
    return out if out.ndim else complex(out)


def cov_eps(s, eps1, t, eps2, params):
    """E[Gamma(eps1)_s Gamma(eps2)_t], exact.

    Path-pair integral of the analytic kernel from 0 to s+i eps1 and
    0 to t+i eps2:

        I = [(e1+e2-i(s-t))^2a - (e1-is)^2a - (e2+it)^2a] / (2a(2a-1))

    and the covariance is normalization * 2 Re(kappa I).  At
    eps1 = eps2 = 0 this reduces to (|s|^2a + |t|^2a - |t-s|^2a)/2.
    """
    if eps1 < 0 or eps2 < 0:
        raise DomainError("imaginary shifts must be >= 0")
    a2 = 2.0 * params.alpha
    denom = a2 * (a2 - 1.0)
    i_val = (
        _pow0(eps1 + eps2 - 1j * (s - t), a2)
        - _pow0(eps1 - 1j * s, a2)
        - _pow0(eps2 + 1j * t, a2)
    ) / denom
    return params.normalization * 2.0 * (params.kappa * i_val).real


def covariance_matrix(spec, params):
    """Symmetric covariance matrix of Gamma(eps) on the spec grid.

    The one-variable terms broadcast from vectors; the difference term is
    Toeplitz on uniform grids, so only 2n-1 distinct powers are evaluated
    there instead of n^2.
    """
    g = np.asarray(spec.grid, dtype=float)
    n = len(g)
    a2 = 2.0 * params.alpha
    denom = a2 * (a2 - 1.0)
    e = spec.eps
    v_s = _pow0(e - 1j * g, a2)
    v_t = _pow0(e + 1j * g, a2)
    steps = np.diff(g)
    if n > 1 and np.allclose(steps, steps[0], rtol=1e-12, atol=0.0):
        d = np.arange(-(n - 1), n) * steps[0]
        pv = _pow0(2.0 * e - 1j * d, a2)
        idx = np.arange(n)[:, None] - np.arange(n)[None, :] + (n - 1)
        diff_term = pv[idx]
    else:
        diff_term = _pow0(2.0 * e - 1j * np.subtract.outer(g, g), a2)
    i_val = (diff_term - v_s[:, None] - v_t[None, :]) / denom
    cov = params.normalization * 2.0 * (params.kappa * i_val).real
    return 0.5 * (cov + cov.T)


def cholesky_factor(cov):
    """Lower Cholesky factor, retrying once with a tiny diagonal jitter.

    A second failure signals a covariance bug (wrong branch or formula), not
    statistical noise, and raises.
    """
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        n = cov.shape[0]
        jitter = 1e-12 * np.trace(cov) / n
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(n))
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(
                "covariance matrix not positive semidefinite after jitter; "
                "this indicates a formula or branch bug"
            ) from exc


def sample_gamma_eps_exact(seed, spec, params, stream=0):
    """Exact Gaussian sample of Gamma(eps) on the grid (Cholesky transport)."""
    cov = covariance_matrix(spec, params)
    factor = cholesky_factor(cov)
    key = np.array([seed, stream], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    values = factor @ rng.standard_normal(len(spec.grid))
    return PathSample(
        grid=np.asarray(spec.grid, dtype=float),
        values=values,
        n_terms=0,
        provenance="cholesky",
    )


def l2_error_law(t, eps, params):
    """Exact E|Gamma(eps)_t - Gamma_t|^2, assembled from cov_eps."""
    if eps <= 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    return (
        cov_eps(t, eps, t, eps, params)
        - 2.0 * cov_eps(t, eps, t, 0.0, params)
        + cov_eps(t, 0.0, t, 0.0, params)
    )


# ---------------------------------------------------------------------------
# sup-norm approximation experiment
# ---------------------------------------------------------------------------

def sup_error_experiment(params, eps_list, n_mc, n_terms, seed, grid=None):
    """Monte Carlo E[sup_grid |Gamma_t - Gamma(eps)_t|] for each eps.

    Each replicate couples the boundary path and every shifted path through
    one coefficient stream (identical xi arrays evaluated at t and t+i eps).
    Returns (rows, slope): rows are (eps, e_sup) pairs, slope the fitted
    log-log slope (expected about alpha; nan when unfittable).
    """
    if grid is None:
        grid = np.linspace(0.0, 1.0, 256)
    grid = np.asarray(grid, dtype=float)
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise DomainError("all eps must be > 0")
    table_real = fk_table(n_terms, grid.astype(complex), params)
    tables = [fk_table(n_terms, grid + 1j * e, params) for e in eps_list]
    sups = np.zeros((len(eps_list), n_mc))
    for r in range(n_mc):
        xi = gaussian_draw(seed, n_terms, params, stream=r).xi_plus
        path = 2.0 * (xi @ table_real).real
        for i, table in enumerate(tables):
            shifted = 2.0 * (xi @ table).real
            sups[i, r] = np.max(np.abs(shifted - path))
    esup = sups.mean(axis=1)
    rows = list(zip(eps_list, esup))
    slope = float("nan")
    if len(eps_list) >= 2:
        slope = float(np.polyfit(np.log(eps_list), np.log(esup), 1)[0])
    return rows, slope


# ---------------------------------------------------------------------------
# contour kernel integral (rectangle contour, absolute kernel)
# ---------------------------------------------------------------------------

def contour_vv_piece(s, params):
    """Vertical x vertical piece in closed form: (2^2a - 2)/(2a(2a-1)) s^2a."""
    a2 = 2.0 * params.alpha
    return (2.0 ** a2 - 2.0) / (a2 * (a2 - 1.0)) * s ** a2


def contour_kernel_pieces(s, t, params):
    """All nine piecewise double integrals of |z - conj(w)|^(2a-2).

    z and w both run over the three-piece contour
    [0, is] u [is, t+is] u [t+is, t]; the integrand depends on |z - conj w|
    only, so each piece is either elementary (the two vertical self-pairs),
    reducible to one dimension (the horizontal pair), or a smooth 2-d
    integral evaluated adaptively.

    Returns a dict keyed by (i, j) piece indices, 0 = vertical at 0,
    1 = horizontal, 2 = vertical at t.
    """
    if s <= 0 or t <= 0:
        raise DomainError(f"contour integral needs s, t > 0 (s={s}, t={t})")
    am2 = 2.0 * params.alpha - 2.0
    pieces = {}
    pieces[(0, 0)] = contour_vv_piece(s, params)
    pieces[(2, 2)] = pieces[(0, 0)]

    # horizontal x horizontal: |z - conj w| = sqrt((x1-x2)^2 + 4 s^2)
    hh, _ = integrate.quad(
        lambda u: 2.0 * (t - u) * (u * u + 4.0 * s * s) ** (am2 / 2.0),
        0.0,
        t,
        epsabs=1e-13,
        epsrel=1e-11,
        limit=200,
    )
    pieces[(1, 1)] = hh

    def dbl(dist2, x_hi, y_hi):
        val, _ = integrate.dblquad(
            lambda y, x: dist2(x, y) ** (am2 / 2.0),
            0.0,
            x_hi,
            0.0,
            y_hi,
            epsabs=1e-12,
            epsrel=1e-10,
        )
        return val

    # vertical(0) x horizontal: z = i rho, conj w = rho' - i s
    vh = dbl(lambda rho, rp: rp * rp + (rho + s) ** 2, s, t)
    pieces[(0, 1)] = vh
    pieces[(1, 0)] = vh
    # horizontal x vertical(t): z = rho + i s, conj w = t - i(s - rho')
    hv = dbl(lambda rho, rp: (rho - t) ** 2 + (2.0 * s - rp) ** 2, t, s)
    pieces[(1, 2)] = hv
    pieces[(2, 1)] = hv
    # vertical(0) x vertical(t): z = i rho, conj w = t - i(s - rho')
    vv = dbl(lambda rho, rp: t * t + (rho + s - rp) ** 2, s, s)
    pieces[(0, 2)] = vv
    pieces[(2, 0)] = vv
    return pieces


def contour_kernel_integral(s, t, params):
    """Total double contour integral of |z - conj(w)|^(2a-2) (nine pieces)."""
    return float(sum(contour_kernel_pieces(s, t, params).values()))
