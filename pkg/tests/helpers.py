"""Shared test oracles: brute-force and quadrature routes kept independent
of the library code paths they check."""

import numpy as np
from scipy import integrate


def quad_complex(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=500):
    re, _ = integrate.quad(lambda u: f(u).real, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)
    im, _ = integrate.quad(lambda u: f(u).imag, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)
    return re + 1j * im


def dblquad_complex(f, x_lo, x_hi, y_lo, y_hi, epsabs=1e-12):
    re, _ = integrate.dblquad(lambda y, x: f(x, y).real, x_lo, x_hi, y_lo, y_hi, epsabs=epsabs)
    im, _ = integrate.dblquad(lambda y, x: f(x, y).imag, x_lo, x_hi, y_lo, y_hi, epsabs=epsabs)
    return re + 1j * im


def i1_integrand(p):
    return lambda u: (
        np.exp(p.beta1 * np.log(-1j * (u - p.a) + 2 * p.eps1))
        * np.exp(p.beta2 * np.log(-1j * (u - p.b) + 2 * p.eps2))
    )


def i2_integrand(p):
    return lambda u: (
        np.exp(p.beta1 * np.log(1j * (u - p.a) + 2 * p.eps1))
        * np.exp(p.beta2 * np.log(-1j * (u - p.b) + 2 * p.eps2))
    )


def fk_by_recursion(n_terms, z, params):
    """Integration-by-parts recursion for F_k in the disk variable.

    With w = cayley(z) and J_k = int_(-1)^w zeta^k (1-zeta)^(-2a) dzeta,
    F_k = prefactor * sqrt((2-2a)_k/k!) * 2i * J_k, and
    (k+2-2a) J_(k+1) = (k+1) J_k - w^(k+1)(1-w)^(1-2a) + (-1)^(k+1) 2^(1-2a).
    Independent of the Gauss-Legendre path used by the library.
    """
    from cfbm.gamma_process import _fk_prefactor, _sqrt_poch_ratio

    a = params.alpha
    w = complex((z - 1j) / (z + 1j))
    pw = (1 - w) ** (1 - 2 * a)
    J = np.empty(n_terms, dtype=complex)
    J[0] = (pw - 2 ** (1 - 2 * a)) / (2 * a - 1)
    wk = 1.0 + 0j
    for k in range(n_terms - 1):
        wk *= w
        J[k + 1] = ((k + 1) * J[k] - wk * pw + (-1) ** (k + 1) * 2 ** (1 - 2 * a)) / (k + 2 - 2 * a)
    ks = np.arange(n_terms)
    return _fk_prefactor(params) * _sqrt_poch_ratio(a, ks) * 2j * J


def levy_area_variance_dblquad(alpha, e1, e2, t):
    """Second Levy-area moment by 2-d quadrature of the inner-integrated forms."""
    import math

    a2 = 2 * alpha
    kappa = alpha * (1 - 2 * alpha) / (2 * math.cos(math.pi * alpha))

    def pw(b, e):
        return np.exp(e * np.log(b))

    def v1(y, x):
        outer = pw(-1j * (x - y) + 2 * e1, a2 - 2)
        inner = (
            pw(-1j * (x - y) + 2 * e2, a2)
            - pw(-1j * x + 2 * e2, a2)
            - pw(1j * y + 2 * e2, a2)
            + (2 * e2) ** a2
        )
        return (outer * inner).real

    def v2(y, x):
        outer = pw(-1j * (x - y) + 2 * e1, a2 - 2)
        inner = (
            pw(1j * (x - y) + 2 * e2, a2)
            - pw(1j * x + 2 * e2, a2)
            - pw(-1j * y + 2 * e2, a2)
            + (2 * e2) ** a2
        )
        return (outer * inner).real

    r1, _ = integrate.dblquad(v1, 0, t, 0, t, epsabs=1e-10)
    r2, _ = integrate.dblquad(v2, 0, t, 0, t, epsabs=1e-10)
    return kappa ** 2 * 2 * (r1 + r2) / (a2 * (a2 - 1))
