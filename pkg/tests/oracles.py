"""Reference implementations that share no code with the package.

Each oracle takes a different route to the same quantity: hypergeometric
series instead of recurrences, closed-form cubic roots instead of Jacobi
rotations, arbitrary precision where the package uses doubles.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np

mpmath.mp.dps = 40


def jacobi_series(alpha: float, beta: float, n: int, t: float) -> float:
    """``P_n^{(a,b)}(t) = binom(n+a, n) 2F1(-n, n+a+b+1; a+1; (1-t)/2)`` summed term by term."""
    # the alternating sum cancels ~n decimal digits
    with mpmath.workdps(40 + n):
        return _jacobi_series(alpha, beta, n, t)


def _jacobi_series(alpha, beta, n, t):
    a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
    x = (1 - mpmath.mpf(t)) / 2
    term = mpmath.mpf(1)
    total = term
    for k in range(n):
        term *= (-n + k) * (n + a + b + 1 + k) / ((a + 1 + k) * (k + 1)) * x
        total += term
    return float(mpmath.binomial(n + a, n) * total)


def gegenbauer_via_jacobi(lam: float, n: int, t: float) -> float:
    """``C_n^lam = (2lam)_n / (lam + 1/2)_n * P_n^{(lam-1/2, lam-1/2)}`` using the series above."""
    ratio = mpmath.rf(2 * lam, n) / mpmath.rf(lam + 0.5, n)
    return float(ratio) * jacobi_series(lam - 0.5, lam - 0.5, n, t)


def bessel_j0_series(t: float) -> float:
    return math.fsum((-1) ** k * (t / 2) ** (2 * k) / math.factorial(k) ** 2 for k in range(60))


def bessel_j(nu: float, t: float) -> float:
    return float(mpmath.besselj(nu, t))


def bisect_zero(f, a: float, b: float, tol: float = 1e-14) -> float:
    fa = f(a)
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = f(mid)
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def cardano_eigs(M: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric 3x3 matrix from its characteristic cubic (trigonometric form)."""
    m = np.trace(M) / 3.0
    K = M - m * np.eye(3)
    q = np.linalg.det(K) / 2.0
    p = np.sum(K * K) / 6.0
    if p == 0:
        return np.full(3, m)
    r = q / p ** 1.5
    phi = math.acos(max(-1.0, min(1.0, r))) / 3.0
    e1 = m + 2 * math.sqrt(p) * math.cos(phi)
    e3 = m + 2 * math.sqrt(p) * math.cos(phi + 2 * math.pi / 3)
    return np.sort([e1, 3 * m - e1 - e3, e3])


def riesz_energy_loop(points: np.ndarray, s: float) -> float:
    """Pairwise loop run in reverse index order."""
    n = len(points)
    terms = []
    for j in range(n - 1, 0, -1):
        for i in range(j - 1, -1, -1):
            terms.append(float(np.sum((points[i] - points[j]) ** 2)) ** (-s / 2))
    return math.fsum(terms)


def cap_eigenfunction(d: int, lam: float, t: float) -> float:
    """Regular zonal eigenfunction of the Laplacian on S^d: ``2F1(-nu, nu+d-1; d/2; sin^2(t/2))``."""
    nu = (-(d - 1) + mpmath.sqrt((d - 1) ** 2 + 4 * mpmath.mpf(lam))) / 2
    return float(mpmath.hyp2f1(-nu, nu + d - 1, mpmath.mpf(d) / 2, mpmath.sin(mpmath.mpf(t) / 2) ** 2))


def cap_eigenvalue(d: int, r: float) -> float:
    """Smallest lam with ``cap_eigenfunction(d, lam, r) = 0``, found by mpmath root polishing."""
    j = float(mpmath.besseljzero((d - 2) / 2, 1)) if d >= 2 else math.pi / 2
    guess = (j / r) ** 2
    f = lambda lam: cap_eigenfunction(d, float(lam), r)  # noqa: E731
    lo, hi = 0.5 * guess, guess * 1.5
    while f(lo) < 0:
        lo *= 0.5
    while f(hi) > 0:
        hi *= 1.5
    return bisect_zero(f, lo, hi, tol=1e-13 * hi)


def cosine_cap_coeffs(r: float, ellmax: int) -> np.ndarray:
    """d = 1: mean-zero-normalized Fourier coefficients of ``cos(pi t / 2r)`` on ``|t| < r``.

    ``f_hat(k) = (1/pi) int_0^r cos(pi t / 2r) cos(k t) dt`` in closed form.
    """
    a = math.pi / (2 * r)
    out = np.empty(ellmax + 1)
    for k in range(ellmax + 1):
        if abs(k - a) < 1e-12:
            val = 0.5 * (r + math.sin(2 * a * r) / (2 * a))
        else:
            val = 0.5 * (math.sin((a - k) * r) / (a - k) + math.sin((a + k) * r) / (a + k))
        out[k] = val / math.pi
    return out
