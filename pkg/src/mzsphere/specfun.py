"""Special functions used throughout the package.

Jacobi and Gegenbauer polynomials by three-term recurrence, Bessel
functions of the first kind by power series, first Bessel zeros by
bracketing and bisection, and Gauss--Legendre rules by Newton iteration.
Everything is double precision; degrees are capped at ``MAX_DEGREE``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MAX_DEGREE",
    "QuadratureRule",
    "jacobi_eval",
    "gegenbauer_eval",
    "gegenbauer_normalized",
    "gegenbauer_normalized_table",
    "bessel_j",
    "bessel_first_zero",
    "gauss_legendre",
]

MAX_DEGREE = 512

# Bessel series is only trusted on this range (cancellation grows like e^t).
BESSEL_T_MAX = 30.0
BESSEL_NU_MAX = 10.0
ZERO_SCAN_STEP = 0.05
SERIES_T_MAX = 8.0


def _check_degree(n: int) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {n!r}")
    if n > MAX_DEGREE:
        raise ValueError(f"degree {n} exceeds cap {MAX_DEGREE}")
    return int(n)


def jacobi_eval(alpha: float, beta: float, n: int, t):
    """Jacobi polynomial :math:`P_n^{(\\alpha,\\beta)}(t)`.

    Normalized so that ``P_n(1) = binom(n + alpha, n)``. ``t`` may be a
    scalar or an array; the return type follows ``t``.
    """
    if not (np.isfinite(alpha) and np.isfinite(beta)):
        raise ValueError("alpha and beta must be finite")
    if alpha <= -1 or beta <= -1:
        raise ValueError(f"need alpha, beta > -1, got ({alpha}, {beta})")
    n = _check_degree(n)
    x = np.asarray(t, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if x.ndim else float(p_prev)
    ab = alpha + beta
    p = (alpha + 1.0) + 0.5 * (ab + 2.0) * (x - 1.0)
    for k in range(2, n + 1):
        c = 2.0 * k + ab
        a1 = 2.0 * k * (k + ab) * (c - 2.0)
        a2 = (c - 1.0) * (alpha * alpha - beta * beta)
        a3 = (c - 2.0) * (c - 1.0) * c
        a4 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * c
        p, p_prev = ((a2 + a3 * x) * p - a4 * p_prev) / a1, p
    return p if x.ndim else float(p)


def gegenbauer_eval(lam: float, n: int, t):
    """Gegenbauer polynomial :math:`C_n^{(\\lambda)}(t)`, ``lam > -1/2``.

    Standard normalization, ``C_n(1) = binom(n + 2 lam - 1, n)``; for
    ``lam == 0`` this vanishes identically when ``n >= 1``.
    """
    if not lam > -0.5:
        raise ValueError(f"need lam > -1/2, got {lam}")
    n = _check_degree(n)
    x = np.asarray(t, dtype=float)
    c_prev = np.ones_like(x)
    if n == 0:
        return c_prev if x.ndim else float(c_prev)
    c = 2.0 * lam * x
    for k in range(2, n + 1):
        c, c_prev = (2.0 * (k + lam - 1.0) * x * c - (k + 2.0 * lam - 2.0) * c_prev) / k, c
    return c if x.ndim else float(c)


def gegenbauer_normalized_table(lam: float, nmax: int, t) -> np.ndarray:
    """Rows ``R_n(t) = C_n^{(lam)}(t) / C_n^{(lam)}(1)`` for ``n = 0..nmax``.

    Runs the recurrence on the ratio directly, so ``lam = 0`` (the circle)
    gives Chebyshev polynomials instead of the degenerate zero.
    """
    if not lam > -0.5:
        raise ValueError(f"need lam > -1/2, got {lam}")
    nmax = _check_degree(nmax)
    x = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for k in range(1, nmax):
        out[k + 1] = (2.0 * (k + lam) * x * out[k] - k * out[k - 1]) / (k + 2.0 * lam)
    return out


def gegenbauer_normalized(lam: float, n: int, t):
    """Single normalized Gegenbauer polynomial, ``R_n(1) = 1``."""
    row = gegenbauer_normalized_table(lam, n, t)[n]
    return row if np.ndim(t) else float(row[0])


def _bessel_series(nu: float, t: float, max_terms: int) -> float:
    half = 0.5 * t
    q = -half * half
    term = math.exp(nu * math.log(half) - math.lgamma(nu + 1.0))
    terms = [term]
    biggest = abs(term)
    for k in range(1, max_terms):
        term *= q / (k * (k + nu))
        terms.append(term)
        biggest = max(biggest, abs(term))
        if k > half and abs(term) <= 1e-17 * biggest:
            return math.fsum(terms)
    raise ArithmeticError(f"Bessel series for nu={nu}, t={t} did not converge")


def _bessel_miller(nu: float, t: float) -> float:
    # Backward recurrence on J_{nu+k}, normalized by
    # (t/2)^nu = sum_k (nu + 2k) Gamma(nu + k) / k! * J_{nu+2k}(t).
    top = 2 * int(math.ceil(0.5 * (t + 40.0 + 4.0 * math.sqrt(t))))
    f_next, f = 0.0, 1e-300
    norm = []
    for k in range(top, 0, -1):
        f_next, f = f, 2.0 * (nu + k) / t * f - f_next
        if abs(f) > 1e250:
            f_next *= 1e-250
            f *= 1e-250
            norm = [x * 1e-250 for x in norm]
        j = k - 1
        if j % 2 == 0:
            if j == 0:
                coeff = math.exp(math.lgamma(nu + 1.0))
            else:
                coeff = (nu + j) * math.exp(math.lgamma(nu + j // 2) - math.lgamma(j // 2 + 1.0))
            norm.append(coeff * f)
    scale = math.fsum(norm)
    if scale == 0.0 or not math.isfinite(scale):
        raise ArithmeticError(f"Miller recurrence for nu={nu}, t={t} lost its normalization")
    return f * math.exp(nu * math.log(0.5 * t)) / scale


def bessel_j(nu: float, t: float, *, max_terms: int = 500) -> float:
    """Bessel function of the first kind :math:`J_\\nu(t)` for ``t > 0``.

    Power series (summed with ``math.fsum``) for ``t <= 8``; beyond that the
    series cancels too much, and Miller's backward recurrence is used.
    Valid for ``-1/2 <= nu <= 10`` and ``0 < t <= 30``.

    Raises
    ------
    ValueError
        Outside the supported range.
    ArithmeticError
        If the series has not converged after ``max_terms`` terms.
    """
    if nu < -0.5 or nu > BESSEL_NU_MAX:
        raise ValueError(f"nu must lie in [-1/2, {BESSEL_NU_MAX}], got {nu}")
    if not 0.0 < t <= BESSEL_T_MAX:
        raise ValueError(f"t must lie in (0, {BESSEL_T_MAX}], got {t}")
    if t <= SERIES_T_MAX:
        return _bessel_series(nu, t, max_terms)
    return _bessel_miller(nu, t)


def bessel_first_zero(nu: float, *, ceiling: float = BESSEL_T_MAX, tol: float = 1e-13) -> float:
    """Smallest positive zero :math:`j_\\nu` of :math:`J_\\nu`.

    Scans ``(0, ceiling]`` with step 0.05 for the first sign change, then
    bisects the bracket down to ``tol``.
    """
    if nu < -0.5:
        raise ValueError(f"need nu >= -1/2, got {nu}")
    ceiling = min(ceiling, BESSEL_T_MAX)
    lo = ZERO_SCAN_STEP
    f_lo = bessel_j(nu, lo)
    hi = None
    k = 2
    while k * ZERO_SCAN_STEP <= ceiling + 1e-12:
        x = k * ZERO_SCAN_STEP
        f_x = bessel_j(nu, x)
        if f_x == 0.0:
            return x
        if math.copysign(1.0, f_x) != math.copysign(1.0, f_lo):
            hi = x
            break
        lo, f_lo = x, f_x
        k += 1
    if hi is None:
        raise ArithmeticError(f"no sign change of J_{nu} found below {ceiling}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = bessel_j(nu, mid)
        if f_mid == 0.0:
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule on ``[-1, 1]``: increasing nodes, positive weights."""

    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights transplanted affinely onto ``[a, b]``."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights

    def integrate(self, f, a: float = -1.0, b: float = 1.0) -> float:
        x, w = self.mapped(a, b)
        return float(np.dot(w, f(x)))


def gauss_legendre(n: int, *, tol: float = 1e-15, max_iter: int = 100) -> QuadratureRule:
    """``n``-point Gauss--Legendre rule.

    Legendre roots by Newton's method started from Chebyshev points; the
    weights come from the derivative at the converged roots.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"need a positive node count, got {n!r}")
    n = int(n)
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(max_iter):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    else:
        raise ArithmeticError(f"Gauss-Legendre Newton iteration failed for n={n}")
    # derivative at the converged nodes for the weights
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # symmetrize to kill the last-bit asymmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(nodes=x, weights=w)
