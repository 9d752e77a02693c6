"""Pick functions built from the first Dirichlet eigenfunction of a cap.

Pipeline for given ``(d, L, theta)``:

1. ``cap_first_eigen`` solves the zonal Dirichlet problem on the cap of
   radius ``r = theta / (2L)`` by shooting.
2. ``f0_build`` extends the eigenfunction by zero, scales it to
   ``||f0||^2 = pi_L`` and computes its Funk--Hecke coefficients.
3. ``build_pick_function`` forms ``F_L = (1 + Delta / (L(L+d-1))) (f0 * f0)``
   in coefficient space.
4. ``verify_lemma`` checks support, coefficient signs and positivity at 1;
   ``certified_riesz_lower`` turns the pick function into a lower Riesz
   bound for separated configurations.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .harmonics import (
    ZonalFunction,
    dim_harmonics,
    dim_pi,
    funk_hecke_coeffs,
    sphere_weight_total,
    zonal_synthesize,
)
from .specfun import bessel_first_zero, gauss_legendre
from .sphere import PointConfiguration, separation_radius

__all__ = [
    "CapEigenpair",
    "PickFunction",
    "LemmaReport",
    "PickFunctionWarning",
    "cap_first_eigen",
    "f0_build",
    "zonal_selfconvolve",
    "build_pick_function",
    "verify_lemma",
    "lemma_constants",
    "certified_riesz_lower",
]

SHOOT_START = 1e-6
PROFILE_POINTS = 2048
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14
# minimum ellmax * theta / L; narrow caps need more coefficients than 8L
CAP_RESOLUTION = 42.0
# on the circle the truncated synthesis leaks more slowly (about ellmax^-1.5)
CAP_RESOLUTION_CIRCLE = 64.0


class PickFunctionWarning(UserWarning):
    """The pick function is not positive at t = 1 (theta below threshold)."""


# cap eigenproblem ----------------------------------------------------------------
#
# In the scaled variable s = t / r, with S(s) = sin(r s) / r and mu = lambda r^2,
# the radial equation u'' + (d-1) cot(t) u' + lambda u = 0 becomes the first
# order system
#     du/ds = w / S^{d-1},   dw/ds = -mu S^{d-1} u,
# with w = S^{d-1} du/ds. Everything is O(1) regardless of r.


def _series_start(d: int, r: float, mu: float, s0: float) -> tuple[float, float]:
    lam = mu / (r * r)
    a = -lam / (2.0 * d)
    b = a * (2.0 * (d - 1) / 3.0 - lam) / (4.0 * (d + 2))
    t0 = r * s0
    u0 = 1.0 + a * t0 ** 2 + b * t0 ** 4
    du_dt = 2.0 * a * t0 + 4.0 * b * t0 ** 3
    S = math.sin(t0) / r
    return u0, S ** (d - 1) * r * du_dt


def _shoot(d: int, r: float, mu: float, *, dense: bool = False):
    s0 = SHOOT_START
    y0 = _series_start(d, r, mu, s0)

    def rhs(s, y):
        S = math.sin(r * s) / r
        Sp = S ** (d - 1)
        return (y[1] / Sp, -mu * Sp * y[0])

    def hits_zero(s, y):
        return y[0]

    hits_zero.terminal = not dense
    hits_zero.direction = -1
    return solve_ivp(rhs, (s0, 1.0), y0, method="DOP853", rtol=ODE_RTOL, atol=ODE_ATOL,
                     events=hits_zero, dense_output=dense)


def _has_zero(d: int, r: float, mu: float) -> bool:
    sol = _shoot(d, r, mu)
    return sol.t_events[0].size > 0 or sol.y[0, -1] <= 0.0


@dataclass(frozen=True, eq=False)
class CapEigenpair:
    """First Dirichlet eigenpair of the geodesic cap of radius ``radius`` on S^d."""

    dim: int
    radius: float
    lambda0: float
    grid: np.ndarray
    profile: np.ndarray
    residual: float
    _solution: object = field(repr=False, default=None)

    def u(self, t) -> np.ndarray:
        """Eigenfunction (``u(0) = 1``) at geodesic radius ``t``; zero outside the cap."""
        t = np.asarray(t, dtype=float)
        s = t / self.radius
        out = np.zeros_like(t)
        inside = (s >= SHOOT_START) & (s <= 1.0)
        if np.any(inside):
            out[inside] = self._solution(s[inside])[0]
        near = (s >= 0.0) & (s < SHOOT_START)
        if np.any(near):
            lam, d = self.lambda0, self.dim
            a = -lam / (2.0 * d)
            b = a * (2.0 * (d - 1) / 3.0 - lam) / (4.0 * (d + 2))
            out[near] = 1.0 + a * t[near] ** 2 + b * t[near] ** 4
        return out


def _radial_residual(d: int, lam: float, t: np.ndarray, u: np.ndarray) -> float:
    # fourth-order central differences on the uniform grid
    h = t[1] - t[0]
    k = slice(2, len(t) - 2)
    du = (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / (12 * h)
    d2u = (-u[:-4] + 16 * u[1:-3] - 30 * u[2:-2] + 16 * u[3:-1] - u[4:]) / (12 * h * h)
    res = d2u + (d - 1) / np.tan(t[k]) * du + lam * u[k]
    return float(np.max(np.abs(res)) / lam)


def cap_first_eigen(d: int, r: float, *, n_grid: int = PROFILE_POINTS,
                    rel_tol: float = 1e-12) -> CapEigenpair:
    """First Dirichlet eigenvalue of the Laplace--Beltrami operator on a cap.

    Shooting from the pole with a series start, bisection on the eigenvalue
    with the predicate "the shot solution vanishes inside the cap", which
    is monotone in the eigenvalue for the first mode. The initial bracket
    is ``[0.5, 2] (j_{(d-2)/2} / r)^2`` and is widened if needed.

    ``residual`` is the max-norm residual of the radial equation on the
    interior grid, relative to the eigenvalue.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not 0.0 < r < math.pi:
        raise ValueError(f"cap radius must lie in (0, pi), got {r}")
    j = bessel_first_zero((d - 2) / 2)
    lo, hi = 0.5 * j * j, 2.0 * j * j
    for _ in range(60):
        if not _has_zero(d, r, lo):
            break
        lo *= 0.5
    else:
        raise ArithmeticError("could not bracket the first cap eigenvalue from below")
    for _ in range(60):
        if _has_zero(d, r, hi):
            break
        hi *= 2.0
    else:
        raise ArithmeticError("could not bracket the first cap eigenvalue from above")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if _has_zero(d, r, mid):
            hi = mid
        else:
            lo = mid
    mu = 0.5 * (lo + hi)
    sol = _shoot(d, r, mu, dense=True)
    lam = mu / (r * r)
    grid = np.linspace(0.0, r, n_grid)
    pair = CapEigenpair(d, r, lam, grid, np.empty(0), 0.0, sol.sol)
    profile = pair.u(grid)
    res = _radial_residual(d, lam, grid, profile)
    return CapEigenpair(d, r, lam, grid, profile, res, sol.sol)


# f0 and its square --------------------------------------------------------------


def _cap_quadrature(r: float, ellmax: int) -> tuple[np.ndarray, np.ndarray]:
    n = 64 + 4 * int(math.ceil(ellmax * r))
    rule = gauss_legendre(n)
    return rule.mapped(0.0, r)


def default_ellmax(L: int, theta: float, d: int = 2) -> int:
    res = CAP_RESOLUTION_CIRCLE if d == 1 else CAP_RESOLUTION
    return max(8 * L, math.ceil(res * L / theta))


def f0_build(d: int, L: int, theta: float, ellmax: int | None = None, *,
             eigen: CapEigenpair | None = None) -> ZonalFunction:
    """Cap eigenfunction at radius ``theta / 2L``, scaled to ``||f0||^2 = pi_L``.

    Returns a zonal function carrying both the pointwise evaluator (zero
    beyond the cap) and the coefficients ``f0_hat(0..ellmax)``; default
    ``ellmax = 8L``. The scale factor and eigenpair are attached as
    attributes ``scale`` and ``eigen``.
    """
    if L < 1 or theta <= 0:
        raise ValueError("need L >= 1 and theta > 0")
    r = theta / (2.0 * L)
    if r >= math.pi:
        raise ValueError(f"cap radius theta/2L = {r} is not below pi")
    ellmax = default_ellmax(L, theta, d) if ellmax is None else int(ellmax)
    eig = cap_first_eigen(d, r) if eigen is None else eigen
    phi, w = _cap_quadrature(r, ellmax)
    u = eig.u(phi)
    norm2 = float(np.dot(w, u * u * np.sin(phi) ** (d - 1))) / sphere_weight_total(d)
    scale = math.sqrt(dim_pi(d, L) / norm2)

    def f0(t):
        ang = np.arccos(np.clip(t, -1.0, 1.0))
        return scale * eig.u(ang)

    zf = ZonalFunction(dim=d, evaluator=f0, radius=r)
    coeffs = funk_hecke_coeffs(zf, d, ellmax, n_nodes=len(phi))
    zf.coeffs = coeffs
    zf.scale = scale
    zf.eigen = eig
    return zf


def zonal_selfconvolve(f: ZonalFunction) -> ZonalFunction:
    """``f * f``: coefficients squared (probability-measure convolution)."""
    if f.coeffs is None:
        raise ValueError("self-convolution needs coefficients")
    return ZonalFunction(dim=f.dim, coeffs=f.coeffs ** 2, radius=min(2.0 * f.radius, math.pi))


# the pick function -----------------------------------------------------------------


def laplace_multiplier(d: int, L: int, ellmax: int) -> np.ndarray:
    """``1 - ell (ell + d - 1) / (L (L + d - 1))`` for ``ell = 0..ellmax``."""
    ell = np.arange(ellmax + 1, dtype=float)
    return 1.0 - ell * (ell + d - 1) / (L * (L + d - 1))


@dataclass(eq=False)
class PickFunction:
    """Coefficient-space description of ``F_L`` and its certificate ingredients."""

    dim: int
    degree: int
    theta: float
    lambda0: float
    f0_coeffs: np.ndarray
    FL_coeffs: np.ndarray
    FL_at_one: float
    B_max: float
    ellmax: int
    conv_at_one: float
    conv_at_one_truncated: float
    positive: bool
    f0: ZonalFunction = field(repr=False, default=None)

    @property
    def pi_L(self) -> int:
        return dim_pi(self.dim, self.degree)

    @property
    def support_radius(self) -> float:
        return min(self.theta / self.degree, math.pi)

    @property
    def zonal(self) -> ZonalFunction:
        return ZonalFunction(dim=self.dim, coeffs=self.FL_coeffs, radius=self.support_radius)

    def evaluate(self, t):
        """Truncated synthesis of ``F_L`` at ``t``."""
        return zonal_synthesize(self.zonal, t)

    @property
    def tail_mass(self) -> float:
        """Relative Parseval mass of ``f0`` missing beyond ``ellmax``."""
        return (self.conv_at_one - self.conv_at_one_truncated) / self.conv_at_one

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "degree": self.degree,
            "theta": self.theta,
            "lambda0": self.lambda0,
            "ellmax": self.ellmax,
            "FL_at_one": self.FL_at_one,
            "FL_at_one_over_pi_L": self.FL_at_one / self.pi_L,
            "B_max": self.B_max,
            "positive": self.positive,
            "tail_mass": self.tail_mass,
            "f0_coeffs": self.f0_coeffs.tolist(),
            "FL_coeffs": self.FL_coeffs.tolist(),
        }


def build_pick_function(d: int, L: int, theta: float, ellmax: int | None = None) -> PickFunction:
    """Assemble ``F_L`` for ``(d, L, theta)``.

    ``F_L_hat(ell) = (1 - ell(ell+d-1)/(L(L+d-1))) f0_hat(ell)^2``,
    ``F_L(1) = (1 - lambda0/(L(L+d-1))) (f0 * f0)(1)`` with
    ``(f0 * f0)(1) = ||f0||^2 = pi_L``, and ``B_max = max_{ell <= L} F_L_hat``.
    Emits :class:`PickFunctionWarning` when ``F_L(1) <= 0``.
    """
    f0 = f0_build(d, L, theta, ellmax)
    ellmax = f0.ellmax
    conv = zonal_selfconvolve(f0)
    FL = laplace_multiplier(d, L, ellmax) * conv.coeffs
    pi_L = dim_pi(d, L)
    lam0 = f0.eigen.lambda0
    factor = 1.0 - lam0 / (L * (L + d - 1))
    h = np.array([dim_harmonics(d, ell) for ell in range(ellmax + 1)], dtype=float)
    FL_one = factor * pi_L
    if FL_one <= 0:
        warnings.warn(
            f"F_L(1) <= 0: lambda0 = {lam0:.6g} exceeds L(L+d-1) = {L * (L + d - 1)}; theta too small",
            PickFunctionWarning, stacklevel=2)
    return PickFunction(
        dim=d, degree=L, theta=float(theta), lambda0=lam0,
        f0_coeffs=f0.coeffs, FL_coeffs=FL, FL_at_one=FL_one,
        B_max=float(np.max(FL[: L + 1])), ellmax=ellmax,
        conv_at_one=float(pi_L), conv_at_one_truncated=float(np.dot(h, conv.coeffs)),
        positive=FL_one > 0, f0=f0,
    )


@dataclass(frozen=True)
class LemmaReport:
    """Outcome of the four lemma checks on one pick function."""

    finite: bool
    support: bool
    support_max: float
    signs: bool
    max_coeff_beyond_L: float
    coeff_constant: float
    positive: bool
    FL_one_over_pi_L: float

    @property
    def all_pass(self) -> bool:
        return self.finite and self.support and self.signs and self.positive

    def items(self) -> tuple[bool, bool, bool, bool]:
        return (self.finite, self.support, self.signs, self.positive)


def verify_lemma(pf: PickFunction, *, support_tol: float = 1e-3, sign_tol: float = 1e-12,
                 lower: float = 0.0, n_probe: int = 500) -> LemmaReport:
    """Check the four lemma properties of ``F_L`` numerically.

    1. coefficients and their Parseval sum are finite;
    2. ``|F_L(t)| <= support_tol * pi_L`` for ``t <= cos(theta/L) - 0.01``;
    3. ``F_L_hat(ell) <= sign_tol`` for ``ell > L``; ``B_max / theta^d`` is
       reported as the coefficient constant (compare across L with
       :func:`lemma_constants`);
    4. ``lower < F_L(1) / pi_L <= 1``.
    """
    d, L = pf.dim, pf.degree
    pi_L = pf.pi_L
    h = np.array([dim_harmonics(d, ell) for ell in range(pf.ellmax + 1)], dtype=float)
    finite = bool(np.all(np.isfinite(pf.FL_coeffs)) and np.isfinite(np.dot(h, pf.FL_coeffs ** 2)))

    edge = math.cos(min(pf.theta / L, math.pi)) - 0.01
    if edge > -1.0:
        t = np.linspace(-1.0, edge, n_probe)
        vals = pf.evaluate(t)
        finite = finite and bool(np.all(np.isfinite(vals)))
        support_max = float(np.max(np.abs(vals)))
    else:
        support_max = 0.0
    support = support_max <= support_tol * pi_L

    beyond = pf.FL_coeffs[L + 1:]
    max_beyond = float(beyond.max()) if beyond.size else -math.inf
    signs = max_beyond <= sign_tol

    ratio = pf.FL_at_one / pi_L
    positive = lower < ratio <= 1.0
    return LemmaReport(
        finite=finite, support=support, support_max=support_max / pi_L,
        signs=signs, max_coeff_beyond_L=max_beyond,
        coeff_constant=pf.B_max / pf.theta ** d,
        positive=positive, FL_one_over_pi_L=ratio,
    )


def lemma_constants(pfs: list[PickFunction], *, spread: float = 0.2) -> dict:
    """Stability of the hidden constants across degrees at fixed theta.

    Returns the coefficient constants ``B_max / theta^d`` and the ratios
    ``F_L(1) / pi_L``, and whether each constant stays within ``spread``
    of its mean.
    """
    cs = np.array([pf.B_max / pf.theta ** pf.dim for pf in pfs])
    ratios = np.array([pf.FL_at_one / pf.pi_L for pf in pfs])
    mean = float(cs.mean())
    return {
        "degrees": [pf.degree for pf in pfs],
        "coeff_constants": cs.tolist(),
        "FL_one_over_pi_L": ratios.tolist(),
        "coeff_stable": bool(np.all(np.abs(cs - mean) <= spread * mean)),
        "ratio_bounded": bool(np.all((ratios > 0) & (ratios <= 1))),
    }


def certified_riesz_lower(config: PointConfiguration, pf: PickFunction) -> float:
    """Lower bound ``F_L(1) / (B_max pi_L)`` for the normalized-kernel Gram.

    Valid when ``L * separation > theta``: then ``F_L`` vanishes at every
    off-diagonal inner product, the quadratic form with ``F_L`` reduces to
    ``F_L(1) |c|^2``, and nonpositive coefficients beyond ``L`` bound it by
    ``B_max pi_L c^T G c``.
    """
    if config.dim != pf.dim:
        raise ValueError(f"configuration on S^{config.dim}, pick function on S^{pf.dim}")
    L = pf.degree if config.degree is None else config.degree
    if L != pf.degree:
        raise ValueError(f"configuration degree {L} differs from pick-function degree {pf.degree}")
    if config.m >= 2:
        sep = separation_radius(config)
        if not L * sep > pf.theta:
            raise ValueError(f"separation hypothesis fails: L*delta = {L * sep:.6g} <= theta = {pf.theta:.6g}")
    if not (pf.FL_at_one > 0 and pf.B_max > 0):
        raise ValueError("pick function is not positive at 1; theta below the Bessel threshold")
    return pf.FL_at_one / (pf.B_max * pf.pi_L)
