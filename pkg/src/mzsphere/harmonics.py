"""Spherical harmonics, the reproducing kernel of Pi_L, and zonal analysis.

All inner products are taken against the normalized (probability) surface
measure, so ``K_L(u, u) = dim Pi_L`` and the Funk--Hecke weight integrates
to one. Zonal functions are functions of ``t = <u, v>``.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .specfun import QuadratureRule, gauss_legendre, gegenbauer_normalized_table, jacobi_eval

__all__ = [
    "KernelSpec",
    "ZonalFunction",
    "QuadratureWarning",
    "dim_harmonics",
    "dim_pi",
    "kernel_eval",
    "kernel_matrix",
    "basis_eval",
    "basis_matrix",
    "sphere_weight_total",
    "funk_hecke_coeff",
    "funk_hecke_coeffs",
    "zonal_synthesize",
    "product_gauss_grid",
]


class QuadratureWarning(UserWarning):
    """Two quadrature resolutions disagree beyond tolerance."""


def dim_harmonics(d: int, ell: int) -> int:
    """Dimension ``h_ell`` of the degree-``ell`` harmonics on S^d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if ell < 0:
        raise ValueError("ell must be >= 0")
    if ell == 0:
        return 1
    if d == 1:
        return 2
    return (2 * ell + d - 1) * math.comb(ell + d - 1, ell) // (ell + d - 1)


def dim_pi(d: int, L: int) -> int:
    """Dimension ``pi_L`` of the polynomials of degree at most ``L`` on S^d."""
    return sum(dim_harmonics(d, ell) for ell in range(L + 1))


@dataclass(frozen=True)
class KernelSpec:
    """Reproducing kernel of Pi_L on S^d, written with ``lambda = (d - 2) / 2``."""

    dim: int
    degree: int

    def __post_init__(self):
        if self.dim < 1 or self.degree < 0:
            raise ValueError("need dim >= 1 and degree >= 0")

    @property
    def lambda_param(self) -> float:
        return (self.dim - 2) / 2

    @property
    def normalization(self) -> int:
        return dim_pi(self.dim, self.degree)

    @property
    def jacobi_at_one(self) -> float:
        lam = self.lambda_param
        return jacobi_eval(lam + 1.0, lam, self.degree, 1.0)

    @property
    def constant(self) -> float:
        """``C_{d,L}`` in ``K_L = C_{d,L} P_L^{(1+lambda, lambda)}``."""
        return self.normalization / self.jacobi_at_one


def kernel_eval(spec: KernelSpec, t):
    """``K_L(t) = pi_L P_L^{(1+lam, lam)}(t) / P_L^{(1+lam, lam)}(1)``."""
    lam = spec.lambda_param
    return spec.constant * jacobi_eval(lam + 1.0, lam, spec.degree, np.clip(t, -1.0, 1.0))


def kernel_matrix(spec: KernelSpec, points: np.ndarray, other: np.ndarray | None = None) -> np.ndarray:
    """``[K_L(<z_i, w_j>)]`` for rows of ``points`` (and ``other``)."""
    other = points if other is None else other
    return kernel_eval(spec, points @ other.T)


# orthonormal bases for d = 1, 2 -----------------------------------------------


def _normalized_alf(L: int, t: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Fully normalized associated Legendre functions, ``out[l, m, :]``.

    Normalized so that ``P[l, m](cos theta) * cos(m phi)`` has unit mean
    square over the sphere (the factor 2 for m > 0 included).
    """
    out = np.zeros((L + 1, L + 1, t.size))
    out[0, 0] = 1.0
    for m in range(1, L + 1):
        factor = math.sqrt(3.0) if m == 1 else math.sqrt((2 * m + 1) / (2 * m))
        out[m, m] = factor * u * out[m - 1, m - 1]
    for m in range(0, L):
        out[m + 1, m] = math.sqrt(2 * m + 3) * t * out[m, m]
    for m in range(0, L + 1):
        for ell in range(m + 2, L + 1):
            a = math.sqrt((2 * ell - 1) * (2 * ell + 1) / ((ell - m) * (ell + m)))
            b = math.sqrt((2 * ell + 1) * (ell + m - 1) * (ell - m - 1)
                          / ((ell - m) * (ell + m) * (2 * ell - 3)))
            out[ell, m] = a * t * out[ell - 1, m] - b * out[ell - 2, m]
    return out


def basis_matrix(d: int, L: int, points) -> np.ndarray:
    """Real orthonormal basis of Pi_L evaluated at points, shape ``(m, pi_L)``.

    Ordering is by degree; inside degree ``ell`` the zonal function first,
    then ``cos``/``sin`` pairs for ``m = 1..ell``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if d == 1:
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        cols = [np.ones_like(theta)]
        for k in range(1, L + 1):
            cols.append(math.sqrt(2.0) * np.cos(k * theta))
            cols.append(math.sqrt(2.0) * np.sin(k * theta))
        return np.column_stack(cols)
    if d == 2:
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        u = np.hypot(x, y)
        phi = np.arctan2(y, x)
        alf = _normalized_alf(L, np.clip(z, -1.0, 1.0), u)
        cols = []
        for ell in range(L + 1):
            cols.append(alf[ell, 0])
            for m in range(1, ell + 1):
                cols.append(alf[ell, m] * np.cos(m * phi))
                cols.append(alf[ell, m] * np.sin(m * phi))
        return np.column_stack(cols)
    raise ValueError(f"explicit bases exist only for d in (1, 2), got d={d}")


def basis_eval(d: int, L: int, p) -> np.ndarray:
    """Basis vector of length ``pi_L`` at a single point."""
    return basis_matrix(d, L, np.asarray(p, dtype=float).reshape(1, -1))[0]


def product_gauss_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on S^2: ``n`` Gauss nodes in ``cos theta`` times ``2n`` in ``phi``.

    Weights sum to one. Exact for polynomials of degree ``<= 2n - 1``.
    """
    rule = gauss_legendre(n)
    nphi = 2 * n
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    t, ph = np.meshgrid(rule.nodes, phi, indexing="ij")
    w = np.repeat(rule.weights[:, None] / (2.0 * nphi), nphi, axis=1)
    s = np.sqrt(1.0 - t * t)
    pts = np.column_stack([(s * np.cos(ph)).ravel(), (s * np.sin(ph)).ravel(), t.ravel()])
    return pts, w.ravel()


# Funk--Hecke analysis --------------------------------------------------------


@dataclass
class ZonalFunction:
    """A function of ``t = <u, v>`` on S^d.

    Either (or both) of ``coeffs`` (Funk--Hecke coefficients for
    ``ell = 0..len - 1``) and ``evaluator`` (vectorized callable of ``t``).
    ``radius`` is the geodesic radius of the support around the pole; the
    function is taken to vanish for ``t < cos(radius)``.
    """

    dim: int
    coeffs: np.ndarray | None = None
    evaluator: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    radius: float = math.pi

    def __post_init__(self):
        if self.coeffs is not None:
            self.coeffs = np.asarray(self.coeffs, dtype=float)
            if not np.all(np.isfinite(self.coeffs)):
                raise ValueError("coefficients must be finite")
        if self.coeffs is None and self.evaluator is None:
            raise ValueError("need coefficients or an evaluator")

    @property
    def ellmax(self) -> int:
        return -1 if self.coeffs is None else len(self.coeffs) - 1

    def __call__(self, t):
        if self.evaluator is not None:
            return self.evaluator(np.asarray(t, dtype=float))
        return zonal_synthesize(self, t)


def sphere_weight_total(d: int) -> float:
    """``int_0^pi sin^{d-1}(phi) dphi``."""
    return math.sqrt(math.pi) * math.exp(math.lgamma(d / 2) - math.lgamma((d + 1) / 2))


@functools.lru_cache(maxsize=32)
def _cached_rule(n: int) -> QuadratureRule:
    return gauss_legendre(n)


def _fh_integrate(f: ZonalFunction, d: int, ellmax: int, n_nodes: int) -> np.ndarray:
    # angle substitution t = cos(phi): no endpoint singularity for any d,
    # and the support radius becomes an integration limit
    rule = _cached_rule(n_nodes)
    phi, w = rule.mapped(0.0, min(f.radius, math.pi))
    t = np.cos(phi)
    vals = np.asarray(f.evaluator(t), dtype=float) * np.sin(phi) ** (d - 1) * w
    table = gegenbauer_normalized_table((d - 1) / 2, ellmax, t)
    return table @ vals / sphere_weight_total(d)


def _default_nodes(ellmax: int) -> int:
    return 4 * (ellmax + 1)


def funk_hecke_coeffs(f: ZonalFunction, d: int | None = None, ellmax: int = 0,
                      n_nodes: int | None = None, *, check: bool = True,
                      tol: float = 1e-7) -> np.ndarray:
    """All Funk--Hecke coefficients ``f_hat(0..ellmax)`` of a zonal function.

    ``f_hat(ell) = int f(t) R_ell(t) w(t) dt / int w(t) dt`` with
    ``R_ell = C_ell^{(d-1)/2} / C_ell^{(d-1)/2}(1)`` and
    ``w(t) = (1 - t^2)^{(d-2)/2}``. With ``check`` the integral is repeated
    with twice the nodes and a :class:`QuadratureWarning` is issued if the
    two disagree by more than ``tol``.
    """
    d = f.dim if d is None else d
    if f.evaluator is None:
        if f.coeffs is None:
            raise ValueError("zonal function has nothing to analyze")
        out = np.zeros(ellmax + 1)
        k = min(ellmax, f.ellmax) + 1
        out[:k] = f.coeffs[:k]
        return out
    n = _default_nodes(ellmax) if n_nodes is None else int(n_nodes)
    coeffs = _fh_integrate(f, d, ellmax, n)
    if check:
        fine = _fh_integrate(f, d, ellmax, 2 * n)
        err = float(np.max(np.abs(fine - coeffs)))
        if err > tol * max(1.0, float(np.max(np.abs(fine)))):
            warnings.warn(f"Funk-Hecke quadrature unresolved: {n} vs {2 * n} nodes differ by {err:.2e}",
                          QuadratureWarning, stacklevel=2)
    return coeffs


def funk_hecke_coeff(f: ZonalFunction, d: int, ell: int, quad: QuadratureRule | None = None) -> float:
    """Single Funk--Hecke coefficient ``f_hat(ell)``.

    ``quad`` fixes the Gauss--Legendre rule (mapped onto the support in the
    angle variable); by default ``4 (ell + 1)`` nodes with a doubled check.
    """
    if quad is None:
        return float(funk_hecke_coeffs(f, d, ell)[ell])
    return float(_fh_integrate(f, d, ell, len(quad))[ell])


def zonal_synthesize(f: ZonalFunction, t):
    """``F(t) = sum_ell f_hat(ell) h_ell R_ell(t)`` (addition theorem)."""
    if f.coeffs is None:
        raise ValueError("zonal function has no coefficients")
    d = f.dim
    ellmax = f.ellmax
    h = np.array([dim_harmonics(d, ell) for ell in range(ellmax + 1)], dtype=float)
    table = gegenbauer_normalized_table((d - 1) / 2, ellmax, t)
    out = (f.coeffs * h) @ table
    return out if np.ndim(t) else float(out[0])
