"""Frame and Gram spectra, L^2-MZ and Riesz constants, and threshold certificates."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from ._backend import available_backends, kernels
from .harmonics import KernelSpec, basis_matrix, dim_pi, kernel_matrix, product_gauss_grid
from .specfun import bessel_first_zero
from .sphere import ArrayFamily, PointConfiguration, mesh_norm, separation_radius

__all__ = [
    "SpectralBounds",
    "CertificateRow",
    "Certificate",
    "sym_eigs",
    "frame_matrix",
    "mz_constant_p2",
    "riesz_bounds",
    "interpolation_threshold",
    "MZ_THRESHOLD",
    "certify_interpolation",
    "certify_mz",
    "mz_estimate_p",
    "reindex_family",
]

RANK_RTOL = 1e-9
SYMMETRY_RTOL = 1e-12
MZ_THRESHOLD = math.pi / 2
CSV_COLUMNS = ("L", "m_L", "L_delta", "L_rho_certified", "threshold", "margin", "verdict")


def sym_eigs(M, *, tol: float = 1e-12, max_sweeps: int = 100, backend: str | None = None) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps stop once the off-diagonal Frobenius norm is below ``tol * ||M||_F``.
    ``backend`` selects ``"compiled"`` or ``"python"`` kernels explicitly.
    """
    a = np.array(M, dtype=float, order="C", copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
        raise ValueError(f"matrix is not symmetric: max |M - M^T| = {asym:.3e}")
    if a.shape[0] == 0:
        return np.empty(0)
    a = 0.5 * (a + a.T)
    kern = kernels if backend is None else available_backends()[backend]
    diag, sweeps, off = kern.jacobi_eigenvalues(np.ascontiguousarray(a), tol, max_sweeps)
    frob = math.sqrt(float(np.sum(np.asarray(diag) ** 2)) + off * off)
    if off > tol * frob:
        raise ArithmeticError(f"Jacobi did not converge in {max_sweeps} sweeps (off = {off:.3e})")
    return np.sort(np.asarray(diag))


def _degree(config: PointConfiguration, degree: int | None) -> int:
    L = config.degree if degree is None else degree
    if L is None:
        raise ValueError("configuration has no degree; pass one explicitly")
    return int(L)


def frame_matrix(config: PointConfiguration, degree: int | None = None) -> np.ndarray:
    """``E^T E`` (``pi_L x pi_L``) for d <= 2, the kernel matrix (``m x m``) for d >= 3.

    Both have the same nonzero spectrum.
    """
    L = _degree(config, degree)
    if config.dim <= 2:
        E = basis_matrix(config.dim, L, config.points)
        return E.T @ E
    return kernel_matrix(KernelSpec(config.dim, L), config.points)


@dataclass(frozen=True)
class SpectralBounds:
    """Extreme eigenvalues of a frame or Gram matrix and the derived constants.

    For ``kind == "frame"`` the bounds are ``A = lambda_min / pi_L`` and
    ``B = lambda_max / pi_L``; for ``kind == "riesz"`` they are the extreme
    eigenvalues of the normalized-kernel Gram. ``c2 = max(B, 1/A)`` in both
    cases, infinite when the relevant rank is short.
    """

    kind: str
    degree: int
    size: int
    lambda_min: float
    lambda_max: float
    numeric_rank: int
    required_rank: int
    lower: float
    upper: float
    c2: float
    note: str = ""

    @property
    def mz_lower(self) -> float:
        return self.lower

    @property
    def mz_upper(self) -> float:
        return self.upper

    @property
    def full_rank(self) -> bool:
        return self.numeric_rank >= self.required_rank

    def to_dict(self) -> dict:
        out = asdict(self)
        out["c2"] = None if math.isinf(self.c2) else self.c2
        return out


def _numeric_rank(ev: np.ndarray) -> int:
    top = float(ev[-1]) if ev.size else 0.0
    if top <= 0:
        return 0
    return int(np.count_nonzero(ev > RANK_RTOL * top))


def mz_constant_p2(config: PointConfiguration, degree: int | None = None, *,
                   backend: str | None = None) -> SpectralBounds:
    """Best constant ``C_2`` of the L^2 MZ inequality for one configuration."""
    L = _degree(config, degree)
    pi_L = dim_pi(config.dim, L)
    ev = sym_eigs(frame_matrix(config, L), backend=backend)
    rank = _numeric_rank(ev)
    # kernel path: the nonzero spectrum is the top pi_L eigenvalues
    top = ev[-pi_L:] if ev.size >= pi_L else ev
    lam_min = max(float(top[0]), 0.0)
    lam_max = float(ev[-1])
    A, B = lam_min / pi_L, lam_max / pi_L
    if rank < pi_L:
        return SpectralBounds("frame", L, ev.size, lam_min, lam_max, rank, pi_L, A, B, math.inf,
                              note=f"not sampling for Pi_L: numeric rank {rank} < {pi_L}")
    return SpectralBounds("frame", L, ev.size, lam_min, lam_max, rank, pi_L, A, B, max(B, 1.0 / A))


def riesz_bounds(config: PointConfiguration, degree: int | None = None, *,
                 backend: str | None = None) -> SpectralBounds:
    """Extreme eigenvalues of ``G_ij = K_L(z_i, z_j) / pi_L`` (normalized kernels)."""
    L = _degree(config, degree)
    spec = KernelSpec(config.dim, L)
    G = kernel_matrix(spec, config.points) / spec.normalization
    ev = sym_eigs(G, backend=backend)
    rank = _numeric_rank(ev)
    lam_min, lam_max = float(ev[0]), float(ev[-1])
    m = config.m
    if rank < m or lam_min <= 0:
        return SpectralBounds("riesz", L, m, lam_min, lam_max, rank, m, lam_min, lam_max, math.inf,
                              note="normalized kernels are linearly dependent")
    return SpectralBounds("riesz", L, m, lam_min, lam_max, rank, m, lam_min, lam_max,
                          max(lam_max, 1.0 / lam_min))


# certificates ------------------------------------------------------------------------


def interpolation_threshold(d: int) -> float:
    """``2 j_{(d-2)/2}``; equals pi for d = 1."""
    return 2.0 * bessel_first_zero((d - 2) / 2)


@dataclass(frozen=True)
class CertificateRow:
    L: int
    m_L: int
    L_delta: float
    L_rho_certified: float | None
    threshold: float
    margin: float
    passed: bool

    def csv_fields(self) -> list[str]:
        def fmt(x):
            return "" if x is None else repr(float(x))
        return [str(self.L), str(self.m_L), fmt(self.L_delta), fmt(self.L_rho_certified),
                fmt(self.threshold), fmt(self.margin), "pass" if self.passed else "fail"]


def _json_float(x):
    if x is None:
        return None
    return None if math.isinf(x) or math.isnan(x) else float(x)


@dataclass(frozen=True)
class Certificate:
    """Per-degree check of a theorem hypothesis over the degrees present in a family.

    ``verdict`` is ``"pass"`` iff every row has positive margin and every
    global condition in ``conditions`` holds. Nothing is claimed about
    degrees outside ``degrees``.
    """

    theorem: str
    dim: int
    threshold_value: float
    rows: tuple[CertificateRow, ...]
    conditions: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    skipped: tuple[int, ...] = ()

    @property
    def degrees(self) -> list[int]:
        return [r.L for r in self.rows]

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r.passed for r in self.rows) and all(self.conditions.values())

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    @property
    def per_degree(self) -> list[tuple[int, float, float, float]]:
        """``(L, measured product, threshold, margin)`` per tested degree."""
        return [(r.L, r.L_delta if self.theorem == "interpolation" else r.L_rho_certified,
                 r.threshold, r.margin) for r in self.rows]

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "dim": self.dim,
            "threshold_value": self.threshold_value,
            "verdict": self.verdict,
            "tested_degrees": self.degrees,
            "skipped_degrees": list(self.skipped),
            "conditions": self.conditions,
            "params": {k: _json_float(v) if isinstance(v, float) else v for k, v in self.params.items()},
            "rows": [{k: _json_float(v) if isinstance(v, float) else v for k, v in asdict(r).items()}
                     for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()


def certify_interpolation(family: ArrayFamily, theta: float | None = None) -> Certificate:
    """Separation hypothesis ``L * delta(Z(L)) > theta > 2 j_{(d-2)/2}`` per degree.

    ``theta`` defaults to ``2 j (1 + 1e-9)``. Degree 0 is skipped: ``L * delta``
    vanishes there and the hypothesis is only meaningful for ``L >= 1``.
    """
    if len(family) == 0:
        raise ValueError("empty family")
    d = family.dim
    thr = interpolation_threshold(d)
    theta = thr * (1.0 + 1e-9) if theta is None else float(theta)
    if not theta > 0:
        raise ValueError("theta must be positive")
    rows, skipped = [], []
    for L, cfg in family.items():
        if L == 0:
            skipped.append(L)
            continue
        sep = separation_radius(cfg) if cfg.m >= 2 else math.inf
        prod = L * sep
        margin = prod - theta
        rows.append(CertificateRow(L, cfg.m, prod, None, theta, margin, margin > 0))
    return Certificate("interpolation", d, thr, tuple(rows),
                       conditions={"theta_above_bessel_threshold": theta > thr},
                       params={"theta": theta}, skipped=tuple(skipped))


def certify_mz(family: ArrayFamily, eps: float = 1e-3, grid_factor: int = 100) -> Certificate:
    """Mesh-norm hypothesis ``L * rho_certified(Z(L)) < pi / 2`` plus uniform separation.

    Uniform separation is measured as ``min_L (L + 1) * delta(Z(L))``, which
    stays meaningful at ``L = 0``, and compared with the floor ``eps``.
    The probe grid has ``grid_factor * m`` points.
    """
    if len(family) == 0:
        raise ValueError("empty family")
    rows = []
    sep_inf = math.inf
    for L, cfg in family.items():
        sep = separation_radius(cfg) if cfg.m >= 2 else math.inf
        sep_inf = min(sep_inf, (L + 1) * sep)
        mn = mesh_norm(cfg, grid_factor * cfg.m)
        prod = L * mn.certified
        margin = MZ_THRESHOLD - prod
        L_delta = L * sep if cfg.m >= 2 else math.inf
        rows.append(CertificateRow(L, cfg.m, L_delta, prod, MZ_THRESHOLD, margin, margin > 0))
    return Certificate("mz", family.dim, MZ_THRESHOLD, tuple(rows),
                       conditions={"uniformly_separated": sep_inf > eps},
                       params={"separation_infimum": sep_inf, "eps": float(eps),
                               "grid_factor": int(grid_factor)})


# p != 2 and re-indexing --------------------------------------------------------------


def _continuous_rule(d: int, L: int, fine: bool) -> tuple[np.ndarray, np.ndarray]:
    if d == 1:
        n = (64 if fine else 8) * (L + 1) + 8
        ang = 2.0 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(ang), np.sin(ang)]), np.full(n, 1.0 / n)
    return product_gauss_grid((8 if fine else 2) * (L + 1) + 8)


def mz_estimate_p(config: PointConfiguration, p: float, samples: int = 1000, seed: int = 0,
                  degree: int | None = None) -> float:
    """Monte Carlo lower estimate of the MZ constant ``C_p`` (ESTIMATE, not a bound from above).

    Draws Gaussian coefficient vectors in the orthonormal basis of Pi_L and
    returns the largest observed ``max(cont / disc, disc / cont)``, where
    ``disc = sum |Q(z_j)|^p / pi_L`` and ``cont = int |Q|^p`` (product Gauss
    rule). For ``p = inf`` the ratio is ``sup |Q| / max_j |Q(z_j)|`` with the
    sup taken over a fine grid.
    """
    if config.dim > 2:
        raise ValueError("p-estimates need an explicit basis (d in {1, 2})")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    p = float(p)
    if not p >= 1:
        raise ValueError("p must lie in [1, inf]")
    L = _degree(config, degree)
    pi_L = dim_pi(config.dim, L)
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((pi_L, samples))
    Ez = basis_matrix(config.dim, L, config.points) @ coeffs
    nodes, w = _continuous_rule(config.dim, L, fine=math.isinf(p))
    Eg = basis_matrix(config.dim, L, nodes) @ coeffs
    if math.isinf(p):
        cont = np.max(np.abs(Eg), axis=0)
        disc = np.max(np.abs(Ez), axis=0)
        return float(np.max(cont / disc))
    cont = w @ np.abs(Eg) ** p
    disc = np.sum(np.abs(Ez) ** p, axis=0) / pi_L
    return float(np.max(np.maximum(cont / disc, disc / cont)))


def _as_fraction(delta) -> Fraction:
    if isinstance(delta, Fraction):
        return delta
    # recover the intended rational (e.g. -1/3) from its float
    return Fraction(delta).limit_denominator(10 ** 9)


def reindex_family(family: ArrayFamily, delta, degrees: Iterable[int] | None = None) -> ArrayFamily:
    """``Z_delta(L) = Z(floor((1 + delta) L))``, re-keyed at ``L``.

    Without ``degrees`` every ``L`` of the family whose source degree is
    present is kept; explicitly requested degrees must have a source.
    """
    q = _as_fraction(delta)
    if not -1 < q < 1 and q != 1:
        raise ValueError("delta must lie in (-1, 1]")
    src = lambda L: math.floor((1 + q) * L)  # noqa: E731
    if degrees is None:
        targets = [L for L in family.degrees if src(L) in family.entries]
    else:
        targets = list(degrees)
        missing = [L for L in targets if src(L) not in family.entries]
        if missing:
            raise KeyError(f"source degrees {[src(L) for L in missing]} missing for L = {missing}")
    if not targets:
        raise ValueError("no degree has a source entry")
    entries = {}
    for L in targets:
        cfg = family[src(L)]
        entries[L] = PointConfiguration(cfg.dim, cfg.points, degree=L,
                                        label=f"{cfg.label}|reindex({q})<-L{src(L)}",
                                        allow_duplicates=True)
    return ArrayFamily(family.dim, entries)
