"""Point configurations on the unit sphere S^d and their geometry.

Points are stored as rows of an ``(m, d + 1)`` array. Geodesic distances
use ``2 * atan2(|u - v|, |u + v|)``, which equals ``arccos <u, v>`` but
keeps full relative accuracy for nearly coincident and nearly antipodal
pairs.
"""
from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from ._backend import kernels

__all__ = [
    "SpherePoint",
    "PointConfiguration",
    "ArrayFamily",
    "GeometryReport",
    "MeshNorm",
    "geodesic_distance",
    "pairwise_geodesic",
    "exp_map",
    "gen_roots_of_unity",
    "gen_fibonacci",
    "gen_random_uniform",
    "riesz_energy",
    "minimize_riesz_energy",
    "separation_radius",
    "mesh_norm",
    "analyze",
    "random_rotation",
]

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
PRUNE_THRESHOLD = 5000
DEFAULT_GRID_FACTOR = 100
# slack for the exact circle computation, absorbs rounding of atan2/subtraction
_CIRCLE_GUARD = 1e-14


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise ValueError("cannot place a zero or non-finite vector on the sphere")
    # leave rows that are already unit length bit-for-bit alone
    off = np.abs(norms - 1.0) > 4.0 * np.finfo(float).eps
    return np.where(off, x / norms, x)


def pairwise_geodesic(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Row-wise geodesic distance between broadcastable arrays of unit vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return 2.0 * np.arctan2(np.linalg.norm(u - v, axis=-1), np.linalg.norm(u + v, axis=-1))


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A unit vector in R^{d+1}; renormalized on construction."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.size < 2:
            raise ValueError("a sphere point needs at least two coordinates")
        c = _normalize_rows(c)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self) -> int:
        return self.coords.size - 1

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __eq__(self, other) -> bool:
        return isinstance(other, SpherePoint) and np.array_equal(self.coords, other.coords)

    def __hash__(self) -> int:
        return hash(self.coords.tobytes())


def _as_vector(p) -> np.ndarray:
    if isinstance(p, SpherePoint):
        return p.coords
    return SpherePoint(p).coords


def geodesic_distance(u, v) -> float:
    """Great-circle distance in ``[0, pi]``."""
    a, b = _as_vector(u), _as_vector(v)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size} coordinates")
    return float(pairwise_geodesic(a, b))


def exp_map(x) -> SpherePoint:
    """Exponential map at the north pole: ``(x sin|x| / |x|, cos|x|)``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    phi = float(np.linalg.norm(x))
    # np.sinc(z) = sin(pi z) / (pi z), so this is sin(phi) / phi with the 0 limit
    scale = np.sinc(phi / math.pi)
    return SpherePoint(np.append(x * scale, math.cos(phi)))


@dataclass(frozen=True, eq=False)
class PointConfiguration:
    """A finite set Z(L) of points on S^d, tagged with its degree L.

    Parameters
    ----------
    dim : int
        Sphere dimension ``d``; points live in R^{d+1}.
    points : array_like, shape (m, d + 1)
        Rows are renormalized to unit length.
    degree : int or None
        Polynomial degree the configuration is paired with.
    label : str
        Free-form provenance.
    allow_duplicates : bool
        Permit bitwise-identical rows (used for multiplicity experiments).
    """

    dim: int
    points: np.ndarray
    degree: int | None = None
    label: str = ""
    allow_duplicates: bool = field(default=False, repr=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"sphere dimension must be a positive integer, got {self.dim!r}")
        pts = np.ascontiguousarray(np.array(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != self.dim + 1:
            raise ValueError(f"points must have shape (m, {self.dim + 1}), got {pts.shape}")
        if pts.shape[0] < 1:
            raise ValueError("a configuration needs at least one point")
        pts = np.ascontiguousarray(_normalize_rows(pts))
        if not self.allow_duplicates and pts.shape[0] > 1:
            if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
                raise ValueError("configuration contains identical points")
        pts.setflags(write=False)
        if self.degree is not None and (int(self.degree) != self.degree or self.degree < 0):
            raise ValueError(f"degree must be a nonnegative integer, got {self.degree!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "points", pts)
        if self.degree is not None:
            object.__setattr__(self, "degree", int(self.degree))

    @property
    def m(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, i: int) -> SpherePoint:
        return SpherePoint(self.points[i])

    def with_degree(self, degree: int | None) -> PointConfiguration:
        return PointConfiguration(self.dim, self.points, degree, self.label, self.allow_duplicates)

    def rotated(self, q: np.ndarray) -> PointConfiguration:
        """Apply an orthogonal map to every point."""
        return PointConfiguration(self.dim, self.points @ np.asarray(q).T, self.degree,
                                  self.label, self.allow_duplicates)

    def subset(self, index) -> PointConfiguration:
        return PointConfiguration(self.dim, self.points[index], self.degree, self.label,
                                  self.allow_duplicates)

    # serialization -------------------------------------------------------

    def to_json(self) -> str:
        rows = ",\n    ".join("[" + ", ".join(f"{x:.17g}" for x in row) + "]" for row in self.points)
        return (
            "{\n"
            f'  "dim": {self.dim},\n'
            f'  "degree": {json.dumps(self.degree)},\n'
            f'  "label": {json.dumps(self.label)},\n'
            f'  "points": [\n    {rows}\n  ]\n'
            "}\n"
        )

    @classmethod
    def from_dict(cls, data: Mapping) -> PointConfiguration:
        try:
            dim = data["dim"]
            points = data["points"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"configuration is missing field {exc}") from None
        return cls(dim=dim, points=np.asarray(points, dtype=float),
                   degree=data.get("degree"), label=data.get("label", ""),
                   allow_duplicates=bool(data.get("allow_duplicates", False)))

    @classmethod
    def from_json(cls, text: str) -> PointConfiguration:
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> PointConfiguration:
        return cls.from_json(Path(path).read_text())


@dataclass
class ArrayFamily:
    """A family {Z(L)} of configurations keyed by degree."""

    dim: int
    entries: dict[int, PointConfiguration]

    def __post_init__(self):
        if any(cfg.degree is None for cfg in self.entries.values()):
            raise ValueError("every configuration in a family needs a degree")
        self.entries = dict(sorted(self.entries.items()))
        for deg, cfg in self.entries.items():
            if cfg.degree != deg:
                raise ValueError(f"entry at key {deg} has degree {cfg.degree}")
            if cfg.dim != self.dim:
                raise ValueError(f"entry at degree {deg} lives on S^{cfg.dim}, family is S^{self.dim}")

    @classmethod
    def from_configs(cls, configs: Iterable[PointConfiguration]) -> ArrayFamily:
        configs = list(configs)
        if not configs:
            raise ValueError("empty family")
        return cls(configs[0].dim, {c.degree: c for c in configs})

    @classmethod
    def build(cls, make: Callable[[int], PointConfiguration], degrees: Iterable[int]) -> ArrayFamily:
        return cls.from_configs(make(L).with_degree(L) for L in degrees)

    @property
    def degrees(self) -> list[int]:
        return list(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.values())

    def __getitem__(self, degree: int) -> PointConfiguration:
        return self.entries[degree]

    def items(self):
        return self.entries.items()

    def save(self, directory) -> Path:
        """Write one JSON file per degree plus ``manifest.json``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        files = []
        for deg, cfg in self.entries.items():
            name = f"L{deg:04d}.json"
            cfg.save(directory / name)
            files.append(name)
        manifest = directory / "manifest.json"
        manifest.write_text(json.dumps({"dim": self.dim, "configs": files}, indent=2) + "\n")
        return manifest

    @classmethod
    def load(cls, path) -> ArrayFamily:
        """Load from a manifest file or a directory holding one."""
        path = Path(path)
        if path.is_dir():
            manifest = path / "manifest.json"
            if manifest.exists():
                path = manifest
            else:
                return cls.from_configs(PointConfiguration.load(p) for p in sorted(path.glob("*.json")))
        data = json.loads(path.read_text())
        configs = [PointConfiguration.load(path.parent / name) for name in data["configs"]]
        fam = cls.from_configs(configs)
        if "dim" in data and data["dim"] != fam.dim:
            raise ValueError(f"manifest says S^{data['dim']}, files are S^{fam.dim}")
        return fam


# generators ---------------------------------------------------------------


def gen_roots_of_unity(L: int) -> PointConfiguration:
    """The ``2L + 1`` roots of unity on the circle, with degree ``L``."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    n = 2 * L + 1
    ang = 2.0 * np.pi * np.arange(n) / n
    return PointConfiguration(1, np.column_stack([np.cos(ang), np.sin(ang)]), L, f"roots-of-unity L={L}")


def gen_fibonacci(N: int, degree: int | None = None) -> PointConfiguration:
    """Spherical Fibonacci lattice of ``N`` points on S^2."""
    if N < 1:
        raise ValueError("N must be positive")
    i = np.arange(N)
    z = 1.0 - (2.0 * i + 1.0) / N
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = GOLDEN_ANGLE * i
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return PointConfiguration(2, pts, degree, f"fibonacci N={N}")


def gen_random_uniform(N: int, d: int, seed: int = 0) -> PointConfiguration:
    """``N`` i.i.d. uniform points on S^d (normalized Gaussian vectors)."""
    if N < 1 or d < 1:
        raise ValueError("need N >= 1 and d >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((N, d + 1))
    return PointConfiguration(d, g / np.linalg.norm(g, axis=1, keepdims=True), None,
                              f"random N={N} d={d} seed={seed}")


def random_rotation(n: int, seed: int = 0) -> np.ndarray:
    """Haar-random orthogonal ``n x n`` matrix."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


# Riesz energy -------------------------------------------------------------


def riesz_energy(config: PointConfiguration, s: float) -> float:
    """Sum over unordered pairs of ``|x_i - x_j|^{-s}``."""
    if s <= 0:
        raise ValueError("s must be positive")
    if config.m < 2:
        raise ValueError("energy needs at least two points")
    i, j = kernels.closest_pair(config.points)
    if not np.any(config.points[i] != config.points[j]):
        raise ValueError("coincident points: Riesz energy diverges")
    return float(kernels.riesz_energy(config.points, float(s)))


def minimize_riesz_energy(
    N: int,
    s: float,
    d: int,
    iters: int = 500,
    seed: int = 0,
    *,
    gtol: float = 1e-10,
    callback: Callable[[int, float], None] | None = None,
) -> PointConfiguration:
    """Projected gradient descent on the Riesz s-energy.

    Starts from ``gen_random_uniform(N, d, seed)``. Each step moves along
    the tangential component of the gradient and renormalizes; the step is
    accepted only if the Armijo condition holds, so the energy never
    increases between accepted iterates. ``callback(k, energy)`` is called
    after every accepted step.
    """
    if N < 2:
        raise ValueError("need at least two points")
    if s <= 0:
        raise ValueError("s must be positive")
    x = np.array(gen_random_uniform(N, d, seed).points)
    energy, grad = kernels.riesz_energy_grad(x, float(s))
    if callback is not None:
        callback(0, energy)
    step = None
    for k in range(1, iters + 1):
        tang = grad - np.einsum("ij,ij->i", grad, x)[:, None] * x
        gnorm2 = float(np.sum(tang * tang))
        gmax = float(np.sqrt(np.max(np.einsum("ij,ij->i", tang, tang))))
        if gmax <= gtol * max(energy, 1.0):
            break
        if step is None:
            # first move: at most ~0.1 rad for the fastest point
            step = 0.1 / gmax
        accepted = False
        for _ in range(60):
            trial = x - step * tang
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            trial = np.ascontiguousarray(trial)
            e_trial = float(kernels.riesz_energy(trial, float(s)))
            if not math.isfinite(e_trial):
                step *= 0.5
                continue
            if e_trial <= energy - 1e-4 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        x = trial
        energy, grad = kernels.riesz_energy_grad(x, float(s))
        if not math.isfinite(energy):
            raise FloatingPointError("Riesz energy became non-finite")
        if callback is not None:
            callback(k, energy)
        step *= 2.0
    return PointConfiguration(d, x, None, f"riesz N={N} s={s} d={d} seed={seed}")


# separation and mesh norm -----------------------------------------------------


def separation_radius(config: PointConfiguration, method: str = "auto") -> float:
    """Smallest geodesic distance between two distinct points.

    ``method`` is ``"brute"`` (all pairs, compiled when available),
    ``"tree"`` (k-d tree nearest neighbours) or ``"auto"`` (tree above
    5000 points). Both paths pick a closest pair and evaluate it with the
    same formula, so they agree to the last bit when the pair is unique.
    """
    if config.m < 2:
        raise ValueError("separation radius needs at least two points")
    pts = config.points
    if method == "auto":
        method = "tree" if config.m > PRUNE_THRESHOLD else "brute"
    if method == "brute":
        i, j = kernels.closest_pair(pts)
    elif method == "tree":
        dist, idx = cKDTree(pts).query(pts, k=2)
        i = int(np.argmin(dist[:, 1]))
        j = int(idx[i, 1])
        if dist[i, 1] == 0.0:
            # several copies of one point: any zero pair will do
            j = int(idx[i, 0]) if idx[i, 0] != i else j
        i, j = min(i, j), max(i, j)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(pairwise_geodesic(pts[i], pts[j]))


class MeshNorm(tuple):
    """``(estimate, certified)`` with the probe-grid gap attached."""

    def __new__(cls, estimate: float, certified: float, gap: float, rigorous: bool, grid_size: int):
        obj = super().__new__(cls, (estimate, certified))
        obj.gap = gap
        obj.rigorous = rigorous
        obj.grid_size = grid_size
        return obj

    @property
    def estimate(self) -> float:
        return self[0]

    @property
    def certified(self) -> float:
        return self[1]


def _circle_mesh(points: np.ndarray) -> float:
    ang = np.sort(np.arctan2(points[:, 1], points[:, 0]))
    gaps = np.diff(ang)
    wrap = 2.0 * np.pi - (ang[-1] - ang[0])
    return 0.5 * float(max(gaps.max(initial=0.0), wrap))


@functools.lru_cache(maxsize=64)
def _fibonacci_grid_mesh(n: int) -> float:
    # exact covering radius of the probe grid: largest spherical circumradius
    # over the Delaunay triangles, i.e. the facets of the convex hull
    pts = gen_fibonacci(n).points
    hull = ConvexHull(pts)
    normals = hull.equations[:, :3]
    normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    radii = np.max(
        np.stack([pairwise_geodesic(pts[hull.simplices[:, k]], normals) for k in range(3)]), axis=0
    )
    return float(radii.max())


@functools.lru_cache(maxsize=16)
def _gaussian_grid(d: int, n: int) -> tuple[np.ndarray, float]:
    rng = np.random.default_rng(1_000_003 * d + n)
    g = rng.standard_normal((n, d + 1))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    # several random rotations of an independent, denser probe set
    worst = 0.0
    for rep in range(4):
        probe = rng.standard_normal((4 * n, d + 1))
        probe /= np.linalg.norm(probe, axis=1, keepdims=True)
        probe = np.ascontiguousarray(probe @ random_rotation(d + 1, seed=rep).T)
        idx = kernels.nearest_index(probe, g)
        worst = max(worst, float(pairwise_geodesic(probe, g[idx]).max()))
    return np.ascontiguousarray(g), worst


def _probe_distance(probes: np.ndarray, pts: np.ndarray) -> float:
    idx = kernels.nearest_index(probes, pts)
    return float(pairwise_geodesic(probes, pts[idx]).max())


def mesh_norm(config: PointConfiguration, grid_size: int | None = None) -> MeshNorm:
    """Bracket the mesh norm (covering radius) of a configuration.

    Returns ``estimate <= rho(X) <= certified``. The estimate is the largest
    distance from a probe point to the configuration; the certified value
    adds the probe grid's own covering radius (triangle inequality).

    * d = 1: exact, from the largest angular gap (gap-midpoint probes).
    * d = 2: Fibonacci probe grid; its covering radius is computed exactly
      from its convex hull and cached.
    * d >= 3: Gaussian probe grid; its covering radius is only measured
      against denser random probes, so ``rigorous`` is False.
    """
    pts = config.points
    m = config.m
    if config.dim == 1:
        exact = _circle_mesh(pts)
        return MeshNorm(max(exact - _CIRCLE_GUARD, 0.0), min(exact + _CIRCLE_GUARD, math.pi),
                        2 * _CIRCLE_GUARD, True, 0)
    if grid_size is None:
        grid_size = DEFAULT_GRID_FACTOR * m
    if grid_size < m:
        raise ValueError(f"probe grid of {grid_size} points is coarser than the {m}-point configuration")
    grid_size = max(int(grid_size), 64)
    if config.dim == 2:
        probes = gen_fibonacci(grid_size).points
        gap = _fibonacci_grid_mesh(grid_size)
        rigorous = True
    else:
        if grid_size > 200_000:
            warnings.warn("large random probe grid for d >= 3; this will be slow", stacklevel=2)
        probes, gap = _gaussian_grid(config.dim, grid_size)
        rigorous = False
    est = _probe_distance(probes, pts)
    return MeshNorm(est, min(est + gap, math.pi), gap, rigorous, grid_size)


@dataclass(frozen=True)
class GeometryReport:
    """Mesh norm bracket, separation radius and their degree-scaled values."""

    m: int
    degree: int | None
    mesh_estimate: float
    mesh_certified: float
    separation: float
    L_times_mesh: float | None
    L_times_sep: float | None
    probe_gap: float
    rigorous: bool

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        if math.isinf(out["separation"]):
            out["separation"] = None
            out["L_times_sep"] = None
        return out


def analyze(config: PointConfiguration, degree: int | None = None,
            grid_size: int | None = None) -> GeometryReport:
    """Geometry summary of one configuration; ``degree`` overrides the stored one."""
    L = config.degree if degree is None else degree
    mn = mesh_norm(config, grid_size)
    sep = separation_radius(config) if config.m >= 2 else math.inf
    return GeometryReport(
        m=config.m,
        degree=L,
        mesh_estimate=mn.estimate,
        mesh_certified=mn.certified,
        separation=sep,
        L_times_mesh=None if L is None else L * mn.certified,
        L_times_sep=None if L is None or math.isinf(sep) else L * sep,
        probe_gap=mn.gap,
        rigorous=mn.rigorous,
    )
