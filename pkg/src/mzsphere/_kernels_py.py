"""Pure-numpy fallbacks for the compiled kernels in ``_kernels.pyx``.

Same names, signatures and return conventions. Loops are vectorized along
one axis so the fallback stays usable at moderate sizes.
"""
from __future__ import annotations

import numpy as np

_CHUNK = 2048


def closest_pair(pts: np.ndarray) -> tuple[int, int]:
    m = pts.shape[0]
    if m < 2:
        raise ValueError("need at least two points")
    best, bi, bj = np.inf, 0, 1
    for i in range(m - 1):
        diff = pts[i + 1:] - pts[i]
        d2 = np.einsum("ij,ij->i", diff, diff)
        j = int(np.argmin(d2))
        if d2[j] < best:
            best, bi, bj = d2[j], i, i + 1 + j
    return bi, bj


def nearest_index(probes: np.ndarray, pts: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", pts, pts)
    out = np.empty(probes.shape[0], dtype=np.intp)
    for start in range(0, probes.shape[0], _CHUNK):
        block = probes[start:start + _CHUNK]
        # |x|^2 is constant per probe, so it does not affect the argmin
        d2 = sq[None, :] - 2.0 * block @ pts.T
        out[start:start + _CHUNK] = np.argmin(d2, axis=1)
    return out


def _pair_d2(pts: np.ndarray) -> np.ndarray:
    diff = pts[:, None, :] - pts[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def riesz_energy(pts: np.ndarray, s: float) -> float:
    d2 = _pair_d2(pts)
    iu = np.triu_indices(pts.shape[0], 1)
    return float(np.sum(d2[iu] ** (-0.5 * s)))


def riesz_energy_grad(pts: np.ndarray, s: float) -> tuple[float, np.ndarray]:
    m = pts.shape[0]
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d2, 1.0)
    inv = d2 ** (-0.5 * s)
    np.fill_diagonal(inv, 0.0)
    energy = 0.5 * float(inv.sum())
    coef = -s * inv / d2
    grad = np.einsum("ij,ijk->ik", coef, diff)
    if m == 1:
        energy = 0.0
    return energy, grad


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # circle-method schedule: n - 1 rounds of disjoint pairs (p < q)
    size = n + (n % 2)
    ring = list(range(size))
    rounds = []
    for _ in range(size - 1):
        ps, qs = [], []
        for k in range(size // 2):
            a, b = ring[k], ring[size - 1 - k]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        ring = [ring[0]] + [ring[-1]] + ring[1:-1]
    return rounds


def jacobi_eigenvalues(a: np.ndarray, tol: float, max_sweeps: int):
    """Parallel-ordered Jacobi: each round applies disjoint rotations at once."""
    n = a.shape[0]
    frob = float(np.sqrt(np.sum(a * a)))
    schedule = _round_robin(n)
    sweep = 0
    while True:
        # direct sum: subtracting the diagonal from the total cancels catastrophically
        offdiag = a - np.diag(np.diag(a))
        off = float(np.sqrt(np.sum(offdiag * offdiag)))
        if off <= tol * frob or sweep >= max_sweeps:
            break
        sweep += 1
        for ps, qs in schedule:
            if ps.size == 0:
                continue
            apq = a[ps, qs]
            live = apq != 0.0
            if not np.any(live):
                continue
            ps, qs, apq = ps[live], qs[live], apq[live]
            theta = (a[qs, qs] - a[ps, ps]) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            safe = np.where(big, 0.0, theta)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0),
                         np.sign(safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0)))
            t = np.where((theta == 0.0) & ~big, 1.0, t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            cols_p = a[:, ps].copy()
            cols_q = a[:, qs]
            a[:, ps] = c * cols_p - s * cols_q
            a[:, qs] = s * cols_p + c * cols_q
            rows_p = a[ps, :].copy()
            rows_q = a[qs, :]
            a[ps, :] = c[:, None] * rows_p - s[:, None] * rows_q
            a[qs, :] = s[:, None] * rows_p + c[:, None] * rows_q
            a[ps, qs] = 0.0
            a[qs, ps] = 0.0
    return np.diag(a).copy(), sweep, off
