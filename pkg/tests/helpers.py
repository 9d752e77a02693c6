"""Shared fixtures-by-function for building test configurations."""
import numpy as np

from mzsphere.sphere import PointConfiguration


def separated_random(n, L, theta, seed):
    """Random S^2 points with L * separation > theta, by rejection."""
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(200_000):
        if len(pts) == n:
            break
        x = rng.standard_normal(3)
        x /= np.linalg.norm(x)
        if all(np.arccos(np.clip(x @ p, -1, 1)) * L > theta for p in pts):
            pts.append(x)
    else:
        raise RuntimeError(f"could not place {n} points at separation {theta / L:.3f}")
    return PointConfiguration(2, np.array(pts), L)
