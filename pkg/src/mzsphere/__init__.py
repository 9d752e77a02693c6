"""Sampling and interpolation arrays on the sphere S^d.

Submodules: ``specfun`` (special functions and quadrature), ``sphere``
(configurations and geometry), ``harmonics`` (kernels and zonal analysis),
``mzframe`` (spectral bounds and certificates), ``pickfn`` (cap eigenproblem
and pick functions) and ``cli``.
"""
__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
from .harmonics import KernelSpec, ZonalFunction, dim_harmonics, dim_pi  # noqa: E402
from .mzframe import (  # noqa: E402
    Certificate,
    SpectralBounds,
    certify_interpolation,
    certify_mz,
    mz_constant_p2,
    riesz_bounds,
    sym_eigs,
)
from .pickfn import PickFunction, build_pick_function, cap_first_eigen, verify_lemma  # noqa: E402
from .sphere import (  # noqa: E402
    ArrayFamily,
    PointConfiguration,
    SpherePoint,
    analyze,
    gen_fibonacci,
    gen_random_uniform,
    gen_roots_of_unity,
    mesh_norm,
    minimize_riesz_energy,
    separation_radius,
)

__all__ = [
    "BACKEND",
    "ArrayFamily",
    "Certificate",
    "KernelSpec",
    "PickFunction",
    "PointConfiguration",
    "SpectralBounds",
    "SpherePoint",
    "ZonalFunction",
    "analyze",
    "build_pick_function",
    "cap_first_eigen",
    "certify_interpolation",
    "certify_mz",
    "dim_harmonics",
    "dim_pi",
    "gen_fibonacci",
    "gen_random_uniform",
    "gen_roots_of_unity",
    "mesh_norm",
    "minimize_riesz_energy",
    "mz_constant_p2",
    "riesz_bounds",
    "separation_radius",
    "sym_eigs",
    "verify_lemma",
]
