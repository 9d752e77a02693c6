"""Pick the compiled kernels when they import, the numpy ones otherwise.

Set ``MZSPHERE_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import importlib
import os
from types import ModuleType

from . import _kernels_py


def _load_compiled() -> ModuleType | None:
    try:
        return importlib.import_module("mzsphere._kernels")
    except ImportError:
        return None


_compiled = _load_compiled()

if _compiled is not None and os.environ.get("MZSPHERE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    kernels: ModuleType = _compiled
    BACKEND = "compiled"
else:
    kernels = _kernels_py
    BACKEND = "python"


def available_backends() -> dict[str, ModuleType]:
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
