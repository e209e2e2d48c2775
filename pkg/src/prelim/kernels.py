"""Backend selection for the hot loops.

The compiled extension is used when it imports; ``PRELIM_PURE_PYTHON=1``
forces the numpy fallback. ``BACKEND`` names the active one.
"""
import os

from . import _pykernels

_FORCE_PURE = os.environ.get("PRELIM_PURE_PYTHON", "").strip() not in ("", "0")

try:
    if _FORCE_PURE:
        raise ImportError("pure python requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

GINI = 0
NEWTON = 1

grow_tree = _impl.grow_tree
apply_tree = _impl.apply_tree
prim_peel = _impl.prim_peel


def get_backend(name):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
