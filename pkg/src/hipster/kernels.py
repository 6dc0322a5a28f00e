"""Back-end selection for the hot loops.

The compiled extension is used when it imports; otherwise (or when
``HIPSTER_PURE_PYTHON=1``) the numpy fallback is used. Both expose
``evolve``, ``scheme_run`` and ``tree_reduce`` with identical semantics.
"""
import os

from . import _fallback

BACKEND = "python"
evolve = _fallback.evolve
scheme_run = _fallback.scheme_run
tree_reduce = _fallback.tree_reduce

if os.environ.get("HIPSTER_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:  # extension not built
        pass
    else:
        evolve = _kernels.evolve
        scheme_run = _kernels.scheme_run
        tree_reduce = _kernels.tree_reduce
        BACKEND = "cython"


def backends():
    """Mapping of available back-end name to its module."""
    out = {"python": _fallback}
    try:
        from . import _kernels
        out["cython"] = _kernels
    except ImportError:
        pass
    return out
