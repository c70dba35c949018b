"""Quadrature kernel backend selection.

The compiled Cython kernels are preferred when the extension built; the
vectorized numpy kernels are the always-available fallback.  Selection
happens once at import and can be forced through the environment variable
``GRAPHENERGY_BACKEND`` (``compiled`` or ``numpy``); forcing ``compiled``
without the extension raises immediately rather than falling back.
"""

import os

from . import _kernels_np

__all__ = ["panel_sums_same", "panel_sums_disjoint", "panel_sums_adjacent",
           "backend_name", "get_backend"]

_FORCED = os.environ.get("GRAPHENERGY_BACKEND", "").strip().lower()

_compiled = None
if _FORCED != "numpy":
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    if _FORCED == "compiled" and _compiled is None:
        raise ImportError(
            "GRAPHENERGY_BACKEND=compiled but the extension is not built")

_active = _compiled if _compiled is not None else _kernels_np

panel_sums_same = _active.panel_sums_same
panel_sums_disjoint = _active.panel_sums_disjoint
panel_sums_adjacent = _active.panel_sums_adjacent


def backend_name():
    """Name of the active kernel backend: 'compiled' or 'numpy'."""
    return "compiled" if _active is _compiled else "numpy"


def get_backend(name):
    """Return a specific backend module by name (for benchmarks/tests)."""
    if name == "numpy":
        return _kernels_np
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel extension is not built")
        return _compiled
    raise ValueError("unknown backend %r" % (name,))
