"""Backend selection for the placement kernels.

The compiled extension ``swan._kernels`` is used when it was built; otherwise
the pure-Python ``swan._kernels_py`` is imported transparently.  Setting
``SWAN_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

ALIGNED = _kernels_py.ALIGNED
CLAMPED = _kernels_py.CLAMPED
UNALIGNED = _kernels_py.UNALIGNED
NO_ROOM = _kernels_py.NO_ROOM


def _load():
    if os.environ.get("SWAN_PURE_PYTHON", "").strip() not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return _kernels_py, "python"
    return _kernels, "compiled"


_impl, BACKEND = _load()

path_length = _impl.path_length
wrapped_target = _impl.wrapped_target
solve_position = _impl.solve_position
fill_chain = _impl.fill_chain
segment_sweep = _impl.segment_sweep

__all__ = [
    "ALIGNED",
    "BACKEND",
    "CLAMPED",
    "NO_ROOM",
    "UNALIGNED",
    "fill_chain",
    "path_length",
    "segment_sweep",
    "solve_position",
    "wrapped_target",
]
