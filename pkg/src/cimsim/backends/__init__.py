"""Kernel backend selection.

``CIMSIM_BACKEND`` picks the tile-kernel implementation:

* ``numba`` — JIT-compiled loops (the default when numba imports);
* ``numpy`` — pure-numpy vectorized fallback, bit-identical by contract;
* ``auto``/unset — numba if available, else numpy.

Traces always run through the numpy engine regardless of the selection.
"""

from __future__ import annotations

import os

from . import numpy_backend

_choice = os.environ.get("CIMSIM_BACKEND", "auto").strip().lower() or "auto"
if _choice not in ("auto", "numba", "numpy"):
    raise ImportError(
        f"CIMSIM_BACKEND={_choice!r} is not one of auto/numba/numpy")

if _choice == "numpy":
    _active = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import numba_backend as _active
        BACKEND = "numba"
    except ImportError:
        if _choice == "numba":
            raise
        _active = numpy_backend
        BACKEND = "numpy"

fp_tile_pre = _active.fp_tile_pre
fp_tile_post = _active.fp_tile_post
int_tile = _active.int_tile


def active_backend() -> str:
    return BACKEND
