"""Selects the compiled core when built, the pure NumPy fallback otherwise.

Set ``VOLTERRA_CZ_BACKEND=pure`` or ``=compiled`` to force a choice (the
latter raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _purepy

try:
    from . import _core
except ImportError:
    _core = None

_forced = os.environ.get("VOLTERRA_CZ_BACKEND", "").strip().lower()
if _forced in ("pure", "python", "fallback"):
    _impl = _purepy
elif _forced in ("compiled", "c", "ext"):
    if _core is None:
        raise ImportError(
            "VOLTERRA_CZ_BACKEND=compiled, but the volterra_cz._core extension "
            "is not built (reinstall with a working C toolchain)")
    _impl = _core
elif _forced:
    raise ImportError(f"unknown VOLTERRA_CZ_BACKEND value {_forced!r}")
else:
    _impl = _core if _core is not None else _purepy

BACKEND = "compiled" if _impl is not _purepy else "pure"

select_bad_cubes = _impl.select_bad_cubes
model_kernel_cell_sums = _impl.model_kernel_cell_sums
