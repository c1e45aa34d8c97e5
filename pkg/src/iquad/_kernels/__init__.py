"""Principal-value quadrature kernels with backend selection at import.

The compiled Cython extension is used when available; setting the
environment variable ``IQUAD_PV_BACKEND=python`` forces the pure-numpy
fallback.  ``BACKEND`` names the active implementation.
"""

from __future__ import annotations

import os

from . import _pv_np

_forced = os.environ.get("IQUAD_PV_BACKEND", "").strip().lower()

if _forced in ("python", "numpy"):
    _impl = _pv_np
elif _forced in ("cython", "compiled", "c"):
    from . import _pv_cy as _impl  # raises if the extension was not built
else:
    try:
        from . import _pv_cy as _impl
    except ImportError:
        _impl = _pv_np

BACKEND: str = _impl.BACKEND

pv_sum2d = _impl.pv_sum2d
pv_i1_direct = _impl.pv_i1_direct
pv_ilin_direct = _impl.pv_ilin_direct
pv_i1p_direct = _impl.pv_i1p_direct
pv_i2_raw = _impl.pv_i2_raw
pv_i2p_raw = _impl.pv_i2p_raw


def available_backends() -> list[str]:
    out = ["python"]
    try:
        from . import _pv_cy  # noqa: F401
        out.append("cython")
    except ImportError:
        pass
    return out


def get_backend(name: str):
    """Return the kernel module for ``name`` ('python' or 'cython')."""
    if name == "python":
        return _pv_np
    if name == "cython":
        from . import _pv_cy
        return _pv_cy
    raise ValueError(f"unknown backend {name!r}")
