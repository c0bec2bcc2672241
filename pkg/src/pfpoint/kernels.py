"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``PFPOINT_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy fallback is used.
"""

import os

from . import _kernels_py


def _want_pure():
    return os.environ.get("PFPOINT_PURE_PYTHON", "") not in ("", "0")


def _load_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()

if _compiled is not None and not _want_pure():
    _impl = _compiled
    BACKEND = "cython"
else:
    _impl = _kernels_py
    BACKEND = "python"

scaled_ei = _impl.scaled_ei
ei = _impl.ei
scaled_ei_array = _impl.scaled_ei_array
permanent = _impl.permanent
filon_panels = _impl.filon_panels


def available_backends():
    """Map of backend name to module, for tests and benchmarks."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
