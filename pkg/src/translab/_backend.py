"""Kernel backend chosen at import: compiled ``_core`` if built, else NumPy.

Set ``TRANSLAB_PURE=1`` to force the NumPy fallback.
"""
import os

from . import _fallback

if os.environ.get("TRANSLAB_PURE") == "1":
    _impl = _fallback
    NAME = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
        NAME = "cython"
    except ImportError:
        _impl = _fallback
        NAME = "python"

goursat_march = _impl.goursat_march
volterra_invert = _impl.volterra_invert
rk4_march = _impl.rk4_march
