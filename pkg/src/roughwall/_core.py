"""Selects the compiled kernels when importable, else the numpy fallback.

Set ``ROUGHWALL_PURE=1`` to force the fallback.
"""
import os

if os.environ.get("ROUGHWALL_PURE", "") not in ("", "0"):
    from . import _fallback as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _fallback as kernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
