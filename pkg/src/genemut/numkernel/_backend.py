"""Select the kernel backend at import time.

The compiled extension is preferred; setting ``GENEMUT_PURE_PYTHON=1``
forces the numpy fallback (useful for benchmarking and for platforms
without a C compiler).
"""
import os

if os.environ.get("GENEMUT_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as kernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pykernels as kernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
