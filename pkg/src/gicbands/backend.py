"""Select the kernel backend at import time.

The compiled extension is preferred; the NumPy fallback keeps the package
fully functional without it.  Set ``GICBANDS_PURE_PYTHON=1`` to force the
fallback (used by the benchmark and the backend-agreement tests).
"""

import os

if os.environ.get("GICBANDS_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

BACKEND = kernels.BACKEND

__all__ = ["kernels", "BACKEND"]
