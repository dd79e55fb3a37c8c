"""Pick the compiled kernels when available, else the NumPy fallback.

Set ``MBUARITH_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os

if os.environ.get("MBUARITH_PURE") == "1":
    from . import _pykernels as kernels
    COMPILED = False
else:
    try:
        from . import _kernels as kernels
        COMPILED = True
    except ImportError:
        from . import _pykernels as kernels
        COMPILED = False

__all__ = ["kernels", "COMPILED"]
