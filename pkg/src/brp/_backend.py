"""Selects the compiled kernels when available, else the numpy fallback.

Set ``BRP_PURE_PYTHON=1`` to force the fallback.
"""

import os

from brp import _fallback

if os.environ.get("BRP_PURE_PYTHON", "") not in ("", "0"):
    kernels = _fallback
    BACKEND = "python"
else:
    try:
        from brp import _kernels as kernels
        BACKEND = "compiled"
    except ImportError:
        kernels = _fallback
        BACKEND = "python"

standard_normals = kernels.standard_normals
householder_qr = kernels.householder_qr
