"""Kernel selection: compiled extension if importable, numpy fallback otherwise."""

import os

from . import _pykernels

if os.environ.get("CDSM_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = _pykernels
        BACKEND = "python"

walk = kernels.walk
jacobi_eigh = kernels.jacobi_eigh
ward_merge = kernels.ward_merge
