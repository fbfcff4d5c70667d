"""Select the compiled pair kernels when available, else the numpy ones.

Set ``BREATHMODE_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
energy_gradient = _pykernels.energy_gradient
hessian = _pykernels.hessian

if os.environ.get("BREATHMODE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        energy_gradient = _ckernels.energy_gradient
        hessian = _ckernels.hessian
