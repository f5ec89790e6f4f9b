"""Kernel backend selection.

The compiled Cython module is used when it imports; otherwise the numpy
fallback.  Setting ``BDFLOW_BACKEND=python`` forces the fallback.
"""

import os

from . import _kernels_py

_forced = os.environ.get("BDFLOW_BACKEND", "").strip().lower()

if _forced == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _forced == "cython":
            raise
        _impl = _kernels_py

BACKEND = _impl.BACKEND
flux_laplacian = _impl.flux_laplacian
pme_step_power = _impl.pme_step_power
max_diffusivity_power = _impl.max_diffusivity_power
cns_step_1d = _impl.cns_step_1d

python = _kernels_py


def compiled():
    """The compiled module, or None when it is not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
