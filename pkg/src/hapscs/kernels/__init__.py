"""Kernel backend selection.

The compiled Cython core is used when its extension imported cleanly;
otherwise the pure-Python reference takes over.  Setting the
``HAPSCS_PURE_PYTHON`` environment variable forces the fallback.  Both
backends are bit-compatible; ``benchmarks/backend_bench.py`` compares
their throughput.
"""

import os

from . import _pykernels

if os.environ.get("HAPSCS_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _cykernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

eval_policies = _impl.eval_policies
associate_ues = _impl.associate_ues


def backend() -> str:
    """Name of the active kernel backend ("cython" or "python")."""
    return BACKEND
