"""Kernel backend selection.

The Cython extension is used when it was built and ``QDOCK_PURE_PYTHON`` is
unset; otherwise the numpy fallback is imported. ``BACKEND`` names the choice.
"""
import os

from . import _pykernels

if os.environ.get("QDOCK_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

apply_hamiltonian = _impl.apply_hamiltonian
rk4_evolve = _impl.rk4_evolve
exposed_counts = _impl.exposed_counts

__all__ = ["BACKEND", "apply_hamiltonian", "rk4_evolve", "exposed_counts"]
