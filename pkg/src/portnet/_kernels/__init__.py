"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python implementation
when the extension is missing or PORTNET_PURE_PYTHON is set.  ``BACKEND``
names the active implementation ("compiled" or "python").
"""
import os

if os.environ.get("PORTNET_PURE_PYTHON"):
    from portnet._kernels import _pykernels as _impl
else:
    try:
        from portnet._kernels import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from portnet._kernels import _pykernels as _impl

BACKEND = _impl.BACKEND
bfs_aggregate = _impl.bfs_aggregate
brandes_partial = _impl.brandes_partial

__all__ = ["BACKEND", "bfs_aggregate", "brandes_partial"]
