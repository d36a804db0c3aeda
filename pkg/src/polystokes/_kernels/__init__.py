"""Element-level kernels: compiled core with a pure-numpy fallback.

The hot inner loops (batched local-matrix assembly and pointwise field
evaluation) are implemented twice: in Cython (``_fast``) and in plain
numpy (``_slow``).  The compiled module is preferred when it built;
setting ``POLYSTOKES_PURE=1`` forces the fallback.  Both backends
produce the same values up to floating-point summation order.
"""

import os

if os.environ.get("POLYSTOKES_PURE"):
    from . import _slow as _impl
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _slow as _impl

BACKEND = _impl.BACKEND
local_stokes_matrices = _impl.local_stokes_matrices
eval_p2 = _impl.eval_p2
eval_p1 = _impl.eval_p1

__all__ = ["BACKEND", "local_stokes_matrices", "eval_p2", "eval_p1"]
