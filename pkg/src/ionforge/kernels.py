"""Backend selection for the coupling kernels.

Prefers the compiled extension; falls back to numpy einsum when it is not
built.  Set IONFORGE_NO_EXT=1 to force the fallback (used by the kernel
benchmark to time both paths in one process).
"""

import os

import numpy as np

if os.environ.get("IONFORGE_NO_EXT"):
    from . import _kernels_numpy as _impl
    BACKEND = "numpy"
else:
    try:
        from . import _speedups as _impl
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_numpy as _impl
        BACKEND = "numpy"


def _c64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def coupling_batch(omega, fkern):
    """J[b, p] = sum_n omega[b, i_p, n] omega[b, j_p, n] fkern[n, i_p, j_p].

    omega: (B, N, N) control matrices; fkern: (N, N, N) precomputed kernel.
    Returns (B, N(N-1)/2) upper-triangle couplings in row-major pair order.
    """
    return _impl.coupling_batch(_c64(omega), _c64(fkern))


def coupling_batch_vjp(grad_j, omega, fkern):
    """Adjoint of coupling_batch: (B, P) cotangents to (B, N, N) gradients."""
    return _impl.coupling_batch_vjp(_c64(grad_j), _c64(omega), _c64(fkern))
