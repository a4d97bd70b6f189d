"""Pure-numpy implementations of the coupling kernels.

Same contracts as the compiled versions in _speedups.pyx; used when the
extension is unavailable or disabled via IONFORGE_NO_EXT.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _upper(n):
    iu, ju = np.triu_indices(n, k=1)
    return iu, ju


def coupling_batch(omega: np.ndarray, fkern: np.ndarray) -> np.ndarray:
    """J[b, p] = sum_n omega[b, i_p, n] omega[b, j_p, n] fkern[n, i_p, j_p]."""
    iu, ju = _upper(omega.shape[1])
    pair = omega[:, iu, :] * omega[:, ju, :]  # (B, P, N)
    return np.einsum("bpn,pn->bp", pair, fkern[:, iu, ju].T)


def coupling_batch_vjp(grad_j: np.ndarray, omega: np.ndarray,
                       fkern: np.ndarray) -> np.ndarray:
    """Adjoint of coupling_batch with respect to omega.

    grad_j holds upper-triangle cotangents; returns d(omega) of shape (B, N, N).
    """
    b, n = omega.shape[0], omega.shape[1]
    iu, ju = _upper(n)
    g = np.zeros((b, n, n))
    g[:, iu, ju] = grad_j
    g[:, ju, iu] = grad_j
    return np.einsum("bij,bjn,nij->bin", g, omega, fkern, optimize=True)
