# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled coupling kernels: the inner loop of training and evaluation.

The contraction J[b, p] = sum_n omega[b, i, n] omega[b, j, n] fkern[n, i, j]
and its adjoint run once per mini-batch element, millions of times per
training run, on arrays small enough that einsum dispatch overhead matters.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def coupling_batch(double[:, :, ::1] omega, double[:, :, ::1] fkern):
    """Upper-triangle couplings for a batch of control matrices."""
    cdef Py_ssize_t nb = omega.shape[0]
    cdef Py_ssize_t n = omega.shape[1]
    cdef Py_ssize_t npair = n * (n - 1) // 2
    out = np.empty((nb, npair))
    cdef double[:, ::1] jv = out
    cdef Py_ssize_t b, i, j, k, p
    cdef double acc
    with nogil:
        for b in range(nb):
            p = 0
            for i in range(n):
                for j in range(i + 1, n):
                    acc = 0.0
                    for k in range(n):
                        acc += omega[b, i, k] * omega[b, j, k] * fkern[k, i, j]
                    jv[b, p] = acc
                    p += 1
    return out


def coupling_batch_vjp(double[:, ::1] grad_j, double[:, :, ::1] omega,
                       double[:, :, ::1] fkern):
    """Adjoint of coupling_batch: cotangents on J back to the control matrix."""
    cdef Py_ssize_t nb = omega.shape[0]
    cdef Py_ssize_t n = omega.shape[1]
    out = np.zeros((nb, n, n))
    cdef double[:, :, ::1] dom = out
    cdef Py_ssize_t b, i, j, k, p
    cdef double g, f
    with nogil:
        for b in range(nb):
            p = 0
            for i in range(n):
                for j in range(i + 1, n):
                    g = grad_j[b, p]
                    for k in range(n):
                        f = g * fkern[k, i, j]
                        dom[b, i, k] += f * omega[b, j, k]
                        dom[b, j, k] += f * omega[b, i, k]
                    p += 1
    return out
