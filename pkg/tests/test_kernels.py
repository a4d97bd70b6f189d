"""Backend equivalence: the compiled kernels must match the numpy fallback."""

import numpy as np
import pytest

from ionforge import _kernels_numpy, kernels

try:
    from ionforge import _speedups
except ImportError:
    _speedups = None

needs_ext = pytest.mark.skipif(_speedups is None,
                               reason="compiled extension not built")


def _random_case(n, batch, seed):
    rng = np.random.default_rng(seed)
    omega = rng.uniform(-1, 1, (batch, n, n))
    f = rng.normal(size=(n, n, n))
    f = 0.5 * (f + np.swapaxes(f, 1, 2))  # kernel is symmetric in (i, j)
    return omega, f


@needs_ext
@pytest.mark.parametrize("n,batch", [(2, 1), (5, 3), (10, 64), (24, 7)])
def test_forward_backends_agree(n, batch):
    omega, f = _random_case(n, batch, seed=n * 100 + batch)
    a = _speedups.coupling_batch(omega, f)
    b = _kernels_numpy.coupling_batch(omega, f)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


@needs_ext
@pytest.mark.parametrize("n,batch", [(2, 1), (5, 3), (10, 64), (24, 7)])
def test_vjp_backends_agree(n, batch):
    omega, f = _random_case(n, batch, seed=n * 100 + batch)
    rng = np.random.default_rng(1)
    g = rng.normal(size=(batch, n * (n - 1) // 2))
    a = _speedups.coupling_batch_vjp(g, omega, f)
    b = _kernels_numpy.coupling_batch_vjp(g, omega, f)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


def test_vjp_is_adjoint_of_forward():
    # <g, K(w + dw)> - <g, K(w)> ~= <vjp(g, w), dw> to first order
    omega, f = _random_case(6, 4, seed=3)
    rng = np.random.default_rng(4)
    g = rng.normal(size=(4, 15))
    dw = rng.normal(size=omega.shape)
    eps = 1e-7
    jp = kernels.coupling_batch(omega + eps * dw, f)
    jm = kernels.coupling_batch(omega - eps * dw, f)
    lhs = np.sum(g * (jp - jm)) / (2 * eps)
    rhs = np.sum(kernels.coupling_batch_vjp(g, omega, f) * dw)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_non_contiguous_input_accepted():
    omega, f = _random_case(5, 2, seed=9)
    strided = omega[:, ::-1, :][:, ::-1, :]  # same values, non-trivial strides
    np.testing.assert_allclose(kernels.coupling_batch(strided, f),
                               kernels.coupling_batch(omega, f), rtol=1e-15)


def test_backend_name_is_reported():
    assert kernels.BACKEND in ("cython", "numpy")
