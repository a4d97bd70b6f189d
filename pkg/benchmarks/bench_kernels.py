"""Timing comparison: compiled coupling kernels vs the numpy fallback.

Run after building the extension:

    python3 benchmarks/bench_kernels.py

Times the batched coupling contraction and its adjoint at training-relevant
shapes, plus one full desk-scale training epoch under each backend.  The
numpy fallback is loaded directly (not through the IONFORGE_NO_EXT switch)
so both paths run in one process.
"""

import time

import numpy as np

import ionforge as forge
from ionforge import _kernels_numpy

try:
    from ionforge import _speedups
except ImportError:
    _speedups = None


def timeit(fn, *args, repeat=200):
    fn(*args)  # warm up
    tic = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - tic) / repeat


def bench_kernels():
    print(f"{'shape':>16} {'kernel':>10} {'numpy (us)':>12} {'cython (us)':>12}"
          f" {'speedup':>8}")
    rng = np.random.default_rng(0)
    for n, batch in [(8, 64), (10, 64), (16, 64), (24, 64), (50, 64)]:
        omega = rng.uniform(-1, 1, (batch, n, n))
        fkern = rng.normal(size=(n, n, n))
        fkern = 0.5 * (fkern + np.swapaxes(fkern, 1, 2))
        grad = rng.normal(size=(batch, n * (n - 1) // 2))
        cases = [("coupling", (omega, fkern),
                  _kernels_numpy.coupling_batch,
                  _speedups.coupling_batch if _speedups else None),
                 ("vjp", (grad, omega, fkern),
                  _kernels_numpy.coupling_batch_vjp,
                  _speedups.coupling_batch_vjp if _speedups else None)]
        for name, args, fallback, compiled in cases:
            t_np = timeit(fallback, *args)
            if compiled is None:
                print(f"{f'B={batch} N={n}':>16} {name:>10} {t_np * 1e6:12.1f}"
                      f" {'n/a':>12} {'n/a':>8}")
                continue
            t_cy = timeit(compiled, *args)
            print(f"{f'B={batch} N={n}':>16} {name:>10} {t_np * 1e6:12.1f}"
                  f" {t_cy * 1e6:12.1f} {t_np / t_cy:8.1f}x")


def bench_epoch(backend_module, label, setup, dataset, config):
    import ionforge.kernels as kernels
    import ionforge.network as network
    saved = (kernels.coupling_batch, kernels.coupling_batch_vjp,
             network.coupling_batch, network.coupling_batch_vjp)
    try:
        kernels.coupling_batch = lambda o, f: backend_module.coupling_batch(
            np.ascontiguousarray(o), np.ascontiguousarray(f))
        kernels.coupling_batch_vjp = lambda g, o, f: backend_module.coupling_batch_vjp(
            np.ascontiguousarray(g), np.ascontiguousarray(o),
            np.ascontiguousarray(f))
        network.coupling_batch = kernels.coupling_batch
        network.coupling_batch_vjp = kernels.coupling_batch_vjp
        tic = time.perf_counter()
        forge.train(setup, dataset, config)
        elapsed = time.perf_counter() - tic
        print(f"one epoch, desk-scale N=10 ({label}): {elapsed:.2f} s")
        return elapsed
    finally:
        (kernels.coupling_batch, kernels.coupling_batch_vjp,
         network.coupling_batch, network.coupling_batch_vjp) = saved


def main():
    print(f"active backend: {forge.BACKEND}")
    bench_kernels()
    print()
    setup = forge.build_setup(forge.build_chain(forge.tune_trap(10)))
    dataset = forge.generate_dataset(setup, 11000, seed=1)
    config = forge.TrainConfig(train_size=10000, val_size=1000, epochs=1,
                               batch_size=64, hidden_dim=2048, seed=2)
    t_np = bench_epoch(_kernels_numpy, "numpy", setup, dataset, config)
    if _speedups is not None:
        t_cy = bench_epoch(_speedups, "cython", setup, dataset, config)
        print(f"end-to-end epoch speedup: {t_np / t_cy:.2f}x")


if __name__ == "__main__":
    main()
