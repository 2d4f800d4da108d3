"""Wall-clock measurement of forward passes and of the kernel backends.

Timings use a monotonic clock and report the median as the headline number
(robust to scheduler noise).  Model outputs are accumulated into a checksum
so the measured work cannot be skipped.
"""

import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .linalg import csr_from_masked
from .network import forward_sequence


@dataclass
class TimingStats:
    """Seconds per measured forward pass."""

    median: float
    mean: float
    std: float
    repetitions: int
    warmup: int
    checksum: float = 0.0


def _stats(samples, warmup, checksum):
    return TimingStats(
        median=statistics.median(samples),
        mean=statistics.fmean(samples),
        std=statistics.pstdev(samples) if len(samples) > 1 else 0.0,
        repetitions=len(samples),
        warmup=warmup,
        checksum=checksum,
    )


def benchmark_forward(model, windows, reps=100, warmup=5):
    """Time single-window forward passes over identical inputs.

    Runs ``warmup`` unmeasured sweeps (also absorbs JIT compilation), then
    ``reps`` measured sweeps; every individual forward is one sample.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    windows = [np.asarray(w, dtype=np.float64) for w in windows]
    sink = 0.0
    for _ in range(warmup):
        for w in windows:
            pred, _ = forward_sequence(model, w)
            sink += pred.value if pred.value is not None else float(pred.distribution[0])
    samples = []
    for _ in range(reps):
        for w in windows:
            t0 = time.perf_counter()
            pred, _ = forward_sequence(model, w)
            t1 = time.perf_counter()
            sink += pred.value if pred.value is not None else float(pred.distribution[0])
            samples.append(t1 - t0)
    if not np.isfinite(sink):
        raise RuntimeError("non-finite outputs during benchmark")
    return _stats(samples, warmup, sink)


def benchmark_kernel_paths(hidden=300, input_dim=1, density=0.01, reps=200,
                           warmup=10, seed=0):
    """Micro-benchmark the sparse kernel backends against dense BLAS.

    Returns {name: TimingStats} with entries for the dense matvec, the
    numpy CSR kernel and (when importable) the numba CSR kernel.
    """
    rng = np.random.default_rng(seed)
    rows, cols = 4 * hidden, input_dim + hidden
    w = rng.normal(size=(rows, cols))
    mask = rng.random((rows, cols)) < density
    w = w * mask
    csr = csr_from_masked(w, mask)
    x = rng.normal(size=cols)

    def run_dense():
        return w @ x

    def run_numpy():
        return kernels.csr_matvec_numpy(csr.row_offsets, csr.col_indices,
                                        csr.values, x, csr.rows)

    candidates = {"dense_blas": run_dense, "csr_numpy": run_numpy}
    if kernels.NUMBA_AVAILABLE:
        def run_numba():
            return kernels.csr_matvec_numba(csr.row_offsets, csr.col_indices,
                                            csr.values, x, csr.rows)
        candidates["csr_numba"] = run_numba

    results = {}
    for name, fn in candidates.items():
        checksum = 0.0
        for _ in range(warmup):
            checksum += float(fn()[0])
        samples = []
        for _ in range(reps):
            t0 = time.perf_counter()
            out = fn()
            t1 = time.perf_counter()
            checksum += float(out[0])
            samples.append(t1 - t0)
        results[name] = _stats(samples, warmup, checksum)
    return results
