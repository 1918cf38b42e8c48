"""Benchmark the numba kernels against the pure-numpy fallback.

Times full batched matvecs (decode, alignment, products, tree, normalize,
merge) on the stock 4096-MAC design points, plus the INT8 datapath.

  python3 benchmarks/bench_backends.py [--batch 256] [--reps 5]
"""

import argparse
import time

import numpy as np

import cimsim.backends as backends
from cimsim.backends import numpy_backend
from cimsim import matvec_batch, program_weights
from cimsim.codec import BF16, INT8, NEAREST_EVEN, floats_to_words
from cimsim.config import CrossbarConfig, named_design

try:
    from cimsim.backends import numba_backend
except ImportError:
    numba_backend = None

_KERNELS = ("fp_tile_pre", "fp_tile_post", "int_tile")


def _bind(module):
    for name in _KERNELS:
        setattr(backends, name, getattr(module, name))


def _workloads(batch):
    rng = np.random.default_rng(0)
    weights = floats_to_words(rng.normal(0, 1, (128, 32)), BF16, NEAREST_EVEN)
    inputs = floats_to_words(rng.normal(0, 1, (batch, 128)), BF16, NEAREST_EVEN)
    int_cfg = CrossbarConfig(rows=128, cols=32, precision=INT8)
    return (
        ("baseline 128x32 pre", named_design("baseline"), inputs, weights),
        ("post_mono 128x32", named_design("post_mono"), inputs, weights),
        ("hardened 8x4x16x8", named_design("hardened"), inputs, weights),
        ("int8 128x32", int_cfg,
         rng.integers(-127, 128, (batch, 128)),
         rng.integers(-127, 128, (128, 32))),
    )


def _time(fn, reps):
    best = float("inf")
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--batch", type=int, default=256)
    parser.add_argument("--reps", type=int, default=5)
    args = parser.parse_args()

    modules = [("numpy", numpy_backend)]
    if numba_backend is not None:
        modules.append(("numba", numba_backend))
    else:
        print("numba unavailable; timing the numpy fallback only")

    print(f"batch={args.batch}, best of {args.reps} reps, times in ms")
    header = f"{'workload':<22}" + "".join(f"{n:>12}" for n, _ in modules)
    if len(modules) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, cfg, inputs, weights in _workloads(args.batch):
        programmed = program_weights(weights, cfg)
        times = []
        for _, module in modules:
            _bind(module)
            out = matvec_batch(inputs, programmed)  # warm the JIT cache
            times.append(_time(lambda: matvec_batch(inputs, programmed),
                               args.reps))
            checksum = int(np.asarray(out).sum())
        row = f"{label:<22}" + "".join(f"{t * 1e3:>12.2f}" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row + f"   (checksum {checksum})")
    _bind(numba_backend or numpy_backend)


if __name__ == "__main__":
    main()
