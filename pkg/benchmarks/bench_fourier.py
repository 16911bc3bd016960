"""Time the finite Fourier transform of phi_c with both kernels.

    python benchmarks/bench_fourier.py [--p 3] [--e 1] [--c 1] [--repeat 3]
"""
import argparse
import time

import numpy as np

from shalika import zeta
from shalika.char_values import default_char


def run(p: int, e: int, c: int, repeat: int):
    block = zeta.SchwartzBlock("phi_full", 1, default_char(p, e), c)
    sampled = zeta.sample_block(block, zeta.default_window(block))
    results = {}
    for kernel in ("numba", "numpy"):
        zeta.fourier(sampled, kernel)  # warm-up, includes numba compilation
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            out = zeta.fourier(sampled, kernel)
            times.append(time.perf_counter() - t0)
        results[kernel] = (min(times), out)
    same = np.array_equal(results["numba"][1].arr, results["numpy"][1].arr)
    shape = sampled.arr.shape
    print(f"p={p} e={e} c={c} window={sampled.window} array={shape}")
    for kernel, (t, _) in results.items():
        print(f"  {kernel:6s} {t * 1e3:9.2f} ms")
    print(f"  identical output: {same}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--e", type=int, default=1)
    ap.add_argument("--c", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    run(a.p, a.e, a.c, a.repeat)
