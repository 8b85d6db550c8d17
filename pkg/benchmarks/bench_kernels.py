"""Benchmark the Z-path kernel: compiled backend vs pure numpy.

Run:  python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from stretchrenew import _kernels_np

try:
    from stretchrenew import _kernels_nb

    HAVE_NB = True
except ImportError:
    HAVE_NB = False


def bench(kernel, alpha, gamma, u, e, repeat=5):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        kernel(alpha, gamma, 0.02, u, e)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    n_paths, width = 2048, 2048
    u = rng.uniform(0.0, math.pi, (n_paths, width))
    e = rng.exponential(1.0, (n_paths, width))
    print(f"{n_paths} paths x {width} step buffer")
    for alpha, gamma in [(0.5, 0.0), (0.7, 0.1), (0.5, 0.8)]:
        t_np = bench(_kernels_np.z_path_kernel, alpha, gamma, u, e)
        line = f"(alpha={alpha}, gamma={gamma})  numpy {t_np*1e3:8.1f} ms"
        if HAVE_NB:
            _kernels_nb.z_path_kernel(alpha, gamma, 0.02, u, e)  # warm JIT
            t_nb = bench(_kernels_nb.z_path_kernel, alpha, gamma, u, e)
            line += f"   numba {t_nb*1e3:8.1f} ms   speedup {t_np/t_nb:5.1f}x"
            z1, s1 = _kernels_np.z_path_kernel(alpha, gamma, 0.02, u, e)
            z2, s2 = _kernels_nb.z_path_kernel(alpha, gamma, 0.02, u, e)
            ok = s1[s1 == 1].size and np.allclose(
                z1[s1 == 1], z2[s2 == 1], rtol=1e-12
            )
            line += f"   agree: {bool(ok)}"
        print(line)


if __name__ == "__main__":
    main()
