"""Compiled per-path hot kernel for the Z-path functional.

Mirrors ``_kernels_np.z_path_kernel`` operation for operation: every path
performs the same scalar arithmetic on the same buffer entries, so the two
backends agree to a few ulps.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["z_path_kernel"]


@njit(cache=True)
def z_path_kernel(alpha, gamma, dt0, u_buf, e_buf):
    n_paths, n_steps = u_buf.shape
    inv_a = 1.0 / alpha
    z = np.zeros(n_paths)
    status = np.zeros(n_paths, dtype=np.int64)
    for i in range(n_paths):
        A = 0.0
        zi = 0.0
        dt = dt0
        thr = 0.1
        for j in range(n_steps):
            u = u_buf[i, j]
            e = e_buf[i, j]
            s = (
                np.sin(alpha * u)
                / np.sin(u) ** inv_a
                * (np.sin((1.0 - alpha) * u) / e) ** ((1.0 - alpha) * inv_a)
            )
            dA = dt ** inv_a * s
            gap = 1.0 - A
            if dA >= gap:
                zi += (1.0 - A) ** (gamma + 1.0) * dt / (dA * (gamma + 1.0))
                status[i] = 1
                break
            zi += (1.0 - A) ** gamma * dt
            A += dA
            if 1.0 - A < thr:
                dt *= 0.5
                thr *= 0.5
        z[i] = zi
    return z, status
