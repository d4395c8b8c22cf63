"""Brute-force O(N^2) reference for the potential sum.

Rows are streamed in fixed-size chunks so the full kernel matrix is
never materialized; always serial and bit-deterministic.
"""

from __future__ import annotations

import numpy as np

CHUNK = 512


def dense_matvec(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    """phi_i = sum_{j != i} -log|x_i - x_j| q_j, in index order."""
    points = np.asarray(points, dtype=float)
    q = np.asarray(q, dtype=float)
    n = points.shape[0]
    if q.shape != (n,):
        raise ValueError("q must have one charge per point")

    phi = np.empty(n)
    for a in range(0, n, CHUNK):
        b = min(a + CHUNK, n)
        diff = points[a:b, None, :] - points[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        # Zero self-interaction; any other coincidence is an input error.
        idx = np.arange(a, b)
        d2[idx - a, idx] = 1.0
        if (d2 == 0.0).any():
            raise ValueError("coincident points")
        phi[a:b] = (-0.5 * np.log(d2)) @ q
    return phi
