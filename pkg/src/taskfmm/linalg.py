"""Dense kernel evaluation and small linear-algebra helpers.

The interaction kernel is the 2D logarithmic potential
k(a, b) = -log|a - b|, with a zero diagonal for self interactions.
"""

from __future__ import annotations

import numpy as np

DEFAULT_PINV_CUTOFF = 1e-12


def kernel_eval(a, b, same_index: bool = False) -> float:
    """-log of the distance between two points; 0 for a self pair."""
    if same_index:
        return 0.0
    d = np.hypot(a[0] - b[0], a[1] - b[1])
    if d == 0.0:
        raise ValueError("coincident points with distinct indices")
    return -np.log(d)


def kernel_matrix(targets: np.ndarray, sources: np.ndarray,
                  same_set: bool = False) -> np.ndarray:
    """Kernel matrix between target and source point sets.

    With same_set=True, targets and sources are the same indexed set and
    the diagonal is forced to zero.
    """
    targets = np.asarray(targets, dtype=float)
    sources = np.asarray(sources, dtype=float)
    diff = targets[:, None, :] - sources[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    if same_set:
        np.fill_diagonal(d2, 1.0)
    elif (d2 == 0.0).any():
        raise ValueError("a target coincides with a source")
    # Column-major so task bodies stream contiguous columns.
    return np.asfortranarray(-0.5 * np.log(d2))


def gemv(A: np.ndarray, x: np.ndarray, y: np.ndarray | None = None,
         accumulate: bool = False) -> np.ndarray:
    """y = A x, or y += A x when accumulating into an existing y."""
    if A.shape[1] != x.shape[0]:
        raise ValueError("dimension mismatch in gemv")
    if accumulate:
        if y is None or y.shape[0] != A.shape[0]:
            raise ValueError("accumulate=True needs a conforming y")
        y += A @ x
        return y
    out = A @ x
    if y is not None:
        y[:] = out
        return y
    return out


def pinv(A: np.ndarray, rel_cutoff: float = DEFAULT_PINV_CUTOFF) -> np.ndarray:
    """Truncated-SVD Moore-Penrose pseudoinverse.

    Singular values below rel_cutoff * sigma_max are dropped; the kernel
    matrices between concentric circles are exponentially ill-conditioned
    and need this regularization.
    """
    if not 0.0 < rel_cutoff < 1.0:
        raise ValueError("rel_cutoff must be in (0, 1)")
    return np.linalg.pinv(A, rcond=rel_cutoff)


def circle_points(center, radius: float, count: int) -> np.ndarray:
    """count points uniformly spaced on a circle, starting at angle 0."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if count < 3:
        raise ValueError("need at least 3 circle points")
    theta = 2.0 * np.pi * np.arange(count) / count
    return np.column_stack(
        (center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta))
    )
