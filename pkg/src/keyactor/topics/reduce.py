"""Dimensionality reduction behind a pluggable reducer interface.

The default reducer is plain PCA: deterministic, seed-free, and exact, which
keeps the clustering stage reproducible. Anything with a
``reduce(matrix, target_dim)`` method can be swapped in.
"""

from typing import Protocol

import numpy as np

from ..errors import DimensionError


class Reducer(Protocol):
    def reduce(self, matrix: np.ndarray, target_dim: int) -> np.ndarray: ...


class PCAReducer:
    """Principal-component scores with sign-fixed components."""

    name = "pca"

    def reduce(self, matrix: np.ndarray, target_dim: int) -> np.ndarray:
        X = np.asarray(matrix, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 1:
            raise DimensionError(f"expected a non-empty 2-D matrix, got shape {X.shape}")
        n, d = X.shape
        if target_dim > d:
            raise DimensionError(f"target_dim {target_dim} exceeds input dimension {d}")
        centered = X - X.mean(axis=0)
        u, s, vt = np.linalg.svd(centered, full_matrices=False)
        # SVD sign ambiguity: make each component's largest-|entry| positive.
        flip = np.sign(vt[np.arange(vt.shape[0]), np.abs(vt).argmax(axis=1)])
        flip[flip == 0] = 1.0
        scores = u * s * flip
        if scores.shape[1] < target_dim:
            # Rank-deficient input (n < target_dim): missing directions carry
            # zero variance, so their coordinates are exactly zero.
            pad = np.zeros((n, target_dim - scores.shape[1]))
            return np.hstack([scores, pad])
        return scores[:, :target_dim]

    def components(self, matrix: np.ndarray, target_dim: int) -> np.ndarray:
        X = np.asarray(matrix, dtype=np.float64)
        centered = X - X.mean(axis=0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        flip = np.sign(vt[np.arange(vt.shape[0]), np.abs(vt).argmax(axis=1)])
        flip[flip == 0] = 1.0
        return (vt * flip[:, None])[:target_dim]


def reduce_dimensions(matrix: np.ndarray, target_dim: int, reducer: Reducer | None = None) -> np.ndarray:
    reducer = reducer if reducer is not None else PCAReducer()
    return reducer.reduce(matrix, target_dim)
