"""Input coercion shared by the estimators."""
from __future__ import annotations

import numpy as np

from ..errors import SchemaError
from ..homodyne import QuadratureDataset


def quadrature_arrays(X) -> tuple[np.ndarray, np.ndarray]:
    """Return (theta, x) from a QuadratureDataset or an (n, 2) array-like."""
    if isinstance(X, QuadratureDataset):
        theta, x = X.theta, X.x
    else:
        arr = np.asarray(X, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise SchemaError("expected an (n, 2) array of (theta, x) rows or a QuadratureDataset")
        theta, x = arr[:, 0], arr[:, 1]
    if theta.size == 0:
        raise SchemaError("dataset is empty")
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(x))):
        raise SchemaError("dataset contains non-finite values")
    return np.asarray(theta, float), np.asarray(x, float)


def fold_phases(theta: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map phases into [0, pi) using x_{theta + pi} = -x_theta."""
    t = np.mod(theta, 2 * np.pi)
    flip = t >= np.pi
    return np.where(flip, t - np.pi, t), np.where(flip, -x, x)


def phase_groups(theta: np.ndarray, max_groups: int, decimals: int = 9):
    """Group samples by phase.

    If there are at most ``max_groups`` distinct phases (after rounding),
    each distinct value is its own group and the reported phase is exact.
    Otherwise [0, pi) is split into ``max_groups`` equal bins and each bin is
    represented by the circular mean of its members.

    Returns (labels, representative phases, exact flag).
    """
    rounded = np.round(theta, decimals)
    uniq, labels = np.unique(rounded, return_inverse=True)
    if uniq.size <= max_groups:
        return labels, uniq.astype(float), True
    edges = np.linspace(0, np.pi, max_groups + 1)
    labels = np.clip(np.searchsorted(edges, theta, side="right") - 1, 0, max_groups - 1)
    present = np.unique(labels)
    remap = np.full(max_groups, -1)
    remap[present] = np.arange(present.size)
    labels = remap[labels]
    # doubled angle so that the mean respects the pi-periodicity of the folding
    z = np.bincount(labels, weights=np.cos(2 * theta)) + 1j * np.bincount(labels, weights=np.sin(2 * theta))
    reps = np.mod(np.angle(z) / 2, np.pi)
    return labels, reps, False
