"""Harmonic-oscillator wavefunctions in the x = (a + a^dag)/sqrt(2) convention."""
from __future__ import annotations

import numpy as np


def fock_wavefunctions(cutoff: int, x) -> np.ndarray:
    """psi_n(x) for n = 0..cutoff, shape (cutoff+1, len(x)).

    Uses the normalized three-term recurrence, which stays finite where the
    explicit Hermite-polynomial form overflows.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((cutoff + 1, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-x ** 2 / 2)
    if cutoff >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, cutoff):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1.0)) * out[n - 1]
    return out


def quadrature_overlaps(cutoff: int, theta: float, x) -> np.ndarray:
    """<x_theta = x | n> = psi_n(x) e^{-i n theta}, shape (cutoff+1, len(x))."""
    psi = fock_wavefunctions(cutoff, x)
    return psi * np.exp(-1j * theta * np.arange(cutoff + 1))[:, None]
