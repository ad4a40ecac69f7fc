"""Figures of merit: fidelity, entanglement, photon statistics."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ._config import PROBABILITY_FLOOR
from .core import DM, StateArray, check_modes, embed, expect, partial_trace, quadrature
from .errors import SchemaError, UndefinedQuantity


def _common_cutoffs(a: StateArray, b: StateArray):
    if a.n_modes != b.n_modes:
        raise SchemaError(f"mode counts differ ({a.n_modes} vs {b.n_modes})")
    cut = tuple(max(x, y) for x, y in zip(a.cutoffs, b.cutoffs))
    return embed(a, cut), embed(b, cut)


def fidelity(a: StateArray, b: StateArray) -> float:
    """Uhlmann fidelity (squared convention; 1 for identical states).

    States with different cutoffs are compared after zero padding.  Both
    arguments are normalized first.
    """
    a, b = _common_cutoffs(a.normalized(), b.normalized())
    if a.is_ket and b.is_ket:
        return float(abs(np.vdot(a.vector, b.vector)) ** 2)
    if a.is_ket or b.is_ket:
        ket, mix = (a, b) if a.is_ket else (b, a)
        v = ket.vector
        return float(np.real(np.vdot(v, mix.matrix @ v)))
    ra, rb = a.matrix, b.matrix
    ev, vec = np.linalg.eigh((ra + ra.conj().T) / 2)
    ev = np.clip(ev, 0, None)
    s = (vec * np.sqrt(ev)) @ vec.conj().T
    inner = s @ rb @ s
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    return float(np.sum(np.sqrt(np.clip(w, 0, None))) ** 2)


def partial_transpose(state: StateArray, modes: Sequence[int]) -> StateArray:
    modes = check_modes(state, modes)
    rho = state.to_dm()
    n = rho.n_modes
    axes = list(range(2 * n))
    for m in modes:
        axes[m], axes[n + m] = axes[n + m], axes[m]
    return StateArray(np.transpose(rho.data, axes), rho.cutoffs, DM, rho.discarded)


def log_negativity(state: StateArray, partition: Sequence[int]) -> float:
    """log2 of the trace norm of the partial transpose over ``partition``."""
    pt = partial_transpose(state.normalized(), partition)
    m = pt.matrix
    ev = np.linalg.eigvalsh((m + m.conj().T) / 2)
    return float(np.log2(np.sum(np.abs(ev))))


def negativity(state: StateArray, partition: Sequence[int]) -> float:
    """(||rho^T_A||_1 - 1) / 2."""
    return (2 ** log_negativity(state, partition) - 1) / 2


def von_neumann_entropy(state: StateArray) -> float:
    """Entropy in bits."""
    if state.is_ket:
        return 0.0
    m = state.normalized().matrix
    ev = np.linalg.eigvalsh((m + m.conj().T) / 2)
    ev = ev[ev > 1e-15]
    return float(-np.sum(ev * np.log2(ev)))


def entanglement_entropy(state: StateArray, partition: Sequence[int]) -> float:
    """Entropy (bits) of the reduced state on ``partition``.

    This measures entanglement only when the global state is pure.
    """
    return von_neumann_entropy(partial_trace(state, partition))


def epr_entropy(r: float) -> float:
    """Closed form G log2 G - (G-1) log2 (G-1) with G = cosh^2 r."""
    g = np.cosh(r) ** 2
    if g - 1 < 1e-300:
        return 0.0
    return float(g * np.log2(g) - (g - 1) * np.log2(g - 1))


def mean_photon(state: StateArray, mode: int = 0) -> float:
    p = state.fock_distribution(mode)
    return float(np.dot(np.arange(p.size), p) / p.sum())


def photon_variance(state: StateArray, mode: int = 0) -> float:
    p = state.fock_distribution(mode)
    p = p / p.sum()
    n = np.arange(p.size)
    mu = np.dot(n, p)
    return float(np.dot(n ** 2, p) - mu ** 2)


def fano_factor(state: StateArray, mode: int = 0) -> float:
    mu = mean_photon(state, mode)
    if mu < PROBABILITY_FLOOR:
        raise UndefinedQuantity("Fano factor is undefined for a state with no photons")
    return photon_variance(state, mode) / mu


def quadrature_moments(state: StateArray, mode: int = 0, theta: float = 0.0) -> tuple[float, float]:
    """Mean and variance of x_theta on one mode."""
    N = state.cutoffs[mode]
    xq = quadrature(N, theta)
    mean = expect(state, xq, [mode]).real
    # x^2 built with one extra level so that the top entry is exact
    xb = quadrature(N + 1, theta)
    x2 = (xb @ xb)[: N + 1, : N + 1]
    second = expect(state, x2, [mode]).real
    return float(mean), float(second - mean ** 2)


def two_mode_quadrature_variance(state: StateArray, modes=(0, 1), sign: int = -1,
                                 theta: tuple[float, float] = (0.0, 0.0)) -> float:
    """Variance of (x_A + sign * x_B) / sqrt(2)."""
    i, j = check_modes(state, modes)
    red = partial_trace(state, [i, j])
    Na, Nb = red.cutoffs
    def padded(N, th):
        x = quadrature(N + 1, th)
        return x[: N + 1, : N + 1], (x @ x)[: N + 1, : N + 1]
    xa, xa2 = padded(Na, theta[0])
    xb, xb2 = padded(Nb, theta[1])
    ia, ib = np.eye(Na + 1), np.eye(Nb + 1)
    op1 = (np.kron(xa, ib) + sign * np.kron(ia, xb)) / np.sqrt(2)
    op2 = (np.kron(xa2, ib) + np.kron(ia, xb2) + 2 * sign * np.kron(xa, xb)) / 2
    m1 = expect(red, op1, [0, 1]).real
    m2 = expect(red, op2, [0, 1]).real
    return float(m2 - m1 ** 2)
