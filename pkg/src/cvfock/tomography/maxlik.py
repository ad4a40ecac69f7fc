"""Iterative maximum-likelihood state reconstruction from homodyne data."""
from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator

from ..channels import loss_kraus
from ..core import DM, StateArray
from ..errors import SchemaError
from ..wavefunctions import fock_wavefunctions
from ._data import fold_phases, phase_groups, quadrature_arrays

_GL_NODES = 8


class MaxLikConvergenceWarning(UserWarning):
    """The iteration stopped at max_iter before meeting the stopping rule."""


def bin_overlap_matrices(cutoff: int, edges: np.ndarray) -> np.ndarray:
    """M_b[m, n] = integral over bin b of psi_m(x) psi_n(x) dx.

    psi_m psi_n is a Gaussian times a polynomial of degree <= 2 cutoff, so a
    modest Gauss-Legendre rule per bin is close to exact for narrow bins.
    """
    nodes, weights = np.polynomial.legendre.leggauss(_GL_NODES)
    lo, hi = edges[:-1], edges[1:]
    half = (hi - lo) / 2
    xs = (lo + hi)[:, None] / 2 + half[:, None] * nodes[None, :]
    ws = half[:, None] * weights[None, :]
    psi = fock_wavefunctions(cutoff, xs.ravel()).reshape(cutoff + 1, *xs.shape)
    return np.einsum("mbq,nbq,bq->bmn", psi, psi, ws)


def loss_adjoint(povm: np.ndarray, eta: float) -> np.ndarray:
    """Heisenberg-picture loss: Pi -> sum_k E_k^dag Pi E_k for a stack of POVM elements."""
    if eta == 1.0:
        return povm
    out = np.zeros_like(povm)
    for E in loss_kraus(float(eta), povm.shape[-1] - 1):
        out += np.einsum("km,bkl,ln->bmn", E, povm, E)
    return out


class MaxLikTomography(BaseEstimator):
    """Maximum-likelihood reconstruction by the R rho R iteration.

    Quadrature outcomes are histogrammed into bins of width ``bin_width``
    over [-x_range, x_range]; each (phase, bin) pair gets its integrated POVM
    element.  A known detection efficiency ``eta`` is corrected for by
    transforming the POVM elements with the adjoint loss channel, so the
    estimate refers to the state before loss.

    The iteration starts from the maximally mixed state and updates
    rho <- G^{-1/2} R rho R G^{-1/2} / tr, where G is the phase-weighted
    sum of all POVM elements (identity up to the finite x window and the loss
    correction).  It stops when the relative log-likelihood gain drops
    below ``tol`` or after ``max_iter`` iterations.

    Attributes after fit: ``density_matrix_``, ``state_``, ``n_iter_``,
    ``log_likelihood_``, ``history_`` (log-likelihood after each iteration,
    starting with the initial state), ``converged_``, ``monotone_``,
    ``n_outside_`` (samples beyond the x window), ``phases_``.
    """

    def __init__(self, cutoff: int = 10, eta: float = 1.0, max_iter: int = 2000,
                 tol: float = 1e-8, bin_width: float = 0.1, x_range: float = 6.0,
                 max_phase_groups: int = 128):
        self.cutoff = cutoff
        self.eta = eta
        self.max_iter = max_iter
        self.tol = tol
        self.bin_width = bin_width
        self.x_range = x_range
        self.max_phase_groups = max_phase_groups

    def _validate(self):
        if int(self.cutoff) < 1:
            raise SchemaError("cutoff must be at least 1")
        if not 0 < self.eta <= 1:
            raise SchemaError("eta must lie in (0, 1]")
        if self.tol <= 0 or self.bin_width <= 0 or self.x_range <= 0 or self.max_iter < 1:
            raise SchemaError("tol, bin_width, x_range and max_iter must be positive")

    def _binned(self, X):
        theta, x = fold_phases(*quadrature_arrays(X))
        nb = int(round(2 * self.x_range / self.bin_width))
        edges = np.linspace(-self.x_range, self.x_range, nb + 1)
        inside = (x >= edges[0]) & (x < edges[-1])
        labels, phases, _ = phase_groups(theta[inside], self.max_phase_groups)
        xbin = np.clip(np.searchsorted(edges, x[inside], side="right") - 1, 0, nb - 1)
        counts = np.zeros((phases.size, nb))
        np.add.at(counts, (labels, xbin), 1)
        return edges, phases, counts, int(np.count_nonzero(~inside))

    def _povms(self, edges, phases):
        N = int(self.cutoff)
        M = bin_overlap_matrices(N, edges)
        n = np.arange(N + 1)
        phase = np.exp(1j * np.subtract.outer(n, n)[None] * phases[:, None, None])
        # Pi_{j,b}[m, n] = M_b[m, n] e^{i (m - n) theta_j}
        P = phase[:, None] * M[None]
        P = P.reshape(-1, N + 1, N + 1)
        return loss_adjoint(P, float(self.eta)).reshape(phases.size, edges.size - 1, N + 1, N + 1)

    def fit(self, X, y=None):
        self._validate()
        edges, phases, counts, outside = self._binned(X)
        total = counts.sum()
        if total == 0:
            raise SchemaError("no samples fall inside the quadrature window")
        P = self._povms(edges, phases)
        weight = counts.sum(axis=1) / total
        G = np.einsum("j,jbmn->mn", weight, P)
        ev, vec = np.linalg.eigh((G + G.conj().T) / 2)
        G_isqrt = (vec / np.sqrt(ev)) @ vec.conj().T

        used = counts > 0
        Pu = P[used]
        f = counts[used]
        d = int(self.cutoff) + 1
        rho = np.eye(d, dtype=complex) / d

        def probs(r):
            return np.real(np.einsum("kmn,nm->k", Pu, r))

        p = probs(rho)
        ll = float(np.dot(f, np.log(p)))
        history = [ll]
        converged = False
        it = 0
        for it in range(1, int(self.max_iter) + 1):
            R = np.einsum("k,kmn->mn", f / (total * p), Pu)
            new = G_isqrt @ R @ rho @ R @ G_isqrt
            new = (new + new.conj().T) / 2
            new /= np.real(np.trace(new))
            p_new = probs(new)
            ll_new = float(np.dot(f, np.log(p_new)))
            history.append(ll_new)
            gain = ll_new - ll
            rho, p, ll = new, p_new, ll_new
            if gain < self.tol * abs(ll):
                converged = True
                break
        if not converged:
            warnings.warn(f"MaxLik stopped after {it} iterations without meeting tol={self.tol}",
                          MaxLikConvergenceWarning, stacklevel=2)
        hist = np.asarray(history)
        self.density_matrix_ = rho
        self.state_ = StateArray(rho, (d - 1,), DM)
        self.n_iter_ = it
        self.log_likelihood_ = ll
        self.history_ = hist
        self.converged_ = converged
        self.monotone_ = bool(np.all(np.diff(hist) >= -1e-9 * np.abs(hist[1:])))
        self.n_outside_ = outside
        self.phases_ = phases
        return self

    def score(self, X, y=None) -> float:
        """Mean log-likelihood per binned sample under the fitted state."""
        edges, phases, counts, _ = self._binned(X)
        P = self._povms(edges, phases)
        p = np.real(np.einsum("jbmn,nm->jb", P, self.density_matrix_))
        used = counts > 0
        return float(np.dot(counts[used], np.log(np.clip(p[used], 1e-300, None))) / counts.sum())
