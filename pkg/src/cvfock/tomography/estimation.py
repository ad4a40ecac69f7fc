"""Model-based parameter estimation from quadrature moments."""
from __future__ import annotations

from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import ModelMismatch, SchemaError
from ._data import quadrature_arrays

# q = (1 + 2 delta) / (1 + delta)^2 sweeps [5/9, 1] for delta in [0, 2]
_Q_MIN = 5.0 / 9.0


def fock1_model_moments(sigma2: float, delta: float) -> tuple[float, float]:
    """Second and fourth quadrature moments of the Fock-1 Wigner model."""
    return sigma2 * (1 + delta) / 2, 3 * sigma2 ** 2 * (1 + 2 * delta) / 4


def _q(mu2, mu4):
    return (4 * mu4 / 3) / (2 * mu2) ** 2


def fock1_from_moments(mu2: float, mu4: float) -> tuple[float, float, float]:
    """Invert the Fock-1 model: returns (sigma2, delta, W(0,0)).

    The model W = G_sigma(x, p) [1 - delta + delta (x^2 + p^2) / sigma^2] / ...
    has mu2 = sigma^2 (1 + delta) / 2 and mu4 = 3 sigma^4 (1 + 2 delta) / 4.
    """
    if mu2 <= 0 or mu4 <= 0:
        raise ModelMismatch("moments must be positive")
    q = _q(mu2, mu4)
    if q > 1 + 1e-12 or q < _Q_MIN - 1e-12:
        raise ModelMismatch(f"moment ratio q={q:.6g} outside the model range [{_Q_MIN:.4f}, 1]")
    q = min(max(q, _Q_MIN), 1.0)
    root = np.sqrt(1 - q)
    delta = ((1 - q) + root) / q
    sigma2 = 2 * mu2 / (1 + delta)
    return float(sigma2), float(delta), float((1 - delta) / (np.pi * sigma2))


def _w00(mu2, mu4):
    q = min(max(_q(mu2, mu4), _Q_MIN), 1.0)
    delta = ((1 - q) + np.sqrt(1 - q)) / q
    sigma2 = 2 * mu2 / (1 + delta)
    return (1 - delta) / (np.pi * sigma2)


def moment_covariance(moments: dict[int, float], orders, n: int) -> np.ndarray:
    """<d mu_k d mu_l> = (mu_{k+l} - mu_k mu_l) / n."""
    return np.array([[(moments[k + l] - moments[k] * moments[l]) / n for l in orders] for k in orders])


def propagate(fn: Callable, point, cov: np.ndarray, rel_step: float = 1e-6) -> float:
    """Linear error propagation through ``fn`` with a central-difference gradient."""
    point = np.asarray(point, float)
    grad = np.empty(point.size)
    for i in range(point.size):
        h = rel_step * max(abs(point[i]), 1e-8)
        up, dn = point.copy(), point.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (fn(*up) - fn(*dn)) / (2 * h)
    return float(np.sqrt(max(grad @ cov @ grad, 0.0)))


class Fock1MomentEstimator(BaseEstimator):
    """Fit the two-parameter Fock-1 Wigner model from phase-averaged moments.

    The model is a Gaussian envelope of variance sigma^2/2 with a radial
    dip weighted by delta; an eta-lossy single photon has sigma^2 = 1 and
    delta = 2 eta.  Moments are averaged over all phases, so the estimator is
    meant for phase-invariant states.

    ``mismatch_sigmas`` sets how far (in standard errors) the moment ratio
    may fall outside the model range before ModelMismatch is raised; inside
    that margin the ratio is clipped to the range edge.

    Attributes after fit: ``moments_`` (orders 2..8), ``sigma2_``, ``delta_``,
    ``w00_``, ``w00_stderr_``, ``n_samples_``.
    """

    def __init__(self, mismatch_sigmas: float = 3.0):
        self.mismatch_sigmas = mismatch_sigmas

    def fit(self, X, y=None):
        _, x = quadrature_arrays(X)
        n = x.size
        if n < 2:
            raise SchemaError("need at least two samples")
        mom = {k: float(np.mean(x ** k)) for k in (0, 2, 4, 6, 8)}
        mu2, mu4 = mom[2], mom[4]
        cov = moment_covariance(mom, (2, 4), n)
        q = _q(mu2, mu4)
        q_err = propagate(_q, (mu2, mu4), cov)
        margin = self.mismatch_sigmas * q_err
        if q > 1 + margin or q < _Q_MIN - margin:
            raise ModelMismatch(f"moment ratio q={q:.6g} (+/- {q_err:.2g}) is outside the Fock-1 model range")
        q_c = min(max(q, _Q_MIN), 1.0)
        delta = ((1 - q_c) + np.sqrt(1 - q_c)) / q_c
        self.moments_ = {k: v for k, v in mom.items() if k}
        self.delta_ = float(delta)
        self.sigma2_ = float(2 * mu2 / (1 + delta))
        self.w00_ = float((1 - delta) / (np.pi * self.sigma2_))
        self.w00_stderr_ = propagate(_w00, (mu2, mu4), cov)
        self.n_samples_ = n
        return self


def bootstrap(X, statistic: Callable, n_resamples: int = 200, seed=None) -> np.ndarray:
    """Bootstrap distribution of ``statistic`` over resampled datasets.

    ``statistic`` receives an (n, 2) array of (theta, x) rows.  Resampling is
    with replacement, driven by ``numpy.random.default_rng(seed)``.
    """
    theta, x = quadrature_arrays(X)
    data = np.column_stack([theta, x])
    if n_resamples < 1:
        raise SchemaError("n_resamples must be positive")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(int(n_resamples)):
        idx = rng.integers(0, data.shape[0], data.shape[0])
        out.append(statistic(data[idx]))
    return np.asarray(out)
