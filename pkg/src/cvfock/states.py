"""Constructors for the standard single- and two-mode states.

Every constructor computes the weight the ideal (untruncated) state has
above the requested cutoff.  If it exceeds the leakage tolerance the call
fails with ``CutoffInsufficient``; otherwise the truncated state is
renormalized and the lost weight is recorded in ``StateArray.discarded``.
Passing ``cutoff=None`` picks the smallest cutoff that meets the tolerance.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from ._config import leakage_tolerance
from .core import DM, KET, StateArray, tensor
from .errors import CutoffInsufficient, SchemaError

_AUTO_MAX = 400


def _check_finite(**params):
    for name, v in params.items():
        if not np.all(np.isfinite(v)):
            raise SchemaError(f"parameter {name} must be finite, got {v}")


def _finish(amps_fn, cutoff, name, full_weight=1.0):
    """Build a ket from an amplitude function with leakage accounting."""
    tol = leakage_tolerance()
    if cutoff is None:
        n = 8
        while True:
            cum = np.cumsum(np.abs(amps_fn(n)) ** 2)
            ok = np.nonzero(1 - cum / full_weight <= tol)[0]
            if ok.size:
                cutoff = int(ok[0])
                break
            if n >= _AUTO_MAX:
                raise CutoffInsufficient(f"{name}: no cutoff up to {_AUTO_MAX} meets tolerance",
                                         float(1 - cum[-1] / full_weight))
            n = min(_AUTO_MAX, 2 * n)
        amps = amps_fn(cutoff)
    else:
        cutoff = int(cutoff)
        if cutoff < 0:
            raise SchemaError("cutoff must be non-negative")
        amps = amps_fn(cutoff)
    w = float(np.sum(np.abs(amps) ** 2))
    leak = max(0.0, 1 - w / full_weight)
    if leak > tol:
        raise CutoffInsufficient(
            f"{name}: {leak:.3g} of the weight lies above cutoff {cutoff} (tolerance {tol:g})", leak)
    return StateArray(amps / np.sqrt(w), (cutoff,), KET, leak)


def make_vacuum(cutoffs=(0,)) -> StateArray:
    if np.isscalar(cutoffs):
        cutoffs = (int(cutoffs),)
    dims = tuple(int(c) + 1 for c in cutoffs)
    data = np.zeros(dims, complex)
    data[(0,) * len(dims)] = 1
    return StateArray(data, cutoffs, KET)


def make_fock(n: int, cutoff: int | None = None) -> StateArray:
    n = int(n)
    if n < 0:
        raise SchemaError("photon number must be non-negative")
    cutoff = n if cutoff is None else int(cutoff)
    if n > cutoff:
        raise CutoffInsufficient(f"Fock state |{n}> does not fit below cutoff {cutoff}", 1.0)
    v = np.zeros(cutoff + 1, complex)
    v[n] = 1
    return StateArray(v, (cutoff,), KET)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    if alpha == 0:
        out = np.zeros(cutoff + 1, complex)
        out[0] = 1
        return out
    mag = abs(alpha)
    logc = -mag ** 2 / 2 + n * np.log(mag) - 0.5 * gammaln(n + 1)
    return np.exp(logc) * np.exp(1j * n * np.angle(alpha))


def make_coherent(alpha: complex, cutoff: int | None = None) -> StateArray:
    alpha = complex(alpha)
    _check_finite(alpha=alpha)
    return _finish(lambda N: coherent_amplitudes(alpha, N), cutoff, f"coherent({alpha:g})")


def squeezed_vacuum_amplitudes(r: float, phi: float, cutoff: int) -> np.ndarray:
    """c_{2k} = (-e^{i phi} tanh r)^k sqrt((2k)!) / (2^k k! sqrt(cosh r))."""
    out = np.zeros(cutoff + 1, complex)
    if r == 0:
        out[0] = 1
        return out
    k = np.arange(cutoff // 2 + 1)
    t = np.tanh(abs(r))
    logc = (-0.5 * np.log(np.cosh(r)) + 0.5 * gammaln(2 * k + 1) - k * np.log(2) - gammaln(k + 1)
            + k * np.log(t))
    sign = np.sign(r)
    out[2 * k] = np.exp(logc) * (-sign * np.exp(1j * phi)) ** k
    return out


def make_squeezed_vacuum(r: float, phi: float = 0.0, cutoff: int | None = None) -> StateArray:
    """Squeezed vacuum; for phi=0 and r>0 the x quadrature is squeezed."""
    _check_finite(r=r, phi=phi)
    return _finish(lambda N: squeezed_vacuum_amplitudes(r, phi, N), cutoff, f"squeezed({r:g})")


def make_epr(r: float, cutoff: int | None = None) -> StateArray:
    """Two-mode squeezed vacuum sum_k tanh^k(r)/cosh(r) |k,k>."""
    _check_finite(r=r)
    lam = np.tanh(r)
    tol = leakage_tolerance()
    if cutoff is None:
        if lam == 0:
            cutoff = 0
        else:
            # leakage is lam^(2(N+1))
            cutoff = max(0, int(np.ceil(np.log(tol) / (2 * np.log(abs(lam))))) - 1)
            while lam ** (2 * (cutoff + 1)) > tol:
                cutoff += 1
    cutoff = int(cutoff)
    k = np.arange(cutoff + 1)
    amps = lam ** k / np.cosh(r)
    w = float(np.sum(amps ** 2))
    leak = max(0.0, 1 - w)
    if leak > tol:
        raise CutoffInsufficient(
            f"EPR(r={r:g}): {leak:.3g} of the weight lies above cutoff {cutoff} (tolerance {tol:g})",
            leak)
    data = np.zeros((cutoff + 1, cutoff + 1), complex)
    data[k, k] = amps / np.sqrt(w)
    return StateArray(data, (cutoff, cutoff), KET, leak)


def cat_normalization(alpha: complex, theta: float) -> float:
    """c in (|alpha> + e^{i theta}|-alpha>) / sqrt(2c)."""
    return 1 + np.cos(theta) * np.exp(-2 * abs(alpha) ** 2)


def make_cat(alpha: complex, theta: float = 0.0, cutoff: int | None = None) -> StateArray:
    """Cat state (|alpha> + e^{i theta} |-alpha>) / sqrt(2 c).

    theta = 0 gives the even cat, theta = pi the odd cat.
    """
    alpha = complex(alpha)
    _check_finite(alpha=alpha, theta=theta)
    c = cat_normalization(alpha, theta)
    if c < 1e-14:
        raise SchemaError("odd cat with alpha=0 does not exist")

    def amps(N):
        base = coherent_amplitudes(alpha, N)
        par = (-1.0) ** np.arange(N + 1)
        return base * (1 + np.exp(1j * theta) * par) / np.sqrt(2 * c)

    return _finish(amps, cutoff, f"cat({alpha:g})")


def make_thermal(nbar: float, cutoff: int | None = None) -> StateArray:
    _check_finite(nbar=nbar)
    if nbar < 0:
        raise SchemaError("mean photon number must be non-negative")
    tol = leakage_tolerance()
    q = nbar / (1 + nbar)
    if cutoff is None:
        cutoff = 0
        while q ** (cutoff + 1) > tol:
            cutoff += 1
    cutoff = int(cutoff)
    p = (1 - q) * q ** np.arange(cutoff + 1)
    leak = q ** (cutoff + 1)
    if leak > tol:
        raise CutoffInsufficient(f"thermal({nbar:g}): {leak:.3g} above cutoff {cutoff}", leak)
    return StateArray(np.diag(p / p.sum()), (cutoff,), DM, leak)


def make_superposition(coeffs) -> StateArray:
    """Normalized single-mode ket from Fock amplitudes c_0, c_1, ..."""
    c = np.asarray(coeffs, complex)
    if c.ndim != 1 or c.size == 0:
        raise SchemaError("coefficients must be a non-empty 1-D sequence")
    w = np.vdot(c, c).real
    if w <= 0:
        raise SchemaError("coefficients are all zero")
    return StateArray(c / np.sqrt(w), (c.size - 1,), KET)


def make_product(*states: StateArray) -> StateArray:
    return tensor(*states)


def poisson_cutoff(mean: float, tail: float = 1e-10, minimum: int = 4) -> int:
    """Smallest N such that Poisson(mean) puts less than ``tail`` on levels N and above."""
    n = np.arange(_AUTO_MAX)
    logp = -mean + n * np.log(max(mean, 1e-300)) - gammaln(n + 1)
    survival = np.cumsum(np.exp(logp)[::-1])[::-1]
    above = np.nonzero(survival < tail)[0]
    return int(max(minimum, above[0] if above.size else _AUTO_MAX - 1))
