"""Wigner functions, quadrature marginals, and non-classicality witnesses.

Phase-space coordinates follow x = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2),
so the vacuum Wigner function is exp(-x^2 - p^2)/pi.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import RectBivariateSpline
from scipy.special import gammaln

from . import __version__
from .channels import displace, loss
from .core import StateArray, apply_local, check_modes, partial_trace
from .errors import SchemaError
from .wavefunctions import fock_wavefunctions, quadrature_overlaps

DEFAULT_EXTENT = 6.0
DEFAULT_POINTS = 201


# ---------------------------------------------------------------------------
# Wigner function from a density matrix
# ---------------------------------------------------------------------------

def _laguerre_table(k: int, nmax: int, t: np.ndarray) -> np.ndarray:
    """L_n^k(t) for n = 0..nmax by the three-term recurrence."""
    out = np.empty((nmax + 1,) + t.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 1.0 + k - t
    for n in range(1, nmax):
        out[n + 1] = ((2 * n + 1 + k - t) * out[n] - (n + k) * out[n - 1]) / (n + 1)
    return out


def _element_kernels(N: int, x: np.ndarray, p: np.ndarray):
    """Yield (m, n, W[|m><n|](x, p)) for all m >= n.

    W[|m><n|] = (-1)^n / pi e^{-R^2} sqrt(2^{m-n} n!/m!) (x - i p)^{m-n} L_n^{m-n}(2 R^2).
    """
    R2 = x ** 2 + p ** 2
    logR = 0.5 * np.log(np.where(R2 > 0, R2, 1.0))
    phase = np.exp(-1j * np.arctan2(p, x))
    t = 2 * R2
    for k in range(N + 1):
        L = _laguerre_table(k, N - k, t)
        for n in range(N - k + 1):
            m = n + k
            logpref = 0.5 * (k * np.log(2) + gammaln(n + 1) - gammaln(m + 1)) - R2
            if k:
                mag = np.exp(logpref + k * logR) * np.where(R2 > 0, 1.0, 0.0)
            else:
                mag = np.exp(logpref)
            yield m, n, ((-1) ** n / np.pi) * mag * phase ** k * L[n]


def _single_mode_rho(state: StateArray, mode: int) -> np.ndarray:
    (mode,) = check_modes(state, [mode])
    if state.n_modes == 1:
        rho = state.matrix
    else:
        rho = partial_trace(state, [mode]).matrix
    return rho / np.trace(rho).real


def wigner_values(state: StateArray, x, p, mode: int = 0) -> np.ndarray:
    """Wigner function of one mode at arbitrary points (x and p broadcast)."""
    rho = _single_mode_rho(state, mode)
    x, p = np.broadcast_arrays(np.asarray(x, float), np.asarray(p, float))
    N = rho.shape[0] - 1
    W = np.zeros(x.shape)
    for m, n, ker in _element_kernels(N, x, p):
        if m == n:
            W += np.real(rho[m, m]) * ker.real
        else:
            W += 2 * np.real(rho[m, n] * ker)
    return W


def wigner_point(state: StateArray, xs, ps) -> float:
    """Multimode Wigner function at one phase-space point.

    Evaluated as pi^-M Tr[rho prod_k D(alpha_k) Pi D(alpha_k)^dag] with the
    displaced-parity matrices built from the single-mode kernels.
    """
    xs = np.atleast_1d(np.asarray(xs, float))
    ps = np.atleast_1d(np.asarray(ps, float))
    if xs.size != state.n_modes or ps.size != state.n_modes:
        raise SchemaError("need one (x, p) pair per mode")
    work = state.to_dm().normalized()
    for mode in range(state.n_modes):
        N = state.cutoffs[mode]
        K = np.zeros((N + 1, N + 1), complex)
        for m, n, ker in _element_kernels(N, np.array(xs[mode]), np.array(ps[mode])):
            # K_{n m} = pi W[|m><n|]
            K[n, m] = np.pi * ker
            K[m, n] = np.pi * np.conj(ker)
        work = apply_local(work, K, [mode], left_only=True)
    return float(np.real(np.trace(work.matrix)) / np.pi ** state.n_modes)


@dataclass
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # shape (len(x), len(p)), values[i, j] = W(x[i], p[j])

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0]) if self.x.size > 1 else 1.0

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0]) if self.p.size > 1 else 1.0

    def integral(self) -> float:
        return float(trapezoid(trapezoid(self.values, self.p, axis=1), self.x))

    def metrics(self) -> dict:
        i, j = np.unravel_index(np.argmin(self.values), self.values.shape)
        neg = np.clip(-self.values, 0, None)
        return {
            "min": float(self.values[i, j]),
            "argmin": [float(self.x[i]), float(self.p[j])],
            "negative_volume": float(trapezoid(trapezoid(neg, self.p, axis=1), self.x)),
            "integral": self.integral(),
        }

    @staticmethod
    def sidecar_path(path) -> Path:
        p = Path(path)
        return p.with_name(p.stem + ".meta.json")

    def to_csv(self, path) -> None:
        """Write ``x,p,W`` rows plus a JSON sidecar holding the version and metrics."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "p", "W"])
            for i, xv in enumerate(self.x):
                for j, pv in enumerate(self.p):
                    w.writerow([repr(float(xv)), repr(float(pv)), repr(float(self.values[i, j]))])
        meta = {"version": __version__, "shape": list(self.values.shape), "metrics": self.metrics()}
        with open(self.sidecar_path(path), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)

    def to_dict(self) -> dict:
        return {"version": __version__, "x": self.x.tolist(), "p": self.p.tolist(),
                "W": self.values.tolist(), "metrics": self.metrics()}

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def from_csv(cls, path) -> "WignerGrid":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        x = np.unique(data[:, 0])
        p = np.unique(data[:, 1])
        if x.size * p.size != data.shape[0]:
            raise SchemaError("Wigner CSV does not describe a full rectangular grid")
        return cls(x, p, data[:, 2].reshape(x.size, p.size))


def default_axis(extent: float = DEFAULT_EXTENT, points: int = DEFAULT_POINTS) -> np.ndarray:
    return np.linspace(-extent, extent, points)


def wigner(state: StateArray, x=None, p=None, mode: int = 0) -> WignerGrid:
    """Wigner function of one mode on a rectangular grid (default 201 x 201 over +-6)."""
    x = default_axis() if x is None else np.asarray(x, float)
    p = default_axis() if p is None else np.asarray(p, float)
    X, P = np.meshgrid(x, p, indexing="ij")
    return WignerGrid(x, p, wigner_values(state, X, P, mode))


def wigner_direct(state: StateArray, x: float, p: float, mode: int = 0,
                  extent: float = 12.0, points: int = 2401) -> float:
    """W(x, p) = (1/2 pi) int e^{i p y} <x - y/2| rho |x + y/2> dy by quadrature.

    Slow; intended as an independent check of :func:`wigner_values`.
    """
    rho = _single_mode_rho(state, mode)
    N = rho.shape[0] - 1
    y = np.linspace(-extent, extent, points)
    left = fock_wavefunctions(N, x - y / 2)
    right = fock_wavefunctions(N, x + y / 2)
    kernel = np.einsum("my,mn,ny->y", left, rho, right)
    return float(np.real(trapezoid(np.exp(1j * p * y) * kernel, y)) / (2 * np.pi))


# ---------------------------------------------------------------------------
# marginals
# ---------------------------------------------------------------------------

def marginal(state: StateArray, theta: float, x, mode: int = 0) -> np.ndarray:
    """Quadrature distribution pr_theta(x) = <x_theta| rho |x_theta>."""
    rho = _single_mode_rho(state, mode)
    N = rho.shape[0] - 1
    ov = quadrature_overlaps(N, theta, np.asarray(x, float))
    return np.real(np.einsum("mx,mn,nx->x", ov, rho, ov.conj()))


def marginal_from_wigner(grid: WignerGrid, theta: float, x) -> np.ndarray:
    """Integrate a Wigner grid along the direction orthogonal to x_theta.

    The grid is interpolated bicubically and taken as zero outside its extent.
    """
    spline = RectBivariateSpline(grid.x, grid.p, grid.values, kx=3, ky=3)
    s = grid.x
    x = np.asarray(x, float)
    out = np.empty(x.shape)
    c, sn = np.cos(theta), np.sin(theta)
    for i, xv in enumerate(x.ravel()):
        px, pp = xv * c - s * sn, xv * sn + s * c
        inside = (px >= grid.x[0]) & (px <= grid.x[-1]) & (pp >= grid.p[0]) & (pp <= grid.p[-1])
        vals = np.where(inside, spline.ev(px, pp), 0.0)
        out.ravel()[i] = trapezoid(vals, s)
    return out


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def analytic_wigner(kind: str, x, p, **params) -> np.ndarray:
    """Closed-form Wigner functions.

    kind:
      ``"cat"``       alpha (real), theta
      ``"squeezed"``  r (x squeezed for r > 0)
      ``"epr"``       r; x and p must be pairs (x1, x2), (p1, p2)
      ``"fock1"``     sigma2, delta (lossy single-photon model)
      ``"kitten"``    a, a_prime, b, b_prime (squeezed-photon model)
    """
    if kind == "epr":
        r = params["r"]
        (x1, x2), (p1, p2) = x, p
        x1, x2, p1, p2 = (np.asarray(v, float) for v in (x1, x2, p1, p2))
        arg = (np.exp(-2 * r) / 2 * ((x1 + x2) ** 2 + (p1 - p2) ** 2)
               + np.exp(2 * r) / 2 * ((x1 - x2) ** 2 + (p1 + p2) ** 2))
        return np.exp(-arg) / np.pi ** 2
    x = np.asarray(x, float)
    p = np.asarray(p, float)
    if kind == "cat":
        a = float(np.real(params["alpha"]))
        th = params.get("theta", 0.0)
        c = 1 + np.cos(th) * np.exp(-2 * a ** 2)
        s2 = np.sqrt(2) * a
        g = (np.exp(-(x - s2) ** 2 - p ** 2) + np.exp(-(x + s2) ** 2 - p ** 2)
             + 2 * np.exp(-x ** 2 - p ** 2) * np.cos(2 * s2 * p + th))
        return g / (2 * np.pi * c)
    if kind == "squeezed":
        r = params["r"]
        return np.exp(-np.exp(2 * r) * x ** 2 - np.exp(-2 * r) * p ** 2) / np.pi
    if kind == "fock1":
        s2, d = params["sigma2"], params["delta"]
        R2 = (x ** 2 + p ** 2) / s2
        return np.exp(-R2) / (np.pi * s2) * (1 - d + d * R2)
    if kind == "kitten":
        a, ap, b, bp = params["a"], params["a_prime"], params["b"], params["b_prime"]
        env = np.exp(-x ** 2 / a - p ** 2 / b) / (np.pi * np.sqrt(a * b))
        return env * (1 - ap / a - bp / b + 2 * x ** 2 * ap / a ** 2 + 2 * p ** 2 * bp / b ** 2)
    raise SchemaError(f"unknown analytic Wigner kind {kind!r}")


# ---------------------------------------------------------------------------
# moments and witnesses
# ---------------------------------------------------------------------------

def directional_moment(state: StateArray, theta: float, order: int, mode: int = 0,
                       extent: float = 14.0, points: int = 4001) -> float:
    """<x_theta^order> from the exact marginal."""
    x = np.linspace(-extent, extent, points)
    return float(trapezoid(x ** order * marginal(state, theta, x, mode), x))


def radial_moment(directional, n: int) -> float:
    """<R^{2n}> (Wigner moment of x^2 + p^2) from directional moments.

    ``directional(theta)`` must return <x_theta^{2n}>; it is sampled at
    theta = m pi / (2n), m = 1..2n.
    """
    if n == 0:
        return 1.0
    total = sum(directional(m * np.pi / (2 * n)) for m in range(1, 2 * n + 1))
    return float(total * 2 ** (2 * n) / (2 * n) / comb(2 * n, n))


def radial_moments_from_state(state: StateArray, nmax: int, mode: int = 0) -> np.ndarray:
    return np.array([radial_moment(lambda th, k=k: directional_moment(state, th, 2 * k, mode), k)
                     for k in range(nmax + 1)])


def radial_moments_from_samples(theta, x, nmax: int, phase_tol: float = 1e-9) -> np.ndarray:
    """Radial moments from homodyne samples taken at the required phases.

    For each order the data must contain samples at theta = m pi/(2n) (mod pi).
    """
    theta = np.mod(np.asarray(theta, float), np.pi)
    x = np.asarray(x, float)
    out = [1.0]
    for n in range(1, nmax + 1):
        def d(th, n=n):
            th = np.mod(th, np.pi)
            sel = np.minimum(np.abs(theta - th), np.pi - np.abs(theta - th)) < phase_tol
            if not np.any(sel):
                raise SchemaError(f"no samples at phase {th:.6g} needed for order {2 * n}")
            return float(np.mean(x[sel] ** (2 * n)))
        out.append(radial_moment(d, n))
    return np.array(out)


def moment_witness(moments, coefficients) -> float:
    """<F> for F = (sum_k c_k R^{2k})^2 given radial moments <R^{2k}>.

    Non-negative for every state with a non-negative Wigner function, so a
    negative value certifies Wigner negativity.
    """
    c = np.asarray(coefficients, float)
    mom = np.asarray(moments, float)
    d = c.size - 1
    if mom.size < 2 * d + 1:
        raise SchemaError(f"need radial moments up to order {2 * d}, got {mom.size - 1}")
    H = np.array([[mom[j + k] for k in range(d + 1)] for j in range(d + 1)])
    return float(c @ H @ c)


def optimal_moment_witness(moments, degree: int) -> tuple[float, np.ndarray]:
    """Most negative <F>/|c|^2 over polynomials of the given degree in R^2."""
    mom = np.asarray(moments, float)
    H = np.array([[mom[j + k] for k in range(degree + 1)] for j in range(degree + 1)])
    ev, vec = np.linalg.eigh(H)
    return float(ev[0]), vec[:, 0]


def displaced_photon_counts(state: StateArray, beta: complex, eta: float = 1.0,
                            mode: int = 0, out_cutoff: int | None = None) -> np.ndarray:
    """Photon-number distribution after displacement by -beta and loss eta."""
    work = partial_trace(state, [mode]) if state.n_modes > 1 else state
    work = displace(work, 0, -beta, out_cutoff=out_cutoff)
    if eta < 1:
        work = loss(work, 0, eta)
    return work.fock_distribution(0) / work.trace()


def wigner_from_counts(counts, eta: float) -> float:
    """Photon-counting estimate of the Wigner function at the displacement point.

    W(beta) = (2/pi) sum_n ((eta - 2)/eta)^n P_n, in the alpha convention
    (integrates to one over d^2 alpha); divide by 2 for the (x, p) convention.
    With eta < 1 the series undoes the detector loss.
    """
    P = np.asarray(counts, float)
    if not 0 < eta <= 1:
        raise SchemaError("efficiency must lie in (0, 1]")
    q = (eta - 2) / eta
    return float(2 / np.pi * np.sum(q ** np.arange(P.size) * P))
