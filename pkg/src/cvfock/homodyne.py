"""Monte-Carlo homodyne detection: quadrature samples from a simulated state.

Samples are drawn by inverse-CDF on a fine grid of the exact marginal
pr_theta(x).  Randomness is split into fixed-size chunks, each with its own
stream derived from (seed, chunk index), so results do not depend on how
the work is partitioned.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import __version__
from .channels import loss
from .core import DM, StateArray, check_modes, embed, partial_trace
from .errors import SchemaError
from .wavefunctions import fock_wavefunctions

GRID_POINTS = 4096
GRID_EXTENT = 8.0
CHUNK = 65536


@dataclass(frozen=True)
class ImperfectionModel:
    """Detection imperfections.

    efficiency: homodyne efficiency (loss applied before ideal detection).
    electronic_noise: variance of additive Gaussian noise on each sample, in
        the units of x (the vacuum variance is 1/2).
    mode_purity: fraction of the heralded state; the remainder is the
        supplied background (unheralded) state.
    """

    efficiency: float = 1.0
    electronic_noise: float = 0.0
    mode_purity: float = 1.0

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise SchemaError("efficiency must lie in (0, 1]")
        if self.electronic_noise < 0:
            raise SchemaError("electronic noise variance must be non-negative")
        if not 0 <= self.mode_purity <= 1:
            raise SchemaError("mode purity must lie in [0, 1]")


@dataclass(frozen=True)
class PhaseSchedule:
    """How local-oscillator phases are chosen.

    kind ``"fixed"`` uses ``phases[0]``; ``"swept"`` cycles through ``phases``
    (default: ``n_phases`` values evenly spaced in [0, pi)); ``"uniform"``
    draws each phase uniformly from [0, 2 pi).
    """

    kind: str = "swept"
    n_phases: int = 12
    phases: tuple = ()

    def __post_init__(self):
        if self.kind not in ("fixed", "swept", "uniform"):
            raise SchemaError(f"unknown phase schedule {self.kind!r}")
        if self.kind == "fixed" and len(self.phases) != 1:
            raise SchemaError("a fixed schedule needs exactly one phase")
        if self.kind == "swept" and not self.phases and self.n_phases < 1:
            raise SchemaError("n_phases must be positive")

    def fixed_phases(self) -> np.ndarray | None:
        if self.kind == "uniform":
            return None
        if self.phases:
            return np.asarray(self.phases, float)
        return np.arange(self.n_phases) * np.pi / self.n_phases


@dataclass
class QuadratureDataset:
    theta: np.ndarray
    x: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, float).ravel()
        self.x = np.asarray(self.x, float).ravel()
        if self.theta.shape != self.x.shape:
            raise SchemaError("theta and x must have equal length")
        if not (np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.x))):
            raise SchemaError("dataset contains non-finite values")

    def __len__(self) -> int:
        return self.x.size

    def as_array(self) -> np.ndarray:
        """(n, 2) array of (theta, x) rows."""
        return np.column_stack([self.theta, self.x])

    @classmethod
    def from_array(cls, X, metadata: dict | None = None) -> "QuadratureDataset":
        X = np.asarray(X, float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise SchemaError("expected an (n, 2) array of (theta, x) rows")
        return cls(X[:, 0], X[:, 1], dict(metadata or {}))

    @staticmethod
    def sidecar_path(path) -> Path:
        p = Path(path)
        return p.with_name(p.stem + ".meta.json")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "x"])
            for t, v in zip(self.theta, self.x):
                w.writerow([repr(float(t)), repr(float(v))])
        meta = dict(self.metadata)
        meta.setdefault("version", __version__)
        meta["n_samples"] = len(self)
        with open(self.sidecar_path(path), "w") as fh:
            json.dump(meta, fh, indent=2, default=_jsonable)

    @classmethod
    def from_csv(cls, path) -> "QuadratureDataset":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file") from None
            if [h.strip() for h in header] != ["theta", "x"]:
                raise SchemaError(f"{path}: header must be 'theta,x', got {header}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 2:
                    raise SchemaError(f"{path}:{lineno}: expected two columns")
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    raise SchemaError(f"{path}:{lineno}: non-numeric value") from None
        arr = np.array(rows, float).reshape(-1, 2)
        meta = {}
        side = cls.sidecar_path(path)
        if side.exists():
            with open(side) as fh:
                meta = json.load(fh)
        return cls(arr[:, 0], arr[:, 1], meta)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


class _MarginalSampler:
    """Inverse-CDF sampler for pr_theta(x) of a fixed single-mode state."""

    def __init__(self, rho: np.ndarray, extent: float, points: int = GRID_POINTS):
        N = rho.shape[0] - 1
        self.grid = np.linspace(-extent, extent, points)
        psi = fock_wavefunctions(N, self.grid)
        # pr_theta(x) = sum_d e^{-i d theta} G_d(x), G_d = sum_{m-n=d} rho_mn psi_m psi_n
        self.harm = np.zeros((N + 1, points), complex)
        for d in range(N + 1):
            m = np.arange(d, N + 1)
            n = m - d
            self.harm[d] = np.sum(rho[m, n][:, None] * psi[m] * psi[n], axis=0)
        self.cum = cumulative_trapezoid(self.harm, self.grid, axis=1, initial=0)
        self._cache: dict[float, np.ndarray] = {}

    def density(self, thetas: np.ndarray) -> np.ndarray:
        d = np.arange(self.harm.shape[0])
        ph = np.exp(-1j * np.outer(thetas, d))
        ph[:, 1:] *= 2
        pr = np.real(ph @ self.harm)
        return np.clip(pr, 0, None)

    def _cdf(self, pr: np.ndarray) -> np.ndarray:
        c = cumulative_trapezoid(pr, self.grid, axis=-1, initial=0)
        return c / c[..., -1:]

    def cdf_for(self, theta: float) -> np.ndarray:
        key = float(theta)
        if key not in self._cache:
            self._cache[key] = self._cdf(self.density(np.array([theta])))[0]
        return self._cache[key]

    def invert(self, cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.interp(u, cdf, self.grid)

    def invert_many(self, thetas: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Inverse CDF with a different phase per sample.

        The CDF at grid node j is sum_d e^{-i d theta} C_d[j], so a bisection
        over grid nodes costs O(cutoff) per step and sample.
        """
        d = np.arange(self.cum.shape[0])
        ph = np.exp(-1j * np.outer(thetas, d))
        ph[:, 1:] *= 2

        def cdf_at(j):
            return np.real(np.einsum("kd,dk->k", ph, self.cum[:, j]))

        target = u * np.real(ph @ self.cum[:, -1])
        lo = np.zeros(u.size, int)
        hi = np.full(u.size, self.grid.size - 1)
        while np.any(hi - lo > 1):
            mid = (lo + hi) // 2
            below = cdf_at(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        c0, c1 = cdf_at(lo), cdf_at(hi)
        span = c1 - c0
        frac = np.clip(np.where(span > 0, (target - c0) / np.where(span > 0, span, 1), 0.5), 0, 1)
        return self.grid[lo] + frac * (self.grid[hi] - self.grid[lo])


def sample_quadratures(state: StateArray, schedule: PhaseSchedule, n_samples: int,
                       model: ImperfectionModel | None = None, seed: int | None = None,
                       mode: int = 0, background: StateArray | None = None) -> QuadratureDataset:
    """Draw ``n_samples`` homodyne outcomes (theta_i, x_i) from ``state``."""
    model = model or ImperfectionModel()
    n_samples = int(n_samples)
    if n_samples < 0:
        raise SchemaError("n_samples must be non-negative")
    (mode,) = check_modes(state, [mode])
    red = partial_trace(state, [mode]) if state.n_modes > 1 else state.to_dm()
    red = red.normalized()
    if model.mode_purity < 1:
        if background is None:
            raise SchemaError("mode_purity < 1 needs a background (unheralded) state")
        bg = background.to_dm().normalized()
        N = max(red.cutoffs[0], bg.cutoffs[0])
        a, b = embed(red, (N,)), embed(bg, (N,))
        red = StateArray(model.mode_purity * a.data + (1 - model.mode_purity) * b.data, (N,), DM)
    if model.efficiency < 1:
        red = loss(red, 0, model.efficiency)
    rho = red.matrix
    N = red.cutoffs[0]
    extent = max(GRID_EXTENT, np.sqrt(2 * N + 1) + 5.0)
    sampler = _MarginalSampler(rho, extent)
    fixed = schedule.fixed_phases()
    seed_seq = np.random.SeedSequence(seed)
    entropy = seed_seq.entropy
    theta = np.empty(n_samples)
    x = np.empty(n_samples)
    noise_sd = np.sqrt(model.electronic_noise)
    for start in range(0, n_samples, CHUNK):
        stop = min(n_samples, start + CHUNK)
        k = stop - start
        rng = np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(start // CHUNK,)))
        if fixed is None:
            th = rng.uniform(0, 2 * np.pi, k)
        else:
            th = fixed[np.arange(start, stop) % fixed.size]
        u = rng.uniform(0, 1, k)
        z = rng.standard_normal(k)
        out = np.empty(k)
        if fixed is None:
            out = sampler.invert_many(th, u)
        else:
            for ph in np.unique(th):
                sel = th == ph
                out[sel] = sampler.invert(sampler.cdf_for(ph), u[sel])
        theta[start:stop] = th
        x[start:stop] = out + noise_sd * z
    meta = {
        "version": __version__,
        "seed": seed if seed is None else int(seed),
        "seed_entropy": str(entropy),
        "schedule": {"kind": schedule.kind, "n_phases": schedule.n_phases,
                     "phases": list(map(float, schedule.phases))},
        "imperfections": asdict(model),
        "cutoff": int(N),
        "mode": mode,
    }
    return QuadratureDataset(theta, x, meta)
