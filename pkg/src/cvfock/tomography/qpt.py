"""Coherent-state quantum process tomography.

A map E is determined by its action on coherent probes: writing
F_kl(alpha) = e^{|alpha|^2} <k|E(|alpha><alpha|)|l>
            = sum_{m,n} E[k,l,m,n] alpha^m conj(alpha)^n / sqrt(m! n!),
the tensor entries are the Taylor coefficients of F.  Probes lie on rings
|alpha| = s with equally spaced phases; a discrete Fourier transform over
each ring isolates the harmonic h = m - n, and a least-squares polynomial in
s^2 on each harmonic returns the coefficients.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .. import __version__
from ..conditional import HeraldedOutcome
from ..core import DM, StateArray, embed
from ..errors import IllConditioned, ImprobableEvent, SchemaError, ZeroWeightError
from ..states import make_coherent, poisson_cutoff

DEFAULT_RADII = tuple(np.linspace(0.0, 0.6, 17))
MIN_PHASES = 12
MAX_CONDITION = 1e12


@dataclass
class ProcessTensor:
    """E[k, l, m, n] = <k| E(|m><n|) |l> on a truncated single-mode space."""

    data: np.ndarray
    probes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, complex)
        d = self.data.shape[0]
        if self.data.shape != (d, d, d, d):
            raise SchemaError("process tensor must have shape (d, d, d, d)")

    @property
    def cutoff(self) -> int:
        return self.data.shape[0] - 1

    def apply(self, state: StateArray) -> StateArray:
        """Image of a single-mode state (inputs above the cutoff are dropped)."""
        if state.n_modes != 1:
            raise SchemaError("process tensors act on single-mode states")
        rho = embed(state.to_dm(), (max(self.cutoff, state.cutoffs[0]),)).matrix
        rho = rho[: self.cutoff + 1, : self.cutoff + 1]
        return StateArray(np.einsum("klmn,mn->kl", self.data, rho), (self.cutoff,), DM)

    def choi(self) -> np.ndarray:
        """Choi matrix C[(k, m), (l, n)] = E[k, l, m, n]."""
        d = self.cutoff + 1
        return np.transpose(self.data, (0, 2, 1, 3)).reshape(d * d, d * d)

    def diagnostics(self) -> dict:
        d = self.cutoff + 1
        tr = np.einsum("kkmn->mn", self.data)
        C = self.choi()
        herm = float(np.max(np.abs(C - C.conj().T)))
        ev = np.linalg.eigvalsh((C + C.conj().T) / 2)
        tr_ev = np.linalg.eigvalsh((tr + tr.conj().T) / 2)
        return {
            "trace_deviation": float(np.max(np.abs(tr - np.eye(d)))),
            "max_trace_eigenvalue": float(tr_ev.max()),
            "trace_non_increasing": bool(tr_ev.max() <= 1 + 1e-6),
            "choi_hermiticity": herm,
            "choi_min_eigenvalue": float(ev.min()),
        }

    @classmethod
    def from_map(cls, process: Callable, cutoff: int, probes: dict | None = None) -> "ProcessTensor":
        """Exact tensor from the action on Fock projectors (reference values).

        Off-diagonal inputs |m><n| are not states, so they are assembled from
        four pure states by the polarization identity; this presumes the map
        (scaled by its heralding probability) is linear.
        """
        d = cutoff + 1

        def image(vec):
            ket = StateArray(np.asarray(vec, complex), (cutoff,))
            return _image(process, ket.to_dm(), cutoff)

        out = np.zeros((d, d, d, d), complex)
        basis = np.eye(d)
        for m in range(d):
            out[:, :, m, m] = image(basis[m])
            for n in range(m + 1, d):
                plus = image((basis[m] + basis[n]) / np.sqrt(2))
                minus = image((basis[m] - basis[n]) / np.sqrt(2))
                iplus = image((basis[m] + 1j * basis[n]) / np.sqrt(2))
                iminus = image((basis[m] - 1j * basis[n]) / np.sqrt(2))
                out[:, :, m, n] = 0.5 * (plus - minus) + 0.5j * (iplus - iminus)
                out[:, :, n, m] = 0.5 * (plus - minus) - 0.5j * (iplus - iminus)
        return cls(out, probes or {"method": "basis"})

    def to_dict(self) -> dict:
        return {"version": __version__, "cutoff": self.cutoff,
                "index_order": "k,l,m,n",
                "real": self.data.real.ravel().tolist(), "imag": self.data.imag.ravel().tolist(),
                "probes": self.probes}

    def to_json(self, path=None, indent: int | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_dict(cls, doc: dict) -> "ProcessTensor":
        try:
            d = int(doc["cutoff"]) + 1
            arr = np.asarray(doc["real"], float) + 1j * np.asarray(doc["imag"], float)
            return cls(arr.reshape(d, d, d, d), dict(doc.get("probes", {})))
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"malformed process tensor document: {exc}") from None

    @classmethod
    def from_json(cls, path) -> "ProcessTensor":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _image(process: Callable, state: StateArray, cutoff: int) -> np.ndarray:
    """Unnormalized output; heralds that fail with certainty give zero."""
    try:
        result = process(state)
    except (ZeroWeightError, ImprobableEvent):
        return np.zeros((cutoff + 1, cutoff + 1), complex)
    return _as_matrix(result, cutoff)


def _as_matrix(result, cutoff: int) -> np.ndarray:
    """Output operator restricted to levels <= cutoff; heralded maps are scaled by probability."""
    scale = 1.0
    if isinstance(result, HeraldedOutcome):
        scale = result.probability
        result = result.state
    if not isinstance(result, StateArray) or result.n_modes != 1:
        raise SchemaError("process must return a single-mode StateArray or HeraldedOutcome")
    m = result.to_dm().matrix
    d = cutoff + 1
    out = np.zeros((d, d), complex)
    k = min(d, m.shape[0])
    out[:k, :k] = m[:k, :k]
    return scale * out


def csqpt(process: Callable, cutoff: int, radii=DEFAULT_RADII, n_phases: int | None = None,
          fit_degree: int | None = None, probe_cutoff: int | None = None) -> ProcessTensor:
    """Reconstruct the process tensor of ``process`` from coherent probes.

    ``process`` maps a single-mode StateArray to a StateArray, or to a
    HeraldedOutcome whose probability then scales the output.  Probes are
    the rings ``radii`` x ``n_phases`` (default max(12, 2 * cutoff + 2)
    phases).  On harmonic h the polynomial in s^2 has degree
    ``fit_degree - |h|`` (default fit degree 2 * cutoff + 2), capped by the
    number of radii.  The fitted series is infinite for most maps, so the
    probes stay at small amplitude where its tail is negligible.  Harmonics |h| >= n_phases - cutoff alias
    onto the needed ones; keep ``n_phases`` above 2 * cutoff for maps that
    do not conserve phase.
    """
    cutoff = int(cutoff)
    if n_phases is None:
        n_phases = max(MIN_PHASES, 2 * cutoff + 2)
    radii = np.asarray(sorted(set(float(r) for r in radii)), float)
    if cutoff < 1 or n_phases < 2 * cutoff + 1 or radii.size < 2 or radii[0] < 0:
        raise SchemaError("need cutoff >= 1, n_phases >= 2*cutoff+1 and at least two radii")
    degree = 2 * cutoff + 2 if fit_degree is None else int(fit_degree)
    d = cutoff + 1
    phis = 2 * np.pi * np.arange(n_phases) / n_phases
    rings = radii[radii > 0]
    has_origin = radii[0] == 0

    if probe_cutoff is None:
        # renormalizing a truncated probe biases every coefficient, so the
        # probes carry enough levels for a Poisson tail below 1e-20
        probe_cutoff = poisson_cutoff(radii.max() ** 2, 1e-20, cutoff)

    def probe(alpha):
        st = make_coherent(alpha, probe_cutoff).to_dm()
        return _image(process, st, cutoff) * np.exp(abs(alpha) ** 2)

    # harmonics[h][ring] = (1/P) sum_phi F(s e^{i phi}) e^{-i h phi}
    F = np.array([[probe(s * np.exp(1j * ph)) for ph in phis] for s in rings])
    H = np.fft.fft(F, axis=1) / n_phases
    origin = probe(0.0) if has_origin else None

    out = np.zeros((d, d, d, d), complex)
    worst_cond = 0.0
    logf = gammaln(np.arange(d) + 1)
    for h in range(-cutoff, cutoff + 1):
        n_coef = d - abs(h)
        order = degree - abs(h)
        s_list = list(rings)
        y = H[:, h % n_phases] / rings[:, None, None] ** abs(h)
        if has_origin and h == 0:
            s_list = [0.0] + s_list
            y = np.concatenate([origin[None], y])
        u = np.asarray(s_list) ** 2
        order = max(n_coef - 1, min(order, u.size - 1))
        scale = u.max()
        A = (u[:, None] / scale) ** np.arange(order + 1)[None, :]
        cond = np.linalg.cond(A)
        worst_cond = max(worst_cond, cond)
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise IllConditioned(f"probe fit for harmonic {h} is ill-conditioned", cond)
        coef, *_ = np.linalg.lstsq(A, y.reshape(u.size, -1), rcond=None)
        coef = coef[:n_coef] / scale ** np.arange(n_coef)[:, None]
        coef = coef.reshape(n_coef, d, d)
        for j in range(n_coef):
            m, n = (j + h, j) if h >= 0 else (j, j - h)
            out[:, :, m, n] = coef[j] * np.exp(0.5 * (logf[m] + logf[n]))
    probes = {"method": "coherent", "radii": radii.tolist(), "n_phases": int(n_phases),
              "fit_degree": degree, "max_condition_number": float(worst_cond)}
    return ProcessTensor(out, probes)
