"""Gaussian unitaries and noisy channels on truncated Fock space.

Unitaries are obtained by exponentiating their ladder-operator generator.
Generators that do not conserve photon number are exponentiated on an
enlarged (padded) space, grown until the kept rows stop changing, so the
truncated matrix is exact.  Squeezers are split into the chains their
generator leaves invariant (parity, photon-number difference); the beam
splitter conserves total photon number and is built blockwise.  Whatever weight a
map pushes above the output cutoffs is checked against the leakage
tolerance before being dropped.

Conventions (a = annihilation operator):

* phase_rotate(phi):      exp(i phi n),    |alpha> -> |alpha e^{i phi}>
* displace(beta):         exp(beta a^dag - beta^* a)
* single_mode_squeeze:    exp[(r/2)(e^{-i phi} a^2 - e^{i phi} a^dag^2)], x squeezed for r > 0
* two_mode_squeeze:       exp[r(e^{i phi} a_i^dag a_j^dag - e^{-i phi} a_i a_j)]
* beam_splitter(tau):     exp[tau(a_i a_j^dag e^{-i phi} - a_i^dag a_j e^{i phi})],
                          reflectivity sin^2 tau
"""
from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

from ._config import leakage_tolerance
from .core import DM, StateArray, apply_local, check_modes, embed
from .errors import CutoffInsufficient, SchemaError

_PAD_TOL = 1e-11


def _frozen(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


def _sp_lower(N: int):
    return sp.diags(np.sqrt(np.arange(1, N + 1, dtype=float)), 1, format="csr")


# ---------------------------------------------------------------------------
# padded exponentiation
# ---------------------------------------------------------------------------

def _padded_columns(gen_fn, in_cut: tuple[int, ...], out_cut: tuple[int, ...], start_pad: int):
    """Rows (out_cut) x columns (in_cut) of exp(G) computed on a padded space."""
    pad = max(8, start_pad)
    prev = None
    for _ in range(8):
        P = tuple(max(i, o) + pad for i, o in zip(in_cut, out_cut))
        pad = int(pad * 1.5)
        dims = [p + 1 for p in P]
        G = gen_fn(P)
        # embed the input basis into the padded space
        idx = np.indices([c + 1 for c in in_cut]).reshape(len(in_cut), -1)
        cols = np.ravel_multi_index(tuple(idx), dims)
        if G.shape[0] <= 700:
            V = expm(G.toarray())[:, cols]
        else:
            E = np.zeros((G.shape[0], cols.size), complex)
            E[cols, np.arange(cols.size)] = 1
            V = expm_multiply(G, E)
        oidx = np.indices([c + 1 for c in out_cut]).reshape(len(out_cut), -1)
        rows = np.ravel_multi_index(tuple(oidx), dims)
        kept = V[rows]
        if prev is not None and np.max(np.abs(kept - prev)) < _PAD_TOL:
            return kept
        prev = kept
    raise CutoffInsufficient("generator exponentiation did not converge with padding")


@lru_cache(maxsize=256)
def displacement_matrix(beta: complex, in_cutoff: int, out_cutoff: int | None = None) -> np.ndarray:
    out_cutoff = in_cutoff if out_cutoff is None else out_cutoff

    def gen(P):
        a = _sp_lower(P[0])
        return (beta * a.T - np.conj(beta) * a).tocsr()

    pad = int(abs(beta) ** 2 + 6 * abs(beta)) + in_cutoff // 2 + 8
    return _frozen(_padded_columns(gen, (in_cutoff,), (out_cutoff,), pad))


def _chain_block(up, amp_fn, n_in: int, n_out: int, start: int) -> np.ndarray:
    """exp(G) on a semi-infinite chain, rows < n_out and columns < n_in.

    G has <k+1|G|k> = up * amp_fn(k) and <k|G|k+1> = -conj(up) * amp_fn(k).
    The chain is lengthened until the requested block converges.
    """
    length = max(n_in, n_out) + start
    prev = None
    for _ in range(12):
        k = np.arange(length - 1)
        amp = amp_fn(k)
        G = np.zeros((length, length), complex)
        G[k + 1, k] = up * amp
        G[k, k + 1] = -np.conj(up) * amp
        block = expm(G)[:n_out, :n_in]
        if prev is not None and np.max(np.abs(block - prev)) < _PAD_TOL:
            return block
        prev = block
        length = int(length * 1.5) + 4
    raise CutoffInsufficient("generator exponentiation did not converge with padding")


@lru_cache(maxsize=256)
def squeeze_matrix(r: float, phi: float, in_cutoff: int, out_cutoff: int | None = None) -> np.ndarray:
    """Built on the two parity chains |2k>, |2k+1>, which the generator preserves."""
    out_cutoff = in_cutoff if out_cutoff is None else out_cutoff
    V = np.zeros((out_cutoff + 1, in_cutoff + 1), complex)
    start = int(4 * np.sinh(abs(r)) ** 2 + abs(r) * in_cutoff) + 8
    for parity in (0, 1):
        n_in = (in_cutoff - parity) // 2 + 1 if in_cutoff >= parity else 0
        n_out = (out_cutoff - parity) // 2 + 1 if out_cutoff >= parity else 0
        if n_in == 0 or n_out == 0:
            continue
        m = lambda k, p=parity: np.sqrt((2 * k + p + 1) * (2 * k + p + 2.0))
        B = _chain_block(-0.5 * r * np.exp(1j * phi), m, n_in, n_out, start)
        V[parity::2, parity::2] = B
    return _frozen(V)


@lru_cache(maxsize=64)
def two_mode_squeeze_matrix(r: float, phi: float, in_cut: tuple[int, int],
                            out_cut: tuple[int, int] | None = None) -> np.ndarray:
    """Built on chains of fixed photon-number difference n_i - n_j."""
    out_cut = in_cut if out_cut is None else out_cut
    Ni, Nj = in_cut
    Oi, Oj = out_cut
    V = np.zeros(((Oi + 1) * (Oj + 1), (Ni + 1) * (Nj + 1)), complex)
    start = int(4 * np.sinh(abs(r)) ** 2 + abs(r) * max(in_cut)) + 8
    for d in range(-max(Nj, Oj), max(Ni, Oi) + 1):
        # chain |k + d_i, k + d_j> with d_i - d_j = d, k = 0, 1, ...
        di, dj = max(d, 0), max(-d, 0)
        n_in = min(Ni - di, Nj - dj) + 1
        n_out = min(Oi - di, Oj - dj) + 1
        if n_in <= 0 or n_out <= 0:
            continue
        amp = lambda k: np.sqrt((k + di + 1.0) * (k + dj + 1.0))
        B = _chain_block(r * np.exp(1j * phi), amp, n_in, n_out, start)
        kin = np.arange(n_in)
        kout = np.arange(n_out)
        ci = (kin + di) * (Nj + 1) + (kin + dj)
        co = (kout + di) * (Oj + 1) + (kout + dj)
        V[np.ix_(co, ci)] = B
    return _frozen(V)


@lru_cache(maxsize=64)
def beam_splitter_matrix(tau: float, phi: float, in_cut: tuple[int, int],
                         out_cut: tuple[int, int] | None = None) -> np.ndarray:
    """Exact block construction, one block per total photon number."""
    out_cut = in_cut if out_cut is None else out_cut
    Ni, Nj = in_cut
    Oi, Oj = out_cut
    V = np.zeros(((Oi + 1) * (Oj + 1), (Ni + 1) * (Nj + 1)), complex)
    for n in range(Ni + Nj + 1):
        k = np.arange(n + 1)  # photons in mode i
        G = np.zeros((n + 1, n + 1), complex)
        # a_i a_j^dag : |k, n-k> -> sqrt(k (n-k+1)) |k-1, n-k+1>
        amp = np.sqrt(k[1:] * (n - k[1:] + 1))
        G[k[:-1], k[1:]] += tau * np.exp(-1j * phi) * amp
        # - a_i^dag a_j : |k, n-k> -> sqrt((k+1)(n-k)) |k+1, n-k-1>
        amp2 = np.sqrt((k[:-1] + 1) * (n - k[:-1]))
        G[k[1:], k[:-1]] -= tau * np.exp(1j * phi) * amp2
        U = expm(G)
        cin = [kk for kk in k if kk <= Ni and n - kk <= Nj]
        cout = [kk for kk in k if kk <= Oi and n - kk <= Oj]
        if not cin or not cout:
            continue
        ci = [kk * (Nj + 1) + (n - kk) for kk in cin]
        co = [kk * (Oj + 1) + (n - kk) for kk in cout]
        V[np.ix_(co, ci)] = U[np.ix_(cout, cin)]
    return _frozen(V)


def tau_from_reflectivity(reflectivity: float) -> float:
    if not 0 <= reflectivity <= 1:
        raise SchemaError("reflectivity must lie in [0, 1]")
    return float(np.arcsin(np.sqrt(reflectivity)))


# ---------------------------------------------------------------------------
# application with leakage guard
# ---------------------------------------------------------------------------

def _apply_guarded(state: StateArray, V: np.ndarray, modes, out_cut, context: str) -> StateArray:
    """Apply an isometry restricted to kept rows; the missing norm is leakage."""
    w_in = state.trace()
    out = apply_local(state, V, modes, out_cut)
    if w_in <= 0:
        return out
    w_out = out.trace()
    leak = max(0.0, 1 - w_out / w_in)
    tol = leakage_tolerance()
    if leak > tol:
        raise CutoffInsufficient(
            f"{context}: {leak:.3g} of the weight leaves cutoffs {tuple(out_cut)} "
            f"(tolerance {tol:g}); raise the cutoff", leakage=leak)
    if w_out > 0 and leak > 0:
        scale = np.sqrt(w_in / w_out) if out.is_ket else w_in / w_out
        out = StateArray(out.data * scale, out.cutoffs, out.kind, out.discarded + leak)
    return out


def _out(state, modes, out_cutoffs):
    if out_cutoffs is None:
        return tuple(state.cutoffs[m] for m in modes)
    if np.isscalar(out_cutoffs):
        return (int(out_cutoffs),) * len(modes)
    return tuple(int(c) for c in out_cutoffs)


def phase_rotate(state: StateArray, mode: int, phi: float) -> StateArray:
    (mode,) = check_modes(state, [mode])
    N = state.cutoffs[mode]
    U = np.diag(np.exp(1j * phi * np.arange(N + 1)))
    return apply_local(state, U, [mode])


def displace(state: StateArray, mode: int, beta: complex, out_cutoff: int | None = None) -> StateArray:
    (mode,) = check_modes(state, [mode])
    (oc,) = _out(state, [mode], out_cutoff)
    V = displacement_matrix(complex(beta), state.cutoffs[mode], oc)
    return _apply_guarded(state, V, [mode], (oc,), f"displace({beta:g})")


def single_mode_squeeze(state: StateArray, mode: int, r: float, phi: float = 0.0,
                        out_cutoff: int | None = None) -> StateArray:
    (mode,) = check_modes(state, [mode])
    (oc,) = _out(state, [mode], out_cutoff)
    V = squeeze_matrix(float(r), float(phi), state.cutoffs[mode], oc)
    return _apply_guarded(state, V, [mode], (oc,), f"squeeze(r={r:g})")


def two_mode_squeeze(state: StateArray, i: int, j: int, r: float, phi: float = 0.0,
                     out_cutoffs: Sequence[int] | None = None) -> StateArray:
    i, j = check_modes(state, [i, j])
    oc = _out(state, [i, j], out_cutoffs)
    V = two_mode_squeeze_matrix(float(r), float(phi), (state.cutoffs[i], state.cutoffs[j]), oc)
    return _apply_guarded(state, V, [i, j], oc, f"two_mode_squeeze(r={r:g})")


def beam_splitter(state: StateArray, i: int, j: int, tau: float, phi: float = 0.0,
                  out_cutoffs: Sequence[int] | None = None) -> StateArray:
    """Mix modes i and j; a_i -> cos(tau) a_i + sin(tau) a_j in the Heisenberg picture."""
    i, j = check_modes(state, [i, j])
    oc = _out(state, [i, j], out_cutoffs)
    V = beam_splitter_matrix(float(tau), float(phi), (state.cutoffs[i], state.cutoffs[j]), oc)
    return _apply_guarded(state, V, [i, j], oc, "beam_splitter")


@lru_cache(maxsize=128)
def loss_kraus(eta: float, cutoff: int) -> tuple[np.ndarray, ...]:
    """Kraus operators of the pure-loss channel with transmission eta.

    E_k |n> = sqrt(C(n, k) eta^(n-k) (1-eta)^k) |n-k>.
    """
    n = np.arange(cutoff + 1)
    ops = []
    for k in range(cutoff + 1):
        E = np.zeros((cutoff + 1, cutoff + 1))
        m = n[k:]
        if eta == 1.0:
            coeff = np.full(m.size, 1.0 if k == 0 else 0.0)
        elif eta == 0.0:
            coeff = np.where(m - k == 0, 1.0, 0.0)
        else:
            logc = (gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
                    + (m - k) * np.log(eta) + k * np.log1p(-eta))
            coeff = np.exp(0.5 * logc)
        E[m - k, m] = coeff
        if np.any(E):
            ops.append(_frozen(E))
    return tuple(ops)


def loss(state: StateArray, mode: int, eta: float) -> StateArray:
    """Pure-loss channel with transmission eta on one mode (result is a density matrix)."""
    (mode,) = check_modes(state, [mode])
    if not 0 <= eta <= 1:
        raise SchemaError("transmission must lie in [0, 1]")
    if eta == 1:
        return state
    rho = state.to_dm()
    acc = None
    for E in loss_kraus(float(eta), state.cutoffs[mode]):
        term = apply_local(rho, E, [mode])
        acc = term.data if acc is None else acc + term.data
    return StateArray(acc, state.cutoffs, DM, state.discarded)


def generalized_bernoulli(rho: np.ndarray, eta: float) -> np.ndarray:
    """Single-mode loss written entrywise:
    rho'_{n,m} = sum_k B_n^{n+k} B_m^{m+k} rho_{n+k,m+k},
    B_n^{n+k} = sqrt(C(n+k, n) eta^n (1-eta)^k).
    """
    rho = np.asarray(rho, complex)
    N = rho.shape[0] - 1
    out = np.zeros_like(rho)

    def B(n, k):
        if eta in (0.0, 1.0):
            return float((eta == 1.0 and k == 0) or (eta == 0.0 and n == 0))
        return np.exp(0.5 * (gammaln(n + k + 1) - gammaln(n + 1) - gammaln(k + 1)
                             + n * np.log(eta) + k * np.log1p(-eta)))

    for n in range(N + 1):
        for m in range(N + 1):
            s = 0j
            for k in range(N + 1 - max(n, m)):
                s += B(n, k) * B(m, k) * rho[n + k, m + k]
            out[n, m] = s
    return out


def additive_noise(state: StateArray, mode: int, variance: float, nodes: int = 21,
                   out_cutoff: int | None = None) -> StateArray:
    """Random displacement with Gaussian x and p shifts of the given variance.

    The average over displacements uses a tensor Gauss-Hermite rule.
    """
    (mode,) = check_modes(state, [mode])
    if variance < 0:
        raise SchemaError("noise variance must be non-negative")
    if variance == 0:
        return state
    (oc,) = _out(state, [mode], out_cutoff)
    t, w = np.polynomial.hermite.hermgauss(nodes)
    w = w / np.sqrt(np.pi)
    rho = state.to_dm()
    acc = None
    s = np.sqrt(variance)
    # shift in x is sqrt(2) Re(beta), so Re(beta) = sqrt(variance) * t
    # far nodes may leak individually; only the weight lost by the average counts
    for a, wa in zip(t, w):
        for b, wb in zip(t, w):
            beta = complex(s * a, s * b)
            V = displacement_matrix(beta, rho.cutoffs[mode], oc)
            term = apply_local(rho, V, [mode], (oc,))
            acc = term.data * (wa * wb) if acc is None else acc + term.data * (wa * wb)
    cut = list(rho.cutoffs)
    cut[mode] = oc
    out = StateArray(acc, cut, DM, state.discarded)
    w_in, w_out = rho.trace(), out.trace()
    leak = max(0.0, 1 - w_out / w_in) if w_in > 0 else 0.0
    if leak > leakage_tolerance():
        raise CutoffInsufficient(f"additive_noise: {leak:.3g} of the weight leaves cutoff {oc} "
                                 f"(tolerance {leakage_tolerance():g}); raise the cutoff", leakage=leak)
    if leak > 0:
        out = StateArray(acc * (w_in / w_out), cut, DM, state.discarded + leak)
    return out


def teleport_cv(state: StateArray, mode: int, resource_r: float, detection_eta: float = 1.0,
                out_cutoff: int | None = None) -> StateArray:
    """Unity-gain continuous-variable teleportation of one mode.

    Acts as Gaussian additive noise of variance e^{-2r} per quadrature,
    plus (1 - eta)/eta from inefficient Bell-measurement homodynes.
    """
    if not 0 < detection_eta <= 1:
        raise SchemaError("detection efficiency must lie in (0, 1]")
    var = np.exp(-2 * resource_r) + (1 - detection_eta) / detection_eta
    return additive_noise(state, mode, var, out_cutoff=out_cutoff)


def enlarge(state: StateArray, mode: int, cutoff: int) -> StateArray:
    """Zero-pad one mode to a larger cutoff."""
    cut = list(state.cutoffs)
    cut[mode] = max(cut[mode], int(cutoff))
    return embed(state, cut)
