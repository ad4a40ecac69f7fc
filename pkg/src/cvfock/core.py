"""Truncated multimode Fock-space states and basic linear algebra on them.

A state is stored as a dense tensor.  A ket over modes with cutoffs
``(N_0, ..., N_{k-1})`` has shape ``(N_0+1, ..., N_{k-1}+1)``; a density
matrix has that shape twice (ket indices first, then bra indices).  Flat
vectors follow the row-major multi-index order of those shapes.
"""
from __future__ import annotations

import json
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from ._config import leakage_tolerance
from .errors import CutoffInsufficient, ModeError, SchemaError

KET = "ket"
DM = "dm"


class StateArray:
    """A (possibly unnormalized) ket or density matrix on truncated modes.

    ``discarded`` accumulates the relative weight that operations have cut
    off at the truncation boundary.  It never exceeds the leakage tolerance
    unless the caller explicitly raised that tolerance.
    """

    __slots__ = ("data", "cutoffs", "kind", "discarded")

    def __init__(self, data, cutoffs: Sequence[int], kind: str = KET, discarded: float = 0.0):
        cutoffs = tuple(int(c) for c in cutoffs)
        if any(c < 0 for c in cutoffs):
            raise SchemaError("cutoffs must be non-negative")
        if kind not in (KET, DM):
            raise SchemaError(f"kind must be 'ket' or 'dm', got {kind!r}")
        dims = tuple(c + 1 for c in cutoffs)
        arr = np.asarray(data, dtype=complex)
        shape = dims if kind == KET else dims + dims
        size = int(np.prod(shape)) if shape else 1
        if arr.size != size:
            raise SchemaError(f"data of size {arr.size} does not match shape {shape}")
        self.data = arr.reshape(shape)
        self.cutoffs = cutoffs
        self.kind = kind
        self.discarded = float(discarded)

    # -- shape helpers -------------------------------------------------
    @property
    def n_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims)) if self.dims else 1

    @property
    def is_ket(self) -> bool:
        return self.kind == KET

    @property
    def vector(self) -> np.ndarray:
        if not self.is_ket:
            raise SchemaError("state is a density matrix, not a ket")
        return self.data.reshape(self.size)

    @property
    def matrix(self) -> np.ndarray:
        """Density matrix in the flat basis (computed from a ket if needed)."""
        if self.is_ket:
            v = self.vector
            return np.outer(v, v.conj())
        return self.data.reshape(self.size, self.size)

    def copy(self) -> "StateArray":
        return StateArray(self.data.copy(), self.cutoffs, self.kind, self.discarded)

    def to_dm(self) -> "StateArray":
        if not self.is_ket:
            return self
        return StateArray(self.matrix, self.cutoffs, DM, self.discarded)

    # -- weights -------------------------------------------------------
    def trace(self) -> float:
        if self.is_ket:
            return float(np.vdot(self.vector, self.vector).real)
        return float(np.trace(self.matrix).real)

    def normalized(self) -> "StateArray":
        w = self.trace()
        if not w > 0:
            from .errors import ZeroWeightError

            raise ZeroWeightError("cannot normalize a state with zero weight")
        scale = 1 / np.sqrt(w) if self.is_ket else 1 / w
        return StateArray(self.data * scale, self.cutoffs, self.kind, self.discarded)

    def fock_distribution(self, mode: int) -> np.ndarray:
        """Photon-number distribution of one mode (unnormalized if the state is)."""
        check_modes(self, [mode])
        red = partial_trace(self, [mode])
        return np.real(np.diag(red.matrix)).copy()

    def top_population(self) -> tuple[float, ...]:
        """Population of the highest kept Fock level of every mode."""
        w = self.trace()
        return tuple(float(self.fock_distribution(m)[-1] / w) for m in range(self.n_modes))

    def purity(self) -> float:
        if self.is_ket:
            return 1.0
        rho = self.matrix / self.trace()
        return float(np.real(np.vdot(rho, rho)))

    def validate(self, tol: float = 1e-9) -> dict:
        """Check finiteness, hermiticity, positivity and unit trace.

        Returns a dictionary of diagnostics; raises ``SchemaError`` on
        non-finite data only.
        """
        if not np.all(np.isfinite(self.data)):
            raise SchemaError("state contains non-finite entries")
        diag = {"trace": self.trace(), "top_population": self.top_population() if self.n_modes else ()}
        if self.is_ket:
            diag.update(hermitian=True, min_eigenvalue=0.0)
        else:
            m = self.matrix
            herm = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
            ev = np.linalg.eigvalsh((m + m.conj().T) / 2)
            diag.update(hermitian=herm <= tol, min_eigenvalue=float(ev.min()))
        diag["valid"] = (
            diag["hermitian"] and diag["min_eigenvalue"] >= -tol and abs(diag["trace"] - 1) <= tol
        )
        return diag

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        flat = self.data.reshape(-1)
        return {
            "version": __version__,
            "kind": self.kind,
            "cutoffs": list(self.cutoffs),
            "real": flat.real.tolist(),
            "imag": flat.imag.tolist(),
            "discarded": self.discarded,
        }

    def to_json(self, path=None, indent: int | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_dict(cls, doc: dict) -> "StateArray":
        try:
            kind = doc["kind"]
            cutoffs = doc["cutoffs"]
            data = np.asarray(doc["real"], dtype=float) + 1j * np.asarray(doc["imag"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed state document: {exc}") from exc
        return cls(data, cutoffs, kind, doc.get("discarded", 0.0))

    @classmethod
    def from_json(cls, path) -> "StateArray":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(doc)

    def __repr__(self) -> str:
        return f"StateArray(kind={self.kind!r}, cutoffs={self.cutoffs}, trace={self.trace():.6g})"


# ---------------------------------------------------------------------------
# Ladder operators
# ---------------------------------------------------------------------------

def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1)


def creation(cutoff: int) -> np.ndarray:
    return annihilation(cutoff).T.copy()


def number(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff + 1, dtype=float))


def quadrature(cutoff: int, theta: float = 0.0) -> np.ndarray:
    """x_theta = (a^dag e^{i theta} + a e^{-i theta}) / sqrt(2)."""
    a = annihilation(cutoff)
    return (a.T * np.exp(1j * theta) + a * np.exp(-1j * theta)) / np.sqrt(2)


# ---------------------------------------------------------------------------
# Tensor structure
# ---------------------------------------------------------------------------

def check_modes(state: StateArray, modes: Iterable[int]) -> list[int]:
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise ModeError(f"repeated mode in {modes}")
    for m in modes:
        if not 0 <= m < state.n_modes:
            raise ModeError(f"mode {m} out of range for a {state.n_modes}-mode state")
    return modes


def tensor(*states: StateArray) -> StateArray:
    """Tensor product; the result is a ket only if every factor is."""
    if not states:
        raise SchemaError("tensor() needs at least one state")
    if all(s.is_ket for s in states):
        data = states[0].data
        for s in states[1:]:
            data = np.multiply.outer(data, s.data)
        return StateArray(data, sum((s.cutoffs for s in states), ()), KET,
                          sum(s.discarded for s in states))
    mat = states[0].to_dm().matrix
    for s in states[1:]:
        mat = np.kron(mat, s.to_dm().matrix)
    return StateArray(mat, sum((s.cutoffs for s in states), ()), DM,
                      sum(s.discarded for s in states))


def partial_trace(state: StateArray, keep: Sequence[int]) -> StateArray:
    """Reduced density matrix on the modes in ``keep`` (in the given order)."""
    keep = check_modes(state, keep)
    n = state.n_modes
    drop = [m for m in range(n) if m not in keep]
    cut = tuple(state.cutoffs[m] for m in keep)
    if state.is_ket:
        t = np.moveaxis(state.data, keep + drop, list(range(n)))
        dk = int(np.prod([state.dims[m] for m in keep])) if keep else 1
        t = t.reshape(dk, -1)
        return StateArray(t @ t.conj().T, cut, DM, state.discarded)
    t = state.data
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise SchemaError("too many modes for partial_trace")
    ket = list(letters[:n])
    bra = list(letters[n:2 * n])
    for m in drop:
        bra[m] = ket[m]
    out = "".join(ket[m] for m in keep) + "".join(bra[m] for m in keep)
    red = np.einsum("".join(ket) + "".join(bra) + "->" + out, t)
    return StateArray(red, cut, DM, state.discarded)


def permute_modes(state: StateArray, order: Sequence[int]) -> StateArray:
    order = check_modes(state, order)
    if len(order) != state.n_modes:
        raise ModeError("permutation must list every mode")
    cut = tuple(state.cutoffs[m] for m in order)
    if state.is_ket:
        return StateArray(np.transpose(state.data, order), cut, KET, state.discarded)
    n = state.n_modes
    return StateArray(np.transpose(state.data, list(order) + [n + m for m in order]), cut, DM,
                      state.discarded)


def embed(state: StateArray, cutoffs: Sequence[int]) -> StateArray:
    """Zero-pad a state into larger (or equal) cutoffs."""
    cutoffs = tuple(int(c) for c in cutoffs)
    if len(cutoffs) != state.n_modes or any(c < s for c, s in zip(cutoffs, state.cutoffs)):
        raise SchemaError("embed() can only enlarge cutoffs")
    dims = tuple(c + 1 for c in cutoffs)
    sl = tuple(slice(0, d) for d in state.dims)
    if state.is_ket:
        out = np.zeros(dims, complex)
        out[sl] = state.data
    else:
        out = np.zeros(dims + dims, complex)
        out[sl + sl] = state.data
    return StateArray(out, cutoffs, state.kind, state.discarded)


def truncate(state: StateArray, cutoffs: Sequence[int], *, context: str = "operation",
             tol: float | None = None) -> StateArray:
    """Cut a state down to smaller cutoffs, guarding against leakage.

    The relative weight outside the new cutoffs is compared with the leakage
    tolerance; above it ``CutoffInsufficient`` is raised.  Below it the kept
    part is rescaled to the original weight and the loss is recorded in
    ``discarded``.
    """
    cutoffs = tuple(int(c) for c in cutoffs)
    if cutoffs == state.cutoffs:
        return state
    if len(cutoffs) != state.n_modes or any(c > s for c, s in zip(cutoffs, state.cutoffs)):
        raise SchemaError("truncate() can only shrink cutoffs")
    tol = leakage_tolerance() if tol is None else tol
    sl = tuple(slice(0, c + 1) for c in cutoffs)
    total = state.trace()
    if state.is_ket:
        kept = state.data[sl]
        w = float(np.vdot(kept, kept).real)
    else:
        kept = state.data[sl + sl]
        d = int(np.prod([c + 1 for c in cutoffs])) if cutoffs else 1
        w = float(np.trace(kept.reshape(d, d)).real)
    if total <= 0:
        return StateArray(kept, cutoffs, state.kind, state.discarded)
    leak = max(0.0, 1.0 - w / total)
    if leak > tol:
        raise CutoffInsufficient(
            f"{context}: {leak:.3g} of the weight lies above cutoffs {cutoffs} "
            f"(tolerance {tol:g}); raise the cutoff", leakage=leak)
    if w > 0:
        kept = kept * (np.sqrt(total / w) if state.is_ket else total / w)
    return StateArray(kept, cutoffs, state.kind, state.discarded + leak)


def apply_local(state: StateArray, op: np.ndarray, modes: Sequence[int],
                out_cutoffs: Sequence[int] | None = None, left_only: bool = False) -> StateArray:
    """Apply a matrix acting on ``modes`` (rows may live in larger cutoffs).

    ``op`` has shape (prod(out_dims), prod(in_dims)) over the listed modes in
    row-major order.  Density matrices are transformed as ``op rho op^dag``
    (or ``op rho`` with ``left_only``).
    """
    modes = check_modes(state, modes)
    in_dims = [state.dims[m] for m in modes]
    if out_cutoffs is None:
        out_cutoffs = [state.cutoffs[m] for m in modes]
    out_dims = [int(c) + 1 for c in out_cutoffs]
    op = np.asarray(op)
    if op.shape != (int(np.prod(out_dims)), int(np.prod(in_dims))):
        raise SchemaError(f"operator shape {op.shape} does not match modes {modes}")
    n = state.n_modes
    new_cut = list(state.cutoffs)
    for m, c in zip(modes, out_cutoffs):
        new_cut[m] = int(c)
    k = len(modes)

    def _act(t, axes, mat):
        moved = np.moveaxis(t, axes, list(range(k)))
        rest_shape = moved.shape[k:]
        flat = moved.reshape(int(np.prod(in_dims)), -1)
        res = (mat @ flat).reshape(tuple(out_dims) + rest_shape)
        return np.moveaxis(res, list(range(k)), axes)

    if state.is_ket:
        data = _act(state.data, modes, op)
        return StateArray(data, new_cut, KET, state.discarded)
    data = _act(state.data, modes, op)
    if not left_only:
        data = _act(data, [n + m for m in modes], op.conj())
    elif out_dims != in_dims:
        raise SchemaError("left_only application needs a square operator")
    return StateArray(data, new_cut, DM, state.discarded)


def expect(state: StateArray, op: np.ndarray, modes: Sequence[int]) -> complex:
    """<op> for an operator on ``modes`` (normalized by the state's weight)."""
    modes = check_modes(state, modes)
    out = apply_local(state, op, modes, left_only=not state.is_ket)
    if state.is_ket:
        val = np.vdot(state.vector, out.vector)
    else:
        val = np.trace(out.matrix)
    return complex(val / state.trace())
