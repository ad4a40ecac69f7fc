"""Measurement-induced (heralded) operations.

Every function returns a :class:`HeraldedOutcome`.  Its ``probability``
field has one of three meanings, given by ``kind``:

``"probability"``  a true event probability (photon counting, homodyne window);
``"density"``      a probability density (sharp homodyne projection);
``"weight"``       the relative weight ``Tr(O rho O^dag)`` of an ideal,
                   non-unitary operator, which is not a probability.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._config import PROBABILITY_FLOOR
from .core import (DM, KET, StateArray, annihilation, apply_local, check_modes, embed,
                   partial_trace, tensor, truncate)
from .channels import beam_splitter, loss, phase_rotate, tau_from_reflectivity, two_mode_squeeze
from .errors import ImprobableEvent, SchemaError, ZeroWeightError
from .states import make_vacuum
from .wavefunctions import quadrature_overlaps


@dataclass(frozen=True)
class DetectorModel:
    """Photon detector.

    kind: ``"pnr"`` (photon-number resolving) or ``"onoff"`` (click / no click).
    efficiency: quantum efficiency, modeled as loss before an ideal detector.
    dark_count: probability of one spurious count per gate.
    mode_purity: weight of the heralded branch; the rest is replaced by the
        unconditioned state (imperfect mode matching between herald and signal).
    """

    kind: str = "pnr"
    efficiency: float = 1.0
    dark_count: float = 0.0
    mode_purity: float = 1.0

    def __post_init__(self):
        if self.kind not in ("pnr", "onoff"):
            raise SchemaError(f"detector kind must be 'pnr' or 'onoff', got {self.kind!r}")
        for name in ("efficiency", "dark_count", "mode_purity"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise SchemaError(f"{name} must lie in [0, 1], got {v}")

    @property
    def ideal(self) -> bool:
        return self.efficiency == 1 and self.dark_count == 0 and self.mode_purity == 1


IDEAL_PNR = DetectorModel()


@dataclass
class HeraldedOutcome:
    state: StateArray
    probability: float
    kind: str = "probability"
    info: dict = field(default_factory=dict)


def _check_prob(p: float, what: str):
    if not p > PROBABILITY_FLOOR:
        raise ImprobableEvent(f"{what}: heralding probability {p:.3g} is below the floor "
                              f"{PROBABILITY_FLOOR:g}", probability=p)


def _remaining(state: StateArray, mode: int) -> list[int]:
    return [m for m in range(state.n_modes) if m != mode]


def _fock_branch(state: StateArray, mode: int, k: int) -> StateArray:
    """Unnormalized conditional state after finding k photons (ideal detector)."""
    N = state.cutoffs[mode]
    rest = _remaining(state, mode)
    cut = tuple(state.cutoffs[m] for m in rest)
    if k > N:
        shape = tuple(c + 1 for c in cut)
        kind = state.kind
        return StateArray(np.zeros(shape if kind == KET else shape + shape), cut, kind)
    if state.is_ket:
        data = np.take(state.data, k, axis=mode)
        return StateArray(data, cut, KET, state.discarded)
    n = state.n_modes
    data = np.take(np.take(state.data, k, axis=n + mode), k, axis=mode)
    return StateArray(data, cut, DM, state.discarded)


def project_fock(state: StateArray, mode: int, n: int,
                 detector: DetectorModel = IDEAL_PNR) -> HeraldedOutcome:
    """Condition on a photon-detector outcome on ``mode`` and remove that mode.

    For ``onoff`` detectors ``n`` is 1 for a click and 0 for no click.
    Dark counts add one count with probability ``dark_count``.
    """
    (mode,) = check_modes(state, [mode])
    n = int(n)
    if n < 0 or (detector.kind == "onoff" and n > 1):
        raise SchemaError(f"invalid outcome {n} for a {detector.kind} detector")
    w0 = state.trace()
    work = state
    if detector.efficiency < 1:
        work = loss(state, mode, detector.efficiency)
    N = state.cutoffs[mode]
    d = detector.dark_count
    if detector.kind == "pnr":
        terms = [(1 - d, n)] + ([(d, n - 1)] if d > 0 and n >= 1 else [])
    elif n == 0:
        terms = [(1 - d, 0)]
    else:
        terms = [(1.0, k) for k in range(1, N + 1)] + ([(d, 0)] if d > 0 else [])
    acc = None
    for weight, k in terms:
        if weight == 0:
            continue
        br = _fock_branch(work, mode, k)
        if len(terms) > 1:
            br = br.to_dm()
        scaled = br.data * (np.sqrt(weight) if br.is_ket else weight)
        acc = scaled if acc is None else acc + scaled
        kind, cut = br.kind, br.cutoffs
    if acc is None:
        raise ImprobableEvent("detector outcome has zero probability", probability=0.0)
    acc = StateArray(acc, cut, kind, state.discarded)
    p = acc.trace() / w0
    _check_prob(p, "project_fock")
    out = acc.normalized()
    if detector.mode_purity < 1:
        background = partial_trace(state, _remaining(state, mode)).normalized()
        xi = detector.mode_purity
        out = StateArray(xi * out.to_dm().data + (1 - xi) * background.data, out.cutoffs, DM,
                         out.discarded)
    return HeraldedOutcome(out, p, "probability", {"outcome": n, "detector": detector.kind})


def project_state(state: StateArray, modes, ket) -> HeraldedOutcome:
    """Condition on finding ``modes`` in the pure state ``ket`` and remove them.

    ``ket`` is an array over the joint Fock basis of ``modes`` (shape equal
    to their dimensions, or flat); it is normalized here.
    """
    modes = check_modes(state, modes)
    dims = [state.cutoffs[m] + 1 for m in modes]
    v = np.asarray(ket, complex).reshape(dims)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise SchemaError("projection ket is zero")
    v = v / norm
    rest = [m for m in range(state.n_modes) if m not in modes]
    if not rest:
        raise SchemaError("cannot project every mode")
    cut = tuple(state.cutoffs[m] for m in rest)
    w0 = state.trace()
    k = len(modes)
    if state.is_ket:
        data = np.tensordot(state.data, v.conj(), axes=(modes, list(range(k))))
        out = StateArray(data, cut, KET, state.discarded)
    else:
        n = state.n_modes
        data = np.tensordot(state.data, v.conj(), axes=(modes, list(range(k))))
        # bra axes of the projected modes, renumbered after the ket axes were removed
        bra_axes = [n - k + m for m in modes]
        data = np.tensordot(data, v, axes=(bra_axes, list(range(k))))
        out = StateArray(data, cut, DM, state.discarded)
    p = out.trace() / w0
    _check_prob(p, "project_state")
    return HeraldedOutcome(out.normalized(), p, "probability", {"modes": modes})


# ---------------------------------------------------------------------------
# ideal operator actions
# ---------------------------------------------------------------------------

def _weighted(state: StateArray, out: StateArray, what: str) -> HeraldedOutcome:
    w_in = state.trace()
    w = out.trace()
    if not w > 1e-300:
        raise ZeroWeightError(f"{what} annihilates the state")
    return HeraldedOutcome(out.normalized(), w / w_in, "weight")


def _ladder_padded(cutoff: int, raising: bool) -> np.ndarray:
    """Ladder matrix from levels 0..cutoff into levels 0..cutoff+1 (exact)."""
    a = annihilation(cutoff + 1)
    return a.T[:, : cutoff + 1] if raising else a[: cutoff + 1, : cutoff + 1]


def apply_operator(state: StateArray, op: np.ndarray, modes, what: str = "operator",
                   out_cutoffs=None) -> HeraldedOutcome:
    """Apply an arbitrary (non-unitary) operator and renormalize.

    ``op`` may map into one extra level per mode; the result is brought back
    to ``out_cutoffs`` (default: the input cutoffs) under the leakage guard.
    """
    modes = check_modes(state, modes)
    in_cut = [state.cutoffs[m] for m in modes]
    dim_in = int(np.prod([c + 1 for c in in_cut]))
    if op.shape[1] != dim_in:
        raise SchemaError("operator column count does not match the modes")
    grown = op.shape[0] != dim_in
    mid_cut = [c + 1 for c in in_cut] if grown else in_cut
    out = apply_local(state, op, modes, mid_cut)
    if out_cutoffs is None:
        target = list(state.cutoffs)
    else:
        target = list(out.cutoffs)
        for m, c in zip(modes, out_cutoffs):
            target[m] = int(c)
    if tuple(target) != out.cutoffs:
        if all(t >= c for t, c in zip(target, out.cutoffs)):
            out = embed(out, target)
        else:
            out = truncate(out, target, context=what)
    return _weighted(state, out, what)


def subtract_photon_ideal(state: StateArray, mode: int) -> HeraldedOutcome:
    (mode,) = check_modes(state, [mode])
    a = annihilation(state.cutoffs[mode])
    return apply_operator(state, a, [mode], "photon subtraction")


def add_photon_ideal(state: StateArray, mode: int, out_cutoff: int | None = None) -> HeraldedOutcome:
    (mode,) = check_modes(state, [mode])
    N = state.cutoffs[mode]
    op = _ladder_padded(N, raising=True)
    oc = None if out_cutoff is None else [out_cutoff]
    return apply_operator(state, op, [mode], "photon addition", oc)


def operator_superpose(state: StateArray, mode: int, kind: str, x: complex, y: complex,
                       out_cutoff: int | None = None) -> HeraldedOutcome:
    """Apply x a + y (kind='a') or x a^dag + y (kind='adag')."""
    (mode,) = check_modes(state, [mode])
    N = state.cutoffs[mode]
    if kind == "a":
        op = x * annihilation(N) + y * np.eye(N + 1)
    elif kind == "adag":
        ident = np.eye(N + 2)[:, : N + 1]
        op = x * _ladder_padded(N, raising=True) + y * ident
    else:
        raise SchemaError("kind must be 'a' or 'adag'")
    oc = None if out_cutoff is None else [out_cutoff]
    return apply_operator(state, op, [mode], f"{x}*{kind}+{y}", oc)


def _two_mode_ladder(state, i, j, r, t, phi, raising):
    Ni, Nj = state.cutoffs[i], state.cutoffs[j]
    if raising:
        Li = _ladder_padded(Ni, True)
        Lj = _ladder_padded(Nj, True)
        Ii = np.eye(Ni + 2)[:, : Ni + 1]
        Ij = np.eye(Nj + 2)[:, : Nj + 1]
        return r * np.kron(Li, Ij) + t * np.exp(-1j * phi) * np.kron(Ii, Lj)
    return (r * np.kron(annihilation(Ni), np.eye(Nj + 1))
            + t * np.exp(1j * phi) * np.kron(np.eye(Ni + 1), annihilation(Nj)))


def delocalized_subtract(state: StateArray, i: int, j: int, r: float, t: float,
                         phi: float = 0.0) -> HeraldedOutcome:
    """Apply r a_i + t e^{i phi} a_j."""
    i, j = check_modes(state, [i, j])
    op = _two_mode_ladder(state, i, j, r, t, phi, False)
    return apply_operator(state, op, [i, j], "delocalized subtraction")


def delocalized_add(state: StateArray, i: int, j: int, r: float, t: float,
                    phi: float = 0.0) -> HeraldedOutcome:
    """Apply r a_i^dag + t e^{-i phi} a_j^dag (the adjoint of the subtraction form)."""
    i, j = check_modes(state, [i, j])
    op = _two_mode_ladder(state, i, j, r, t, phi, True)
    return apply_operator(state, op, [i, j], "delocalized addition")


# ---------------------------------------------------------------------------
# optical circuits
# ---------------------------------------------------------------------------

def subtract_photon_physical(state: StateArray, mode: int, reflectivity: float,
                             detector: DetectorModel = IDEAL_PNR,
                             ancilla_cutoff: int | None = None) -> HeraldedOutcome:
    """Tap a small fraction of the beam and herald on a detection in the tap."""
    (mode,) = check_modes(state, [mode])
    if not 0 < reflectivity < 1:
        raise SchemaError("tap reflectivity must lie strictly between 0 and 1")
    anc_cut = state.cutoffs[mode] if ancilla_cutoff is None else int(ancilla_cutoff)
    big = tensor(state, make_vacuum((anc_cut,)))
    anc = big.n_modes - 1
    big = beam_splitter(big, mode, anc, tau_from_reflectivity(reflectivity))
    res = project_fock(big, anc, 1, detector)
    res.info.update(reflectivity=reflectivity)
    return res


def add_photon_physical(state: StateArray, mode: int, gain_r: float,
                        detector: DetectorModel = IDEAL_PNR,
                        ancilla_cutoff: int | None = None,
                        out_cutoff: int | None = None) -> HeraldedOutcome:
    """Weak two-mode squeezing with an idler in vacuum, heralded on the idler."""
    (mode,) = check_modes(state, [mode])
    anc_cut = state.cutoffs[mode] if ancilla_cutoff is None else int(ancilla_cutoff)
    big = tensor(state, make_vacuum((anc_cut,)))
    anc = big.n_modes - 1
    oc = (state.cutoffs[mode] if out_cutoff is None else int(out_cutoff), anc_cut)
    big = two_mode_squeeze(big, mode, anc, gain_r, out_cutoffs=oc)
    res = project_fock(big, anc, 1, detector)
    res.info.update(gain_r=gain_r)
    return res


def delocalized_subtract_physical(state: StateArray, i: int, j: int, reflectivity: float,
                                  phi: float = 0.0, detector: DetectorModel = IDEAL_PNR,
                                  ancilla_cutoff: int = 2) -> HeraldedOutcome:
    """Tap both modes, mix the taps on a balanced beam splitter, herald on one port.

    To first order in the tap amplitude this applies a_i + e^{i phi} a_j.
    """
    i, j = check_modes(state, [i, j])
    tau = tau_from_reflectivity(reflectivity)
    big = tensor(state, make_vacuum((ancilla_cutoff, ancilla_cutoff)))
    ai, aj = big.n_modes - 2, big.n_modes - 1
    big = beam_splitter(big, i, ai, tau, out_cutoffs=(state.cutoffs[i], ancilla_cutoff))
    big = beam_splitter(big, j, aj, tau, out_cutoffs=(state.cutoffs[j], ancilla_cutoff))
    # phase on the second tap so that the detected port sees a_i + e^{i phi} a_j
    big = phase_rotate(big, aj, -phi)
    big = beam_splitter(big, ai, aj, np.pi / 4)
    # the j port carries t a_i + r a_j: no count on port i, one count on port j
    first = project_fock(big, ai, 0, detector if detector.kind == "onoff" else IDEAL_PNR)
    second = project_fock(first.state, first.state.n_modes - 1, 1, detector)
    second.probability *= first.probability
    second.info.update(reflectivity=reflectivity, phi=phi)
    return second


def homodyne_project(state: StateArray, mode: int, theta: float, y: float,
                     epsilon: float = 0.05, nodes: int = 11) -> HeraldedOutcome:
    """Condition on a homodyne result x_theta in [y - epsilon, y + epsilon].

    With ``epsilon == 0`` the projection is onto the quadrature eigenstate
    and ``probability`` is a density.  Otherwise the window is integrated
    with a Gauss-Legendre rule and ``probability`` is the window probability.
    """
    (mode,) = check_modes(state, [mode])
    if epsilon < 0:
        raise SchemaError("window half-width must be non-negative")
    N = state.cutoffs[mode]
    w0 = state.trace()
    if epsilon == 0:
        pts, wts = np.array([y], float), np.array([1.0])
    else:
        t, w = np.polynomial.legendre.leggauss(nodes)
        pts, wts = y + epsilon * t, epsilon * w
    ov = quadrature_overlaps(N, theta, pts)  # (N+1, P)
    rest = _remaining(state, mode)
    cut = tuple(state.cutoffs[m] for m in rest)
    if state.is_ket and epsilon == 0:
        data = np.tensordot(state.data, ov[:, 0], axes=([mode], [0]))
        out = StateArray(data, cut, KET, state.discarded)
    else:
        rho = state.to_dm()
        nm = rho.n_modes
        acc = 0
        for k in range(pts.size):
            v = ov[:, k]
            t1 = np.tensordot(rho.data, v, axes=([mode], [0]))  # ket index removed
            # bra axis of the measured mode shifted by one after removal
            t2 = np.tensordot(t1, v.conj(), axes=([nm + mode - 1], [0]))
            acc = acc + wts[k] * t2
        out = StateArray(acc, cut, DM, state.discarded)
    p = out.trace() / w0
    kind = "density" if epsilon == 0 else "probability"
    _check_prob(p, "homodyne_project")
    return HeraldedOutcome(out.normalized(), p, kind,
                           {"theta": theta, "y": y, "epsilon": epsilon})
