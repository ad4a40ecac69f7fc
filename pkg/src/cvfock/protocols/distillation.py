"""Entanglement distillation of two-mode squeezed vacuum."""
from __future__ import annotations

import numpy as np

from ..channels import loss
from ..conditional import (IDEAL_PNR, DetectorModel, apply_operator, delocalized_subtract,
                           delocalized_subtract_physical, subtract_photon_ideal,
                           subtract_photon_physical)
from ..core import DM, KET, StateArray
from ..errors import SchemaError
from ..metrics import log_negativity, two_mode_quadrature_variance
from ..states import make_epr
from .amplifiers import catalysis_circuit
from .report import ProtocolReport

SUBTRACTION_MODES = ("one", "both", "delocalized")


def _epr(r: float, cutoff: int | None) -> StateArray:
    """EPR state with at least three levels per mode, so subtractions keep support."""
    st = make_epr(r, cutoff)
    return st if min(st.cutoffs) >= 3 else make_epr(r, 3)


def _lossy(state: StateArray, transmissions) -> StateArray:
    for mode, eta in enumerate(transmissions):
        if not 0 < eta <= 1:
            raise SchemaError("channel transmissions must lie in (0, 1]")
        if eta < 1:
            state = loss(state, mode, eta)
    return state


def _amplitude(state: StateArray, k: int) -> complex:
    """Amplitude of |k,k> relative to |0,0> (coherence rho_{kk,00} / rho_{00,00} for mixed states)."""
    if state.is_ket:
        return complex(state.data[k, k] / state.data[0, 0])
    return complex(state.data[k, k, 0, 0] / state.data[0, 0, 0, 0])


def _variances(state: StateArray) -> dict:
    return {"var_difference": two_mode_quadrature_variance(state, sign=-1),
            "var_sum": two_mode_quadrature_variance(state, sign=+1)}


def distill_by_subtraction(r: float, transmissions=(1.0, 1.0), reflectivity: float | None = None,
                           modes: str = "both", detector: DetectorModel = IDEAL_PNR,
                           cutoff: int | None = None) -> ProtocolReport:
    """Photon subtraction on a (lossy) two-mode squeezed vacuum.

    ``modes``: ``"one"`` subtracts from A, ``"both"`` from A and B,
    ``"delocalized"`` applies (a_A + a_B)/sqrt(2).  ``reflectivity=None``
    uses ideal operators, otherwise tap beam splitters and ``detector``.
    """
    if modes not in SUBTRACTION_MODES:
        raise SchemaError(f"modes must be one of {SUBTRACTION_MODES}")
    epr = _epr(r, cutoff)
    st = _lossy(epr, transmissions)
    before = st
    prob = 1.0
    kind = "weight" if reflectivity is None else "probability"
    if modes == "delocalized":
        if reflectivity is None:
            res = delocalized_subtract(st, 0, 1, 1 / np.sqrt(2), 1 / np.sqrt(2))
        else:
            res = delocalized_subtract_physical(st, 0, 1, reflectivity, detector=detector)
        st, prob = res.state, res.probability
    else:
        for m in ([0] if modes == "one" else [0, 1]):
            if reflectivity is None:
                res = subtract_photon_ideal(st, m)
            else:
                res = subtract_photon_physical(st, m, reflectivity, detector)
            st = res.state
            prob *= res.probability
    rep = ProtocolReport("distill_by_subtraction", st, prob, kind,
                         params={"r": r, "transmissions": list(transmissions), "reflectivity": reflectivity,
                                 "modes": modes, "detector": detector.__dict__})
    ln_before = log_negativity(before, [0])
    ln_after = log_negativity(st, [0])
    rep.metrics.update(log_negativity_before=ln_before, log_negativity=ln_after,
                       log_negativity_gain=ln_after - ln_before)
    if modes != "delocalized":
        ratio = abs(_amplitude(st, 1))
        rep.metrics.update(amplitude_ratio=ratio, amplitude_ratio_input=abs(_amplitude(before, 1)))
    rep.metrics.update({f"{k}_before": v for k, v in _variances(before).items()})
    rep.metrics.update(_variances(st))
    return rep


def truncated_lossy_epr(r: float, t: float) -> StateArray:
    """(|00> - r|11>), normalized, with amplitude transmissivity t on mode B."""
    ket = np.zeros((2, 2), complex)
    ket[0, 0], ket[1, 1] = 1.0, -r
    st = StateArray(ket / np.linalg.norm(ket), (1, 1), KET)
    return loss(st, 1, t ** 2)


def finalstate_matrix(r: float, t: float, reflectivity: float) -> StateArray:
    """Closed form of the amplified truncated state, normalized; basis |AB>."""
    sqR = np.sqrt(reflectivity)
    v = np.zeros(4, complex)
    v[0], v[3] = sqR, -r * t
    rho = np.outer(v, v.conj())
    rho[2, 2] += r ** 2 * reflectivity * (1 - t ** 2)
    rho /= np.trace(rho).real
    return StateArray(rho.reshape(2, 2, 2, 2), (1, 1), DM)


def distill_by_nla(r: float, t: float, reflectivity: float, model: str = "truncated",
                   cutoff: int | None = None) -> ProtocolReport:
    """Noiseless amplification of the lossy arm of an EPR pair.

    ``model="truncated"`` keeps |00> and |11> only and applies diag(sqrt(R), 1)
    to mode B; ``model="circuit"`` uses the full two-mode squeezed vacuum and
    the beam-splitter catalysis circuit.
    """
    if not 0 < t <= 1:
        raise SchemaError("amplitude transmissivity must lie in (0, 1]")
    if not 0 < reflectivity <= 1:
        raise SchemaError("reflectivity must lie in (0, 1]")
    if model == "truncated":
        lossless_ket = np.zeros((2, 2), complex)
        lossless_ket[0, 0], lossless_ket[1, 1] = 1.0, -r
        lossless = StateArray(lossless_ket / np.linalg.norm(lossless_ket), (1, 1), KET)
        lossy = truncated_lossy_epr(r, t)
        res = apply_operator(lossy, np.diag([np.sqrt(reflectivity), 1.0]), [1], "truncated NLA")
        out, prob, kind = res.state, res.probability, res.kind
    elif model == "circuit":
        lossless = _epr(r, cutoff)
        lossy = loss(lossless, 1, t ** 2)
        out, prob = catalysis_circuit(lossy, 1, reflectivity)
        kind = "probability"
    else:
        raise SchemaError("model must be 'truncated' or 'circuit'")
    rep = ProtocolReport("distill_by_nla", out, prob, kind,
                         params={"r": r, "t": t, "reflectivity": reflectivity, "model": model})
    rep.metrics.update(log_negativity=log_negativity(out, [0]),
                       log_negativity_lossless=log_negativity(lossless, [0]),
                       log_negativity_lossy=log_negativity(lossy, [0]),
                       effective_r=float(r * t / np.sqrt(reflectivity)))
    if model == "truncated":
        target = finalstate_matrix(r, t, reflectivity)
        rep.targets["closed_form"] = target
        rep.metrics["max_entry_deviation"] = float(np.max(np.abs(out.to_dm().data - target.data)))
        rep.add_target("closed_form", target)
    rep.extras["lossy_input"] = lossy
    return rep
