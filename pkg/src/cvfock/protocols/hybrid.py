"""Polarization-qubit / cat-qubit entanglement by tapping a squeezed vacuum."""
from __future__ import annotations

import numpy as np

from ..channels import beam_splitter, tau_from_reflectivity
from ..conditional import project_state
from ..core import DM, StateArray, tensor
from ..errors import ImprobableEvent, SchemaError
from ..states import make_coherent, make_squeezed_vacuum, make_vacuum
from ._common import best_fit_cat, wigner_minimum
from .report import ProtocolReport

_S = 1 / np.sqrt(2)
POLARIZATIONS = {"H": (1, 0), "V": (0, 1), "D": (_S, _S), "A": (_S, -_S),
                 "R": (_S, 1j * _S), "L": (_S, -1j * _S)}


def polarization(spec) -> tuple[complex, complex]:
    """(c_H, c_V) from a name in POLARIZATIONS or Bloch angles (theta, phi)."""
    if isinstance(spec, str):
        if spec not in POLARIZATIONS:
            raise SchemaError(f"unknown polarization {spec!r}; use one of {sorted(POLARIZATIONS)} or (theta, phi)")
        return POLARIZATIONS[spec]
    theta, phi = spec
    return np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)


def _photon_ket(c_h, c_v, cut_va: int, cut_ha: int) -> np.ndarray:
    """One photon in spatial mode A: c_H |0>_VA |1>_HA + c_V |1>_VA |0>_HA."""
    ket = np.zeros((cut_va + 1, cut_ha + 1), complex)
    ket[0, 1] = c_h
    ket[1, 0] = c_v
    return ket


def hybrid_dv_cv(r: float, reflectivity: float, alpha: complex, projection="H",
                 cutoff: int | None = None) -> ProtocolReport:
    """Tap a vertically polarized squeezed vacuum into mode A, which also carries a
    horizontally polarized coherent state, and detect one photon in A with
    polarization ``projection``.

    Modes: 0 = VC (signal), 1 = VA (tap), 2 = HA (coherent injection).  The
    H and V branches approximate even and odd cats in mode C; both are kept
    in ``extras`` and fitted.
    """
    if not 0 < reflectivity < 1:
        raise SchemaError("tap reflectivity must lie strictly between 0 and 1")
    sq = make_squeezed_vacuum(r, cutoff=cutoff)
    N = sq.cutoffs[0]
    coh = make_coherent(alpha, max(2, make_coherent(alpha).cutoffs[0]))
    st = tensor(sq, make_vacuum((N,)), coh)
    st = beam_splitter(st, 0, 1, tau_from_reflectivity(reflectivity))
    cut_va, cut_ha = st.cutoffs[1], st.cutoffs[2]

    def branch(c_h, c_v):
        return project_state(st, [1, 2], _photon_ket(c_h, c_v, cut_va, cut_ha))

    if projection == "any":
        parts = []
        for name in ("H", "V"):
            try:
                parts.append(branch(*POLARIZATIONS[name]))
            except ImprobableEvent:  # an absent branch contributes nothing
                pass
        prob = sum(p.probability for p in parts)
        rho = sum(p.probability * p.state.to_dm().data for p in parts) / prob
        out = StateArray(rho, parts[0].state.cutoffs, DM)
    else:
        res = branch(*polarization(projection))
        out, prob = res.state, res.probability
    rep = ProtocolReport("hybrid_dv_cv", out, prob, "probability",
                         params={"r": r, "reflectivity": reflectivity, "alpha": alpha,
                                 "projection": projection if isinstance(projection, str) else list(projection)})
    rep.metrics["wigner_min"] = wigner_minimum(out)
    rep.metrics["purity"] = float(np.real(np.trace(out.to_dm().matrix @ out.to_dm().matrix)))
    for name, parity in (("H", 1), ("V", -1)):
        try:
            b = branch(*POLARIZATIONS[name])
        except ImprobableEvent:
            rep.metrics[f"probability_{name}"] = 0.0
            continue
        fit = best_fit_cat(b.state, parity, direction=np.pi / 2)
        rep.extras[f"branch_{name}"] = b.state
        rep.metrics.update({f"probability_{name}": b.probability,
                            f"best_fit_alpha_{name}": fit["alpha"],
                            f"fidelity_cat_{name}": fit["fidelity"]})
    return rep
