"""Heralded gates on cat qubits and low-photon superpositions."""
from __future__ import annotations

import numpy as np

from ..channels import displace
from ..conditional import IDEAL_PNR, DetectorModel, apply_operator, subtract_photon_ideal, subtract_photon_physical
from ..core import KET, StateArray
from ..errors import SchemaError
from ..states import coherent_amplitudes, poisson_cutoff
from .report import ProtocolReport

KERR_G = -(1 + np.sqrt(2))


def _wrap(phase: float) -> float:
    return float(np.angle(np.exp(1j * phase)))


def coherent_components(state: StateArray, alpha: complex) -> tuple[complex, complex]:
    """Least-squares coefficients (u, v) of state ~ u|alpha> + v|-alpha>."""
    N = state.cutoffs[0]
    basis = np.column_stack([coherent_amplitudes(alpha, N), coherent_amplitudes(-alpha, N)])
    gram = basis.conj().T @ basis
    u, v = np.linalg.solve(gram, basis.conj().T @ state.vector)
    return complex(u), complex(v)


def cat_phase_gate(qubit, alpha: float, beta: float, reflectivity: float | None = None,
                   detector: DetectorModel = IDEAL_PNR, cutoff: int | None = None) -> ProtocolReport:
    """Displace by i beta, subtract a photon, displace back.

    ``qubit`` = (c_plus, c_minus) are the amplitudes on |alpha> and |-alpha>.
    The operator a + i beta multiplies the two components by alpha + i beta
    and -alpha + i beta, so their relative phase moves by
    arg[(-alpha + i beta)/(alpha + i beta)].
    """
    c = np.asarray(qubit, complex)
    if c.shape != (2,) or not np.any(c):
        raise SchemaError("qubit must be two amplitudes, not both zero")
    N = cutoff or poisson_cutoff((abs(alpha) + abs(beta)) ** 2, 1e-14, 8) + 4
    basis = np.column_stack([coherent_amplitudes(alpha, N), coherent_amplitudes(-alpha, N)])
    vec = basis @ c
    psi = StateArray(vec / np.linalg.norm(vec), (N,), KET)
    work = displace(psi, 0, 1j * beta)
    if reflectivity is None:
        res = subtract_photon_ideal(work, 0)
    else:
        res = subtract_photon_physical(work, 0, reflectivity, detector)
    out = displace(res.state, 0, -1j * beta)
    k = np.array([alpha + 1j * beta, -alpha + 1j * beta])
    ideal = basis @ (c * k)
    rep = ProtocolReport("cat_phase_gate", out, res.probability, res.kind,
                         params={"qubit": c.tolist(), "alpha": alpha, "beta": beta,
                                 "reflectivity": reflectivity})
    rep.add_target("ideal", StateArray(ideal / np.linalg.norm(ideal), (N,), KET))
    predicted = _wrap(np.angle(k[1] / k[0]))
    rep.metrics["phase_predicted"] = predicted
    if out.is_ket and np.all(c != 0):
        u, v = coherent_components(out, alpha)
        rep.metrics["phase_measured"] = _wrap(np.angle(v / u) - np.angle(c[1] / c[0]))
        rep.metrics["phase_error"] = abs(_wrap(rep.metrics["phase_measured"] - predicted))
    return rep


def kerr_pi_emulation(coefficients) -> ProtocolReport:
    """Flip the sign of the |2> amplitude of c0|0> + c1|1> + c2|2>.

    Applies -(2 + sqrt 2) n + 1, which maps (c0, c1, c2) to
    (c0, g c1, -g^2 c2) with g = -(1 + sqrt 2), then removes the gain
    with g^{-n}.
    """
    c = np.zeros(3, complex)
    given = np.asarray(coefficients, complex).ravel()
    if given.size == 0 or given.size > 3 or not np.any(given):
        raise SchemaError("need one to three Fock amplitudes, not all zero")
    c[: given.size] = given
    c /= np.linalg.norm(c)
    psi = StateArray(c, (2,), KET)
    n = np.arange(3)
    first = apply_operator(psi, np.diag(-(2 + np.sqrt(2)) * n + 1), [0], "Kerr emulation operator")
    second = apply_operator(first.state, np.diag(KERR_G ** (-n.astype(float))), [0], "inverse gain")
    rep = ProtocolReport("kerr_pi_emulation", second.state, first.probability * second.probability, "weight",
                         params={"coefficients": c.tolist()})
    rep.add_target("sign_flipped", StateArray(c * np.array([1, 1, -1]), (2,), KET))
    rep.extras["after_first_operator"] = first.state
    return rep
