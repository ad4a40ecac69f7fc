"""Noiseless linear amplifiers: quantum scissors, g^n, and photon catalysis."""
from __future__ import annotations

import numpy as np

from ..channels import beam_splitter, displace, enlarge, phase_rotate, tau_from_reflectivity
from ..conditional import apply_operator, operator_superpose, project_fock
from ..core import StateArray, check_modes, permute_modes, tensor
from ..errors import CutoffInsufficient, SchemaError
from ..states import make_coherent, make_fock, make_vacuum
from ._common import effective_gain, equivalent_input_noise, mean_amplitude
from .report import ProtocolReport

HERALDS = ("01", "10", "both")


def _single_mode(state: StateArray, what: str) -> None:
    if state.n_modes != 1:
        raise SchemaError(f"{what} expects a single-mode input")


def _amplifier_metrics(rep: ProtocolReport, state_in: StateArray, nominal_gain: float) -> None:
    """Effective gain, equivalent input noise and the |g <a>> comparison."""
    a_in = mean_amplitude(state_in)
    if abs(a_in) < 1e-12:
        return
    g = effective_gain(state_in, rep.state)
    neq = equivalent_input_noise(state_in, rep.state, g)
    rep.metrics.update(effective_gain=g, equivalent_input_noise=neq["mean"],
                       equivalent_input_noise_min=neq["min"], equivalent_input_noise_max=neq["max"])
    rep.add_target("amplified_coherent", make_coherent(nominal_gain * a_in))


def scissors_reflectivity(gain: float) -> float:
    """Resource beam-splitter reflectivity for gain t/r = g."""
    if gain <= 0:
        raise SchemaError("gain must be positive")
    return gain ** 2 / (1 + gain ** 2)


def nla_scissors(state_in: StateArray, gain: float, herald: str = "both") -> ProtocolReport:
    """Asymmetric quantum scissors, simulated as an optical circuit.

    A single photon split on a beam splitter of reflectivity g^2/(1+g^2)
    forms the resource; one resource arm and the input meet on a balanced
    beam splitter whose ports are photon-counted.  ``herald`` selects the
    accepted pattern: ``"01"``, ``"10"`` (corrected by a pi phase flip), or
    ``"both"``.
    """
    _single_mode(state_in, "nla_scissors")
    if herald not in HERALDS:
        raise SchemaError(f"herald must be one of {HERALDS}")
    R = scissors_reflectivity(gain)
    resource = beam_splitter(tensor(make_fock(1, 1), make_vacuum((1,))), 0, 1, tau_from_reflectivity(R))
    N = state_in.cutoffs[0]
    # both Bell ports need room for the input photons plus the resource photon
    big = enlarge(enlarge(tensor(state_in, resource), 0, N + 1), 1, N + 1)
    big = beam_splitter(big, 0, 1, np.pi / 4)
    branches = {}
    for pattern in ("01", "10"):
        if herald not in (pattern, "both"):
            continue
        first = project_fock(big, 0, int(pattern[0]))
        second = project_fock(first.state, 0, int(pattern[1]))
        out = second.state if pattern == "01" else phase_rotate(second.state, 0, np.pi)
        branches[pattern] = (out, first.probability * second.probability)
    out, _ = branches.get("01", branches.get("10"))
    prob = sum(p for _, p in branches.values())
    rep = ProtocolReport("nla_scissors", out, prob, "probability",
                         params={"gain": gain, "herald": herald, "resource_reflectivity": R})
    keep = np.zeros(N + 1)
    keep[:2] = [1.0, gain][: N + 1]
    trunc = apply_operator(state_in, np.diag(keep), [0], "scissors target", out_cutoffs=[min(N, 1)])
    rep.add_target("truncated", trunc.state)
    _amplifier_metrics(rep, state_in, gain)
    return rep


def _check_tail(state: StateArray, what: str, levels: int = 2) -> None:
    p = state.fock_distribution(0)
    tail = p[-levels:].sum() / p.sum()
    if tail > 1e-6:
        raise CutoffInsufficient(f"{what}: {tail:.3g} of the output weight sits in the top "
                                 f"{levels} levels; raise the input cutoff", leakage=tail)


def nla_gn(state_in: StateArray, gain: float, order=1) -> ProtocolReport:
    """Apply (g-1) n + 1 (``order=1``) or g^n (``order="exact"``) and renormalize.

    For g = 2 the first-order operator is a a^dag.  The exact operator
    multiplies level n by g^n, so the input cutoff must hold the amplified
    state; this is checked on the output.
    """
    _single_mode(state_in, "nla_gn")
    N = state_in.cutoffs[0]
    n = np.arange(N + 1)
    if order == 1:
        op = np.diag((gain - 1) * n + 1.0)
    elif order in ("exact", "inf", np.inf):
        op = np.diag(float(gain) ** n)
        order = "exact"
    else:
        raise SchemaError("order must be 1 or 'exact'")
    res = apply_operator(state_in, op, [0], f"nla_gn(order={order})")
    if order == "exact" and gain > 1:
        _check_tail(res.state, "nla_gn")
    rep = ProtocolReport("nla_gn", res.state, res.probability, res.kind,
                         params={"gain": gain, "order": order})
    _amplifier_metrics(rep, state_in, gain)
    return rep


def catalysis_gain(reflectivity: float) -> float:
    """Gain (1 - R)/sqrt(R) of the catalysis circuit with respect to its coherent input."""
    return (1 - reflectivity) / np.sqrt(reflectivity)


def catalysis_reflectivity(gain: float) -> float:
    """Reflectivity R with (1 - R)/sqrt(R) = gain."""
    if gain <= 0:
        raise SchemaError("gain must be positive")
    s = (-gain + np.sqrt(gain ** 2 + 4)) / 2
    return float(s ** 2)


def catalysis_circuit(state: StateArray, mode: int, reflectivity: float,
                      correction: complex = 0.0) -> tuple[StateArray, float]:
    """Run ``mode`` through the catalysis amplifier; returns (state, probability).

    The mode meets a single photon on a beam splitter of reflectivity R and
    one photon is detected in its own output port; the photon's port then
    takes the place of ``mode``, displaced by ``correction`` and phase
    shifted by pi.
    """
    (mode,) = check_modes(state, [mode])
    N = state.cutoffs[mode]
    big = enlarge(tensor(state, make_fock(1, N + 1)), mode, N + 1)
    anc = big.n_modes - 1
    big = beam_splitter(big, mode, anc, tau_from_reflectivity(reflectivity))
    res = project_fock(big, mode, 1)
    out = res.state
    if correction != 0:
        out = displace(out, out.n_modes - 1, correction)
    out = phase_rotate(out, out.n_modes - 1, np.pi)
    order = list(range(out.n_modes - 1))
    order.insert(mode, out.n_modes - 1)
    return permute_modes(out, order), res.probability


def nla_catalysis(state_in: StateArray, reflectivity: float, feed_forward: bool = True,
                  level: str = "circuit") -> ProtocolReport:
    """Photon catalysis amplifier.

    ``level="operator"`` applies (sqrt(R) a + alpha) to |1>, with alpha the
    input mean amplitude.  ``level="circuit"`` mixes the input with a single
    photon on a beam splitter of reflectivity R, heralds one photon in the
    input port and, with ``feed_forward``, undoes the residual displacement
    -sqrt(R) alpha; a pi phase shift on the output cancels the sign the
    beam splitter puts on the single-photon term.  The circuit realizes the operator form with amplitude
    t^2 alpha, which is its reported target.
    """
    _single_mode(state_in, "nla_catalysis")
    if not 0 < reflectivity <= 1:
        raise SchemaError("reflectivity must lie in (0, 1]")
    alpha = mean_amplitude(state_in)
    N = state_in.cutoffs[0]
    sqR = np.sqrt(reflectivity)
    t2 = 1 - reflectivity
    if level == "operator":
        res = operator_superpose(make_fock(1, max(N, 1)), 0, "a", sqR, alpha)
        rep = ProtocolReport("nla_catalysis", res.state, res.probability, res.kind,
                             params={"reflectivity": reflectivity, "level": level})
        _amplifier_metrics(rep, state_in, 1 / sqR)
        return rep
    if level != "circuit":
        raise SchemaError("level must be 'circuit' or 'operator'")
    out, prob = catalysis_circuit(state_in, 0, reflectivity,
                                  -sqR * alpha if feed_forward else 0.0)
    rep = ProtocolReport("nla_catalysis", out, prob, "probability",
                         params={"reflectivity": reflectivity, "level": level, "feed_forward": feed_forward})
    rep.add_target("operator", operator_superpose(make_fock(1, N + 1), 0, "a", sqR, t2 * alpha).state)
    _amplifier_metrics(rep, state_in, catalysis_gain(reflectivity))
    return rep
