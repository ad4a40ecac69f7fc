"""Heralded non-Gaussian state generators: kittens, Fock-based cats, breeding."""
from __future__ import annotations

import numpy as np

from ..channels import beam_splitter
from ..conditional import (IDEAL_PNR, DetectorModel, homodyne_project, project_fock,
                           subtract_photon_ideal, subtract_photon_physical)
from ..core import tensor
from ..errors import SchemaError
from ..metrics import fidelity
from ..phase_space import marginal
from ..states import (make_cat, make_fock, make_squeezed_vacuum, make_superposition, make_vacuum,
                      poisson_cutoff)
from ._common import best_fit_cat, squeezed_cat, wigner_minimum
from .report import ProtocolReport

BALANCED = np.pi / 4


def kitten_via_subtraction(r: float, reflectivity: float | None = None,
                           detector: DetectorModel = IDEAL_PNR, n_subtractions: int = 1,
                           cutoff: int | None = None, fit_squeezing: bool = False) -> ProtocolReport:
    """Subtract photons from squeezed vacuum.

    ``reflectivity=None`` uses the ideal annihilation operator; otherwise each
    subtraction is a tap beam splitter plus ``detector``.  The output is
    compared with the best-fit cat of parity (-1)^n_subtractions.
    """
    if n_subtractions < 1:
        raise SchemaError("need at least one subtraction")
    st = make_squeezed_vacuum(r, cutoff=cutoff)
    if cutoff is None and st.cutoffs[0] < n_subtractions + 4:
        # weak squeezing: the automatic cutoff can be too small to subtract from
        st = make_squeezed_vacuum(r, cutoff=int(n_subtractions) + 4)
    prob = 1.0
    kind = "weight" if reflectivity is None else "probability"
    for _ in range(int(n_subtractions)):
        if reflectivity is None:
            res = subtract_photon_ideal(st, 0)
        else:
            res = subtract_photon_physical(st, 0, reflectivity, detector)
        st = res.state
        prob *= res.probability
    parity = (-1) ** int(n_subtractions)
    # an x-squeezed input is stretched along p, so the cat components lie on p
    fit = best_fit_cat(st, parity, squeeze=fit_squeezing, direction=np.pi / 2)
    rep = ProtocolReport("kitten_via_subtraction", st, prob, kind,
                         params={"r": r, "reflectivity": reflectivity, "n_subtractions": n_subtractions,
                                 "detector": detector.__dict__})
    rep.add_target("best_fit_cat", squeezed_cat(fit["alpha"], parity, fit["r"], direction=np.pi / 2))
    rep.metrics.update(best_fit_alpha=fit["alpha"], best_fit_r=fit["r"],
                       sqrt_3r=float(np.sqrt(3 * r)), wigner_min=wigner_minimum(st))
    if reflectivity is not None or not detector.ideal:
        ideal = kitten_via_subtraction(r, None, IDEAL_PNR, n_subtractions, cutoff, fit_squeezing)
        rep.metrics["fidelity_gap_vs_ideal"] = (ideal.metrics["fidelity_best_fit_cat"]
                                                - rep.metrics["fidelity_best_fit_cat"])
    return rep


def _split_fock(n: int):
    """|n> and vacuum on a balanced beam splitter."""
    return beam_splitter(tensor(make_fock(n, n), make_vacuum((n,))), 0, 1, BALANCED)


def cat_from_fock(n: int, epsilon: float = 0.0, nodes: int = 11) -> ProtocolReport:
    """Split |n> on a balanced beam splitter and herald on p ~ 0 in one arm.

    The target is a cat of amplitude sqrt(n) and parity (-1)^n, squeezed
    by 3 dB in x.
    """
    if n < 1:
        raise SchemaError("need n >= 1")
    res = homodyne_project(_split_fock(n), 1, np.pi / 2, 0.0, epsilon, nodes)
    rep = ProtocolReport("cat_from_fock", res.state, res.probability, res.kind,
                         params={"n": n, "epsilon": epsilon})
    rep.add_target("squeezed_cat", squeezed_cat(np.sqrt(n), (-1) ** n, np.log(2) / 2))
    rep.metrics["reference_trend"] = 1 - 0.028 / n
    return rep


def etesse_superposition(epsilon: float = 0.0, nodes: int = 11, cat_alpha: float = 1.63,
                         cat_squeezing: float = 1.52) -> ProtocolReport:
    """Two photons on a balanced beam splitter, then x ~ 0 on one arm.

    ``cat_squeezing`` is the factor e^r by which the comparison cat is
    squeezed along x.
    """
    pair = beam_splitter(tensor(make_fock(1, 2), make_fock(1, 2)), 0, 1, BALANCED)
    res = homodyne_project(pair, 1, 0.0, 0.0, epsilon, nodes)
    rep = ProtocolReport("etesse_superposition", res.state, res.probability, res.kind,
                         params={"epsilon": epsilon, "cat_alpha": cat_alpha, "cat_squeezing": cat_squeezing})
    rep.add_target("superposition", make_superposition([1, 0, np.sqrt(2)]))
    rep.add_target("squeezed_even_cat", squeezed_cat(cat_alpha, 1, np.log(cat_squeezing)))
    rep.metrics["marginal_density_at_zero"] = float(marginal(pair, 0.0, [0.0], mode=1)[0])
    rep.extras["two_mode_input"] = pair
    return rep


def _bred(alpha: float, parity: int, cutoff: int | None):
    N = cutoff or poisson_cutoff(2 * alpha ** 2, 1e-10, 8)
    cat = make_cat(alpha, 0.0 if parity == 1 else np.pi, N)
    return beam_splitter(tensor(cat, cat), 0, 1, BALANCED), N


def breed_cats(alpha: float, epsilon: float = 0.02, parity: int = -1, nodes: int = 11,
               cutoff: int | None = None) -> ProtocolReport:
    """Interfere two identical cats and herald on x ~ 0 in one output.

    Reports the homodyne-window probability and the ideal vacuum-herald
    probability <0|rho_2|0> of the measured arm, which tends to 1/2 for
    large amplitudes.
    """
    two, N = _bred(alpha, parity, cutoff)
    res = homodyne_project(two, 0, 0.0, 0.0, epsilon, nodes)
    rep = ProtocolReport("breed_cats", res.state, res.probability, res.kind,
                         params={"alpha": alpha, "epsilon": epsilon, "parity": parity, "cutoff": N})
    rep.add_target("bred_cat", make_cat(np.sqrt(2) * alpha, 0.0, N))
    vac = project_fock(two, 0, 0)
    rep.metrics["vacuum_herald_probability"] = vac.probability
    rep.metrics["fidelity_vacuum_herald"] = fidelity(vac.state, rep.targets["bred_cat"])
    fit = best_fit_cat(res.state, 1, squeeze=True)
    rep.metrics.update(best_fit_alpha=fit["alpha"], best_fit_r=fit["r"], best_fit_fidelity=fit["fidelity"])
    return rep


def gkp_breed(alpha: float, epsilon: float = 0.02, parity: int = 1, nodes: int = 11,
              cutoff: int | None = None) -> ProtocolReport:
    """Interfere two cats and herald on p ~ 0: a three-peaked grid-like state."""
    two, N = _bred(alpha, parity, cutoff)
    res = homodyne_project(two, 0, np.pi / 2, 0.0, epsilon, nodes)
    x = np.linspace(-4 * alpha - 4, 4 * alpha + 4, 2001)
    pr = marginal(res.state, 0.0, x)
    interior = pr[1:-1]
    peaks = np.nonzero((interior > pr[:-2]) & (interior > pr[2:]) & (interior > 1e-3 * pr.max()))[0] + 1
    rep = ProtocolReport("gkp_breed", res.state, res.probability, res.kind,
                         params={"alpha": alpha, "epsilon": epsilon, "parity": parity, "cutoff": N})
    rep.metrics.update(x_marginal_peaks=int(peaks.size), peak_positions=x[peaks].tolist(),
                       wigner_min=wigner_minimum(res.state, extent=2 * alpha + 3))
    return rep
