"""Targets and figures of merit shared by the protocols."""
from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from ..channels import single_mode_squeeze
from ..errors import CutoffInsufficient, UndefinedQuantity
from ..core import StateArray, annihilation, embed, expect, partial_trace
from ..metrics import fidelity, quadrature_moments
from ..phase_space import wigner
from ..states import make_cat

CAT_CUTOFF = 40


def parity_phase(parity: int) -> float:
    """Cat phase for parity +1 (even) or -1 (odd)."""
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    return 0.0 if parity == 1 else np.pi


def squeezed_cat(alpha: float, parity: int, r: float = 0.0, cutoff: int = CAT_CUTOFF,
                 direction: float = 0.0) -> StateArray:
    """S(r) applied to the cat |a> + parity |-a>, a = alpha e^{i direction}.

    r > 0 squeezes x; direction = pi/2 lays the two components along p.
    """
    cat = make_cat(alpha * np.exp(1j * direction), parity_phase(parity), cutoff)
    if r == 0:
        return cat
    return single_mode_squeeze(cat, 0, r)


def _single(state: StateArray, mode: int = 0) -> StateArray:
    return state if state.n_modes == 1 else partial_trace(state, [mode])


def best_fit_cat(state: StateArray, parity: int, squeeze: bool = False, alpha_max: float = 4.0,
                 r_max: float = 1.0, cutoff: int = CAT_CUTOFF, direction: float = 0.0) -> dict:
    """Maximize fidelity with a (squeezed) cat over the amplitude.

    Bounded scalar search (golden-section steps with parabolic
    interpolation); with ``squeeze`` the squeezing is optimized in an outer
    search of the same kind.  Candidates that do not fit in ``cutoff``
    score zero.
    """
    st = _single(state)

    def score(a, r):
        try:
            return fidelity(st, squeezed_cat(a, parity, r, cutoff, direction))
        except CutoffInsufficient:
            return 0.0

    def best_alpha(r):
        res = minimize_scalar(lambda a: -score(a, r),
                              bounds=(1e-3, alpha_max), method="bounded",
                              options={"xatol": 1e-6})
        return res.x, -res.fun

    if not squeeze:
        a, f = best_alpha(0.0)
        return {"alpha": float(a), "r": 0.0, "fidelity": float(f)}
    outer = minimize_scalar(lambda r: -best_alpha(r)[1], bounds=(-r_max, r_max), method="bounded",
                            options={"xatol": 1e-5})
    a, f = best_alpha(outer.x)
    return {"alpha": float(a), "r": float(outer.x), "fidelity": float(f)}


def mean_amplitude(state: StateArray, mode: int = 0) -> complex:
    return complex(expect(state, annihilation(state.cutoffs[mode]), [mode]))


def effective_gain(state_in: StateArray, state_out: StateArray) -> float:
    """<x_out> / <x_in>, both measured along the direction of the input amplitude."""
    a_in = mean_amplitude(state_in)
    if abs(a_in) < 1e-300:
        raise UndefinedQuantity("effective gain needs an input with nonzero mean amplitude")
    return float(np.real(mean_amplitude(state_out) * np.conj(a_in)) / abs(a_in) ** 2)


def equivalent_input_noise(state_in: StateArray, state_out: StateArray, gain: float,
                           n_angles: int = 24) -> dict:
    """N_eq(theta) = Var_out(x_theta) / g_eff - Var_in(x_theta) over quadrature angles.

    Returns the mean, minimum and maximum over ``n_angles`` angles in [0, pi).
    """
    th = np.arange(n_angles) * np.pi / n_angles
    vals = np.array([quadrature_moments(state_out, 0, t)[1] / gain - quadrature_moments(state_in, 0, t)[1]
                     for t in th])
    return {"mean": float(vals.mean()), "min": float(vals.min()), "max": float(vals.max())}


def wigner_minimum(state: StateArray, extent: float = 5.0, points: int = 101) -> float:
    ax = np.linspace(-extent, extent, points)
    return float(wigner(_single(state), ax, ax).values.min())


def padded(state: StateArray, cutoff: int) -> StateArray:
    return embed(state, (max(cutoff, state.cutoffs[0]),))

