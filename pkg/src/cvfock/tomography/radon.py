"""Wigner function by filtered back-projection of homodyne histograms."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import SchemaError
from ..phase_space import WignerGrid, default_axis
from ._data import fold_phases, phase_groups, quadrature_arrays


def radon_kernel(u, cutoff_frequency: float) -> np.ndarray:
    """K(u) = integral_0^kc k cos(k u) dk = (cos(kc u) + kc u sin(kc u) - 1) / u^2."""
    u = np.asarray(u, float)
    kc = float(cutoff_frequency)
    small = np.abs(kc * u) < 1e-3
    safe = np.where(small, 1.0, u)
    z = kc * safe
    full = (np.cos(z) + z * np.sin(z) - 1) / safe ** 2
    # series: kc^2/2 - kc^4 u^2/8
    series = kc ** 2 / 2 - kc ** 4 * u ** 2 / 8
    return np.where(small, series, full)


class RadonTomography(BaseEstimator):
    """Inverse Radon transform of quadrature data onto a Wigner grid.

    W(x, p) = 1/(2 pi^2) int_0^pi dtheta int dx' pr_theta(x') K(x cos theta + p sin theta - x')

    with the band-limited kernel above.  For each phase group the data are
    histogrammed with width ``hist_width`` and filtered once on a fine 1D
    axis; the back-projection then interpolates this filtered projection.
    Phase groups are weighted equally (pi / number of groups), which assumes
    roughly uniform phase coverage.  The result is not constrained to be
    a physical Wigner function.

    Attributes after fit: ``grid_`` (WignerGrid), ``phases_``.
    """

    def __init__(self, cutoff_frequency: float = 5.0, x=None, p=None, hist_width: float = 0.02,
                 max_phase_groups: int = 64):
        self.cutoff_frequency = cutoff_frequency
        self.x = x
        self.p = p
        self.hist_width = hist_width
        self.max_phase_groups = max_phase_groups

    def fit(self, X, y=None):
        if self.cutoff_frequency <= 0 or self.hist_width <= 0:
            raise SchemaError("cutoff_frequency and hist_width must be positive")
        theta, xq = fold_phases(*quadrature_arrays(X))
        labels, phases, _ = phase_groups(theta, self.max_phase_groups)
        xs = default_axis() if self.x is None else np.asarray(self.x, float)
        ps = default_axis() if self.p is None else np.asarray(self.p, float)
        reach = np.hypot(np.max(np.abs(xs)), np.max(np.abs(ps)))
        lim = max(np.max(np.abs(xq)), reach) + self.hist_width
        nb = int(np.ceil(2 * lim / self.hist_width))
        edges = np.linspace(-lim, lim, nb + 1)
        centres = (edges[:-1] + edges[1:]) / 2
        # filtered projections are needed on |s| <= reach
        s_axis = np.arange(-reach - self.hist_width, reach + 2 * self.hist_width, self.hist_width / 2)
        kern = radon_kernel(np.subtract.outer(s_axis, centres), self.cutoff_frequency)
        XX, PP = np.meshgrid(xs, ps, indexing="ij")
        W = np.zeros(XX.shape)
        for j, th in enumerate(phases):
            sel = labels == j
            hist, _ = np.histogram(xq[sel], bins=edges)
            filtered = kern @ (hist / sel.sum())
            s = XX * np.cos(th) + PP * np.sin(th)
            W += np.interp(s, s_axis, filtered)
        W *= (np.pi / phases.size) / (2 * np.pi ** 2)
        self.grid_ = WignerGrid(xs, ps, W)
        self.phases_ = phases
        return self

    def transform(self, X=None):
        return self.grid_.values
