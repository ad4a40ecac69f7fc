"""State and process reconstruction from homodyne data."""
from .estimation import Fock1MomentEstimator, bootstrap, fock1_from_moments, fock1_model_moments
from .maxlik import MaxLikConvergenceWarning, MaxLikTomography
from .qpt import ProcessTensor, csqpt
from .radon import RadonTomography, radon_kernel

__all__ = [
    "Fock1MomentEstimator", "MaxLikConvergenceWarning", "MaxLikTomography", "ProcessTensor",
    "RadonTomography", "bootstrap", "csqpt", "fock1_from_moments", "fock1_model_moments",
    "radon_kernel",
]
