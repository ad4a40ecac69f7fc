"""Bundled sample data: homodyne samples of a lossy photon-subtracted squeezed vacuum."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .conditional import subtract_photon_ideal
from .homodyne import ImperfectionModel, PhaseSchedule, QuadratureDataset, sample_quadratures
from .states import make_squeezed_vacuum

SAMPLE_NAME = "kitten_eta08.csv"
SAMPLE_PARAMS = {"r": 0.43, "efficiency": 0.8, "n_samples": 50_000, "n_phases": 12, "seed": 2024}


def kitten_truth(r: float = SAMPLE_PARAMS["r"]):
    """The state before detection loss: a single photon subtracted from S(r)|0>."""
    return subtract_photon_ideal(make_squeezed_vacuum(r), 0).state


def make_kitten_dataset(r: float = SAMPLE_PARAMS["r"], efficiency: float = SAMPLE_PARAMS["efficiency"],
                        n_samples: int = SAMPLE_PARAMS["n_samples"], n_phases: int = SAMPLE_PARAMS["n_phases"],
                        seed: int = SAMPLE_PARAMS["seed"], decimals: int = 6) -> QuadratureDataset:
    truth = kitten_truth(r)
    data = sample_quadratures(truth, PhaseSchedule("swept", n_phases), n_samples,
                              ImperfectionModel(efficiency=efficiency), seed=seed)
    data.x = np.round(data.x, decimals)
    data.metadata.update(description="photon-subtracted squeezed vacuum seen with lossy homodyne detection",
                         squeezing_r=r, true_state=truth.to_dict())
    return data


def sample_dataset_path() -> Path:
    return Path(str(resources.files("cvfock") / "data" / SAMPLE_NAME))


def load_sample_dataset() -> QuadratureDataset:
    return QuadratureDataset.from_csv(sample_dataset_path())


if __name__ == "__main__":
    make_kitten_dataset().to_csv(sample_dataset_path())
