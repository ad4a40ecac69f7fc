"""Protocol result container."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..core import StateArray
from ..metrics import fidelity


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


@dataclass
class ProtocolReport:
    """Outcome of a protocol run.

    ``targets`` holds the reference states behind every ``fidelity_<name>``
    metric, so each fidelity can be recomputed from ``state`` alone;
    ``extras`` holds auxiliary named states (other heralding branches,
    intermediate states).
    """

    protocol: str
    state: StateArray
    probability: float
    probability_kind: str
    metrics: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    targets: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def add_target(self, name: str, target: StateArray, state: StateArray | None = None) -> float:
        f = fidelity(self.state if state is None else state, target)
        self.targets[name] = target
        self.metrics[f"fidelity_{name}"] = f
        return f

    def recompute_fidelity(self, name: str) -> float:
        return fidelity(self.state, self.targets[name])

    def to_dict(self, include_states: bool = True) -> dict:
        doc = {"version": __version__, "protocol": self.protocol,
               "params": _plain(self.params), "probability": float(self.probability),
               "probability_kind": self.probability_kind, "metrics": _plain(self.metrics)}
        if include_states:
            doc["state"] = self.state.to_dict()
            doc["targets"] = {k: v.to_dict() for k, v in self.targets.items()}
            doc["extras"] = {k: v.to_dict() for k, v in self.extras.items()}
        return doc

    def to_json(self, path=None, indent: int | None = 2, include_states: bool = True) -> str:
        text = json.dumps(self.to_dict(include_states), indent=indent, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text
