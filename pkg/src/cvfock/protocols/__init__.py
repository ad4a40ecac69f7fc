"""Named state-engineering experiments built from the core modules."""
from __future__ import annotations

import inspect

from ..conditional import DetectorModel
from ..errors import SchemaError
from ..specs import parse_state
from .amplifiers import (catalysis_circuit, catalysis_gain, catalysis_reflectivity, nla_catalysis, nla_gn,
                         nla_scissors, scissors_reflectivity)
from .distillation import distill_by_nla, distill_by_subtraction, finalstate_matrix, truncated_lossy_epr
from .gates import cat_phase_gate, coherent_components, kerr_pi_emulation
from .generators import breed_cats, cat_from_fock, etesse_superposition, gkp_breed, kitten_via_subtraction
from .hybrid import hybrid_dv_cv, polarization
from .report import ProtocolReport

REGISTRY = {f.__name__: f for f in (
    kitten_via_subtraction, cat_from_fock, etesse_superposition, breed_cats, gkp_breed,
    nla_scissors, nla_gn, nla_catalysis, distill_by_subtraction, distill_by_nla,
    hybrid_dv_cv, cat_phase_gate, kerr_pi_emulation)}


def run_protocol(name: str, params: dict | None = None, cutoff: int | None = None) -> ProtocolReport:
    """Run a registered protocol from JSON-style parameters.

    ``state_in`` may be a state description (see :mod:`cvfock.specs`) and
    ``detector`` a dict of DetectorModel fields; ``cutoff`` fills in a
    ``cutoff`` argument the call leaves unset.
    """
    if name not in REGISTRY:
        raise SchemaError(f"unknown protocol {name!r}; available: {sorted(REGISTRY)}")
    fn = REGISTRY[name]
    sig = inspect.signature(fn)
    kwargs = dict(params or {})
    unknown = set(kwargs) - set(sig.parameters)
    if unknown:
        raise SchemaError(f"{name}: unknown parameters {sorted(unknown)}; accepted: {list(sig.parameters)}")
    if "state_in" in kwargs:
        kwargs["state_in"] = parse_state(kwargs["state_in"], cutoff)
    if isinstance(kwargs.get("detector"), dict):
        kwargs["detector"] = DetectorModel(**kwargs["detector"])
    if cutoff is not None and "cutoff" in sig.parameters and "cutoff" not in kwargs:
        kwargs["cutoff"] = cutoff
    for key in ("transmissions", "qubit", "coefficients", "projection"):
        if isinstance(kwargs.get(key), list):
            kwargs[key] = tuple(kwargs[key])
    missing = [p.name for p in sig.parameters.values()
               if p.default is inspect.Parameter.empty and p.name not in kwargs]
    if missing:
        raise SchemaError(f"{name}: missing parameters {missing}")
    try:
        return fn(**kwargs)
    except TypeError as exc:
        raise SchemaError(f"{name}: {exc}") from None


__all__ = ["REGISTRY", "ProtocolReport", "run_protocol", "parse_state", *REGISTRY,
           "catalysis_circuit", "catalysis_gain", "catalysis_reflectivity", "scissors_reflectivity",
           "finalstate_matrix", "truncated_lossy_epr", "coherent_components", "polarization"]
