"""Compact text and JSON descriptions of states, used by configs and the CLI.

Text form ``kind:arg1,arg2`` (complex numbers in Python syntax, e.g. ``0.3+0.1j``):

    vacuum                  fock:n                coherent:alpha
    squeezed:r[,phi]        cat:alpha[,even|odd|theta]
    thermal:nbar            superposition:c0,c1,...   epr:r

A dict ``{"kind": ..., <parameters>}`` or ``{"file": path}`` (a saved
StateArray JSON document) is also accepted.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import StateArray, embed
from .errors import SchemaError
from .states import (make_cat, make_coherent, make_epr, make_fock, make_squeezed_vacuum,
                     make_superposition, make_thermal, make_vacuum)

STATE_KINDS = ("vacuum", "fock", "coherent", "squeezed", "cat", "thermal", "superposition", "epr")


def _number(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", ""))
    except ValueError:
        raise SchemaError(f"not a number: {text!r}") from None


def _real(v) -> float:
    v = complex(v)
    if v.imag != 0:
        raise SchemaError(f"expected a real number, got {v}")
    return v.real


def _cat_phase(arg) -> float:
    if isinstance(arg, str) and arg.strip() in ("even", "odd"):
        return 0.0 if arg.strip() == "even" else np.pi
    return _real(_number(arg) if isinstance(arg, str) else arg)


def _from_text(spec: str) -> dict:
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    args = [a for a in rest.split(",") if a.strip()] if rest else []
    keys = {"vacuum": [], "fock": ["n"], "coherent": ["alpha"], "squeezed": ["r", "phi"],
            "cat": ["alpha", "theta"], "thermal": ["nbar"], "epr": ["r"]}
    if kind == "superposition":
        return {"kind": kind, "coefficients": [_number(a) for a in args]}
    if kind not in keys:
        raise SchemaError(f"unknown state kind {kind!r}; expected one of {STATE_KINDS}")
    if len(args) > len(keys[kind]):
        raise SchemaError(f"too many arguments for {kind}")
    doc = {"kind": kind}
    for k, a in zip(keys[kind], args):
        doc[k] = a.strip() if (kind, k) == ("cat", "theta") and a.strip() in ("even", "odd") else _number(a)
    return doc


def parse_state(spec, cutoff: int | None = None) -> StateArray:
    """Build a StateArray from a text or dict description."""
    if isinstance(spec, StateArray):
        return spec
    if isinstance(spec, str):
        doc = _from_text(spec)
    elif isinstance(spec, dict):
        doc = dict(spec)
    else:
        raise SchemaError(f"cannot interpret state description {spec!r}")
    if "file" in doc:
        path = Path(doc["file"])
        if not path.exists():
            raise SchemaError(f"state file {path} not found")
        return StateArray.from_json(path)
    kind = doc.get("kind")
    try:
        if kind == "vacuum":
            return make_vacuum((cutoff or 0,))
        if kind == "fock":
            n = int(_real(doc["n"]))
            return make_fock(n, cutoff if cutoff is not None else n)
        if kind == "coherent":
            return make_coherent(complex(doc["alpha"]), cutoff)
        if kind == "squeezed":
            return make_squeezed_vacuum(_real(doc["r"]), _real(doc.get("phi", 0.0)), cutoff)
        if kind == "cat":
            return make_cat(complex(doc["alpha"]), _cat_phase(doc.get("theta", 0.0)), cutoff)
        if kind == "thermal":
            return make_thermal(_real(doc["nbar"]), cutoff)
        if kind == "epr":
            return make_epr(_real(doc["r"]), cutoff)
        if kind == "superposition":
            st = make_superposition([complex(c) for c in doc["coefficients"]])
            if cutoff is not None and cutoff > st.cutoffs[0]:
                st = embed(st, (cutoff,))
            return st
    except KeyError as exc:
        raise SchemaError(f"state {kind!r} is missing parameter {exc.args[0]!r}") from None
    raise SchemaError(f"unknown state kind {kind!r}; expected one of {STATE_KINDS}")
