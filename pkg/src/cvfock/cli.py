"""Command-line runner.

Every command prints one JSON document on stdout and, with ``--out-dir``,
writes its artifacts there.  Exit codes: 0 success, 2 invalid input
(schema), 3 numerical failure inside a module.  Errors are reported as a
JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from ._config import set_leakage_tolerance
from .channels import loss
from .conditional import add_photon_ideal, subtract_photon_ideal
from .core import StateArray
from .errors import NUMERICAL_ERRORS, SchemaError
from .homodyne import ImperfectionModel, PhaseSchedule, QuadratureDataset, sample_quadratures
from .metrics import fidelity, mean_photon
from .phase_space import WignerGrid, default_axis, wigner
from .protocols import REGISTRY, run_protocol
from .specs import parse_state
from .datasets import sample_dataset_path
from .tomography import Fock1MomentEstimator, MaxLikTomography, RadonTomography, csqpt

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERICAL = 0, 2, 3
TOMO_METHODS = ("maxlik", "radon", "fock1")
PROCESSES = ("identity", "loss", "subtract", "add")

_state_ref = {"oneOf": [{"type": "string"}, {"type": "object"}]}
_number = {"type": "number"}
_pos_int = {"type": "integer", "minimum": 1}

OP_SCHEMAS = {
    "state": {"type": "object", "required": ["state"], "additionalProperties": False,
              "properties": {"state": _state_ref}},
    "wigner": {"type": "object", "required": ["state"], "additionalProperties": False,
               "properties": {"state": _state_ref, "extent": {"type": "number", "exclusiveMinimum": 0},
                              "points": {"type": "integer", "minimum": 2}, "mode": {"type": "integer", "minimum": 0}}},
    "sample": {"type": "object", "required": ["state", "n"], "additionalProperties": False,
               "properties": {"state": _state_ref, "n": _pos_int,
                              "schedule": {"enum": ["fixed", "swept", "uniform"]},
                              "n_phases": _pos_int, "phases": {"type": "array", "items": _number},
                              "efficiency": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                              "electronic_noise": {"type": "number", "minimum": 0}}},
    "tomo": {"type": "object", "required": ["method"], "additionalProperties": False,
             "properties": {"method": {"enum": list(TOMO_METHODS)}, "data": {"type": "string"},
                            "eta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                            "cutoff": _pos_int, "max_iter": _pos_int, "tol": {"type": "number", "exclusiveMinimum": 0},
                            "cutoff_frequency": {"type": "number", "exclusiveMinimum": 0},
                            "truth": _state_ref}},
    "protocol": {"type": "object", "required": ["name"], "additionalProperties": False,
                 "properties": {"name": {"enum": sorted(REGISTRY)}, "params": {"type": "object"}}},
    "qpt": {"type": "object", "required": ["process"], "additionalProperties": False,
            "properties": {"process": {"enum": list(PROCESSES)}, "cutoff": _pos_int,
                           "eta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}}},
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["pipeline"],
    "additionalProperties": False,
    "properties": {
        "version": {"type": "string"},
        "seed": {"type": ["integer", "null"], "minimum": 0},
        "cutoff": {"type": "integer", "minimum": 0},
        "leakage_tolerance": {"type": "number", "minimum": 0},
        "out_dir": {"type": "string"},
        "pipeline": {
            "type": "array", "minItems": 1,
            "items": {"type": "object", "required": ["op"], "additionalProperties": False,
                      "properties": {"op": {"enum": sorted(OP_SCHEMAS)}, "name": {"type": "string"},
                                     "params": {"type": "object"}}},
        },
    },
}


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

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


def _dump(doc: dict) -> str:
    doc = {"version": __version__, **_plain(doc)}
    return json.dumps(doc, indent=2, sort_keys=True)


def _write(path: Path, text: str) -> str:
    """Write ``text``; returns the file name, which is what reports record."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + ("\n" if not text.endswith("\n") else ""))
    return path.name


def _step_seed(seed: int | None, index: int) -> int | None:
    if seed is None:
        return None
    return int(np.random.SeedSequence([int(seed), index]).generate_state(1)[0])


def state_summary(state: StateArray) -> dict:
    check = state.validate()
    doc = {"cutoffs": list(state.cutoffs), "kind": state.kind, "purity": state.purity(),
           "validation": check}
    if state.n_modes == 1:
        doc["mean_photon"] = mean_photon(state)
        doc["fock_distribution"] = state.fock_distribution(0).tolist()
    else:
        doc["mean_photon"] = [mean_photon(state, m) for m in range(state.n_modes)]
    return doc


# ---------------------------------------------------------------------------
# operations shared by subcommands and pipelines
# ---------------------------------------------------------------------------

class Context:
    """Named intermediate results of a pipeline (states and datasets)."""

    def __init__(self, cutoff: int | None, seed: int | None):
        self.cutoff = cutoff
        self.seed = seed
        self.states: dict[str, StateArray] = {}
        self.datasets: dict[str, QuadratureDataset] = {}

    def state(self, ref) -> StateArray:
        if isinstance(ref, str) and ref.startswith("@"):
            key = ref[1:]
            if key not in self.states:
                raise SchemaError(f"no earlier step produced a state named {key!r}")
            return self.states[key]
        return parse_state(ref, self.cutoff)

    def dataset(self, ref: str | None) -> QuadratureDataset:
        if ref is None:
            return QuadratureDataset.from_csv(sample_dataset_path())
        if ref.startswith("@"):
            key = ref[1:]
            if key not in self.datasets:
                raise SchemaError(f"no earlier step produced a dataset named {key!r}")
            return self.datasets[key]
        if not Path(ref).exists():
            raise SchemaError(f"dataset {ref} not found")
        return QuadratureDataset.from_csv(ref)


def op_state(ctx: Context, params: dict, name: str, out: Path | None) -> dict:
    st = ctx.state(params["state"])
    ctx.states[name] = st
    doc = {"op": "state", "name": name, "summary": state_summary(st)}
    if out is not None:
        doc["artifacts"] = [_write(out / f"{name}.state.json", st.to_json(indent=2))]
    return doc


def op_wigner(ctx: Context, params: dict, name: str, out: Path | None) -> dict:
    st = ctx.state(params["state"])
    ax = default_axis(params.get("extent", 6.0), params.get("points", 201))
    grid = wigner(st, ax, ax, params.get("mode", 0))
    doc = {"op": "wigner", "name": name, "metrics": grid.metrics(),
           "grid": {"extent": float(ax[-1]), "points": int(ax.size)}}
    if out is not None:
        path = out / f"{name}.wigner.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        grid.to_csv(path)
        doc["artifacts"] = [path.name, WignerGrid.sidecar_path(path).name]
    return doc


def op_sample(ctx: Context, params: dict, name: str, out: Path | None, seed: int | None) -> dict:
    if seed is None:
        raise SchemaError(f"step {name!r}: sampling needs a seed (--seed or a config 'seed')")
    st = ctx.state(params["state"])
    kind = params.get("schedule", "swept")
    sched = PhaseSchedule(kind, params.get("n_phases", 12), tuple(params.get("phases", ())))
    model = ImperfectionModel(efficiency=params.get("efficiency", 1.0),
                              electronic_noise=params.get("electronic_noise", 0.0))
    data = sample_quadratures(st, sched, params["n"], model, seed=seed)
    ctx.datasets[name] = data
    doc = {"op": "sample", "name": name, "n_samples": len(data), "seed": seed,
           "x_mean": float(data.x.mean()), "x_variance": float(data.x.var())}
    if out is not None:
        path = out / f"{name}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        data.to_csv(path)
        doc["artifacts"] = [path.name, QuadratureDataset.sidecar_path(path).name]
    return doc


def op_tomo(ctx: Context, params: dict, name: str, out: Path | None) -> dict:
    data = ctx.dataset(params.get("data"))
    method = params["method"]
    truth = None
    if "truth" in params:
        truth = ctx.state(params["truth"])
    elif "true_state" in data.metadata:
        truth = StateArray.from_dict(data.metadata["true_state"])
    eta = params.get("eta", 1.0)
    doc = {"op": "tomo", "name": name, "method": method, "n_samples": len(data)}
    artifacts = []
    if method == "maxlik":
        est = MaxLikTomography(cutoff=params.get("cutoff", ctx.cutoff or 10), eta=eta,
                               max_iter=params.get("max_iter", 2000), tol=params.get("tol", 1e-8)).fit(data)
        ctx.states[name] = est.state_
        doc.update(n_iter=est.n_iter_, converged=est.converged_, monotone=est.monotone_,
                   log_likelihood=est.log_likelihood_, n_outside=est.n_outside_,
                   summary=state_summary(est.state_))
        if truth is not None:
            doc["fidelity_truth"] = fidelity(est.state_, truth)
        if out is not None:
            artifacts.append(_write(out / f"{name}.state.json", est.state_.to_json(indent=2)))
    elif method == "radon":
        est = RadonTomography(cutoff_frequency=params.get("cutoff_frequency", 5.0)).fit(data)
        doc["metrics"] = est.grid_.metrics()
        if truth is not None:
            # the Radon estimate is not loss corrected: compare with the degraded truth
            corrected = loss(truth, 0, eta) if eta < 1 else truth
            ref = wigner(corrected, est.grid_.x, est.grid_.p)
            doc["max_abs_error_truth"] = float(np.max(np.abs(ref.values - est.grid_.values)))
        if out is not None:
            path = out / f"{name}.wigner.csv"
            path.parent.mkdir(parents=True, exist_ok=True)
            est.grid_.to_csv(path)
            artifacts += [path.name, WignerGrid.sidecar_path(path).name]
    else:
        est = Fock1MomentEstimator().fit(data)
        doc.update(sigma2=est.sigma2_, delta=est.delta_, w00=est.w00_, w00_stderr=est.w00_stderr_)
    if artifacts:
        doc["artifacts"] = artifacts
    return doc


def op_protocol(ctx: Context, params: dict, name: str, out: Path | None) -> dict:
    proto_params = {k: (ctx.state(v) if k == "state_in" and isinstance(v, str) and v.startswith("@") else v)
                    for k, v in params.get("params", {}).items()}
    rep = run_protocol(params["name"], proto_params, ctx.cutoff)
    ctx.states[name] = rep.state
    doc = {"op": "protocol", "name": name, "report": rep.to_dict(include_states=False)}
    if out is not None:
        doc["artifacts"] = [_write(out / f"{name}.report.json", rep.to_json())]
    return doc


def _process(kind: str, eta: float):
    if kind == "identity":
        return lambda s: s
    if kind == "loss":
        return lambda s: loss(s, 0, eta)
    if kind == "subtract":
        return lambda s: subtract_photon_ideal(s, 0)
    return lambda s: add_photon_ideal(s, 0)


def op_qpt(ctx: Context, params: dict, name: str, out: Path | None) -> dict:
    kind = params["process"]
    cutoff = params.get("cutoff", ctx.cutoff or 4)
    tensor = csqpt(_process(kind, params.get("eta", 1.0)), cutoff)
    doc = {"op": "qpt", "name": name, "process": kind, "cutoff": cutoff,
           "diagnostics": tensor.diagnostics(), "probes": tensor.probes}
    if out is not None:
        doc["artifacts"] = [_write(out / f"{name}.process.json", tensor.to_json(indent=2))]
    return doc


def execute(op: str, ctx: Context, params: dict, name: str, out: Path | None, index: int = 0) -> dict:
    try:
        jsonschema.validate(params, OP_SCHEMAS[op])
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"step {name!r} ({op}): {exc.message}") from None
    if op == "sample":
        return op_sample(ctx, params, name, out, _step_seed(ctx.seed, index) if index else ctx.seed)
    return {"state": op_state, "wigner": op_wigner, "tomo": op_tomo, "protocol": op_protocol,
            "qpt": op_qpt}[op](ctx, params, name, out)


def run_config(config: dict, out_dir: Path | None, seed: int | None = None, cutoff: int | None = None) -> dict:
    """Validate a whole pipeline, then execute it step by step."""
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"config: {exc.message}") from None
    names = []
    for i, step in enumerate(config["pipeline"]):
        try:
            jsonschema.validate(step.get("params", {}), OP_SCHEMAS[step["op"]])
        except jsonschema.ValidationError as exc:
            raise SchemaError(f"pipeline step {i} ({step['op']}): {exc.message}") from None
        names.append(step.get("name", f"step{i:02d}_{step['op']}"))
    if len(set(names)) != len(names):
        raise SchemaError("pipeline step names must be unique")
    seed = config.get("seed") if seed is None else seed
    cutoff = config.get("cutoff") if cutoff is None else cutoff
    if out_dir is None and "out_dir" in config:
        out_dir = Path(config["out_dir"])
    if "leakage_tolerance" in config:
        set_leakage_tolerance(config["leakage_tolerance"])
    ctx = Context(cutoff, seed)
    results = []
    try:
        for i, (step, name) in enumerate(zip(config["pipeline"], names)):
            results.append(execute(step["op"], ctx, step.get("params", {}), name, out_dir, i + 1))
    finally:
        if "leakage_tolerance" in config:
            set_leakage_tolerance(None)
    doc = {"seed": seed, "cutoff": cutoff, "steps": results}
    if out_dir is not None:
        _write(out_dir / "summary.json", _dump(doc))
    return doc


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise SchemaError(f"config file {p} not found")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config file {p} is not valid JSON: {exc}") from None


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _kv(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON pipeline config")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--out-dir", default=argparse.SUPPRESS, help="directory for artifacts")
    common.add_argument("--cutoff", type=int, default=argparse.SUPPRESS, help="Fock cutoff override")

    parser = argparse.ArgumentParser(prog="cvfock", parents=[common],
                                     description="Truncated Fock-space quantum optics simulations.")
    parser.add_argument("--version", action="version", version=f"cvfock {__version__}")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("state", parents=[common], help="construct and inspect a state")
    p.add_argument("--state", required=True, help="state description, e.g. fock:1 or cat:1.5,odd")

    p = sub.add_parser("wigner", parents=[common], help="Wigner function on a grid")
    p.add_argument("--state", required=True)
    p.add_argument("--extent", type=float, default=6.0)
    p.add_argument("--points", type=int, default=201)

    p = sub.add_parser("sample", parents=[common], help="simulate homodyne samples")
    p.add_argument("--state", default="fock:1")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--schedule", choices=["fixed", "swept", "uniform"], default="swept")
    p.add_argument("--n-phases", type=int, default=12)
    p.add_argument("--phases", type=float, nargs="*")
    p.add_argument("--efficiency", type=float, default=1.0)
    p.add_argument("--electronic-noise", type=float, default=0.0)

    p = sub.add_parser("tomo", parents=[common], help="reconstruct from homodyne data")
    p.add_argument("method", choices=TOMO_METHODS)
    p.add_argument("--data", help="CSV dataset (default: bundled kitten sample)")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--cutoff-frequency", type=float)
    p.add_argument("--truth", help="state description to compare against")

    p = sub.add_parser("protocol", parents=[common], help="run a named protocol")
    p.add_argument("name", choices=sorted(REGISTRY))
    p.add_argument("--param", type=_kv, action="append", default=[], metavar="KEY=VALUE",
                   help="protocol parameter (JSON value); repeatable")
    p.add_argument("--params", help="protocol parameters as a JSON object")

    p = sub.add_parser("qpt", parents=[common], help="coherent-state process tomography")
    p.add_argument("--process", choices=PROCESSES, required=True)
    p.add_argument("--eta", type=float, default=1.0)

    sub.add_parser("run", parents=[common], help="run a JSON pipeline (needs --config)")
    return parser


def _single_step(args) -> tuple[str, dict]:
    cmd = args.command
    if cmd == "state":
        return "state", {"state": args.state}
    if cmd == "wigner":
        return "wigner", {"state": args.state, "extent": args.extent, "points": args.points}
    if cmd == "sample":
        params = {"state": args.state, "n": args.n, "schedule": args.schedule, "n_phases": args.n_phases,
                  "efficiency": args.efficiency, "electronic_noise": args.electronic_noise}
        if args.phases:
            params["phases"] = args.phases
        return "sample", params
    if cmd == "tomo":
        params = {"method": args.method, "eta": args.eta}
        for key in ("data", "max_iter", "tol", "cutoff_frequency", "truth"):
            if getattr(args, key) is not None:
                params[key] = getattr(args, key)
        return "tomo", params
    if cmd == "protocol":
        proto = json.loads(args.params) if args.params else {}
        if not isinstance(proto, dict):
            raise SchemaError("--params must be a JSON object")
        proto.update(dict(args.param))
        return "protocol", {"name": args.name, "params": proto}
    return "qpt", {"process": args.process, "eta": args.eta}


def _error(kind: str, exc: BaseException, code: int) -> int:
    doc = {"version": __version__, "error": kind, "type": type(exc).__name__, "message": str(exc)}
    diag = {k: v for k, v in vars(exc).items() if not k.startswith("_")}
    if diag:
        doc["diagnostics"] = _plain(diag)
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return EXIT_OK
        return _error("schema", SchemaError("invalid command line"), EXIT_SCHEMA)
    seed = getattr(args, "seed", None)
    cutoff = getattr(args, "cutoff", None)
    out = Path(args.out_dir) if getattr(args, "out_dir", None) else None
    config = getattr(args, "config", None)
    try:
        if args.command in (None, "run"):
            if config is None:
                parser.print_usage(sys.stderr)
                raise SchemaError("the run command needs --config")
            doc = run_config(_load_config(config), out, seed, cutoff)
        else:
            op, params = _single_step(args)
            doc = execute(op, Context(cutoff, seed), params, args.command, out)
            if out is not None:
                _write(out / f"{args.command}.json", _dump(doc))
    except SchemaError as exc:
        return _error("schema", exc, EXIT_SCHEMA)
    except NUMERICAL_ERRORS as exc:
        return _error("numerical", exc, EXIT_NUMERICAL)
    print(_dump(doc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
