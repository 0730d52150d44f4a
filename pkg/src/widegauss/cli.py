"""Command-line interface.

Subcommands: ``kernel`` (limit kernel recursion as JSON), ``simulate``
(finite-network FDD sample), ``distance`` (W1 between two sample files),
``bound`` (explicit error bound report), ``sweep`` (grid harness CSV),
``fit`` (rate fit on sweep rows).  Every subcommand reads one JSON config
where unknown keys are errors.  WIDEGAUSS_OUTDIR, when set, redirects
relative output paths; it changes nothing else.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .activations import ActivationSpec
from .bounds import bound_chain, ledger_from_config
from .kernel import kernel_recursion
from .network import FddSample, InputSet, NetworkConfig, sample_fdd
from .ot import MATCHING_CAP, PointCloud, w1_matching, w1_sinkhorn
from .sweep import SweepConfig, fit_rate, read_rows, run_sweep
from .weights import WeightSpec

_NETWORK_KEYS = {"schema_version", "inputs", "widths", "weights", "activation", "bias_std"}
_COMMAND_KEYS = {
    "kernel": _NETWORK_KEYS | {"n_nodes"},
    "simulate": _NETWORK_KEYS | {"n_replicates", "seed"},
    "bound": _NETWORK_KEYS
    | {"p", "bound_mode", "n_nodes", "mc_replicates", "seed", "ledger_overrides"},
}


def _load_config(path: str, command: str) -> dict:
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    allowed = _COMMAND_KEYS[command]
    unknown = set(raw) - allowed
    if unknown:
        raise ValueError(f"unknown config keys for '{command}': {sorted(unknown)}")
    if raw.get("schema_version", 1) != 1:
        raise ValueError("unsupported config schema_version")
    return raw


def _network_from_config(raw: dict, base_dir: str) -> tuple[NetworkConfig, InputSet]:
    missing = {"inputs", "widths", "weights", "activation"} - set(raw)
    if missing:
        raise ValueError(f"missing config keys: {sorted(missing)}")
    inputs = raw["inputs"]
    if isinstance(inputs, str):
        chi = InputSet.from_csv(os.path.join(base_dir, inputs))
    else:
        chi = InputSet(np.asarray(inputs, dtype=np.float64))
    widths = tuple(int(w) for w in raw["widths"])
    weights = raw["weights"]
    if isinstance(weights, dict):
        specs = (WeightSpec.from_dict(weights),) * (len(widths) - 1)
    else:
        specs = tuple(WeightSpec.from_dict(w) for w in weights)
    act = raw["activation"]
    activation = (
        ActivationSpec(kind=act) if isinstance(act, str) else ActivationSpec.from_dict(act)
    )
    config = NetworkConfig(
        widths=widths,
        weight_specs=specs,
        activation=activation,
        bias_std=float(raw.get("bias_std", 0.0)),
    )
    if chi.n0 != widths[0]:
        raise ValueError(f"inputs have width {chi.n0} but widths[0] is {widths[0]}")
    return config, chi


def _resolve_out(path: str | None) -> str | None:
    if path is None:
        return None
    outdir = os.environ.get("WIDEGAUSS_OUTDIR")
    if outdir and not os.path.isabs(path):
        return os.path.join(outdir, path)
    return path


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out is None:
        print(text)
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def _load_sample(path: str) -> PointCloud:
    if path.endswith(".npz"):
        with np.load(path) as arc:
            data = arc["data"]
        return PointCloud.from_fdd(
            FddSample(data=data, layer=0, provenance="file")
        )
    if path.endswith(".npy"):
        arr = np.load(path)
    else:
        arr = np.loadtxt(path, delimiter=",", ndmin=2)
    if arr.ndim == 3:
        return PointCloud.from_fdd(FddSample(data=arr, layer=0, provenance="file"))
    return PointCloud(points=np.atleast_2d(arr))


def _cmd_kernel(args: argparse.Namespace) -> int:
    raw = _load_config(args.config, "kernel")
    config, chi = _network_from_config(raw, os.path.dirname(os.path.abspath(args.config)))
    kernels = kernel_recursion(config, chi, n_nodes=int(raw.get("n_nodes", 64)))
    if args.layer is not None:
        if not 1 <= args.layer <= len(kernels):
            raise ValueError(f"--layer must be in [1, {len(kernels)}]")
        payload = kernels[args.layer - 1].to_dict()
    else:
        payload = {
            "schema_version": 1,
            "kernels": [k.to_dict() for k in kernels],
        }
    _emit_json(payload, _resolve_out(args.out))
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    raw = _load_config(args.config, "simulate")
    config, chi = _network_from_config(raw, os.path.dirname(os.path.abspath(args.config)))
    if "n_replicates" not in raw:
        raise ValueError("simulate config needs n_replicates")
    sample = sample_fdd(config, chi, int(raw["n_replicates"]), int(raw.get("seed", 0)))
    out = _resolve_out(args.out)
    if out is None:
        raise ValueError("simulate requires --out")
    if args.format == "npz":
        np.savez_compressed(
            out,
            data=sample.data,
            layer=sample.layer,
            provenance=sample.provenance,
            meta=json.dumps(sample.meta, default=str),
        )
    else:
        flat = sample.data.reshape(sample.n_replicates, -1)
        np.savetxt(
            out,
            flat,
            delimiter=",",
            header=f"layer={sample.layer} n={sample.n_coords} s={sample.s}",
        )
    print(f"wrote {out}: {sample.n_replicates} replicates, "
          f"{sample.n_coords} coords, {sample.s} inputs")
    return 0


def _cmd_distance(args: argparse.Namespace) -> int:
    x = _load_sample(args.x)
    y = _load_sample(args.y)
    if args.solver == "matching":
        value = w1_matching(x, y, cap=args.cap, backend=args.backend)
    else:
        value = w1_sinkhorn(x, y, eps=args.eps)
    payload = {
        "w1": value,
        "solver": args.solver,
        "N": x.points.shape[0],
        "D": x.points.shape[1],
    }
    _emit_json(payload, _resolve_out(args.out))
    return 0


def _cmd_bound(args: argparse.Namespace) -> int:
    raw = _load_config(args.config, "bound")
    config, chi = _network_from_config(raw, os.path.dirname(os.path.abspath(args.config)))
    p = int(raw.get("p", 3))
    ledger = ledger_from_config(config, chi, p, overrides=raw.get("ledger_overrides"))
    report = bound_chain(
        config,
        chi,
        ledger,
        mode=raw.get("bound_mode", "certificate"),
        mc_replicates=int(raw.get("mc_replicates", 4096)),
        seed=int(raw.get("seed", 0)),
        n_nodes=int(raw.get("n_nodes", 64)),
    )
    _emit_json(report.to_dict(), _resolve_out(args.out))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = SweepConfig.from_json(args.config)
    out = _resolve_out(args.out)
    rows = run_sweep(config, out, n_jobs=args.jobs)
    print(f"wrote {out}: {len(rows)} rows")
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    rows = [
        row
        for row in read_rows(args.rows)
        if row.depth == args.depth and row.family == args.family
    ]
    result = fit_rate(rows, floor_corrected=not args.raw)
    _emit_json(result.to_dict(), _resolve_out(args.out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="widegauss",
        description="Finite-width network vs Gaussian limit: simulation, "
        "kernels, Wasserstein distances, explicit bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_kernel = sub.add_parser("kernel", help="limit kernel recursion as JSON")
    p_kernel.add_argument("--config", required=True)
    p_kernel.add_argument("--layer", type=int, default=None)
    p_kernel.add_argument("--out", default=None)
    p_kernel.set_defaults(func=_cmd_kernel)

    p_sim = sub.add_parser("simulate", help="sample the finite network FDD")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--format", choices=("npz", "csv"), default="npz")
    p_sim.set_defaults(func=_cmd_simulate)

    p_dist = sub.add_parser("distance", help="W1 between two sample files")
    p_dist.add_argument("--x", required=True)
    p_dist.add_argument("--y", required=True)
    p_dist.add_argument("--solver", choices=("matching", "sinkhorn"), default="matching")
    p_dist.add_argument("--eps", type=float, default=0.01)
    p_dist.add_argument("--cap", type=int, default=MATCHING_CAP)
    p_dist.add_argument("--backend", default=None)
    p_dist.add_argument("--out", default=None)
    p_dist.set_defaults(func=_cmd_distance)

    p_bound = sub.add_parser("bound", help="explicit W1 bound report as JSON")
    p_bound.add_argument("--config", required=True)
    p_bound.add_argument("--out", default=None)
    p_bound.set_defaults(func=_cmd_bound)

    p_sweep = sub.add_parser("sweep", help="run a width/depth/family grid")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_fit = sub.add_parser("fit", help="rate fit over sweep rows")
    p_fit.add_argument("--rows", required=True)
    p_fit.add_argument("--depth", type=int, required=True)
    p_fit.add_argument("--family", required=True)
    p_fit.add_argument("--raw", action="store_true",
                       help="fit raw distances instead of floor-corrected ones")
    p_fit.add_argument("--out", default=None)
    p_fit.set_defaults(func=_cmd_fit)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
