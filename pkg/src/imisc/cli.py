"""Command line front end.

Subcommands: geometry, coarray, sweep-udof, sweep-leakage, rmse, verify.
Sweep subcommands accept ``--config FILE`` (YAML or JSON); explicit flags
override values from the file. Without ``--out``, results go to
``$IMISC_OUTPUT_DIR/<default name>`` if that variable is set, else stdout.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import yaml

from . import experiments as ex
from .coarray import difference_coarray, first_weights
from .estimation import IdentifiabilityError
from .geometry import ArrayGeometry, coprime_geometry, nested_geometry
from .geometry import build as build_geometry

OUTPUT_ENV = "IMISC_OUTPUT_DIR"


def _ints(text: str) -> list[int]:
    """Parse ``"10,16,22"`` or ``"20:100"`` / ``"20:100:10"`` (inclusive)."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(lo, hi + 1, step))
    return [int(p) for p in text.split(",") if p]


def _floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p]


def _emit(text: str, out, default_name: str):
    if out is None and os.environ.get(OUTPUT_ENV):
        out = Path(os.environ[OUTPUT_ENV]) / default_name
    if out is None:
        sys.stdout.write(text)
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    print(f"wrote {out}", file=sys.stderr)


def _load_config(path) -> dict:
    if path is None:
        return {}
    return yaml.safe_load(Path(path).read_text()) or {}


def _geometry_from_args(args) -> ArrayGeometry:
    if getattr(args, "positions_file", None):
        return ArrayGeometry.from_text(Path(args.positions_file).read_text())
    if args.array == "nested" and args.n1 is not None:
        return nested_geometry(args.n1, args.n2)
    if args.array == "coprime" and args.p is not None:
        return coprime_geometry(args.p, args.q)
    if args.Q is None:
        raise SystemExit("--Q is required")
    return build_geometry(args.array, args.Q)


def cmd_geometry(args) -> int:
    g = _geometry_from_args(args)
    text = g.to_text() if args.format == "text" else json.dumps(g.to_record(), indent=2) + "\n"
    _emit(text, args.out, f"{g.label}_{g.sensor_count}.{'txt' if args.format == 'text' else 'json'}")
    return 0


def cmd_coarray(args) -> int:
    g = _geometry_from_args(args)
    prof = difference_coarray(g)
    rec = {
        "label": g.label,
        "Q": g.sensor_count,
        "aperture": g.aperture,
        "consecutive_bound": prof.consecutive_bound,
        "udof": prof.udof,
        "w1_w3": list(first_weights(prof)),
    }
    if args.weights:
        rec["weights"] = {str(k): v for k, v in sorted(prof.weights.items()) if k >= 0}
    _emit(json.dumps(rec, indent=2) + "\n", args.out, f"coarray_{g.label}_{g.sensor_count}.json")
    return 0


def _sweep_config(args, kind: str) -> ex.SweepConfig:
    d = _load_config(args.config)
    d["kind"] = kind
    if getattr(args, "preset", None):
        base = ex.config_to_dict(ex.preset(args.preset, args.scale))
        base.update({k: v for k, v in d.items() if k != "scenario"})
        base["scenario"].update(d.get("scenario", {}) or {})
        d = base
    overrides = {
        "arrays": args.arrays.split(",") if args.arrays else None,
        "values": args.values,
        "seed": args.seed,
        "workers": getattr(args, "workers", None),
    }
    d.update({k: v for k, v in overrides.items() if v is not None})
    if kind in ("udof", "leakage") and not d.get("values"):
        d["values"] = list(range(20, 101))
    cfg = ex.config_from_dict(d)
    scen = {}
    for name in ("Q", "R", "snr_db", "snapshots", "a1_mag", "a1_phase", "band", "trials", "grid_step"):
        v = getattr(args, name, None)
        if v is not None:
            scen[name] = v
    if scen:
        cfg.scenario = replace(cfg.scenario, **scen)
    return cfg


def cmd_sweep(args, kind: str, name: str) -> int:
    cfg = _sweep_config(args, kind)
    res = ex.run(cfg)
    _emit(res.csv(), args.out, name)
    return 0 if res.complete else 1


def cmd_rmse(args) -> int:
    kind = args.kind
    if kind is None and args.preset:
        kind = ex.preset(args.preset).kind
    if kind is None:
        kind = _load_config(args.config).get("kind")
    if kind not in ex.RMSE_AXES:
        raise SystemExit("choose --kind (rmse-snr | rmse-a1 | rmse-snapshots) or --preset")
    cfg = _sweep_config(args, kind)
    try:
        res = ex.run_rmse_sweep(cfg)
    except IdentifiabilityError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    _emit(res.csv(), args.out, f"{kind}.csv")
    return 0 if res.complete else 1


def cmd_verify(args) -> int:
    rep = ex.run_verifications(args.q_range, args.appendix_q, drop_sensor=args.drop_sensor)
    text = rep.csv() if args.csv else rep.text()
    _emit(text, args.out, "verify.csv" if args.csv else "verify.txt")
    print(f"{len(rep.lines)} checks, {rep.failures} failures", file=sys.stderr)
    return 0 if rep.ok else 1


def _add_geometry_args(p):
    p.add_argument("--array", default="imisc", choices=["imisc", "misc", "nested", "coprime"])
    p.add_argument("--Q", type=int)
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--positions-file", help="plain text file, one integer position per line")
    p.add_argument("--out")


def _add_sweep_args(p, values_parser=_ints):
    p.add_argument("--config")
    p.add_argument("--arrays", help="comma separated, e.g. imisc,misc,nested,coprime")
    p.add_argument("--values", type=values_parser, help="list '20,40' or inclusive range '20:100[:step]'")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imisc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("geometry", help="print sensor positions")
    _add_geometry_args(p)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("coarray", help="coarray summary of one array")
    _add_geometry_args(p)
    p.add_argument("--weights", action="store_true", help="include the full weight function")
    p.set_defaults(func=cmd_coarray)

    p = sub.add_parser("sweep-udof", help="uDOF versus number of sensors")
    _add_sweep_args(p)
    p.set_defaults(func=lambda a: cmd_sweep(a, "udof", "udof.csv"), preset=None)

    p = sub.add_parser("sweep-leakage", help="coupling leakage versus number of sensors")
    _add_sweep_args(p)
    p.add_argument("--a1-mag", dest="a1_mag", type=float)
    p.add_argument("--a1-phase", dest="a1_phase", type=float, help="radians")
    p.add_argument("--band", type=int)
    p.set_defaults(func=lambda a: cmd_sweep(a, "leakage", "leakage.csv"), preset=None)

    p = sub.add_parser("rmse", help="Monte Carlo RMSE sweep")
    _add_sweep_args(p, values_parser=_floats)
    p.add_argument("--kind", choices=sorted(ex.RMSE_AXES))
    p.add_argument("--preset", choices=["snr", "coupling", "snapshots"])
    p.add_argument("--scale", choices=["desk", "paper"], default="desk")
    p.add_argument("--Q", type=int)
    p.add_argument("--R", type=int)
    p.add_argument("--snr-db", dest="snr_db", type=float)
    p.add_argument("--snapshots", type=int)
    p.add_argument("--a1-mag", dest="a1_mag", type=float)
    p.add_argument("--a1-phase", dest="a1_phase", type=float)
    p.add_argument("--band", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--grid-step", dest="grid_step", type=float)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_rmse)

    p = sub.add_parser("verify", help="closed-form and proof checks")
    p.add_argument("--q-range", type=_ints, default=list(range(10, 201)),
                   help="sensor counts for the formula suite (default 10:200)")
    p.add_argument("--appendix-q", type=_ints, default=[10, 16, 22, 28, 34])
    p.add_argument("--drop-sensor", type=int, help="remove this sensor index before coverage checks")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
