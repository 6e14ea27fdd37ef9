"""Command line: ``balldisc <subcommand> [--config PATH] [--seed U64] [--out DIR] ...``.

Exit status: 0 when every invariant passes, 1 when one fails, 2 for bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

_KINDS = {
    "scaling": None,  # any kind
    "jitter": ("jitter_rates", "holder_rates"),
    "morrey": ("morrey_sharp", "morrey_lower"),
    "certify": ("certificate_audit",),
    "signed-demo": ("signed_weights",),
}
_DEFAULT_KIND = {"jitter": "jitter_rates", "morrey": "morrey_sharp", "certify": "certificate_audit",
                 "signed-demo": "signed_weights"}


def _common(p):
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    p.add_argument("--out", help="output directory (default runs/<kind>-<hash>)")
    p.add_argument("--threads", type=int, default=1, help="BLAS/OpenMP thread cap")
    p.add_argument("--tolerance", type=float, help="tail tolerance")
    p.add_argument("-d", "--dim", type=int, help="dimension")
    p.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                   help="override a config field, e.g. --set 'H=[4,8,16]'")


def build_parser():
    ap = argparse.ArgumentParser(prog="balldisc", description="Ball discrepancy experiments on the torus.")
    sub = ap.add_subparsers(dest="command", required=True)
    d = sub.add_parser("discrepancy", help="L2 average of one point set against one density")
    _common(d)
    d.add_argument("--points", help="point file ('dim N' header, rows 'x.. alpha')")
    d.add_argument("--grid", type=int, help="use the grid (1/H)Z^d instead of --points")
    d.add_argument("--density", help="density CSV (with .json sidecar); default f = 1")
    d.add_argument("--r", type=float, help="fixed radius")
    d.add_argument("--a", type=float, default=0.1)
    d.add_argument("--b", type=float, default=0.4)
    d.add_argument("--method", choices=("spectral", "pair", "direct"), default="spectral")
    for name, kinds in _KINDS.items():
        p = sub.add_parser(name, help=f"run {'any experiment kind' if kinds is None else ' / '.join(kinds)}")
        _common(p)
        if name == "jitter":
            p.add_argument("--beta", type=float, help="Hoelder order (switches to holder_rates)")
            p.add_argument("--replicates", type=int, help="Monte Carlo replicates (>= 100, 0 = none)")
    return ap


def _limit_threads(k):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(k)


def _overrides(args):
    out = {}
    for item in args.set:
        key, _, val = item.partition("=")
        if not _:
            raise ValueError(f"--set expects KEY=JSON, got {item!r}")
        try:
            out[key] = json.loads(val)
        except json.JSONDecodeError:
            out[key] = val
    for key, val in (("seed", args.seed), ("tolerance", args.tolerance), ("d", args.dim),
                     ("threads", args.threads)):
        if val is not None:
            out[key] = val
    if getattr(args, "beta", None) is not None:
        out["beta"] = args.beta
        out.setdefault("kind", "holder_rates")
    if getattr(args, "replicates", None) is not None:
        out["replicates"] = args.replicates
    return out


def _run_experiment(args):
    from .config import ExperimentConfig
    from .experiments import config_hash, run

    raw = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
    raw.update(_overrides(args))
    raw.setdefault("kind", _DEFAULT_KIND.get(args.command))
    allowed = _KINDS[args.command]
    if allowed is not None and raw["kind"] not in allowed:
        raise ValueError(f"'{args.command}' runs {allowed}, config asks for {raw['kind']!r}")
    cfg = ExperimentConfig.from_dict(raw)
    out = args.out or os.path.join("runs", f"{cfg.kind}-{config_hash(cfg)}")
    res = run(cfg, out)
    for c in res.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    print(f"wrote {out}/raw.csv, summary.json, config_echo.json")
    return 0 if res.passed else 1


def _run_discrepancy(args):
    import csv

    from ..densities import DensityField, constant_density
    from ..engine import avg_sq_x, avg_sq_xr
    from ..torus import grid_points, load_points

    if (args.points is None) == (args.grid is None):
        raise ValueError("give exactly one of --points or --grid")
    d = args.dim or 1
    ps = load_points(args.points) if args.points else grid_points(args.grid, d)
    f = DensityField.from_csv(args.density) if args.density else constant_density(1.0, ps.dim)
    tol = args.tolerance or 1e-6
    if args.r is not None:
        rep = avg_sq_x(ps, f, args.r, tolerance=tol, method=args.method)
    else:
        rep = avg_sq_xr(ps, f, args.a, args.b, tolerance=tol, method=args.method)
    echo = {"command": "discrepancy", "points": args.points, "grid": args.grid, "density": args.density,
            "r": args.r, "a": args.a, "b": args.b, "method": args.method, "tolerance": tol, "d": ps.dim}
    out = args.out or os.path.join("runs", f"discrepancy-{rep.config_hash()}")
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "raw.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["N", "value", "tail_bound", "method", "cutoff", "config_hash"])
        wr.writerow([rep.N, repr(rep.value), repr(rep.tail_bound), rep.method, rep.cutoff, rep.config_hash()])
    with open(os.path.join(out, "summary.json"), "w") as fh:
        fh.write(rep.to_json() + "\n")
    with open(os.path.join(out, "config_echo.json"), "w") as fh:
        json.dump(echo, fh, indent=2, sort_keys=True)
    print(rep.to_json())
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    _limit_threads(args.threads)
    try:
        if args.command == "discrepancy":
            return _run_discrepancy(args)
        return _run_experiment(args)
    except (ValueError, OSError, RuntimeError) as exc:  # budget errors are RuntimeError
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
