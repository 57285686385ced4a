"""Command line entry point: ``randorth {validate,run,diff,basis,scan}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .chebyshev import direction_scan
from .errors import RandOrthError, SchemaError
from .experiments import load_config, report_diff, run
from .geometry import WeightedSet
from .orthopoly import DEFAULT_PRECISION, basis_for, basis_to_json

log = logging.getLogger("randorth")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _read_geom(path) -> WeightedSet:
    with open(path) as fh:
        return WeightedSet.from_json(json.load(fh))


def cmd_validate(args) -> int:
    try:
        load_config(args.config)
    except SchemaError as exc:
        for e in exc.errors:
            print(f"{args.config}: {e}")
        return 2
    print(f"{args.config}: ok")
    return 0


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except SchemaError as exc:
        for e in exc.errors:
            print(f"{args.config}: {e}", file=sys.stderr)
        return 2
    rep = run(cfg, out_dir=args.output, resume=not args.fresh, workers=args.workers)
    for t in rep.thresholds:
        flag = "PASS" if t["passed"] else ("ADVISORY-FAIL" if t["advisory"] else "FAIL")
        print(f"{flag:13s} {t['name']}: {t['column']} {t['op']} {t.get('observed')}")
    print(f"status={rep.status} hash={rep.content_hash[:16]} out={rep.out_dir} ({rep.wall_clock:.1f}s)")
    return rep.exit_code


def cmd_diff(args) -> int:
    tol = {}
    for item in args.tol or []:
        col, _, val = item.partition("=")
        tol[col] = float(val)
    try:
        diff = report_diff(args.a, args.b, atol=args.atol, rtol=args.rtol, tolerances=tol)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    print(json.dumps(diff, indent=1, sort_keys=True))
    return 0 if not diff["aggregate"] else 1


def cmd_basis(args) -> int:
    wset = _read_geom(args.geom)
    basis = basis_for(wset, args.n, args.precision)
    with open(args.out, "w") as fh:
        json.dump(basis_to_json(basis), fh)
    print(f"wrote basis n={args.n} ({basis.m} polynomials, {basis.method}) to {args.out}")
    return 0


def cmd_scan(args) -> int:
    wset = _read_geom(args.geom)
    scan = direction_scan(wset, _floats(args.dir), _ints(args.n), args.route,
                          _ints(args.offsets) if args.offsets else None, not args.full, args.precision)
    scan.write_csv(args.out)
    print(f"wrote {len(scan.rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="randorth", description=__doc__)
    p.add_argument("--version", action="version", version=f"randorth {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a config against the schema")
    s.add_argument("config")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("run", help="run an experiment config")
    s.add_argument("config")
    s.add_argument("--output", help="output directory (overrides the config)")
    s.add_argument("--fresh", action="store_true", help="discard completed trials instead of resuming")
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("diff", help="compare the aggregate tables of two reports")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--atol", type=float, default=0.0)
    s.add_argument("--rtol", type=float, default=0.0)
    s.add_argument("--tol", action="append", metavar="COLUMN=ATOL", help="per-column tolerance")
    s.set_defaults(func=cmd_diff)

    s = sub.add_parser("basis", help="build an orthonormal basis and write it as JSON")
    s.add_argument("--geom", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    s.set_defaults(func=cmd_basis)

    s = sub.add_parser("scan", help="directional Chebyshev scan to CSV")
    s.add_argument("--geom", required=True)
    s.add_argument("--dir", required=True, help="simplex direction, e.g. 0,1")
    s.add_argument("--out", required=True)
    s.add_argument("--n", default="10,20,30", help="degree schedule")
    s.add_argument("--route", choices=("l2", "sup"), default="l2")
    s.add_argument("--offsets", default=None, help="offsets k, e.g. 0,1,2")
    s.add_argument("--full", action="store_true", help="sup route: allow lower-degree competitors")
    s.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    s.set_defaults(func=cmd_scan)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (RandOrthError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
