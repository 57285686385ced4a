"""Config-driven experiments with seeded, resumable trials.

A config is one JSON document::

    {"kind": "zero-measure",
     "geometry": {"schema": "geom-v1", "kind": "circle", "params": {"R": 1.0}, "weight_expr": 0.0},
     "law": {"kind": "complex-gaussian", "params": {"sigma": 1.0}},
     "n": [50, 100, 200], "trials": 50, "seed": 20240601,
     "output": "runs/kac-gaussian",
     "params": {...}, "thresholds": [...]}

Running writes ``trials.jsonl`` (one flushed line per finished trial, so an
interrupted run resumes where it stopped), ``tables/*.csv`` (aggregates,
sorted by trial index so reruns are byte-identical), optional
``fields/*.csv`` and ``report.json``.  Trial ``i`` draws its coefficients
from ``SeedStream(seed, i, "coefficients/n=<n>")`` and never depends on other
trials.
"""
from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .chebyshev import direction_scan, l2_chebyshev
from .ensemble import CoefficientLaw, SeedStream, classify_tail, random_polynomial
from .errors import RandOrthError, SchemaError
from .extremal import Grid, field_distance, jn_count, kn_count, reference_field, reference_for
from .geometry import WeightedSet, sample_set
from .orthopoly import basis_for, bernstein_markov_constant
from .zeros import EmpiricalZeroMeasure, potential_field, radial_sector_histogram

KINDS = ("zero-measure", "potential-l1", "jn-growth", "bm-constant", "cheb-scan", "tail-boundary")
OUTPUT_ROOT_ENV = "RANDORTH_OUTPUT_ROOT"
RANDOM_KINDS = ("zero-measure", "potential-l1", "tail-boundary")

_THRESHOLD = {
    "type": "object",
    "required": ["table", "column", "op"],
    "properties": {
        "name": {"type": "string"},
        "table": {"type": "string"},
        "column": {"type": "string"},
        "op": {"enum": ["<=", ">=", "==", "decreasing", "increasing", "ratio>="]},
        "value": {"type": "number"},
        "n": {"oneOf": [{"type": "integer"}, {"type": "array", "items": {"type": "integer"},
                                              "minItems": 2, "maxItems": 2}]},
        "where": {"type": "object"},
        "advisory": {"type": "boolean"},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind", "geometry", "n", "seed", "output"],
    "properties": {
        "kind": {"enum": list(KINDS)},
        "geometry": {
            "type": "object",
            "required": ["kind", "params"],
            "properties": {"schema": {"const": "geom-v1"}, "kind": {"type": "string"},
                           "params": {"type": "object"}, "weight_expr": {}},
        },
        "law": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"type": "string"}, "params": {"type": "object"}},
        },
        "n": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": "string", "minLength": 1},
        "precision_bits": {"type": "integer", "minimum": 53},
        "grid": {
            "type": "object",
            "properties": {
                "box": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4},
                "shape": {"type": "array", "items": {"type": "integer", "minimum": 2},
                          "minItems": 2, "maxItems": 2},
                "coord": {"type": "integer", "minimum": 0},
                "fixed": {"type": "array"},
            },
            "additionalProperties": False,
        },
        "params": {"type": "object"},
        "thresholds": {"type": "array", "items": _THRESHOLD},
        "workers": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}


def _path(err) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


def validate_config(cfg: dict) -> list[str]:
    """Schema plus semantic checks; returns messages of the form ``field: problem``."""
    errs = [f"{_path(e)}: {e.message}" for e in
            sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(cfg), key=lambda e: list(e.absolute_path))]
    if errs:
        return errs
    ns = cfg["n"]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        errs.append(f"n: schedule must be strictly increasing, got {ns}")
    try:
        wset = WeightedSet.from_json(cfg["geometry"])
    except (ValueError, KeyError, TypeError) as exc:
        errs.append(f"geometry: {exc}")
        wset = None
    kind = cfg["kind"]
    if kind in RANDOM_KINDS:
        if "law" not in cfg:
            errs.append(f"law: required for kind {kind}")
        else:
            try:
                CoefficientLaw.from_json(cfg["law"])
            except (ValueError, TypeError) as exc:
                errs.append(f"law: {exc}")
    if wset is not None:
        if kind in ("zero-measure",) and wset.dim != 1:
            errs.append("geometry: zero-measure experiments need a set in C")
        if kind in ("potential-l1", "tail-boundary", "jn-growth") and reference_for(wset) is None:
            errs.append(f"geometry: no closed-form reference extremal function for {wset.kind}")
        if kind == "cheb-scan":
            th = cfg.get("params", {}).get("theta")
            route = cfg.get("params", {}).get("route", "l2")
            want = wset.dim + (route == "l2")
            if not isinstance(th, list) or len(th) != want:
                errs.append(f"params.theta: need a list of {want} simplex coordinates for route {route}")
    for i, t in enumerate(cfg.get("thresholds", [])):
        if t["op"] in ("<=", ">=", "==", "ratio>=") and "value" not in t:
            errs.append(f"thresholds.{i}.value: required for op {t['op']}")
        if t["op"] == "ratio>=" and not isinstance(t.get("n"), list):
            errs.append(f"thresholds.{i}.n: op ratio>= needs a pair [n_num, n_den]")
    return errs


def load_config(path) -> dict:
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError([f"<root>: not valid JSON ({exc})"]) from exc
    errs = validate_config(cfg)
    if errs:
        raise SchemaError(errs)
    return cfg


def config_hash(cfg: dict) -> str:
    body = {k: v for k, v in cfg.items() if k not in ("output", "workers")}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()[:16]


def output_dir(cfg: dict, override=None) -> Path:
    if override is not None:
        return Path(override)
    out = Path(cfg["output"])
    root = os.environ.get(OUTPUT_ROOT_ENV)
    return out if out.is_absolute() or not root else Path(root) / out


# ---------------------------------------------------------------------------
# context shared by trials


@dataclass
class _Ctx:
    cfg: dict
    wset: WeightedSet
    law: CoefficientLaw | None
    grid: Grid
    bits: int
    params: dict = field(default_factory=dict)

    @classmethod
    def build(cls, cfg: dict) -> "_Ctx":
        wset = WeightedSet.from_json(cfg["geometry"])
        law = CoefficientLaw.from_json(cfg["law"]) if "law" in cfg else None
        g = dict(cfg.get("grid", {}))
        g.setdefault("d", wset.dim)
        if wset.dim > 1 and "fixed" not in g:
            g["fixed"] = [[0.0, 0.0]] * (wset.dim - 1)
        return cls(cfg, wset, law, Grid.from_json(g), int(cfg.get("precision_bits", default_precision(wset))),
                   dict(cfg.get("params", {})))

    def basis(self, n):
        return basis_for(self.wset, n, self.bits)


def default_precision(wset: WeightedSet) -> int:
    """Double precision when the monomials are orthogonal (radial weight on a circled set)."""
    return 53 if wset.is_reinhardt and wset.weight.is_radial else 256


# ---------------------------------------------------------------------------
# trials


def _trial(cfg: dict, trial: int) -> dict:
    ctx = _Ctx.build(cfg)
    kind = cfg["kind"]
    rec: dict = {"trial": trial, "per_n": []}
    seed = int(cfg["seed"])
    for n in cfg["n"]:
        stream = SeedStream(seed, trial, f"coefficients/n={n}")
        poly = random_polynomial(ctx.basis(n), ctx.law, stream)
        row: dict = {"n": n, "log_scale": poly.log_scale, "effective_degree": poly.effective_degree}
        if kind == "zero-measure":
            zm = EmpiricalZeroMeasure.from_polynomial(poly)
            lo, hi = ctx.params.get("annulus", [0.9, 1.1])
            row.update(annulus=zm.annulus_fraction(lo, hi), method=zm.provenance["method"],
                       max_residual=zm.provenance["max_residual"], zero_count=zm.count,
                       abs_zeros=np.sort(np.abs(zm.zeros)).tolist(),
                       angles=np.mod(np.angle(zm.zeros), 2 * np.pi).tolist())
            if "inside_radius" in ctx.params:
                row["inside"] = zm.fraction(lambda z: np.abs(z) <= ctx.params["inside_radius"])
        else:
            ref = reference_for(ctx.wset)
            fld = potential_field(poly, ctx.grid)
            row["l1"] = field_distance(fld, reference_field(ref, ctx.grid), "L1")
            if kind == "tail-boundary":
                row["exceeds"] = bool(row["l1"] > ctx.params.get("deviation", 0.2))
        rec["per_n"].append(row)
    return rec


def _deterministic(cfg: dict) -> list[dict]:
    """Rows for the kinds without random coefficients (single pass)."""
    ctx = _Ctx.build(cfg)
    kind = cfg["kind"]
    rows = []
    if kind == "jn-growth":
        ref = reference_for(ctx.wset)
        eps = float(ctx.params.get("eps", 0.1))
        margin = float(ctx.params.get("kn_margin", 0.1))
        pts = [_as_point(p, ctx.wset.dim) for p in ctx.params.get("points", [[0.5, 0.0]])]
        count = int(ctx.params.get("kn_samples", 0))
        if count:
            rng = SeedStream(int(cfg["seed"]), 0, "kn-points").generator()
            x0, x1, y0, y1 = ctx.grid.box
            sample = rng.uniform(x0, x1, (count, ctx.wset.dim)) + 1j * rng.uniform(y0, y1, (count, ctx.wset.dim))
        else:
            sample = np.zeros((0, ctx.wset.dim), dtype=complex)
        for n in cfg["n"]:
            b = ctx.basis(n)
            for z in pts:
                v = float(ref(z))
                rows.append({"n": n, "point": _fmt_point(z), "vref": v, "J": jn_count(b, z, eps, v)})
            if count:
                ks = [kn_count(b, _squeeze(z), float(ref(_squeeze(z))) + margin) for z in sample]
                rows.append({"n": n, "point": "sampled", "vref": math.nan, "J": -1, "K_max": max(ks)})
    elif kind == "bm-constant":
        nodes = sample_set(ctx.wset, int(ctx.params.get("nodes", 4000)))
        for n in cfg["n"]:
            M = bernstein_markov_constant(ctx.basis(n), ctx.wset, nodes)
            rows.append({"n": n, "M_n": M, "root": M ** (1.0 / n) if n else M})
    elif kind == "cheb-scan":
        p = ctx.params
        route = p.get("route", "l2")
        scan = direction_scan(ctx.wset, p["theta"], cfg["n"], route, p.get("offsets"),
                              bool(p.get("homogeneous", True)), ctx.bits)
        for r in scan.rows:
            rows.append({"n": r.n, "k": r.k, "alpha": ";".join(map(str, r.alpha)), "value": r.value,
                         "diff": r.diff, "distance": r.distance, "certified": r.certified})
        if route == "l2":
            for n in cfg["n"]:
                b = ctx.basis(n)
                rows.append({"n": n, "k": -1, "alpha": "identity", "value":
                             float(np.max(np.abs(l2_chebyshev(b) * np.exp(b.log_leading()) - 1.0))),
                             "diff": math.nan, "distance": math.nan, "certified": True})
    return rows


def _as_point(p, d):
    arr = np.asarray(p, dtype=float).reshape(-1, 2)
    z = arr[:, 0] + 1j * arr[:, 1]
    return complex(z[0]) if d == 1 else z


def _squeeze(z):
    return complex(z[0]) if np.size(z) == 1 else z


def _fmt_point(z) -> str:
    return ";".join(f"{c.real:g}{c.imag:+g}j" for c in np.atleast_1d(z))


# ---------------------------------------------------------------------------
# aggregation


def _aggregate(cfg: dict, records: list[dict], rows: list[dict]) -> dict[str, list[dict]]:
    kind = cfg["kind"]
    ok = sorted((r for r in records if "error" not in r), key=lambda r: r["trial"])
    tables: dict[str, list[dict]] = {}
    if kind in ("jn-growth", "bm-constant", "cheb-scan"):
        tables["summary"] = rows
        return tables
    summary = []
    params = cfg.get("params", {})
    for i, n in enumerate(cfg["n"]):
        per = [r["per_n"][i] for r in ok]
        row: dict = {"n": n, "trials": len(per)}
        if not per:
            summary.append(row)
            continue
        row["mean_effective_degree"] = float(np.mean([p["effective_degree"] for p in per]))
        if kind == "zero-measure":
            ann = np.array([p["annulus"] for p in per])
            row.update(mean_annulus=float(ann.mean()), std_annulus=float(ann.std()),
                       max_residual=float(max(p["max_residual"] for p in per)),
                       companion_fallbacks=sum(p["method"] == "companion" for p in per))
            if "inside_radius" in params:
                row["mean_inside"] = float(np.mean([p["inside"] for p in per]))
            pooled = np.sort(np.concatenate([p["abs_zeros"] for p in per]))
            if "droplet_radius" in params:
                rho = float(params["droplet_radius"])
                rr = np.linspace(0.0, rho, 401)
                emp = np.searchsorted(pooled, rr, side="right") / pooled.size
                row["cdf_sup"] = float(np.max(np.abs(emp - (rr / rho) ** 2)))
            nb = int(params.get("angular_bins", 8))
            ang = np.concatenate([p["angles"] for p in per])
            counts = np.bincount(np.minimum((ang / (2 * np.pi / nb)).astype(int), nb - 1), minlength=nb)
            tables.setdefault("angular", []).extend(
                {"n": n, "bin": j, "count": int(c)} for j, c in enumerate(counts))
        else:
            l1 = np.array([p["l1"] for p in per])
            row.update(median_l1=float(np.median(l1)), mean_l1=float(l1.mean()), max_l1=float(l1.max()))
            if kind == "tail-boundary":
                row["exceed_freq"] = float(np.mean([p["exceeds"] for p in per]))
        summary.append(row)
    tables["summary"] = summary
    per_trial = []
    for r in ok:
        for p in r["per_n"]:
            t = {"trial": r["trial"], "n": p["n"], "effective_degree": p["effective_degree"]}
            for key in ("annulus", "inside", "l1", "max_residual"):
                if key in p:
                    t[key] = p[key]
            per_trial.append(t)
    tables["trials"] = per_trial
    return tables


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def table_csv(rows: list[dict]) -> str:
    cols: list[str] = []
    for r in rows:
        cols += [c for c in r if c not in cols]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in cols])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# thresholds


def _select(rows, t):
    sel = [r for r in rows if all(r.get(k) == v for k, v in t.get("where", {}).items())]
    if isinstance(t.get("n"), int):
        sel = [r for r in sel if r.get("n") == t["n"]]
    return sel


def evaluate_thresholds(cfg: dict, tables: dict) -> list[dict]:
    out = []
    for i, t in enumerate(cfg.get("thresholds", [])):
        rows = _select(tables.get(t["table"], []), t)
        vals = [r[t["column"]] for r in rows if t["column"] in r]
        op = t["op"]
        res = {"name": t.get("name", f"threshold-{i}"), "op": op, "column": t["column"],
               "advisory": bool(t.get("advisory", False)), "observed": vals}
        if not vals:
            res.update(passed=False, reason="no matching rows")
        elif op == "<=":
            res["passed"] = all(v <= t["value"] for v in vals)
        elif op == ">=":
            res["passed"] = all(v >= t["value"] for v in vals)
        elif op == "==":
            res["passed"] = all(v == t["value"] for v in vals)
        elif op == "decreasing":
            res["passed"] = all(b < a for a, b in zip(vals, vals[1:]))
        elif op == "increasing":
            res["passed"] = all(b > a for a, b in zip(vals, vals[1:]))
        else:  # ratio>=
            num, den = t["n"]
            by_n = {r["n"]: r[t["column"]] for r in tables.get(t["table"], []) if t["column"] in r}
            a, b = by_n.get(num), by_n.get(den)
            res["observed"] = [a, b]
            res["passed"] = a is not None and b is not None and a >= t["value"] * b
        out.append(res)
    return out


# ---------------------------------------------------------------------------
# running


@dataclass
class ExperimentReport:
    config: dict
    records: list
    tables: dict
    thresholds: list
    wall_clock: float
    content_hash: str
    status: str
    out_dir: Path | None = None

    @property
    def exit_code(self) -> int:
        if self.status != "ok":
            return 4
        return 0 if all(t["passed"] or t["advisory"] for t in self.thresholds) else 3

    def to_json(self) -> dict:
        return {"config": self.config, "kind": self.config["kind"], "tool_version": __version__,
                "config_hash": config_hash(self.config), "status": self.status,
                "wall_clock_s": self.wall_clock, "content_hash": self.content_hash,
                "tables": self.tables, "thresholds": self.thresholds,
                "trials": [{k: v for k, v in r.items() if k != "per_n"} |
                           {"per_n": [{k: v for k, v in p.items() if k not in ("abs_zeros", "angles")}
                                      for p in r.get("per_n", [])]} for r in self.records]}


def _read_done(path: Path, chash: str) -> dict[int, dict]:
    done: dict[int, dict] = {}
    if not path.exists():
        return done
    with open(path) as fh:
        for line in fh:
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                continue  # torn final line of a killed run
            if rec.get("config_hash") == chash and "error" not in rec:
                done[int(rec["trial"])] = rec
    return done


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return _clean(obj.item())
    return obj


def run(cfg: dict, out_dir=None, resume: bool = True, workers: int | None = None,
        write: bool = True) -> ExperimentReport:
    """Run an experiment; writes its artefacts unless ``write`` is False."""
    errs = validate_config(cfg)
    if errs:
        raise SchemaError(errs)
    cfg = copy.deepcopy(cfg)
    t0 = time.perf_counter()
    chash = config_hash(cfg)
    out = output_dir(cfg, out_dir) if write else None
    if out is not None:
        (out / "tables").mkdir(parents=True, exist_ok=True)
    records: list[dict] = []
    rows: list[dict] = []
    status = "ok"
    if cfg["kind"] in RANDOM_KINDS:
        log = out / "trials.jsonl" if out is not None else None
        done = _read_done(log, chash) if (log is not None and resume) else {}
        if log is not None and not resume and log.exists():
            log.unlink()
        todo = [i for i in range(int(cfg.get("trials", 1))) if i not in done]
        records = list(done.values())
        nw = int(workers or cfg.get("workers", 1))

        def collect(rec):
            rec["config_hash"] = chash
            records.append(rec)
            if log is not None:
                with open(log, "a") as fh:
                    fh.write(json.dumps(_clean(rec), sort_keys=True) + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())

        if nw > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=nw) as ex:
                futs = {i: ex.submit(_trial_safe, cfg, i) for i in todo}
                for i in todo:
                    collect(futs[i].result())
        else:
            for i in todo:
                collect(_trial_safe(cfg, i))
        if any("error" in r for r in records):
            status = "partial"
    else:
        try:
            rows = _deterministic(cfg)
        except RandOrthError as exc:
            status = "error"
            records = [{"trial": 0, "error": str(exc), "type": type(exc).__name__}]
    records.sort(key=lambda r: r["trial"])
    tables = _clean(_aggregate(cfg, records, rows))
    thresholds = _clean(evaluate_thresholds(cfg, tables))
    csvs = {name: table_csv(t) for name, t in sorted(tables.items())}
    h = hashlib.sha256(config_hash(cfg).encode())
    for name, text in csvs.items():
        h.update(name.encode() + b"\0" + text.encode())
    report = ExperimentReport(cfg, records, tables, thresholds, time.perf_counter() - t0,
                              h.hexdigest(), status, out)
    if out is not None:
        for name, text in csvs.items():
            (out / "tables" / f"{name}.csv").write_text(text)
        _write_fields(cfg, out)
        with open(out / "report.json", "w") as fh:
            json.dump(_clean(report.to_json()), fh, indent=1, sort_keys=True)
            fh.write("\n")
    return report


def _trial_safe(cfg: dict, trial: int) -> dict:
    try:
        return _trial(cfg, trial)
    except RandOrthError as exc:
        diag = {"trial": trial, "error": str(exc), "type": type(exc).__name__}
        if getattr(exc, "residuals", None) is not None:
            diag["residuals"] = np.asarray(exc.residuals, dtype=float).tolist()
        return diag


def _write_fields(cfg: dict, out: Path) -> None:
    """Reference field and the trial-0 potential at the largest n for field kinds."""
    if cfg["kind"] not in ("potential-l1", "tail-boundary") or not cfg.get("params", {}).get("write_fields", True):
        return
    ctx = _Ctx.build(cfg)
    (out / "fields").mkdir(exist_ok=True)
    reference_field(reference_for(ctx.wset), ctx.grid).write_csv(out / "fields" / "reference.csv")
    n = cfg["n"][-1]
    poly = random_polynomial(ctx.basis(n), ctx.law, SeedStream(int(cfg["seed"]), 0, f"coefficients/n={n}"))
    potential_field(poly, ctx.grid).write_csv(out / "fields" / f"potential_n{n}_trial0.csv")


# ---------------------------------------------------------------------------
# diff


def _load_report(p) -> dict:
    p = Path(p)
    if p.is_dir():
        p = p / "report.json"
    with open(p) as fh:
        return json.load(fh)


def report_diff(a, b, atol: float = 0.0, rtol: float = 0.0, tolerances: dict | None = None) -> dict:
    """Field-wise differences between the aggregate tables of two reports.

    ``tolerances`` maps column names to absolute tolerances (Monte Carlo
    bands); other numeric columns use ``atol + rtol * |a|``.  Trial-level
    differences are counted separately.  Tool version and wall clock are
    ignored.
    """
    ra, rb = (r if isinstance(r, dict) else _load_report(r) for r in (a, b))
    if ra["kind"] != rb["kind"]:
        raise ValueError(f"cannot diff a {ra['kind']} report against a {rb['kind']} report")
    tol = tolerances or {}
    agg = []
    for name in sorted(set(ra["tables"]) | set(rb["tables"])):
        if name == "trials":
            continue
        ta, tb = ra["tables"].get(name, []), rb["tables"].get(name, [])
        if len(ta) != len(tb):
            agg.append({"table": name, "row": None, "column": None, "a": len(ta), "b": len(tb)})
            continue
        for i, (x, y) in enumerate(zip(ta, tb)):
            for col in sorted(set(x) | set(y)):
                va, vb = x.get(col), y.get(col)
                if va == vb:
                    continue
                if isinstance(va, (int, float)) and isinstance(vb, (int, float)):
                    lim = tol.get(col, atol + rtol * abs(va))
                    if abs(va - vb) <= lim:
                        continue
                agg.append({"table": name, "row": i, "column": col, "a": va, "b": vb})
    ta, tb = ra["tables"].get("trials", []), rb["tables"].get("trials", [])
    trial_diffs = sum(x != y for x, y in zip(ta, tb)) + abs(len(ta) - len(tb))
    return {"kind": ra["kind"], "aggregate": agg, "trial_rows_differing": trial_diffs,
            "empty": not agg and trial_diffs == 0}
