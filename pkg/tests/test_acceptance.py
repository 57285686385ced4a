"""Acceptance criteria, one test per criterion at its stated tolerance and time budget.

Each test records a single summary line (printed at the end of the session)
before asserting, so a failing criterion still reports what it measured.
"""
import math
import time

import numpy as np
import pytest

from randorth.chebyshev import (
    bundle_measure,
    bundle_norms,
    direction_scan,
    homogenize,
    l2_chebyshev,
    lifted_orthonormality_residual,
    neighbor_ratios,
    sup_chebyshev,
    weighted_norms,
)
from randorth.ensemble import CoefficientLaw, SeedStream, sample_coefficients
from randorth.experiments import default_precision, run
from randorth.extremal import Grid, extremal_gap, jn_count, kn_count, reference_for
from randorth.geometry import sample_set
from randorth.orthopoly import basis_for
from randorth.zeros import cartan_fraction

from conftest import GEOMETRIES, load_geometry, load_shipped_config
from test_orthopoly import chebyshev_deviation_mp

pytestmark = pytest.mark.acceptance

BOX = Grid((-2.0, 2.0, -2.0, 2.0), (201, 201))


class Budget:
    def __init__(self, seconds: float):
        self.seconds = seconds
        self.t0 = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    @property
    def ok(self) -> bool:
        return self.elapsed <= self.seconds

    def __str__(self) -> str:
        return f"[{self.elapsed:.1f}s / {self.seconds:.0f}s]"


def summary_rows(cfg: dict, **changes) -> tuple[list[dict], list[dict]]:
    cfg = dict(cfg, **changes)
    report = run(cfg, write=False)
    assert report.status == "ok", report.records
    return report.tables["summary"], report.thresholds


def at(rows, n, column):
    return next(r[column] for r in rows if r["n"] == n)


def test_criterion_01_exact_bases(record_criterion):
    clock = Budget(10)
    circle, interval = load_geometry("circle"), load_geometry("interval")
    circ = max(float(np.max(np.abs(basis_for(circle, n).C - np.eye(n + 1)))) for n in range(0, 41))
    cheb = max(chebyshev_deviation_mp(basis_for(interval, n)) for n in range(1, 31))
    passed = circ <= 1e-10 and cheb <= 1e-8 and clock.ok
    record_criterion(1, passed, f"circle dev {circ:.1e}, interval dev {cheb:.1e} {clock}")
    assert passed


def test_criterion_02_extremal_convergence(record_criterion):
    clock = Budget(120)
    circle, ginibre = load_geometry("circle"), load_geometry("ginibre-disk")
    cg = [extremal_gap(circle, n, BOX, "sup") for n in (10, 20, 40)]
    gg = [extremal_gap(ginibre, n, BOX, "sup", default_precision(ginibre)) for n in (10, 20, 40)]
    passed = (cg[2] <= 0.05 and cg[0] > cg[1] > cg[2] and gg[0] > gg[1] > gg[2] and clock.ok)
    record_criterion(2, passed, "circle sup gaps " + ", ".join(f"{g:.4f}" for g in cg)
                     + "; ginibre " + ", ".join(f"{g:.4f}" for g in gg) + f" {clock}")
    assert passed


def test_criterion_03_kac_with_atoms(record_criterion):
    clock = Budget(180)
    rad, _ = summary_rows(load_shipped_config("kac-rademacher"), n=[200], trials=50)
    gau, _ = summary_rows(load_shipped_config("kac-gaussian"), n=[200], trials=50)
    fr, fg = at(rad, 200, "mean_annulus"), at(gau, 200, "mean_annulus")
    passed = fr >= 0.85 and abs(fr - fg) <= 0.05 and clock.ok
    record_criterion(3, passed, f"annulus fraction rademacher {fr:.4f}, gaussian {fg:.4f} {clock}")
    assert passed


def test_criterion_04_weighted_zeros(record_criterion):
    clock = Budget(180)
    rows, _ = summary_rows(load_shipped_config("ginibre-zeros"), n=[100], trials=20)
    inside, sup = at(rows, 100, "mean_inside"), at(rows, 100, "cdf_sup")
    passed = inside >= 0.70 and sup <= 0.1 and clock.ok
    record_criterion(4, passed, f"inside |z|<=0.75 {inside:.4f}, radial cdf sup {sup:.4f} {clock}")
    assert passed


def test_criterion_05_potential(record_criterion):
    clock = Budget(180)
    medians = {}
    for name in ("potential-gaussian", "potential-rademacher"):
        rows, _ = summary_rows(load_shipped_config(name), n=[25, 50, 100], trials=20)
        medians[name] = [at(rows, n, "median_l1") for n in (25, 50, 100)]
    passed = clock.ok and all(m[0] > m[1] > m[2] and m[2] <= 0.1 for m in medians.values())
    record_criterion(5, passed, "; ".join(
        f"{k.split('-')[1]} medians " + ", ".join(f"{v:.4f}" for v in m) for k, m in medians.items()) + f" {clock}")
    assert passed


def test_criterion_06_threshold_counts(record_criterion):
    clock = Budget(60)
    circle = load_geometry("circle")
    J = tuple(jn_count(basis_for(circle, n), 0.5, 0.1, 0.0) for n in (20, 40))

    worst_k = 0
    rng = SeedStream(6, 0, "acceptance-kn").generator()
    for name in GEOMETRIES:
        wset = load_geometry(name)
        ref = reference_for(wset)
        pts = rng.uniform(-1.5, 1.5, (10, wset.dim)) + 1j * rng.uniform(-1.5, 1.5, (10, wset.dim))
        for n in (30, 40):
            basis = basis_for(wset, n, default_precision(wset))
            for p in pts:
                z = p[0] if wset.dim == 1 else p
                worst_k = max(worst_k, kn_count(basis, z, float(ref(z)) + 0.1))

    ginibre = load_geometry("ginibre-disk")
    v = float(reference_for(ginibre)(0.4))
    growth = [jn_count(basis_for(ginibre, n, default_precision(ginibre)), 0.4, 0.1, v) for n in (10, 40)]

    passed = J == (3, 5) and worst_k == 0 and growth[1] > growth[0] and clock.ok
    record_criterion(6, passed, f"J_n(0.5,0.1) at n=(20,40) = {J} (stated (3, 5)), max K_n = {worst_k}, "
                                f"ginibre J at n=10,40 = {growth} {clock}")
    assert passed


def test_criterion_07_homogenization(record_criterion):
    clock = Budget(30)
    law = CoefficientLaw.make("complex-gaussian", sigma=1.0)
    n, worst_norm, worst_orth = 10, 0.0, 0.0
    for name in ("circle", "ginibre-disk"):
        wset = load_geometry(name)
        nu = bundle_measure(wset, n=n)
        for trial in range(20):
            c = sample_coefficients(law, n + 1, SeedStream(7, trial, f"acceptance-{name}"))
            l2, _ = weighted_norms(c, wset, nu.base, n)
            l2b, _ = bundle_norms(homogenize(c, n), nu)
            worst_norm = max(worst_norm, abs(l2 - l2b) / max(1.0, l2))
        worst_orth = max(worst_orth, lifted_orthonormality_residual(basis_for(wset, n), nu))
    passed = worst_norm <= 1e-10 and worst_orth <= 1e-10 and clock.ok
    record_criterion(7, passed, f"norm identity {worst_norm:.1e}, lifted orthonormality {worst_orth:.1e} {clock}")
    assert passed


def test_criterion_08_chebyshev_oracles(record_criterion):
    clock = Budget(120)
    ident = 0.0
    for name, n in (("circle", 30), ("interval", 30), ("ginibre-disk", 30), ("ball", 10), ("ellipsoid", 10)):
        b = basis_for(load_geometry(name), n, default_precision(load_geometry(name)))
        ident = max(ident, float(np.max(np.abs(l2_chebyshev(b) * np.exp(b.log_leading()) - 1.0))))
    polydisk = sample_set(load_geometry("polydisk"), 4000)
    poly = max(abs(sup_chebyshev(polydisk, a).value - 1.0) for a in ((1, 0), (2, 1), (3, 3)))
    ball = sup_chebyshev(sample_set(load_geometry("ball"), 6000), (1, 1)).value
    ell = load_geometry("ellipsoid")
    scan = direction_scan(ell, (1.0, 0.0), [30], route="sup", offsets=[0, 1, 2])
    ell_dev = max(abs(r.value - ell.p["r"]) for r in scan.rows)
    passed = ident <= 1e-10 and poly <= 1e-3 and abs(ball - 0.7071) <= 1e-3 and ell_dev <= 0.05 and clock.ok
    record_criterion(8, passed, f"T*a-1 {ident:.1e}, polydisk dev {poly:.1e}, ball tau(1,1) {ball:.5f}, "
                                f"ellipsoid scan dev {ell_dev:.4f} {clock}")
    assert passed


def test_criterion_09_leading_ratios(record_criterion):
    clock = Budget(60)
    worst = {}
    for name in ("circle", "interval", "ginibre-disk"):
        wset = load_geometry(name)
        worst[name] = float(np.max(np.abs(neighbor_ratios(basis_for(wset, 40, default_precision(wset))))))
    passed = max(worst.values()) <= 0.05 and clock.ok
    record_criterion(9, passed, ", ".join(f"{k} {v:.4f}" for k, v in worst.items()) + f" {clock}")
    assert passed


def test_criterion_10_boundary_tail(record_criterion):
    """Exploratory: the threshold is advisory, so only the run itself must succeed."""
    clock = Budget(180)
    rows, thresholds = summary_rows(load_shipped_config("tail-boundary"))
    f50, f200 = at(rows, 50, "exceed_freq"), at(rows, 200, "exceed_freq")
    held = f200 >= 0.5 * f50
    record_criterion(10, held and clock.ok, f"exceed freq n=50 {f50:.3f}, n=200 {f200:.3f} (advisory) {clock}",
                     advisory=True)
    assert all(t["advisory"] for t in thresholds)


def test_criterion_11_cartan(record_criterion):
    clock = Budget(30)
    rng = SeedStream(11, 0, "acceptance-cartan").generator()
    worst = {eps: 0.0 for eps in (0.05, 0.1, 0.2)}
    for _ in range(100):
        deg = int(rng.integers(0, 21))
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        for eps in worst:
            worst[eps] = max(worst[eps], cartan_fraction(c, eps) / (5 * eps ** 2))
    passed = max(worst.values()) <= 1.0 and clock.ok
    record_criterion(11, passed, "max fraction / 5eps^2: " + ", ".join(f"{e}: {v:.3f}" for e, v in worst.items())
                     + f" {clock}")
    assert passed
