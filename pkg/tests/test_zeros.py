import csv
import math

import gmpy2
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from randorth import kernels, precision as mp
from randorth.ensemble import CoefficientLaw, SeedStream, assemble, random_polynomial
from randorth.errors import DegeneratePolynomialError, RootFindingError
from randorth.experiments import default_precision
from randorth.extremal import Grid, field_distance, reference_field, reference_for
from randorth.geometry import WeightedSet
from randorth.orthopoly import basis_for
from randorth.zeros import (
    EmpiricalZeroMeasure,
    backward_errors,
    cartan_fraction,
    cauchy_radius,
    potential_field,
    radial_sector_histogram,
    roots,
    write_zeros_csv,
)

CIRCLE = WeightedSet.make("circle", R=1.0)
GAUSS = CoefficientLaw.make("complex-gaussian", sigma=1.0)
RADEMACHER = CoefficientLaw.make("rademacher")


def monic_from_roots(z) -> np.ndarray:
    """Expand prod (x - z_i) at 200 bits, so the check sees root errors only."""
    with mp.context(200):
        c = [gmpy2.mpc(1)]
        for r in mp.to_mp(np.asarray(z), 200):
            nxt = [gmpy2.mpc(0)] * (len(c) + 1)
            for k, ck in enumerate(c):
                nxt[k + 1] += ck
                nxt[k] -= r * ck
            c = nxt
        return np.array([complex(v) for v in c])


def kac_measures(law, n, trials, seed=0):
    basis = basis_for(CIRCLE, n)
    return [EmpiricalZeroMeasure.from_polynomial(random_polynomial(basis, law, SeedStream(seed, t)))
            for t in range(trials)]


# ---------------------------------------------------------------------------
# root finding


def test_roots_examples(backend):
    np.testing.assert_allclose(np.sort_complex(roots([-1, 0, 1])), [-1, 1], atol=1e-14)
    triple = roots([0, 0, 0, 1])
    assert triple.size == 3 and np.all(triple == 0)


def test_roots_degenerate():
    with pytest.raises(DegeneratePolynomialError):
        roots([0, 0, 0])
    assert roots([5.0]).size == 0
    np.testing.assert_allclose(roots([2.0, 4.0]), [-0.5])


def test_cauchy_radius_bounds_roots():
    rng = np.random.default_rng(1)
    c = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    rho = cauchy_radius(c)
    lhs = abs(c[-1]) * rho ** 29
    rhs = sum(abs(c[k]) * rho ** k for k in range(29))
    assert lhs == pytest.approx(rhs, rel=1e-10)
    assert np.max(np.abs(np.roots(c[::-1]))) <= rho * (1 + 1e-12)


def test_cauchy_radius_extreme_scales():
    c = np.zeros(201, dtype=complex)
    c[0], c[-1] = 1e300, 1.0
    assert cauchy_radius(c) == pytest.approx(1e300 ** (1 / 200), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (2, 51), elements=st.floats(-1, 1)), st.integers(2, 50))
def test_roots_reconstruct_coefficients(raw, n):
    c = raw[0, : n + 1] + 1j * raw[1, : n + 1]
    c[-1] = 1.0 + abs(c[-1])
    c[0] += 0.5  # keep the constant term away from zero
    z = roots(c)
    assert z.size == n
    monic = monic_from_roots(z)
    target = c / c[-1]
    assert np.max(np.abs(monic - target)) <= 1e-6 * max(1.0, np.max(np.abs(target)))


@pytest.mark.parametrize("n", [50, 200, 400])
def test_random_roots_have_small_residuals(n, backend):
    rng = np.random.default_rng(n)
    c = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
    info = {}
    z = roots(c, info=info)
    assert z.size == n and info["max_residual"] <= 1e-8
    assert np.max(backward_errors(c / np.max(np.abs(c)), z)) <= 1e-8


def test_companion_fallback(monkeypatch):
    monkeypatch.setattr(kernels, "aberth", lambda c, init, tol, it: (init, it, False))
    info = {}
    z = roots([-1, 0, 0, 1], info=info)
    assert info["method"] == "companion"
    np.testing.assert_allclose(np.abs(z), 1.0, atol=1e-12)


def test_root_failure_reports_residuals(monkeypatch):
    monkeypatch.setattr(kernels, "aberth", lambda c, init, tol, it: (init, it, False))
    monkeypatch.setattr(np, "roots", lambda c: np.full(len(c) - 1, 7.0 + 0j))
    with pytest.raises(RootFindingError) as info:
        roots([-1, 0, 0, 1])
    assert info.value.residuals is not None and np.all(info.value.residuals > 1e-8)


# ---------------------------------------------------------------------------
# empirical measures and histograms


def test_histogram_example():
    m = EmpiricalZeroMeasure(np.array([1.0 + 0j, -1.0 + 0j]))
    table = radial_sector_histogram(m, angular_bins=4)
    assert tuple(table.angular_counts) == (1, 0, 1, 0)
    assert m.mass == 1.0 and m.count == 2
    np.testing.assert_allclose(m.weights(), 0.5)


def test_histogram_total_and_csv(tmp_path):
    m = EmpiricalZeroMeasure(np.array([0.1, 0.5j, 2.0, 10.0 - 3j]))
    table = radial_sector_histogram(m, (0.0, 0.25, 1.0, 3.0), 2)
    assert table.counts.sum() == 4
    assert tuple(table.radial_counts) == (1, 1, 2)
    table.write_csv(tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0].startswith("# radial_edges=") and lines[2] == "radial_bin,angular_bin,count"


def test_histogram_rejects_bad_edges():
    m = EmpiricalZeroMeasure(np.array([1.0 + 0j]))
    with pytest.raises(ValueError):
        radial_sector_histogram(m, (1.0, 0.5))


def test_zero_count_equals_effective_degree():
    basis = basis_for(CIRCLE, 8)
    poly = assemble(basis, [1, 0, 1, 0, 0, 0, 0, 0, 0])
    m = EmpiricalZeroMeasure.from_polynomial(poly)
    assert m.count == poly.effective_degree == 2
    assert m.provenance["effective_degree"] == 2


def test_kac_concentration_and_atomic_agreement():
    g = np.mean([m.annulus_fraction(0.9, 1.1) for m in kac_measures(GAUSS, 200, 50, 1)])
    r = np.mean([m.annulus_fraction(0.9, 1.1) for m in kac_measures(RADEMACHER, 200, 50, 2)])
    assert g >= 0.85 and r >= 0.85
    assert abs(g - r) <= 0.05


def test_kac_angular_uniformity():
    bins = 8
    counts = np.zeros(bins)
    for m in kac_measures(GAUSS, 200, 50, 3):
        counts += radial_sector_histogram(m, angular_bins=bins).angular_counts
    total = counts.sum()
    p = 1.0 / bins
    sigma = math.sqrt(total * p * (1 - p))
    assert np.all(np.abs(counts - total * p) <= 3 * sigma)


def test_ginibre_zeros_inside_droplet(geometries):
    wset = geometries["ginibre-disk"]
    basis = basis_for(wset, 100, default_precision(wset))
    fr = []
    for t in range(5):
        m = EmpiricalZeroMeasure.from_polynomial(random_polynomial(basis, GAUSS, SeedStream(4, t)))
        fr.append(m.fraction(lambda z: np.abs(z) <= 0.75))
    assert np.mean(fr) >= 0.7


def test_zeros_csv(tmp_path):
    write_zeros_csv(tmp_path / "z.csv", [(0, EmpiricalZeroMeasure(np.array([1 + 2j]))),
                                         (3, EmpiricalZeroMeasure(np.array([-0.5 + 0j, 0.25j])))])
    rows = list(csv.reader(open(tmp_path / "z.csv")))
    assert rows[0] == ["trial", "re", "im"] and len(rows) == 4 and rows[3] == ["3", "0.0", "0.25"]


# ---------------------------------------------------------------------------
# potentials


def test_potential_of_constant_is_zero():
    poly = assemble(basis_for(CIRCLE, 5), np.eye(6)[0])
    field = potential_field(poly, Grid(shape=(21, 21)))
    np.testing.assert_allclose(field.values, 0.0, atol=1e-15)


def test_circle_potential_close_to_reference():
    grid = Grid(shape=(101, 101))
    ref = reference_field(reference_for(CIRCLE), grid)
    basis = basis_for(CIRCLE, 100)
    d = [field_distance(potential_field(random_polynomial(basis, GAUSS, SeedStream(6, t)), grid), ref)
         for t in range(20)]
    assert np.median(d) <= 0.1


def test_polydisk_slice_potential_improves(geometries):
    wset = geometries["polydisk"]
    grid = Grid(shape=(61, 61), d=2, coord=0, fixed=(0j,))
    ref = reference_field(reference_for(wset), grid)
    med = []
    for n in (10, 30):
        basis = basis_for(wset, n, default_precision(wset))
        med.append(np.median([field_distance(potential_field(random_polynomial(basis, GAUSS, SeedStream(8, t)), grid), ref)
                              for t in range(7)]))
    assert med[1] < med[0]


def test_potential_grid_dimension_mismatch(geometries):
    poly = assemble(basis_for(CIRCLE, 3), np.ones(4))
    with pytest.raises(ValueError):
        potential_field(poly, Grid(d=2, fixed=(0j,), shape=(5, 5)))


# ---------------------------------------------------------------------------
# Cartan sublevel sets


def test_cartan_examples(backend):
    assert cartan_fraction([0, 1], 0.1) == pytest.approx(0.01, abs=2e-4)
    assert cartan_fraction([0, 0, 1], 0.1) == pytest.approx(0.01, abs=2e-4)
    assert cartan_fraction([1], 0.1) == 0.0
    assert cartan_fraction([1], 0.9) == 0.0


def test_cartan_rejects_bad_eps():
    with pytest.raises(ValueError):
        cartan_fraction([0, 1], 1.0)
    with pytest.raises(DegeneratePolynomialError):
        cartan_fraction([0, 0], 0.5)


def test_cartan_bound_random_polynomials():
    rng = np.random.default_rng(11)
    for _ in range(25):
        deg = int(rng.integers(1, 21))
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        for eps in (0.05, 0.1, 0.2):
            assert cartan_fraction(c, eps, nr=300, na=128) <= 5 * eps ** 2
