import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from randorth.ensemble import (
    CoefficientLaw,
    SeedStream,
    assemble,
    classify_tail,
    evaluate_G,
    evaluate_monomial,
    log_abs_G,
    random_polynomial,
    sample_coefficients,
    sample_log_coefficients,
    write_coefficients_csv,
)
from randorth.experiments import default_precision
from randorth.geometry import WeightedSet
from randorth.orthopoly import basis_for

CIRCLE = WeightedSet.make("circle", R=1.0)
INTERVAL = WeightedSet.make("interval", a=-1.0, b=1.0)


# ---------------------------------------------------------------------------
# laws and tails


def test_classify_examples():
    assert classify_tail(CoefficientLaw.make("rademacher"), 1) == "satisfies"
    assert classify_tail(CoefficientLaw.make("log-pareto", gamma=1.0), 1) == "boundary_fails"
    assert classify_tail(CoefficientLaw.make("log-pareto", gamma=3.0), 2) == "satisfies"
    assert classify_tail(CoefficientLaw.make("log-pareto", gamma=0.5), 1) == "fails"


@given(st.floats(0.05, 6.0), st.integers(1, 3))
def test_classify_log_pareto_against_dimension(gamma, d):
    got = classify_tail(CoefficientLaw.make("log-pareto", gamma=gamma), d)
    expected = "satisfies" if gamma > d else ("boundary_fails" if gamma == d else "fails")
    assert got == expected


def test_classify_rejects_bad_dimension():
    with pytest.raises(ValueError):
        classify_tail(CoefficientLaw.make("rademacher"), 0)


@pytest.mark.parametrize("kind,params", [("nope", {}), ("rademacher", {"sigma": 1.0}),
                                         ("complex-gaussian", {"sigma": -1.0}),
                                         ("log-pareto", {})])
def test_invalid_laws(kind, params):
    with pytest.raises(ValueError):
        CoefficientLaw.make(kind, **params)


@pytest.mark.parametrize("law", [CoefficientLaw.make("complex-gaussian", sigma=2.0), CoefficientLaw.make("rademacher"),
                                 CoefficientLaw.make("uniform-disk", R=0.5), CoefficientLaw.make("log-pareto", gamma=1.5)])
def test_law_json_roundtrip(law):
    assert CoefficientLaw.from_json(json.loads(json.dumps(law.to_json()))) == law


def test_rademacher_reproducible_and_centered():
    law = CoefficientLaw.make("rademacher")
    a = sample_coefficients(law, 4, SeedStream(123))
    b = sample_coefficients(law, 4, SeedStream(123))
    np.testing.assert_array_equal(a, b)
    assert set(np.unique(a.real)) <= {-1.0, 1.0} and np.all(a.imag == 0)
    big = sample_coefficients(law, 100_000, SeedStream(5))
    assert abs(big.real.mean()) <= 0.02


def test_log_pareto_tail_probability():
    law = CoefficientLaw.make("log-pareto", gamma=2.0)
    logmod, _ = sample_log_coefficients(law, 1_000_000, SeedStream(9))
    t = logmod + np.log1p(np.exp(-logmod))  # log(1 + |xi|) from log|xi|
    assert abs(np.mean(t > 2.0) - 0.25) <= 0.002


def test_log_pareto_ks_distance():
    law = CoefficientLaw.make("log-pareto", gamma=2.0)
    logmod, _ = sample_log_coefficients(law, 100_000, SeedStream(10))
    t = np.logaddexp(0.0, logmod)
    ks = stats.kstest(t, lambda x: 1.0 - law.log_tail(x)).statistic
    assert ks <= 0.01


def test_gaussian_second_moment():
    xi = sample_coefficients(CoefficientLaw.make("complex-gaussian", sigma=1.0), 1_000_000, SeedStream(11))
    assert abs(np.mean(np.abs(xi) ** 2) - 1.0) <= 0.01


def test_uniform_disk_radius_law():
    xi = sample_coefficients(CoefficientLaw.make("uniform-disk", R=2.0), 200_000, SeedStream(12))
    assert np.max(np.abs(xi)) <= 2.0
    assert abs(np.mean(np.abs(xi) <= 1.0) - 0.25) <= 0.005


def test_heavy_tail_never_overflows():
    law = CoefficientLaw.make("log-pareto", gamma=0.3)
    poly = random_polynomial(basis_for(CIRCLE, 50), law, SeedStream(3))
    assert np.all(np.isfinite(poly.coeffs)) and np.max(np.abs(poly.coeffs)) == pytest.approx(1.0)
    vals = log_abs_G(poly, np.array([0.5, 2.0]))
    assert np.all(np.isfinite(vals))


# ---------------------------------------------------------------------------
# seeds


def test_streams_are_order_independent():
    law = CoefficientLaw.make("complex-gaussian", sigma=1.0)
    forward = [sample_coefficients(law, 8, SeedStream(7, t)) for t in range(5)]
    backward = [sample_coefficients(law, 8, SeedStream(7, t)) for t in reversed(range(5))][::-1]
    for a, b in zip(forward, backward):
        np.testing.assert_array_equal(a, b)
    assert not np.array_equal(forward[0], forward[1])
    other = sample_coefficients(law, 8, SeedStream(7, 0, "something-else"))
    assert not np.array_equal(forward[0], other)


# ---------------------------------------------------------------------------
# assembly and evaluation


def test_assemble_examples():
    basis = basis_for(CIRCLE, 6)
    one = assemble(basis, np.eye(7)[0])
    assert one.effective_degree == 0
    assert evaluate_G(one, 0.3 + 2j) == pytest.approx(1.0)
    for k in range(7):
        poly = assemble(basis, np.eye(7)[k])
        np.testing.assert_allclose(poly.monomial, np.eye(7)[k], atol=1e-15)
    ipoly = assemble(basis_for(INTERVAL, 6), np.eye(7)[1])
    np.testing.assert_allclose(ipoly.monomial, [0, math.sqrt(2), 0, 0, 0, 0, 0], atol=1e-14)


def test_evaluate_examples():
    basis = basis_for(CIRCLE, 10)
    ones = assemble(basis, np.ones(11))
    assert evaluate_G(ones, 0.0) == pytest.approx(1.0)
    assert evaluate_G(ones, 2.0) == pytest.approx(2047.0, rel=1e-13)


def test_assemble_rejects_wrong_length_and_nonfinite():
    basis = basis_for(CIRCLE, 4)
    with pytest.raises(ValueError):
        assemble(basis, np.ones(4))
    with pytest.raises(ValueError):
        assemble(basis, np.array([1, 2, np.inf, 0, 0]))


def test_effective_degree_with_vanishing_top():
    basis = basis_for(CIRCLE, 5)
    assert assemble(basis, [1, 1, 0, 0, 0, 0]).effective_degree == 1
    assert assemble(basis, np.zeros(6)).effective_degree == -1


@pytest.mark.parametrize("name", ["circle", "interval", "ginibre-disk", "polydisk", "ball"])
@pytest.mark.parametrize("n", [5, 15, 30])
def test_basis_and_monomial_forms_agree(name, n, geometries):
    wset = geometries[name]
    basis = basis_for(wset, n, default_precision(wset))
    poly = random_polynomial(basis, CoefficientLaw.make("complex-gaussian", sigma=1.0), SeedStream(n))
    rng = np.random.default_rng(n)
    r = 2.0 * np.sqrt(rng.random((100, wset.dim)))
    pts = r * np.exp(2j * np.pi * rng.random((100, wset.dim)))
    pts = pts[:, 0] if wset.dim == 1 else pts
    a = evaluate_G(poly, pts)
    b = evaluate_monomial(poly, pts)
    scale = np.sqrt(np.sum(np.abs(basis.C) ** 2))  # guards points near zeros of G
    rel = np.abs(a - b) / np.maximum(np.abs(a), 1e-300)
    assert np.all((rel <= 1e-6) | (np.abs(a - b) <= 1e-12 * scale * 2.0 ** n))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([10, 25]))
def test_log_abs_matches_direct(seed, n):
    poly = random_polynomial(basis_for(CIRCLE, n), CoefficientLaw.make("complex-gaussian", sigma=1.0), SeedStream(seed))
    z = np.array([0.3, 0.9j, -1.4, 1.9 + 0.2j])
    direct = np.log(np.abs(evaluate_monomial(poly, z))) / n
    np.testing.assert_allclose(log_abs_G(poly, z), np.maximum(direct, -50.0), atol=1e-10)


def test_coefficient_csv(tmp_path):
    poly = random_polynomial(basis_for(CIRCLE, 3), CoefficientLaw.make("log-pareto", gamma=1.0), SeedStream(1))
    write_coefficients_csv(tmp_path / "c.csv", poly)
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0].startswith("# log_scale=") and lines[1] == "re,im" and len(lines) == 6
