import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from randorth import kernels


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


def test_python_backend_always_available():
    assert "python" in kernels.AVAILABLE


def test_aberth_known_roots(backend):
    want = np.array([1.0, -2.0, 0.5j, 3.0 - 1.0j])
    coeffs = np.poly(want)[::-1].astype(complex)
    init = 2.0 * np.exp(2j * np.pi * (np.arange(4) + 0.25) / 4)
    z, it, ok = kernels.aberth(coeffs, init, 1e-14, 200)
    assert ok and it < 200
    np.testing.assert_allclose(np.sort_complex(z), np.sort_complex(want), atol=1e-10)


def test_poly_logabs_values(backend):
    c = np.array([2.0, -3.0, 1.0], dtype=complex)  # (z - 1)(z - 2)
    z = np.array([0.0, 3.0, 10.0, 1e5, 0.5j], dtype=complex)
    got = kernels.poly_logabs(c, z)
    want = np.log(np.abs(np.polyval(c[::-1], z)))
    np.testing.assert_allclose(got, want, rtol=1e-12)


def test_poly_logabs_huge_arguments(backend):
    c = np.ones(201, dtype=complex)
    got = kernels.poly_logabs(c, np.array([1e10 + 0j]))
    assert got[0] == pytest.approx(200 * np.log(1e10), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (2, 12), elements=st.floats(-1, 1)),
       arrays(np.float64, (2, 6), elements=st.floats(-1.5, 1.5)))
def test_backends_agree_on_logabs(craw, zraw):
    c = craw[0] + 1j * craw[1]
    c[-1] += 2.0  # keep the leading coefficient away from zero
    z = zraw[0] + 1j * zraw[1]
    out = {}
    for name in kernels.AVAILABLE:
        kernels.use_backend(name)
        out[name] = kernels.poly_logabs(c, z)
    kernels.use_backend(kernels.AVAILABLE[0])
    with np.errstate(divide="ignore"):
        ref = np.log(np.abs(np.polyval(c[::-1], z)))
    for vals in out.values():
        finite = np.isfinite(ref) & (ref > -20)
        np.testing.assert_allclose(vals[finite], ref[finite], atol=1e-9)


def test_backends_agree_on_roots():
    rng = np.random.default_rng(0)
    c = rng.standard_normal(81) + 1j * rng.standard_normal(81)
    init = 1.1 * np.exp(2j * np.pi * (np.arange(80) + 0.3) / 80)
    roots = {}
    for name in kernels.AVAILABLE:
        kernels.use_backend(name)
        z, _, ok = kernels.aberth(c, init, 1e-13, 500)
        assert ok
        roots[name] = np.sort_complex(z)
    kernels.use_backend(kernels.AVAILABLE[0])
    ref = np.sort_complex(np.roots(c[::-1]))
    for z in roots.values():
        np.testing.assert_allclose(z, ref, atol=1e-8)
