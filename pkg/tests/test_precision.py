import gmpy2
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from randorth import precision as mp
from randorth.errors import PrecisionInsufficientError


def _random_matrix(rng, m, n):
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


def test_householder_matches_numpy_up_to_phase():
    rng = np.random.default_rng(1)
    A = _random_matrix(rng, 9, 5)
    R = mp.to_complex(mp.householder_r(mp.to_mp(A, 128), 128))
    R_np = np.linalg.qr(A, mode="r")
    np.testing.assert_allclose(np.abs(R), np.abs(R_np), atol=1e-12)
    assert np.all(np.diag(R).real > 0) and np.all(np.diag(R).imag == 0)
    np.testing.assert_allclose(np.triu(R), R, atol=0)
    # R^H R reproduces the Gram matrix
    np.testing.assert_allclose(R.conj().T @ R, A.conj().T @ A, atol=1e-11)


def test_householder_names_dependent_column():
    rng = np.random.default_rng(2)
    A = rng.integers(-5, 6, size=(6, 3)).astype(complex)
    A[:, 2] = A[:, 0] - 2 * A[:, 1]  # exact in binary, so exactly dependent
    with pytest.raises(PrecisionInsufficientError) as info:
        mp.householder_r(mp.to_mp(A, 128), 128, labels=["a", "b", "c"])
    assert info.value.column == "c"


def test_upper_inverse():
    rng = np.random.default_rng(3)
    R = np.triu(_random_matrix(rng, 5, 5)) + 4 * np.eye(5)
    C = mp.to_complex(mp.upper_inverse(mp.to_mp(R, 200), 200))
    np.testing.assert_allclose(C @ R, np.eye(5), atol=1e-13)
    assert np.all(np.tril(C, -1) == 0)


def test_solve_and_gram():
    rng = np.random.default_rng(4)
    A = _random_matrix(rng, 7, 4)
    G = mp.gram(mp.to_mp(A, 128), 128)
    np.testing.assert_allclose(mp.to_complex(G), A.conj().T @ A, atol=1e-12)
    b = rng.standard_normal(4) + 0j
    x = mp.to_complex(mp.solve(G, mp.to_mp(b, 128), 128))
    np.testing.assert_allclose((A.conj().T @ A) @ x, b, atol=1e-10)


def test_solve_singular():
    M = mp.to_mp(np.zeros((2, 2)), 64)
    with pytest.raises(PrecisionInsufficientError):
        mp.solve(M, mp.to_mp(np.ones(2), 64), 64)


def test_extended_precision_beats_double():
    """A Hilbert-like system that double precision cannot resolve."""
    n = 14
    H = 1.0 / (np.arange(n)[:, None] + np.arange(n)[None, :] + 1)
    x_true = np.ones(n)
    with mp.context(256):
        Hm = np.array([[gmpy2.mpc(1) / (i + j + 1) for j in range(n)] for i in range(n)], dtype=object)
        b = Hm @ mp.to_mp(x_true, 256)
    x = mp.to_complex(mp.solve(Hm, b, 256))
    assert np.max(np.abs(x - x_true)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 2, elements=st.floats(-1e300, 1e300, allow_nan=False)))
def test_decimal_strings_roundtrip(pair):
    z = mp.to_mp(np.array([complex(pair[0], pair[1])]), 256)[0]
    back = mp.mpc_from_strings(mp.mpc_to_strings(z), 256)
    assert back == z
