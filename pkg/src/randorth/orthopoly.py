"""Orthonormal polynomial bases of P_n in L^2(exp(-2nQ) tau).

The basis is built from a triangular factorization of the weighted
node-monomial matrix ``A[i, j] = sqrt(w_i) exp(-n Q(x_i)) x_i^{alpha_j}``:
``A = QR`` with ``R`` upper triangular and positive on the diagonal, so that
``C = R^{-1}`` maps monomials to orthonormal polynomials,
``p_alpha = sum_beta C[beta, alpha] z^beta`` and ``a_alpha = C[alpha, alpha]``.

Three factorization routes are available:

``"mp"``
    Householder QR on gmpy2 numbers at ``precision_bits`` (default 256).
``"qr"``
    LAPACK Householder QR in double precision.
``"gram"``
    For tensor polar grids only: the Gram matrix is assembled from angular
    FFTs of the weight and factored by a diagonally scaled Cholesky.  This is
    what makes the C^2 sets feasible at n = 40, where the node matrix would not
    fit in memory.

``method="auto"`` picks ``"mp"`` when ``precision_bits > 53``; otherwise
``"qr"`` unless the node matrix is large and the measure has a tensor layout.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import gmpy2
import numpy as np
from scipy.linalg import cholesky, solve_triangular

from . import precision as mp
from .errors import ExactnessError, PrecisionInsufficientError, UnsupportedRangeError
from .geometry import (
    DiscreteMeasure,
    MultiIndexOrder,
    WeightedSet,
    monomial_order,
    quadrature_measure,
    quadrature_nodes_mp,
)

DEFAULT_PRECISION = 256
DOUBLE = 53
_QR_SIZE_LIMIT = 4_000_000  # node-matrix entries above which "auto" uses the gram route


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    n: int
    order: MultiIndexOrder
    C: np.ndarray
    precision_bits: int
    method: str = "qr"
    provenance: dict = field(default_factory=dict)
    C_mp: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.C.setflags(write=False)

    @property
    def m(self) -> int:
        return len(self.order)

    @property
    def d(self) -> int:
        return self.order.d

    @property
    def leading(self) -> np.ndarray:
        return np.diag(self.C).real.copy()

    def log_leading(self) -> np.ndarray:
        """``log a_alpha`` taken from the extended-precision factor when present."""
        if self.C_mp is None:
            return np.log(self.leading)
        with mp.context(self.precision_bits):
            return np.array([float(gmpy2.log(self.C_mp[k, k].real)) for k in range(self.m)])


# ---------------------------------------------------------------------------
# monomials


def monomials(points: np.ndarray, order: MultiIndexOrder) -> np.ndarray:
    """``z^alpha`` for every point (rows) and every ``alpha`` in ``order`` (columns)."""
    pts = np.asarray(points, dtype=complex)
    if pts.ndim == 1:
        pts = pts[:, None] if order.d == 1 else pts[None, :]
    if pts.shape[1] != order.d:
        raise UnsupportedRangeError(f"points have dimension {pts.shape[1]}, order has {order.d}")
    alphas = order.as_array()
    out = np.ones((pts.shape[0], len(order)), dtype=complex)
    for i in range(order.d):
        powers = pts[:, i:i + 1] ** np.arange(order.n + 1)[None, :]
        out *= powers[:, alphas[:, i]]
    return out


def _monomials_mp(nodes, order: MultiIndexOrder, bits: int) -> np.ndarray:
    alphas = order.as_array()
    out = np.empty((len(nodes), len(order)), dtype=object)
    with mp.context(bits):
        for r, pt in enumerate(nodes):
            tables = []
            for zi in pt:
                t = [gmpy2.mpc(1)]
                for _ in range(order.n):
                    t.append(t[-1] * zi)
                tables.append(t)
            for c, a in enumerate(alphas):
                v = tables[0][a[0]]
                for i in range(1, order.d):
                    v = v * tables[i][a[i]]
                out[r, c] = v
    return out


# ---------------------------------------------------------------------------
# construction


def _row_scale(measure: DiscreteMeasure, wset: WeightedSet, n: int) -> np.ndarray:
    Q = wset.Q(measure.nodes)
    if not np.all(np.isfinite(Q)):
        raise UnsupportedRangeError("weight is not finite on every node")
    return np.sqrt(measure.weights) * np.exp(-n * Q)


def weighted_matrix(measure: DiscreteMeasure, wset: WeightedSet, n: int,
                    order: MultiIndexOrder | None = None) -> np.ndarray:
    order = order or monomial_order(wset.dim, n)
    return _row_scale(measure, wset, n)[:, None] * monomials(measure.nodes, order)


def _positive_r(R: np.ndarray) -> np.ndarray:
    diag = np.diag(R)
    phase = np.where(diag == 0, 1.0, diag / np.where(diag == 0, 1.0, np.abs(diag)))
    return R * np.conj(phase)[:, None]


def _check_diag(R: np.ndarray, col_norms: np.ndarray, order: MultiIndexOrder, tol: float = 1e-13):
    d = np.abs(np.diag(R))
    bad = np.nonzero(~np.isfinite(d) | (d <= tol * col_norms))[0]
    if len(bad):
        raise PrecisionInsufficientError(
            f"column {order[bad[0]]} is numerically dependent in double precision", column=order[bad[0]])


def _fft_gram(measure: DiscreteMeasure, wset: WeightedSet, n: int, order: MultiIndexOrder) -> np.ndarray:
    """Discrete Gram matrix of the weighted monomials for a tensor polar grid."""
    st = measure.structure
    K, d, M = st.radii.shape[0], st.d, st.M
    w2 = np.exp(-2 * n * wset.Q(measure.nodes)).reshape((K,) + (M,) * d)
    # F[k, m] = sum_j w2[k, j] exp(2 pi i m.j / M)
    F = np.fft.ifftn(w2, axes=tuple(range(1, d + 1)))
    alphas = order.as_array()
    diff = (alphas[None, :, :] - alphas[:, None, :]) % M  # beta - alpha, indexed [alpha, beta]
    logr = np.log(st.radii)  # (K, d)
    G = np.zeros((len(order), len(order)), dtype=complex)
    idx = tuple(diff[..., i] for i in range(d))
    for k in range(K):
        s = np.exp(alphas @ logr[k])  # r^alpha
        G += st.radial_weights[k] * np.outer(s, s) * F[(k,) + idx]
    return G


def _factor_double(measure, wset, n, order, method):
    if method == "gram":
        G = _fft_gram(measure, wset, n, order)
        G = (G + G.conj().T) / 2
        s = np.sqrt(np.real(np.diag(G)))
        if np.any(s <= 0) or not np.all(np.isfinite(s)):
            raise PrecisionInsufficientError("zero column in the Gram matrix", column=None)
        try:
            L = cholesky(G / np.outer(s, s), lower=False)
        except np.linalg.LinAlgError as exc:
            raise PrecisionInsufficientError(f"Gram matrix not positive definite: {exc}") from exc
        R = L * s[None, :]
        col_norms = s
    else:
        A = weighted_matrix(measure, wset, n, order)
        R = np.linalg.qr(A, mode="r")
        R = _positive_r(R)
        col_norms = np.linalg.norm(A, axis=0)
    _check_diag(R, col_norms, order)
    C = solve_triangular(R, np.eye(len(order), dtype=complex), lower=False)
    return np.triu(C)


def weighted_matrix_mp(measure: DiscreteMeasure, wset: WeightedSet, n: int,
                       order: MultiIndexOrder, bits: int) -> np.ndarray:
    """Extended-precision ``sqrt(tau_i) exp(-n Q(z_i)) z_i^alpha`` as an object array."""
    if measure.source is not None:
        nodes, weights = quadrature_nodes_mp(measure.source, measure.exactness, bits)
    else:
        nodes = [tuple(mp.to_mp(row, bits)) for row in measure.nodes]
        weights = [gmpy2.mpfr(float(w), bits) for w in measure.weights]
    V = _monomials_mp(nodes, order, bits)
    with mp.context(bits):
        scale = [gmpy2.sqrt(w) * gmpy2.exp(-n * wset.weight.evaluate_mp(pt)) for pt, w in zip(nodes, weights)]
        return V * np.array(scale, dtype=object)[:, None]


def _factor_mp(measure, wset, n, order, bits):
    A = weighted_matrix_mp(measure, wset, n, order, bits)
    R = mp.householder_r(A, bits, labels=list(order))
    C_mp = mp.upper_inverse(R, bits)
    return C_mp, A


def choose_method(measure: DiscreteMeasure, n: int, d: int, precision_bits: int) -> str:
    if precision_bits > DOUBLE:
        return "mp"
    m = len(monomial_order(d, n))
    if len(measure) * m > _QR_SIZE_LIMIT and measure.structure is not None:
        return "gram"
    return "qr"


def orthonormal_basis(measure: DiscreteMeasure, wset: WeightedSet, n: int,
                      precision_bits: int = DEFAULT_PRECISION, method: str = "auto") -> OrthonormalBasis:
    """Orthonormal basis ``{p_{n,alpha}}`` of ``P_n`` in ``L^2(exp(-2nQ) tau)``.

    Parameters
    ----------
    measure : DiscreteMeasure
        Discretization of ``tau``; its exactness degree must be at least ``2n``.
    wset : WeightedSet
        Supplies the weight ``Q``.
    n : int
        Degree.
    precision_bits : int
        Working precision of the factorization; ``53`` selects hardware
        double precision.
    method : {"auto", "mp", "qr", "gram"}

    Raises
    ------
    PrecisionInsufficientError
        If a column of the node-monomial matrix is numerically dependent.
    """
    if measure.exactness < 2 * n:
        raise ExactnessError(f"measure exactness {measure.exactness} < 2n = {2 * n}")
    if precision_bits < DOUBLE:
        raise UnsupportedRangeError("precision_bits must be at least 53")
    if measure.dim != wset.dim:
        raise UnsupportedRangeError("measure and set dimensions differ")
    order = monomial_order(wset.dim, n)
    if method == "auto":
        method = choose_method(measure, n, wset.dim, precision_bits)
    if method == "gram" and measure.structure is None:
        raise UnsupportedRangeError("gram route needs a tensor polar measure")
    if method == "mp" and precision_bits <= DOUBLE:
        raise UnsupportedRangeError("mp route needs precision_bits > 53")
    prov = {
        "measure_id": _measure_id(measure),
        "Q_id": hashlib.sha1(json.dumps(wset.weight.to_json(), sort_keys=True).encode()).hexdigest()[:12],
        "set": wset.to_json(),
        "exactness": measure.exactness,
    }
    if method == "mp":
        C_mp, _ = _factor_mp(measure, wset, n, order, precision_bits)
        C = mp.to_complex(C_mp)
        return OrthonormalBasis(n, order, np.triu(C), precision_bits, "mp", prov, C_mp)
    C = _factor_double(measure, wset, n, order, method)
    return OrthonormalBasis(n, order, C, DOUBLE, method, prov)


def _measure_id(measure: DiscreteMeasure) -> str:
    if measure.source is not None:
        text = measure.source.key() + f"|D={measure.exactness}"
    else:
        text = hashlib.sha1(measure.nodes.tobytes() + measure.weights.tobytes()).hexdigest()
    return hashlib.sha1(text.encode()).hexdigest()[:12]


@lru_cache(maxsize=128)
def _cached_basis(set_key: str, n: int, bits: int, method: str) -> OrthonormalBasis:
    wset = WeightedSet.from_json(json.loads(set_key))
    return orthonormal_basis(quadrature_measure(wset, 2 * n), wset, n, bits, method)


def basis_for(wset: WeightedSet, n: int, precision_bits: int = DEFAULT_PRECISION,
              method: str = "auto") -> OrthonormalBasis:
    """Memoized basis on the default exact measure (exactness ``2n``)."""
    return _cached_basis(wset.key(), int(n), int(precision_bits), method)


# ---------------------------------------------------------------------------
# evaluation


def evaluate_basis(basis: OrthonormalBasis, points, with_flag: bool = False):
    """Values ``p_{n,alpha}(z)`` in double precision, shape ``(P, m)`` (or ``(m,)`` for one point).

    Overflowed entries are set to ``+inf``; with ``with_flag=True`` a boolean
    overflow flag is returned as well.
    """
    pts = np.asarray(points, dtype=complex)
    single = pts.ndim == 0 or (pts.ndim == 1 and basis.d > 1 and pts.shape[0] == basis.d)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif single:
        pts = pts.reshape(1, -1)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = monomials(pts, basis.order) @ basis.C
    bad = ~np.isfinite(vals)
    if bad.any():
        vals = np.where(bad, np.inf, vals)
    out = vals[0] if single else vals
    return (out, bool(bad.any())) if with_flag else out


def log_bergman(basis: OrthonormalBasis, points) -> np.ndarray:
    """``log B_n`` with max-rescaling so large moduli do not overflow."""
    pts = np.asarray(points, dtype=complex)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts[:, None] if basis.d == 1 else pts[None, :]
    out = np.empty(pts.shape[0])
    chunk = max(1, 2_000_000 // max(1, basis.m))
    for s in range(0, pts.shape[0], chunk):
        p = pts[s:s + chunk]
        r = np.max(np.abs(p), axis=1)
        big = r > 1.0
        q = np.where(big[:, None], p / np.where(big, r, 1.0)[:, None], p)
        # p_alpha(z) = sum_beta C[beta, alpha] z^beta; rescale z^beta by r^{-n}
        mono = monomials(q, basis.order)
        degs = basis.order.degrees()
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            logr = np.log(np.where(big, r, 1.0))
            mono = mono * np.exp((degs[None, :] - basis.n) * logr[:, None])
            vals = mono @ basis.C
            amax = np.max(np.abs(vals), axis=1)
            safe = np.where(amax > 0, amax, 1.0)
            s2 = np.sum(np.abs(vals / safe[:, None]) ** 2, axis=1)
            out[s:s + chunk] = np.where(amax > 0, np.log(s2) + 2 * np.log(safe), -np.inf) + 2 * basis.n * logr
    return out


def leading_coefficients(basis: OrthonormalBasis) -> np.ndarray:
    return basis.leading


def orthonormality_residual(basis: OrthonormalBasis, measure: DiscreteMeasure, wset: WeightedSet) -> float:
    """``max |Gram - I|`` over the discrete measure.

    Extended-precision bases are checked at their own precision; double ones
    through the node matrix (or the FFT Gram for large tensor grids).
    """
    n, order = basis.n, basis.order
    if basis.C_mp is not None:
        bits = basis.precision_bits
        nodes, weights = (quadrature_nodes_mp(measure.source, measure.exactness, bits)
                          if measure.source is not None else
                          ([tuple(mp.to_mp(r, bits)) for r in measure.nodes],
                           [gmpy2.mpfr(float(w), bits) for w in measure.weights]))
        V = _monomials_mp(nodes, order, bits)
        with mp.context(bits):
            scale = [gmpy2.sqrt(w) * gmpy2.exp(-n * wset.weight.evaluate_mp(pt)) for pt, w in zip(nodes, weights)]
            P = (V * np.array(scale, dtype=object)[:, None]) @ basis.C_mp
            G = mp.gram(P, bits)
            resid = max(abs(G[i, j] - (1 if i == j else 0)) for i in range(G.shape[0]) for j in range(G.shape[1]))
            return float(resid)
    if len(measure) * basis.m > _QR_SIZE_LIMIT and measure.structure is not None:
        G0 = _fft_gram(measure, wset, n, order)
        G = basis.C.conj().T @ G0 @ basis.C
    else:
        P = weighted_matrix(measure, wset, n, order) @ basis.C
        G = P.conj().T @ P
    return float(np.max(np.abs(G - np.eye(basis.m))))


def bernstein_markov_constant(basis: OrthonormalBasis, wset: WeightedSet, boundary_nodes) -> float:
    """Optimal ``M_n`` on the sampled ``K``: ``sqrt(max w^{2n} B_n)``."""
    pts = np.asarray(boundary_nodes, dtype=complex)
    if pts.size == 0:
        raise ValueError("empty node set")
    if pts.ndim == 1:
        pts = pts[:, None] if basis.d == 1 else pts[None, :]
    logB = log_bergman(basis, pts)
    val = np.max(logB - 2 * basis.n * wset.Q(pts))
    return float(np.exp(val / 2))


# ---------------------------------------------------------------------------
# persistence


def basis_to_json(basis: OrthonormalBasis) -> dict:
    m = basis.m
    if basis.C_mp is not None:
        entries = [mp.mpc_to_strings(basis.C_mp[i, j]) for i in range(m) for j in range(m)]
    else:
        entries = [[repr(float(c.real)), repr(float(c.imag))] for c in basis.C.reshape(-1)]
    return {
        "schema": "basis-v1",
        "order": {"d": basis.d, "n": basis.n, "indices": [list(a) for a in basis.order]},
        "n": basis.n,
        "precision_bits": basis.precision_bits,
        "method": basis.method,
        "provenance": basis.provenance,
        "C": entries,
    }


def basis_from_json(obj: dict) -> OrthonormalBasis:
    d, n = obj["order"]["d"], obj["n"]
    order = monomial_order(d, n)
    if [list(a) for a in order] != obj["order"]["indices"]:
        warnings.warn("stored multi-index order differs from graded lex; reindexing is not supported")
        raise UnsupportedRangeError("basis file uses an unknown multi-index order")
    m = len(order)
    bits = int(obj["precision_bits"])
    if bits > DOUBLE:
        flat = np.empty(m * m, dtype=object)
        for i, pair in enumerate(obj["C"]):
            flat[i] = mp.mpc_from_strings(pair, bits)
        C_mp = flat.reshape(m, m)
        C = mp.to_complex(C_mp)
    else:
        C_mp = None
        C = np.array([complex(float(a), float(b)) for a, b in obj["C"]]).reshape(m, m)
    return OrthonormalBasis(n, order, C, bits, obj.get("method", "qr"), obj.get("provenance", {}), C_mp)
