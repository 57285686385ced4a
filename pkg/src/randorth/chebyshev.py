"""Homogenization, the circle-bundle measure and Chebyshev constants.

A polynomial ``G`` of degree at most ``n`` in ``C^d`` lifts to the homogeneous
``P(t, z) = t^n G(z / t)`` in ``C^{d+1}``.  Pushing the weighted measure
``exp(-2nQ) tau`` onto the circles ``|t| = w(lambda) = exp(-Q(lambda))`` over each
base point gives a measure ``nu`` with ``||w^n G||_{L^2(tau)} = ||P||_{L^2(nu)}``.

Two kinds of Chebyshev numbers are computed:

* ``T(n, alpha) = 1 / a_{n,alpha}``, the least weighted L2 norm in the monic
  class ``z^alpha + span{z^beta : beta before alpha}``; read off the
  orthonormal basis and cross-checked through extended-precision normal
  equations.
* ``tau_alpha``, the ``|alpha|``-th root of the least sup norm over a node
  set, computed by Lawson's iteratively reweighted least squares.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import gmpy2

from . import precision as mp
from .errors import ExactnessError, UnsupportedRangeError
from .geometry import DiscreteMeasure, WeightedSet, monomial_order, quadrature_measure, sample_set
from .orthopoly import (
    DEFAULT_PRECISION,
    OrthonormalBasis,
    basis_for,
    monomials,
    weighted_matrix_mp,
)

# ---------------------------------------------------------------------------
# homogeneous polynomials


@dataclass(frozen=True, eq=False)
class HomogeneousPolynomial:
    """``sum_beta coeffs[beta] t^(n-|beta|) z^beta`` in ``C^{d+1}``.

    ``coeffs`` follows ``monomial_order(d, n)``; since ``t`` precedes every
    ``z`` variable, that is also the order of the exponents ``(n-|beta|, beta)``.
    """

    d: int
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        m = len(monomial_order(self.d, self.n))
        if self.coeffs.shape != (m,):
            raise ValueError(f"expected {m} coefficients for degree {self.n} in C^{self.d + 1}")

    @property
    def ambient(self) -> int:
        return self.d + 1

    def exponents(self) -> np.ndarray:
        b = monomial_order(self.d, self.n).as_array()
        return np.column_stack([self.n - b.sum(axis=1), b])

    def terms(self) -> dict:
        """Nonzero coefficients keyed by full exponent tuple ``(t, z_1, ..., z_d)``."""
        return {tuple(int(v) for v in e): complex(c) for e, c in zip(self.exponents(), self.coeffs) if c != 0}

    def __call__(self, points) -> np.ndarray:
        return _homogeneous_monomials(np.asarray(points, dtype=complex).reshape(-1, self.ambient),
                                      self.d, self.n) @ self.coeffs


def _homogeneous_monomials(pts: np.ndarray, d: int, n: int) -> np.ndarray:
    """``t^(n-|beta|) z^beta`` for rows ``(t, z)``; columns in ``monomial_order(d, n)``."""
    order = monomial_order(d, n)
    mono = monomials(pts[:, 1:], order)
    degs = order.degrees()
    tpow = pts[:, :1] ** np.arange(n + 1)[None, :]
    return mono * tpow[:, n - degs]


def _coeff_degree(coeffs: np.ndarray, d: int) -> tuple[int, int]:
    """(declared degree of the layout, actual degree) for monomial coefficients."""
    k = 0
    while len(monomial_order(d, k)) < coeffs.size:
        k += 1
    if len(monomial_order(d, k)) != coeffs.size:
        raise ValueError(f"{coeffs.size} coefficients do not fill a graded layout in C^{d}")
    nz = np.nonzero(coeffs)[0]
    actual = int(monomial_order(d, k).degrees()[nz].max()) if nz.size else 0
    return k, actual


def homogenize(coeffs, n: int, d: int = 1) -> HomogeneousPolynomial:
    """Lift monomial coefficients (graded order in ``C^d``) to ``t^n G(z / t)``."""
    c = np.asarray(coeffs, dtype=complex).reshape(-1)
    k, actual = _coeff_degree(c, d)
    if actual > n:
        raise UnsupportedRangeError(f"polynomial degree {actual} exceeds n = {n}")
    m = len(monomial_order(d, n))
    out = np.zeros(m, dtype=complex)
    keep = min(c.size, m)
    out[:keep] = c[:keep]
    return HomogeneousPolynomial(d, n, out)


def dehomogenize(P: HomogeneousPolynomial) -> np.ndarray:
    """Monomial coefficients of ``P(1, z)`` in ``monomial_order(d, n)``."""
    return P.coeffs.copy()


def lift_basis(basis: OrthonormalBasis) -> list[HomogeneousPolynomial]:
    """``P_{n,alpha}(t, z) = t^n p_{n,alpha}(z / t)`` for every ``alpha``."""
    return [HomogeneousPolynomial(basis.d, basis.n, basis.C[:, k].copy()) for k in range(basis.m)]


# ---------------------------------------------------------------------------
# bundle measure


@dataclass(frozen=True, eq=False)
class BundleMeasure:
    """``nu`` discretized by ``M`` equally spaced points on each fiber circle."""

    measure: DiscreteMeasure
    M: int
    base: DiscreteMeasure
    wset: WeightedSet

    @property
    def nodes(self) -> np.ndarray:
        return self.measure.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.measure.weights

    def to_json(self) -> dict:
        return self.measure.to_json()


def bundle_measure(wset: WeightedSet, base: DiscreteMeasure | None = None, M: int | None = None,
                   n: int | None = None) -> BundleMeasure:
    """Nodes ``(w e^{2 pi i k/M}, w e^{2 pi i k/M} lambda)`` with ``w = exp(-Q(lambda))``.

    Each base node of weight ``tau_i`` spreads into ``M`` nodes of weight
    ``tau_i / M``.  ``M`` defaults to ``2n + 3``; with ``n`` given, ``M`` below
    ``2n + 1`` cannot integrate degree-``n`` homogeneous pairings exactly.
    """
    if base is None:
        if n is None:
            raise ValueError("need either a base measure or the degree n")
        base = quadrature_measure(wset, 2 * n)
    if M is None:
        if n is None:
            raise ValueError("need the fiber count M or the degree n")
        M = 2 * n + 3
    if n is not None and M < 2 * n + 1:
        raise ExactnessError(f"fiber count M = {M} < 2n + 1 = {2 * n + 1}")
    if M < 1:
        raise ValueError("M must be positive")
    lam = base.nodes
    w = np.exp(-wset.Q(lam))
    phase = np.exp(2j * np.pi * np.arange(M) / M)
    t = (w[:, None] * phase[None, :]).reshape(-1)
    z = np.repeat(lam, M, axis=0) * t[:, None]
    nodes = np.column_stack([t, z])
    weights = np.repeat(base.weights / M, M)
    exact = min(base.exactness, M - 1)
    meas = DiscreteMeasure(nodes, weights, exact, base.mass, None, None)
    return BundleMeasure(meas, M, base, wset)


def weighted_norms(coeffs, wset: WeightedSet, base: DiscreteMeasure, n: int) -> tuple[float, float]:
    """``(||w^n G||_{L^2(tau)}, max_i w^n |G|)`` over the base nodes."""
    c = np.asarray(coeffs, dtype=complex)
    order = monomial_order(wset.dim, _coeff_degree(c, wset.dim)[0])
    vals = np.exp(-n * wset.Q(base.nodes)) * np.abs(monomials(base.nodes, order) @ c)
    return float(math.sqrt(np.sum(base.weights * vals ** 2))), float(vals.max())


def bundle_norms(P: HomogeneousPolynomial, bundle: BundleMeasure) -> tuple[float, float]:
    """``(||P||_{L^2(nu)}, max |P|)`` over the bundle nodes."""
    vals = np.abs(P(bundle.nodes))
    return float(math.sqrt(np.sum(bundle.weights * vals ** 2))), float(vals.max())


def lifted_orthonormality_residual(basis: OrthonormalBasis, bundle: BundleMeasure) -> float:
    """``max |<P_alpha, P_beta>_nu - delta|`` over the lifted basis."""
    H = _homogeneous_monomials(bundle.nodes, basis.d, basis.n) @ basis.C
    G = (H.conj().T * bundle.weights) @ H
    return float(np.max(np.abs(G - np.eye(basis.m))))


# ---------------------------------------------------------------------------
# L2 Chebyshev numbers


def l2_chebyshev(basis: OrthonormalBasis, alpha=None):
    """``T(n, alpha) = 1 / a_{n,alpha}`` (all of them when ``alpha`` is None)."""
    logs = basis.log_leading()
    if alpha is None:
        return np.exp(-logs)
    return float(math.exp(-logs[basis.order.position(tuple(np.atleast_1d(alpha)))]))


def l2_chebyshev_lstsq(wset: WeightedSet, n: int, alphas=None, precision_bits: int = DEFAULT_PRECISION,
                       measure: DiscreteMeasure | None = None) -> np.ndarray:
    """``T(n, alpha)`` from the normal equations of the monic least-squares problem.

    For each ``alpha`` (all of them by default) solves
    ``G[:k, :k] c = -G[:k, k]`` with ``G`` the weighted Gram matrix of the
    monomials, at ``precision_bits``, and returns ``sqrt(G[k,k] + G[k,:k] c)``.
    This route never touches the QR factor, so it checks it independently.
    """
    measure = measure or quadrature_measure(wset, 2 * n)
    if measure.exactness < 2 * n:
        raise ExactnessError(f"measure exactness {measure.exactness} < 2n = {2 * n}")
    bits = max(int(precision_bits), 64)
    order = monomial_order(wset.dim, n)
    A = weighted_matrix_mp(measure, wset, n, order, bits)
    G = mp.gram(A, bits)
    pos = range(len(order)) if alphas is None else [order.position(tuple(np.atleast_1d(a))) for a in alphas]
    out = []
    with mp.context(bits):
        for k in pos:
            t2 = G[k, k]
            if k:
                c = mp.solve(G[:k, :k].copy(), -G[:k, k].copy(), bits)
                t2 = t2 + sum((G[k, j] * c[j] for j in range(k)), gmpy2.mpc(0))
            out.append(math.sqrt(max(float(t2.real), 0.0)))
    return np.array(out)


# ---------------------------------------------------------------------------
# sup Chebyshev constants


@dataclass(frozen=True)
class SupChebyshevResult:
    value: float          # tau_alpha = minimax ** (1/|alpha|)
    minimax: float        # best sup found (an upper bound for the discrete minimax)
    lower: float          # Lawson dual bound (a lower bound for the discrete minimax)
    iterations: int
    certified: bool
    coeffs: np.ndarray = field(repr=False)
    competitors: tuple = ()

    @property
    def gap(self) -> float:
        return (self.minimax - self.lower) / self.minimax if self.minimax > 0 else 0.0


def sup_chebyshev(nodes, alpha, homogeneous: bool = False, weights=None, init_weights=None,
                  tol: float = 1e-8, max_iter: int = 5000, cert_tol: float = 1e-4,
                  require_dense: bool = True) -> SupChebyshevResult:
    """Least sup norm over ``nodes`` of a monic polynomial with leading term ``z^alpha``.

    Competitors are the ``z^beta`` preceding ``alpha`` in the graded order,
    restricted to ``|beta| = |alpha|`` when ``homogeneous``.  ``weights``
    multiply the polynomial pointwise (e.g. ``w^n``).  Lawson's update
    ``lam_i <- lam_i |e_i|`` runs until the sup norm changes by at most
    ``tol`` relative and the lower bound ``sqrt(sum lam_i |e_i|^2)`` (valid
    for any probability weights) has either settled too or met the sup to
    ``cert_tol``.  The result is certified when the two bounds agree to
    ``cert_tol`` relative.
    """
    a = tuple(int(v) for v in np.atleast_1d(alpha))
    deg = sum(a)
    if deg == 0:
        raise ValueError("alpha must be nonzero")
    X = np.asarray(nodes, dtype=complex)
    X = X.reshape(-1, 1) if X.ndim == 1 else X
    d = X.shape[1]
    if len(a) != d:
        raise ValueError(f"alpha has {len(a)} entries for points in C^{d}")
    if require_dense and X.shape[0] < 40 * deg:
        raise ValueError(f"node set too sparse: {X.shape[0]} < 40 |alpha| = {40 * deg}")
    order = monomial_order(d, deg)
    k = order.position(a)
    degs = order.degrees()
    comp = [i for i in range(k) if not homogeneous or degs[i] == deg]
    V = monomials(X, order)
    if weights is not None:
        V = V * np.asarray(weights, dtype=float)[:, None]
    f = V[:, k]
    A = V[:, comp]
    lam = np.full(X.shape[0], 1.0 / X.shape[0]) if init_weights is None else \
        np.asarray(init_weights, dtype=float) / np.sum(init_weights)

    best_sup, best_c, best_lower = math.inf, np.zeros(len(comp), dtype=complex), 0.0
    prev = prev_low = math.inf
    settled = False
    it = 0
    for it in range(1, max_iter + 1):
        if comp:
            sw = np.sqrt(lam)
            c = np.linalg.lstsq(sw[:, None] * A, -sw * f, rcond=None)[0]
            e = np.abs(f + A @ c)
        else:
            c = np.zeros(0, dtype=complex)
            e = np.abs(f)
        s = float(e.max())
        low = float(math.sqrt(np.sum(lam * e ** 2)))
        best_lower = max(best_lower, low)
        if s < best_sup:
            best_sup, best_c = s, c
        if abs(s - prev) <= tol * s and (abs(low - prev_low) <= tol * s or s - best_lower <= cert_tol * s):
            settled = True
            break
        prev, prev_low = s, low
        lam = lam * e
        tot = lam.sum()
        if not tot > 0:
            break
        lam = lam / tot
    certified = settled and (best_sup - best_lower) <= cert_tol * best_sup
    return SupChebyshevResult(best_sup ** (1.0 / deg), best_sup, best_lower, it, bool(certified),
                              best_c, tuple(order[i] for i in comp))


def sandwich_check(wset: WeightedSet, n: int, alpha, precision_bits: int = DEFAULT_PRECISION,
                   rel_tol: float = 1e-9) -> dict:
    """Check ``T/sqrt(mass) <= minimax <= max w^n |p~_alpha|`` on the quadrature nodes.

    ``minimax`` is the weighted discrete sup problem over the same monic class
    (all competitors, not only homogeneous ones).
    """
    basis = basis_for(wset, n, precision_bits)
    measure = quadrature_measure(wset, 2 * n)
    a = tuple(int(v) for v in np.atleast_1d(alpha))
    k = basis.order.position(a)
    T = l2_chebyshev(basis, a)
    wn = np.exp(-n * wset.Q(measure.nodes))
    ptilde = basis.C[:, k] / basis.C[k, k].real
    upper = float(np.max(wn * np.abs(monomials(measure.nodes, basis.order) @ ptilde)))
    res = sup_chebyshev(measure.nodes, a, weights=wn, init_weights=measure.weights, require_dense=False)
    lower = T / math.sqrt(measure.mass)
    ok = lower <= res.minimax * (1 + rel_tol) and res.minimax <= upper * (1 + rel_tol)
    return {"alpha": a, "lower": lower, "minimax": res.minimax, "upper": upper, "ok": bool(ok),
            "certified": res.certified}


# ---------------------------------------------------------------------------
# direction scans


def round_to_simplex(theta: Sequence[float], n: int) -> np.ndarray:
    """Integer vector summing to ``n`` nearest to ``n * theta`` (largest remainders)."""
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0) or abs(th.sum() - 1.0) > 1e-12:
        raise ValueError(f"direction {tuple(th)} is not on the simplex")
    x = n * th
    e = np.floor(x).astype(int)
    short = n - int(e.sum())
    if short:
        frac = x - e
        idx = sorted(range(th.size), key=lambda i: (-frac[i], i))[:short]
        e[idx] += 1
    return e


def schedule(theta: Sequence[float], n: int, offsets=None) -> list[tuple[int, np.ndarray]]:
    """Exponent vectors ``(k, e)`` along a direction with offsets ``k``.

    The offset moves ``k`` units from the dominant coordinate of ``theta``
    to the next coordinate (cyclically), so the directions still converge to
    ``theta`` when ``k = o(n)``.  Default offsets are ``0, 1, 2, floor(sqrt n)``.
    """
    base = round_to_simplex(theta, n)
    ks = sorted(set(offsets if offsets is not None else (0, 1, 2, math.isqrt(n))))
    src = int(np.argmax(theta))
    dst = (src + 1) % len(base)
    out = []
    for k in ks:
        if k > base[src]:
            continue
        e = base.copy()
        e[src] -= k
        e[dst] += k
        out.append((k, e))
    return out


@dataclass(frozen=True)
class ScanRow:
    n: int
    k: int
    alpha: tuple
    value: float
    diff: float
    distance: float
    certified: bool = True


@dataclass(frozen=True)
class DirectionScan:
    theta: tuple
    route: str
    rows: tuple

    def values(self, k: int | None = None) -> np.ndarray:
        return np.array([r.value for r in self.rows if k is None or r.k == k])

    def to_json(self) -> dict:
        return {"theta": list(self.theta), "route": self.route,
                "rows": [{"n": r.n, "k": r.k, "alpha": list(r.alpha), "value": r.value,
                          "diff": None if math.isnan(r.diff) else r.diff, "distance": r.distance,
                          "certified": r.certified} for r in self.rows]}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "k", "alpha", "value", "diff", "distance", "certified"])
            for r in self.rows:
                w.writerow([r.n, r.k, ";".join(map(str, r.alpha)), repr(r.value),
                            "" if math.isnan(r.diff) else repr(r.diff), repr(r.distance), int(r.certified)])


def direction_scan(wset: WeightedSet, theta: Sequence[float], ns: Sequence[int], route: str = "l2",
                   offsets=None, homogeneous: bool = True, precision_bits: int = DEFAULT_PRECISION,
                   nodes_per_degree: int = 120) -> DirectionScan:
    """Chebyshev numbers along a direction.

    ``route="l2"``: ``theta`` lies in the simplex of ``C^{d+1}`` (the ``t``
    coordinate first) and the values are ``T(n, alpha)^(1/n)`` for the lifted
    exponent ``(n - |alpha|, alpha)``.  ``route="sup"``: ``theta`` lies in the
    simplex of ``C^d`` and the values are ``tau_alpha`` with ``|alpha| = n``
    over dense samples of ``K`` (the weight is not used).
    """
    th = tuple(float(v) for v in theta)
    if route not in ("l2", "sup"):
        raise ValueError(f"unknown route {route!r}")
    want = wset.dim + 1 if route == "l2" else wset.dim
    if len(th) != want:
        raise ValueError(f"route {route} needs a direction with {want} coordinates")
    if route == "sup" and homogeneous and not wset.is_reinhardt:
        raise ValueError("homogeneous sup constants need a circled set")
    ns = [int(v) for v in ns]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("degree schedule must be strictly increasing")
    rows = []
    last: dict[int, float] = {}
    for n in ns:
        basis = basis_for(wset, n, precision_bits) if route == "l2" else None
        pts = sample_set(wset, nodes_per_degree * n) if route == "sup" else None
        for k, e in schedule(th, n, offsets):
            dist = float(np.linalg.norm(e / n - np.asarray(th)))
            if route == "l2":
                alpha = tuple(int(v) for v in e[1:])
                val = float(math.exp(-basis.log_leading()[basis.order.position(alpha)] / n))
                cert = True
            else:
                alpha = tuple(int(v) for v in e)
                res = sup_chebyshev(pts, alpha, homogeneous=homogeneous)
                val, cert = res.value, res.certified
            diff = val - last[k] if k in last else math.nan
            last[k] = val
            rows.append(ScanRow(n, k, alpha, val, diff, dist, cert))
    return DirectionScan(th, route, tuple(rows))


# ---------------------------------------------------------------------------
# leading-coefficient ratios


def coeff_ratio_probe(basis: OrthonormalBasis, i: int, k: int) -> float:
    """``(1/n) log(a_{n,alpha(i)} / a_{n,alpha(k)})`` for basis positions ``i`` and ``k``."""
    if not (0 <= i < basis.m and 0 <= k < basis.m):
        raise IndexError(f"positions must lie in [0, {basis.m})")
    la = basis.log_leading()
    return float((la[i] - la[k]) / basis.n)


def neighbor_ratios(basis: OrthonormalBasis, lo: float = 0.25, hi: float = 0.75) -> np.ndarray:
    """Probe values for every pair ``(alpha, alpha - e_j)`` with ``lo n <= |alpha| <= hi n``."""
    order = basis.order
    out = []
    for i, a in enumerate(order):
        s = sum(a)
        if not (lo * basis.n <= s <= hi * basis.n):
            continue
        for j in range(basis.d):
            if a[j] >= 1:
                b = list(a)
                b[j] -= 1
                out.append(coeff_ratio_probe(basis, i, order.position(tuple(b))))
    return np.array(out)
