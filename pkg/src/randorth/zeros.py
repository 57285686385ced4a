"""Zeros of univariate random polynomials and the statistics built on them.

Roots come from an Aberth-Ehrlich iteration (compiled kernel when built)
started on a perturbed circle at the Cauchy radius, with companion-matrix
eigenvalues as fallback.  Every root is checked for a small backward error
``|p(z)| / sum_k |c_k| |z|^k``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from . import kernels
from .ensemble import RandomPolynomial, log_abs_G
from .errors import DegeneratePolynomialError, RootFindingError
from .extremal import CLAMP_FLOOR, Grid, ScalarField

ROOT_TOL = 1e-12
RESIDUAL_TOL = 1e-8
MAX_ITER = 500


def cauchy_radius(coeffs) -> float:
    """Unique positive root of ``|c_N| x^N = sum_{k<N} |c_k| x^k`` (solved in log space)."""
    c = np.asarray(coeffs, dtype=complex)
    N = c.size - 1
    with np.errstate(divide="ignore"):
        la = np.log(np.abs(c[:-1])) - np.log(abs(c[-1]))
    k = np.arange(N)
    mask = np.isfinite(la)
    if not mask.any():
        return 0.0
    la, k = la[mask], k[mask]

    def f(s):  # strictly decreasing in s
        return logsumexp(la + (k - N) * s)

    hi = float(np.logaddexp(0.0, la.max()))
    lo = hi - 1.0
    while f(lo) < 0:
        lo -= 2.0 * (hi - lo)
    return math.exp(brentq(f, lo, hi, xtol=1e-14))


def _initial_guesses(c: np.ndarray) -> np.ndarray:
    N = c.size - 1
    rho = cauchy_radius(c)
    # deterministic perturbation: shifted angles and a slight radial wobble
    j = np.arange(N)
    radius = rho * (1.0 + 0.01 * np.cos(3.0 * j))
    return radius * np.exp(1j * (2 * np.pi * j / N + 0.4 / max(N, 1) + 0.25))


def backward_errors(coeffs, zs) -> np.ndarray:
    """``|p(z)| / sum_k |c_k| |z|^k`` for each candidate root."""
    c = np.ascontiguousarray(coeffs, dtype=complex)
    zs = np.ascontiguousarray(zs, dtype=complex)
    num = kernels.poly_logabs(c, zs)
    den = kernels.poly_logabs(np.abs(c).astype(complex), np.abs(zs).astype(complex))
    return np.exp(num - den)


def roots(coeffs, tol: float = ROOT_TOL, residual_tol: float = RESIDUAL_TOL,
          max_iter: int = MAX_ITER, info: dict | None = None) -> np.ndarray:
    """All zeros of ``sum_k coeffs[k] z^k`` with multiplicity.

    Exact-zero coefficients at either end are stripped first; each stripped
    low-order coefficient contributes a root at the origin.  If ``info`` is a
    dict it receives the method used, iteration count and worst residual.
    """
    c = np.asarray(coeffs, dtype=complex).reshape(-1)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        raise DegeneratePolynomialError("all coefficients are zero")
    low, top = int(nz[0]), int(nz[-1])
    core = c[low:top + 1]
    core = core / np.max(np.abs(core))
    N = core.size - 1
    origin = np.zeros(low, dtype=complex)
    info = {} if info is None else info
    if N == 0:
        info.update(method="trivial", iterations=0, max_residual=0.0)
        return origin
    if N == 1:
        z = np.array([-core[0] / core[1]])
        info.update(method="linear", iterations=0, max_residual=float(backward_errors(core, z).max()))
        return np.concatenate([origin, z])

    z, it, ok = kernels.aberth(core, _initial_guesses(core), tol, max_iter)
    res = backward_errors(core, z) if ok else None
    method = "aberth"
    if not ok or not np.all(res <= residual_tol):
        z = np.roots(core[::-1])
        res = backward_errors(core, z)
        method = "companion"
        if z.size != N or not np.all(res <= residual_tol):
            raise RootFindingError(
                f"root finding failed for degree {N}: worst backward error {np.max(res):.3e}",
                residuals=res)
    info.update(method=method, iterations=int(it), max_residual=float(np.max(res)))
    return np.concatenate([origin, z])


# ---------------------------------------------------------------------------
# empirical zero measures


@dataclass(frozen=True, eq=False)
class EmpiricalZeroMeasure:
    """Uniform probability measure on a multiset of zeros."""

    zeros: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return int(self.zeros.size)

    @property
    def mass(self) -> float:
        return 1.0 if self.count else 0.0

    def weights(self, normalize: int | None = None) -> np.ndarray:
        """Point masses ``1/count``, or ``1/normalize`` (e.g. ``n``) when given."""
        k = normalize if normalize is not None else self.count
        return np.full(self.count, 1.0 / k) if k else np.zeros(0)

    def fraction(self, predicate) -> float:
        """Mass of the zeros satisfying ``predicate(z)`` (vectorized)."""
        return float(np.mean(predicate(self.zeros))) if self.count else 0.0

    def annulus_fraction(self, r_in: float, r_out: float) -> float:
        a = np.abs(self.zeros)
        return self.fraction(lambda z: (a >= r_in) & (a <= r_out))

    def radial_cdf(self, r) -> np.ndarray:
        a = np.sort(np.abs(self.zeros))
        return np.searchsorted(a, np.asarray(r, dtype=float), side="right") / max(self.count, 1)

    @classmethod
    def from_polynomial(cls, poly: RandomPolynomial, **provenance) -> "EmpiricalZeroMeasure":
        if poly.d != 1:
            raise ValueError("zero measures are only formed for univariate polynomials")
        info: dict = {}
        z = roots(poly.monomial, info=info)
        prov = {"n": poly.n, "effective_degree": poly.effective_degree} | poly.seed | info | provenance
        return cls(z, prov)


@dataclass(frozen=True)
class HistogramTable:
    radial_edges: np.ndarray
    angular_bins: int
    counts: np.ndarray  # (radial bins, angular bins)

    @property
    def angular_counts(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def radial_counts(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("# radial_edges=" + ",".join(repr(float(e)) for e in self.radial_edges) + "\n")
            fh.write(f"# angular_bins={self.angular_bins} (equal sectors from angle 0)\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["radial_bin", "angular_bin", "count"])
            for i in range(self.counts.shape[0]):
                for j in range(self.counts.shape[1]):
                    w.writerow([i, j, int(self.counts[i, j])])


def radial_sector_histogram(measure: EmpiricalZeroMeasure, radial_edges=(0.0, math.inf),
                            angular_bins: int = 1) -> HistogramTable:
    """Counts of zeros per (radial shell, angular sector).

    Shell ``i`` is ``[e_i, e_{i+1})``; zeros beyond the last edge are counted
    in the outermost shell so that the table total equals the zero count.
    """
    edges = np.asarray(radial_edges, dtype=float)
    if edges.size < 2 or angular_bins < 1:
        raise ValueError("need at least one radial bin and one angular bin")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("radial edges must be strictly increasing")
    z = measure.zeros
    rb = np.clip(np.searchsorted(edges, np.abs(z), side="right") - 1, 0, edges.size - 2)
    ang = np.mod(np.angle(z), 2 * np.pi)
    ab = np.minimum((ang / (2 * np.pi / angular_bins)).astype(int), angular_bins - 1)
    counts = np.zeros((edges.size - 1, angular_bins), dtype=np.int64)
    np.add.at(counts, (rb, ab), 1)
    return HistogramTable(edges, angular_bins, counts)


def write_zeros_csv(path, measures) -> None:
    """Dump ``trial,re,im`` rows for a sequence of ``(trial, measure)`` pairs."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "re", "im"])
        for trial, m in measures:
            for z in m.zeros:
                w.writerow([trial, repr(float(z.real)), repr(float(z.imag))])


# ---------------------------------------------------------------------------
# potentials


def potential_field(poly: RandomPolynomial, grid: Grid, clamp: float = CLAMP_FLOOR) -> ScalarField:
    """``(1/n) log |G_n|`` on a grid (a complex-line slice when ``d = 2``)."""
    if grid.d != poly.d:
        raise ValueError(f"grid dimension {grid.d} does not match polynomial dimension {poly.d}")
    vals = log_abs_G(poly, grid.points(), clamp=clamp)
    return ScalarField(grid, vals.reshape(grid.shape), clamp, {"what": "potential", "n": poly.n} | poly.seed)


def _polar_midpoints(center: complex, radius: float, nr: int, na: int) -> np.ndarray:
    r = radius * np.sqrt((np.arange(nr) + 0.5) / nr)
    th = 2 * np.pi * (np.arange(na) + 0.5) / na
    return (center + r[:, None] * np.exp(1j * th[None, :])).reshape(-1)


def cartan_fraction(poly, eps: float, center: complex = 0.0, radius: float = 1.0,
                    nr: int = 1000, na: int = 256, degree: int | None = None) -> float:
    """Area fraction of the disk where ``|p| <= eps^deg * ||p||_disk``.

    ``poly`` is a :class:`RandomPolynomial` or ascending monomial coefficients.
    The disk is sampled on an equal-area polar midpoint grid; the sup norm is
    taken over that grid and a dense boundary circle.  ``deg`` defaults to the
    actual degree, with constants treated as degree 1.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    c = poly.monomial[: poly.n + 1] if isinstance(poly, RandomPolynomial) else np.asarray(poly, dtype=complex)
    c = np.ascontiguousarray(c, dtype=complex)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        raise DegeneratePolynomialError("cartan_fraction of the zero polynomial")
    c = c[: nz[-1] + 1]
    deg = max(c.size - 1, 1) if degree is None else degree
    pts = _polar_midpoints(complex(center), radius, nr, na)
    circ = complex(center) + radius * np.exp(2j * np.pi * np.arange(8 * na) / (8 * na))
    logv = kernels.poly_logabs(c, pts)
    lsup = max(logv.max(), kernels.poly_logabs(c, circ).max())
    return float(np.mean(logv <= deg * math.log(eps) + lsup))
