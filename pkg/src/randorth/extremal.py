"""Bergman functions, extremal-function estimates, references and threshold counts."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import GridMismatchError, UnsupportedRangeError
from .geometry import WeightedSet, WeightExpr
from .orthopoly import (
    DEFAULT_PRECISION,
    OrthonormalBasis,
    basis_for,
    evaluate_basis,
    log_bergman,
)

CLAMP_FLOOR = -50.0


@dataclass(frozen=True)
class Grid:
    """Rectangular lattice over ``[x0, x1] x [y0, y1]`` in one complex coordinate.

    For sets in C^2 the lattice is a slice: coordinate ``coord`` varies over
    the lattice while the others are held at ``fixed``.
    """

    box: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0)
    shape: tuple[int, int] = (201, 201)
    d: int = 1
    coord: int = 0
    fixed: tuple[complex, ...] = ()

    def __post_init__(self):
        x0, x1, y0, y1 = self.box
        if not (x1 > x0 and y1 > y0) or min(self.shape) < 2:
            raise ValueError("grid box must be nondegenerate with at least 2 points per axis")
        if len(self.fixed) != self.d - 1:
            raise ValueError("a slice of C^d needs d - 1 fixed coordinates")

    @property
    def spacing(self) -> tuple[float, float]:
        x0, x1, y0, y1 = self.box
        return (x1 - x0) / (self.shape[0] - 1), (y1 - y0) / (self.shape[1] - 1)

    def axes(self):
        x0, x1, y0, y1 = self.box
        return np.linspace(x0, x1, self.shape[0]), np.linspace(y0, y1, self.shape[1])

    def complex_points(self) -> np.ndarray:
        """Varying coordinate at every node, shape ``(nx, ny)`` with x first."""
        x, y = self.axes()
        return x[:, None] + 1j * y[None, :]

    def points(self) -> np.ndarray:
        """Points in C^d, shape ``(nx * ny, d)``."""
        z = self.complex_points().reshape(-1)
        out = np.empty((z.size, self.d), dtype=complex)
        others = iter(self.fixed)
        for j in range(self.d):
            out[:, j] = z if j == self.coord else next(others)
        return out

    def to_json(self) -> dict:
        return {"box": list(self.box), "shape": list(self.shape), "d": self.d, "coord": self.coord,
                "fixed": [[c.real, c.imag] for c in map(complex, self.fixed)]}

    @classmethod
    def from_json(cls, obj: dict) -> "Grid":
        return cls(tuple(obj.get("box", (-2, 2, -2, 2))), tuple(obj.get("shape", (201, 201))),
                   int(obj.get("d", 1)), int(obj.get("coord", 0)),
                   tuple(complex(a, b) for a, b in obj.get("fixed", [])))


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray
    clamp: float = CLAMP_FLOOR
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != tuple(self.grid.shape):
            raise GridMismatchError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray], clamp=CLAMP_FLOOR, **prov):
        vals = np.asarray(fn(grid.points()), dtype=float).reshape(grid.shape)
        return cls(grid, np.maximum(vals, clamp), clamp, dict(prov))

    def write_csv(self, path) -> None:
        path = Path(path)
        x, y = self.grid.axes()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "value"])
            for i, xi in enumerate(x):
                for j, yj in enumerate(y):
                    w.writerow([repr(float(xi)), repr(float(yj)), repr(float(self.values[i, j]))])
        sidecar = {"box": list(self.grid.box), "spacing": list(self.grid.spacing), "clamp": self.clamp,
                   "grid": self.grid.to_json(), "provenance": self.provenance}
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True, default=str))

    @classmethod
    def read_csv(cls, path) -> "ScalarField":
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        grid = Grid.from_json(meta["grid"])
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        return cls(grid, data[:, 2].reshape(grid.shape), meta["clamp"], meta.get("provenance", {}))


# ---------------------------------------------------------------------------
# Bergman function and extremal estimate


def bergman_fn(basis: OrthonormalBasis, point) -> float:
    """``B_n(z) = sum_alpha |p_{n,alpha}(z)|^2``; saturates at ``inf`` past double range."""
    lb = float(log_bergman(basis, np.atleast_1d(np.asarray(point, dtype=complex)).reshape(1, -1))[0])
    return math.exp(lb) if lb < 709.0 else math.inf


def extremal_estimate(basis: OrthonormalBasis, grid: Grid, clamp: float = CLAMP_FLOOR) -> ScalarField:
    """``(1/2n) log B_n`` on the grid."""
    vals = log_bergman(basis, grid.points()) / (2 * basis.n)
    return ScalarField(grid, np.maximum(vals, clamp).reshape(grid.shape), clamp,
                       {"what": "extremal_estimate", "n": basis.n})


# ---------------------------------------------------------------------------
# closed-form references


REFERENCE_TAGS = ("circle-unweighted", "interval-unweighted", "ginibre-disk",
                  "polydisk-unweighted", "ball-unweighted", "ellipsoid-unweighted")


@dataclass(frozen=True)
class ReferenceExtremal:
    """Closed-form ``V_{K,Q}`` for the solved configurations.

    ``polydisk-unweighted`` (``max_j log+ |z_j| / R``) and ``ball-unweighted``
    (``log+ |z| / R``) extend the one-variable references to slices of C^2.
    ``ellipsoid-unweighted`` is the ball reference pulled back through the
    linear map ``(z_1 / r, z_2 / A)`` that carries the ellipsoid onto the ball.
    """

    tag: str
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.tag not in REFERENCE_TAGS:
            raise UnsupportedRangeError(f"no closed-form reference for {self.tag!r}")

    @classmethod
    def make(cls, tag: str, **params) -> "ReferenceExtremal":
        return cls(tag, tuple(sorted(params.items())))

    def __call__(self, points) -> np.ndarray:
        return reference_extremal(self, points)


_C2_TAGS = ("polydisk-unweighted", "ball-unweighted", "ellipsoid-unweighted")


def _interval_green(z: np.ndarray, a: float, b: float) -> np.ndarray:
    u = (2 * z - (a + b)) / (b - a)
    w = u + np.sqrt(u - 1) * np.sqrt(u + 1)  # |w| >= 1 on the whole plane
    return np.maximum(np.log(np.abs(w)), 0.0)


def reference_extremal(ref: ReferenceExtremal, points) -> np.ndarray:
    p = dict(ref.params)
    tag = ref.tag
    pts = np.asarray(points, dtype=complex)
    scalar = pts.ndim == 0 or (pts.ndim == 1 and tag in _C2_TAGS)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts[None, :] if scalar else pts[:, None]
    with np.errstate(divide="ignore"):
        if tag == "circle-unweighted":
            out = np.maximum(np.log(np.abs(pts[:, 0]) / p.get("R", 1.0)), 0.0)
        elif tag == "interval-unweighted":
            out = _interval_green(pts[:, 0], p.get("a", -1.0), p.get("b", 1.0))
        elif tag == "ginibre-disk":
            r2 = np.abs(pts[:, 0]) ** 2
            outer = 0.5 * np.log(np.maximum(r2, 1e-300)) + (1 + math.log(2)) / 2
            out = np.where(r2 <= 0.5, r2, outer)
        elif tag == "polydisk-unweighted":
            out = np.max(np.maximum(np.log(np.abs(pts) / p.get("R", 1.0)), 0.0), axis=1)
        elif tag == "ellipsoid-unweighted":
            scaled = pts / np.array([p["r"], p["A"]])
            out = np.maximum(np.log(np.linalg.norm(scaled, axis=1)), 0.0)
        else:
            out = np.maximum(np.log(np.linalg.norm(pts, axis=1) / p.get("R", 1.0)), 0.0)
    return float(out[0]) if scalar else out


def reference_for(wset: WeightedSet) -> ReferenceExtremal | None:
    """Closed-form reference matching a shipped configuration, if there is one."""
    p, w = wset.p, wset.weight
    if wset.kind == "circle" and w.is_constant and w.evaluate(np.zeros((1, 1)))[0] == 0:
        return ReferenceExtremal.make("circle-unweighted", R=p["R"])
    if wset.kind == "interval" and w.is_constant and w.evaluate(np.zeros((1, 1)))[0] == 0:
        return ReferenceExtremal.make("interval-unweighted", a=p["a"], b=p["b"])
    if wset.kind == "disk" and p["R"] == 1.0 and w == _GINIBRE_Q:
        return ReferenceExtremal.make("ginibre-disk")
    if wset.kind == "polydisk" and w.is_constant and w.evaluate(np.zeros((1, 2)))[0] == 0:
        return ReferenceExtremal.make("polydisk-unweighted", R=p["R"])
    if wset.kind == "ball" and w.is_constant and w.evaluate(np.zeros((1, 2)))[0] == 0:
        return ReferenceExtremal.make("ball-unweighted", R=p["R"])
    if wset.kind == "ellipsoid" and w.is_constant and w.evaluate(np.zeros((1, 2)))[0] == 0:
        return ReferenceExtremal.make("ellipsoid-unweighted", r=p["r"], A=p["A"])
    return None


_GINIBRE_Q = WeightExpr.abs2(0)


def reference_field(ref: ReferenceExtremal, grid: Grid, clamp: float = CLAMP_FLOOR) -> ScalarField:
    return ScalarField.from_function(grid, lambda P: reference_extremal(ref, P), clamp, what=ref.tag)


def field_distance(a: ScalarField, b: ScalarField, mode: str = "L1") -> float:
    """Mean absolute difference over the grid (``L1``) or the maximum (``sup``)."""
    if a.grid != b.grid:
        raise GridMismatchError("fields live on different grids")
    diff = np.abs(a.values - b.values)
    if mode == "L1":
        return float(np.mean(diff))
    if mode == "sup":
        return float(np.max(diff))
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# threshold counts


def threshold_count(values, n: int, threshold: float) -> int:
    """``#{alpha : (1/n) log |value_alpha| >= threshold}``."""
    v = np.abs(np.asarray(values, dtype=complex))
    with np.errstate(divide="ignore"):
        logs = np.log(v) / n
    # tolerate rounding in the last place for values sitting exactly on the threshold
    return int(np.count_nonzero(logs >= threshold - 1e-12))


def jn_count(basis: OrthonormalBasis, point, eps: float, vref: float) -> int:
    """``J_n(z, eps)`` with ``V_{K,Q}(z)`` supplied by the caller."""
    return threshold_count(evaluate_basis(basis, point), basis.n, vref - eps)


def kn_count(basis: OrthonormalBasis, point, level: float) -> int:
    """``K_n(M)`` for the array ``z_alpha = p_{n,alpha}(z)``."""
    return threshold_count(evaluate_basis(basis, point), basis.n, level)


def low_degree_flatness(wset: WeightedSet, point, alpha_of_n: Callable[[int], Sequence[int] | int],
                        schedule: Sequence[int], precision_bits: int = DEFAULT_PRECISION) -> np.ndarray:
    """Trace ``(1/n) log |p_{n, alpha_n}(z)|`` along ``schedule``.

    ``alpha_of_n`` picks the multi-index (or the plain degree when ``d = 1``);
    its degree should stay ``o(n / log n)``.
    """
    out = []
    for n in schedule:
        a = alpha_of_n(n)
        a = (int(a),) if np.isscalar(a) else tuple(int(x) for x in a)
        if sum(a) > n:
            raise ValueError(f"alpha {a} has degree above n = {n}")
        basis = basis_for(wset, n, precision_bits)
        val = evaluate_basis(basis, point)[basis.order.position(a)]
        with np.errstate(divide="ignore"):
            out.append(math.log(abs(val)) / n if val != 0 else -math.inf)
    return np.array(out)


def extremal_gap(wset: WeightedSet, n: int, grid: Grid, mode: str = "sup",
                 precision_bits: int = DEFAULT_PRECISION) -> float:
    """Distance between ``(1/2n) log B_n`` and the closed-form reference on ``grid``."""
    ref = reference_for(wset)
    if ref is None:
        raise UnsupportedRangeError(f"no reference extremal function for {wset.kind}")
    basis = basis_for(wset, n, precision_bits)
    return field_distance(extremal_estimate(basis, grid), reference_field(ref, grid), mode)
