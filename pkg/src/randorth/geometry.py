"""Compact sets, weights, multi-index orders and exact discrete measures.

A :class:`WeightedSet` pairs a compact set ``K`` (circle, interval, disk in C;
ball, polydisk or ellipsoid in C^2) with a weight ``Q`` given as a small
closed-form expression tree.  :func:`quadrature_measure` discretizes the
reference measure on ``K`` so that every pairing ``z^a conj(z^b)`` with
``|a| + |b| <= D`` is integrated exactly; at degree ``n`` with ``D >= 2n`` the
discrete Gram matrix of the monomials then equals the continuous one.

For the two-dimensional sets the reference measure lives on the Shilov
boundary (torus for the polydisk, the boundary sphere for the ball and the
ellipsoid).  Sup norms of polynomials are attained there, so these measures are
Bernstein-Markov for the solid sets.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import gmpy2
import numpy as np

from . import precision as mp
from .errors import UnsupportedRangeError, WeightDomainError

GEOM_SCHEMA = "geom-v1"

SET_KINDS = {
    "circle": (1, ("R",)),
    "interval": (1, ("a", "b")),
    "disk": (1, ("R",)),
    "ball": (2, ("R",)),
    "polydisk": (2, ("R",)),
    "ellipsoid": (2, ("r", "A")),
}


# ---------------------------------------------------------------------------
# multi-indices


@dataclass(frozen=True)
class MultiIndexOrder:
    """Graded lexicographic order on multi-indices with ``|alpha| <= n``.

    Within a fixed total degree the first coordinate is strongest, so for
    ``d = 2`` the order reads ``1, z, w, z^2, zw, w^2, ...``.
    """

    d: int
    n: int
    indices: tuple[tuple[int, ...], ...] = field(repr=False)
    _pos: dict = field(repr=False, compare=False, hash=False)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __getitem__(self, i):
        return self.indices[i]

    def position(self, alpha) -> int:
        return self._pos[tuple(alpha)]

    def degrees(self) -> np.ndarray:
        return np.array([sum(a) for a in self.indices], dtype=int)

    def as_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=int).reshape(len(self), self.d)


def _graded_block(d: int, k: int):
    # exponents of total degree k, first coordinate descending
    if d == 1:
        yield (k,)
        return
    for a in range(k, -1, -1):
        for rest in _graded_block(d - 1, k - a):
            yield (a,) + rest


@lru_cache(maxsize=None)
def monomial_order(d: int, n: int) -> MultiIndexOrder:
    """Return the graded lexicographic order of all ``alpha`` in N^d, ``|alpha| <= n``."""
    if d not in (1, 2, 3):
        raise UnsupportedRangeError(f"dimension d={d} not supported (expected 1, 2 or 3)")
    if not isinstance(n, (int, np.integer)) or n < 0 or n > 400:
        raise UnsupportedRangeError(f"degree n={n} not supported (expected 0 <= n <= 400)")
    idx = tuple(a for k in range(n + 1) for a in _graded_block(d, k))
    return MultiIndexOrder(d, int(n), idx, {a: i for i, a in enumerate(idx)})


# ---------------------------------------------------------------------------
# weight expressions


_OPS = ("const", "abs", "abs2", "re", "log1p_norm2", "sum", "scale")


@dataclass(frozen=True)
class WeightExpr:
    """Closed-form expression tree for the weight ``Q``.

    Leaves are ``const``, ``abs`` (``|z_j|``), ``abs2`` (``|z_j|^2``), ``re``
    (``Re z_j``) and ``log1p_norm2`` (``log(1 + |z|^2)``); inner nodes are
    ``sum`` and ``scale``.  Variables are zero-based.
    """

    op: str
    value: float = 0.0
    var: int = 0
    args: tuple["WeightExpr", ...] = ()

    def __post_init__(self):
        if self.op not in _OPS:
            raise UnsupportedRangeError(f"unknown weight op {self.op!r}")

    # constructors
    @classmethod
    def const(cls, c: float) -> "WeightExpr":
        return cls("const", value=float(c))

    @classmethod
    def abs2(cls, j: int = 0) -> "WeightExpr":
        return cls("abs2", var=j)

    @classmethod
    def abs_(cls, j: int = 0) -> "WeightExpr":
        return cls("abs", var=j)

    @classmethod
    def re(cls, j: int = 0) -> "WeightExpr":
        return cls("re", var=j)

    @classmethod
    def log1p_norm2(cls) -> "WeightExpr":
        return cls("log1p_norm2")

    def __add__(self, other: "WeightExpr") -> "WeightExpr":
        if isinstance(other, (int, float)):
            other = WeightExpr.const(other)
        return WeightExpr("sum", args=(self, other))

    def scaled(self, c: float) -> "WeightExpr":
        return WeightExpr("scale", value=float(c), args=(self,))

    @property
    def is_constant(self) -> bool:
        if self.op == "const":
            return True
        if self.op in ("sum", "scale"):
            return all(a.is_constant for a in self.args)
        return False

    @property
    def is_radial(self) -> bool:
        """True when Q depends on the moduli ``|z_j|`` only."""
        if self.op in ("const", "abs", "abs2", "log1p_norm2"):
            return True
        if self.op == "re":
            return False
        return all(a.is_radial for a in self.args)

    def max_var(self) -> int:
        if self.op in ("abs", "abs2", "re"):
            return self.var
        return max((a.max_var() for a in self.args), default=-1)

    # evaluation
    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate on an array of points with shape ``(P, d)``."""
        pts = np.asarray(points, dtype=complex)
        if pts.ndim == 1:
            pts = pts[:, None]
        op = self.op
        if op == "const":
            return np.full(pts.shape[0], self.value)
        if op == "abs":
            return np.abs(pts[:, self.var])
        if op == "abs2":
            return np.abs(pts[:, self.var]) ** 2
        if op == "re":
            return pts[:, self.var].real.copy()
        if op == "log1p_norm2":
            return np.log1p(np.sum(np.abs(pts) ** 2, axis=1))
        if op == "sum":
            return sum(a.evaluate(pts) for a in self.args)
        return self.value * self.args[0].evaluate(pts)

    def evaluate_mp(self, point):
        """Evaluate at one point given as a sequence of gmpy2 ``mpc`` values."""
        op = self.op
        if op == "const":
            return gmpy2.mpfr(self.value)
        if op == "abs":
            return abs(point[self.var])
        if op == "abs2":
            return gmpy2.norm(point[self.var])
        if op == "re":
            return point[self.var].real
        if op == "log1p_norm2":
            return gmpy2.log1p(sum((gmpy2.norm(c) for c in point), gmpy2.mpfr(0)))
        if op == "sum":
            return sum((a.evaluate_mp(point) for a in self.args), gmpy2.mpfr(0))
        return gmpy2.mpfr(self.value) * self.args[0].evaluate_mp(point)

    def to_json(self) -> dict:
        if self.op == "const":
            return {"op": "const", "value": self.value}
        if self.op in ("abs", "abs2", "re"):
            return {"op": self.op, "var": self.var}
        if self.op == "log1p_norm2":
            return {"op": "log1p_norm2"}
        if self.op == "sum":
            return {"op": "sum", "args": [a.to_json() for a in self.args]}
        return {"op": "scale", "value": self.value, "args": [self.args[0].to_json()]}

    @classmethod
    def from_json(cls, obj: Any) -> "WeightExpr":
        if isinstance(obj, (int, float)):
            return cls.const(obj)
        if not isinstance(obj, dict) or "op" not in obj:
            raise UnsupportedRangeError(f"malformed weight expression: {obj!r}")
        op = obj["op"]
        if op == "const":
            return cls.const(obj.get("value", 0.0))
        if op in ("abs", "abs2", "re"):
            return cls(op, var=int(obj.get("var", 0)))
        if op == "log1p_norm2":
            return cls(op)
        if op == "sum":
            return cls("sum", args=tuple(cls.from_json(a) for a in obj["args"]))
        if op == "scale":
            return cls("scale", value=float(obj["value"]), args=(cls.from_json(obj["args"][0]),))
        raise UnsupportedRangeError(f"unknown weight op {op!r}")


# ---------------------------------------------------------------------------
# weighted sets


@dataclass(frozen=True)
class WeightedSet:
    kind: str
    params: tuple[tuple[str, float], ...]
    weight: WeightExpr = WeightExpr.const(0.0)

    def __post_init__(self):
        if self.kind not in SET_KINDS:
            raise UnsupportedRangeError(f"unsupported set kind {self.kind!r}")
        need = SET_KINDS[self.kind][1]
        names = {k for k, _ in self.params}
        if set(need) != names:
            raise UnsupportedRangeError(f"{self.kind} needs params {need}, got {sorted(names)}")
        if self.weight.max_var() >= self.dim:
            raise UnsupportedRangeError("weight refers to a coordinate outside the set dimension")
        p = self.p
        if self.kind == "interval" and not p["a"] < p["b"]:
            raise UnsupportedRangeError("interval needs a < b")
        if any(v <= 0 for k, v in self.params if k not in ("a", "b")):
            raise UnsupportedRangeError("radii must be positive")

    @classmethod
    def make(cls, kind: str, weight: WeightExpr | None = None, **params) -> "WeightedSet":
        return cls(kind, tuple(sorted((k, float(v)) for k, v in params.items())),
                   weight if weight is not None else WeightExpr.const(0.0))

    @property
    def p(self) -> dict:
        return dict(self.params)

    @property
    def dim(self) -> int:
        return SET_KINDS[self.kind][0]

    @property
    def is_reinhardt(self) -> bool:
        return self.kind != "interval"

    def key(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def Q(self, points) -> np.ndarray:
        return self.weight.evaluate(points)

    def to_json(self) -> dict:
        return {"schema": GEOM_SCHEMA, "kind": self.kind, "params": self.p,
                "weight_expr": self.weight.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "WeightedSet":
        schema = obj.get("schema", GEOM_SCHEMA)
        if schema != GEOM_SCHEMA:
            raise UnsupportedRangeError(f"unknown geometry schema {schema!r}")
        return cls.make(obj["kind"], WeightExpr.from_json(obj.get("weight_expr", 0.0)),
                        **obj.get("params", {}))

    def sup_coordinate(self, j: int) -> float:
        """``max_{z in K} |z_j|``."""
        p = self.p
        if self.kind == "interval":
            return max(abs(p["a"]), abs(p["b"]))
        if self.kind == "ellipsoid":
            return p["r"] if j == 0 else p["A"]
        return p["R"]


def weight_eval(wset: WeightedSet, point) -> tuple[float, float]:
    """Return ``(Q(point), exp(-Q(point)))``."""
    pt = np.atleast_1d(np.asarray(point, dtype=complex)).reshape(1, -1)
    if pt.shape[1] != wset.dim:
        raise UnsupportedRangeError(f"point has dimension {pt.shape[1]}, set has {wset.dim}")
    with np.errstate(all="ignore"):
        q = float(wset.Q(pt)[0])
    if not math.isfinite(q):
        raise WeightDomainError(f"Q is not finite at {point!r}")
    return q, math.exp(-q)


# ---------------------------------------------------------------------------
# discrete measures


@dataclass(frozen=True)
class TensorAngular:
    """Node layout ``z_i = radii[k, i] * exp(2 pi 1j * j_i / M)``.

    Nodes are enumerated radial index first, then the angular indices in
    lexicographic order; node weight is ``radial_weights[k] / M**d``.
    """

    radii: np.ndarray
    radial_weights: np.ndarray
    M: int

    @property
    def d(self) -> int:
        return self.radii.shape[1]


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    nodes: np.ndarray
    weights: np.ndarray
    exactness: int
    mass: float = 1.0
    source: WeightedSet | None = None
    structure: TensorAngular | None = None

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ValueError("discrete measure weights must be positive")
        total = float(np.sum(self.weights))
        if abs(total - self.mass) > 1e-12 * max(1.0, abs(self.mass)):
            raise ValueError(f"weights sum to {total}, declared mass {self.mass}")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def __len__(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values: np.ndarray):
        return np.sum(self.weights * values)

    def to_json(self) -> dict:
        return {
            "schema": "measure-v1",
            "exactness": self.exactness,
            "mass": self.mass,
            "nodes": [[[float(c.real), float(c.imag)] for c in row] for row in self.nodes],
            "weights": [float(w) for w in self.weights],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteMeasure":
        nodes = np.array([[complex(re, im) for re, im in row] for row in obj["nodes"]])
        return cls(nodes, np.array(obj["weights"], dtype=float), int(obj["exactness"]),
                   float(obj.get("mass", 1.0)))


def _weight_margin(wset: WeightedSet, D: int) -> tuple[int, int]:
    """Extra (radial, angular) nodes so that ``exp(-2nQ)`` with ``D = 2n`` is integrated accurately.

    Exactness only covers polynomial pairings; a non-constant ``Q`` makes the
    integrand non-polynomial, and about ``D / 2`` extra Gauss nodes bring the
    weighted moments to near machine precision.
    """
    if wset.weight.is_constant:
        return 0, 0
    return D // 2, (0 if wset.weight.is_radial else D // 2)


def _radial_rule(wset: WeightedSet, D: int):
    """Radial part: radii per coordinate and weights summing to one."""
    kind, p = wset.kind, wset.p
    extra = _weight_margin(wset, D)[0]
    if kind == "circle":
        return np.array([[p["R"]]]), np.array([1.0])
    if kind == "polydisk":
        return np.array([[p["R"], p["R"]]]), np.array([1.0])
    if kind == "disk":
        # Gauss-Legendre in s = r^2 / R^2, uniform for normalized area; after the
        # angular sum only s^j with 2j <= D survives
        N = D // 4 + 1 + extra
        x, w = np.polynomial.legendre.leggauss(N)
        s = (x + 1) / 2
        return p["R"] * np.sqrt(s)[:, None], w / 2
    # sphere-type boundaries: u = |z_1|^2 / r_1^2 is uniform on [0, 1]
    N = D // 4 + 1 + extra
    x, w = np.polynomial.legendre.leggauss(N)
    u = (x + 1) / 2
    r1, r2 = (p["R"], p["R"]) if kind == "ball" else (p["r"], p["A"])
    return np.column_stack([r1 * np.sqrt(u), r2 * np.sqrt(1 - u)]), w / 2


def _tensor_nodes(radii: np.ndarray, M: int) -> np.ndarray:
    d = radii.shape[1]
    phases = np.exp(2j * np.pi * np.arange(M) / M)
    grids = np.meshgrid(*([phases] * d), indexing="ij")
    ang = np.stack([g.ravel() for g in grids], axis=1)  # (M^d, d)
    return (radii[:, None, :] * ang[None, :, :]).reshape(-1, d)


@lru_cache(maxsize=64)
def _quadrature_cached(key: str, D: int) -> DiscreteMeasure:
    wset = WeightedSet.from_json(json.loads(key))
    extra, ang = _weight_margin(wset, D)
    if wset.kind == "interval":
        a, b = wset.p["a"], wset.p["b"]
        N = D // 2 + 1 + extra
        k = np.arange(1, N + 1)
        x = np.cos((2 * k - 1) * np.pi / (2 * N))
        nodes = ((a + b) / 2 + (b - a) / 2 * x).astype(complex)[:, None]
        return DiscreteMeasure(nodes, np.full(N, 1.0 / N), D, 1.0, wset)
    radii, rw = _radial_rule(wset, D)
    M = D + 1 + ang
    d = radii.shape[1]
    nodes = _tensor_nodes(radii, M)
    weights = np.repeat(rw / M**d, M**d)
    return DiscreteMeasure(nodes, weights, D, 1.0, wset, TensorAngular(radii, rw, M))


def quadrature_measure(wset: WeightedSet, exactness: int) -> DiscreteMeasure:
    """Discrete probability measure on ``K`` exact for pairings of total degree ``<= D``.

    Circle: ``D + 1`` equally spaced nodes.  Interval: Gauss-Chebyshev nodes
    (arcsine density).  Disk: Gauss-Legendre in ``r^2`` times ``D + 1`` angles.
    Ball/ellipsoid: Gauss-Legendre in ``|z_1|^2 / r_1^2`` on the boundary times
    a ``(D + 1)^2`` angular torus.  Polydisk: the torus ``|z_1| = |z_2| = R``.
    """
    if exactness < 0:
        raise UnsupportedRangeError("exactness degree must be nonnegative")
    return _quadrature_cached(wset.key(), int(exactness))


def closed_form_moment(wset: WeightedSet, alpha, beta) -> float:
    """Exact ``int z^alpha conj(z)^beta`` against the reference measure of ``wset``."""
    alpha, beta = tuple(alpha), tuple(beta)
    kind, p = wset.kind, wset.p
    if kind == "interval":
        # arcsine on [a, b]: x = c + h t, E[t^{2m}] = binom(2m, m) / 4^m
        a, b = p["a"], p["b"]
        c, h = (a + b) / 2, (b - a) / 2
        q = alpha[0] + beta[0]
        return sum(math.comb(q, k) * c ** (q - k) * h**k
                   * (math.comb(k, k // 2) / 4 ** (k // 2) if k % 2 == 0 else 0.0)
                   for k in range(q + 1))
    if alpha != beta:
        return 0.0
    if kind == "circle":
        return p["R"] ** (2 * alpha[0])
    if kind == "disk":
        return p["R"] ** (2 * alpha[0]) / (alpha[0] + 1)
    if kind == "polydisk":
        return p["R"] ** (2 * sum(alpha))
    a1, a2 = alpha
    r1, r2 = (p["R"], p["R"]) if kind == "ball" else (p["r"], p["A"])
    return r1 ** (2 * a1) * r2 ** (2 * a2) * math.factorial(a1) * math.factorial(a2) / math.factorial(a1 + a2 + 1)


# ---------------------------------------------------------------------------
# high-precision nodes


def _gauss_legendre_mp(N: int, bits: int):
    """Gauss-Legendre nodes/weights on [0, 1] refined by Newton at ``bits`` precision."""
    if N == 1:
        return [gmpy2.mpfr(0.5)], [gmpy2.mpfr(1)]
    x0, _ = np.polynomial.legendre.leggauss(N)
    xs, ws = [], []
    with mp.context(bits + 16):
        tol = gmpy2.mpfr(2) ** (-(bits + 8))
        for xi in x0:
            x = gmpy2.mpfr(float(xi))
            for _ in range(100):
                p0, p1 = gmpy2.mpfr(1), x
                for k in range(2, N + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = N * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < tol:
                    break
            p0, p1 = gmpy2.mpfr(1), x
            for k in range(2, N + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = N * (x * p1 - p0) / (x * x - 1)
            w = 2 / ((1 - x * x) * dp * dp)
            xs.append((x + 1) / 2)
            ws.append(w / 2)
    return xs, ws


@lru_cache(maxsize=32)
def _quadrature_mp_cached(key: str, D: int, bits: int):
    wset = WeightedSet.from_json(json.loads(key))
    p = wset.p
    with mp.context(bits):
        pi = gmpy2.const_pi()
        extra, ang = _weight_margin(wset, D)
        if wset.kind == "interval":
            a, b = gmpy2.mpfr(p["a"]), gmpy2.mpfr(p["b"])
            N = D // 2 + 1 + extra
            nodes = [(gmpy2.mpc((a + b) / 2 + (b - a) / 2 * gmpy2.cos((2 * k - 1) * pi / (2 * N))),)
                     for k in range(1, N + 1)]
            return nodes, [gmpy2.mpfr(1) / N] * N
        M = D + 1 + ang
        phases = [gmpy2.mpc(gmpy2.cos(2 * pi * j / M), gmpy2.sin(2 * pi * j / M)) for j in range(M)]
        kind = wset.kind
        if kind in ("circle", "polydisk"):
            R = gmpy2.mpfr(p["R"])
            radii = [(R,) if kind == "circle" else (R, R)]
            rw = [gmpy2.mpfr(1)]
        else:
            N = D // 4 + 1 + extra
            s, rw = _gauss_legendre_mp(N, bits)
            if kind == "disk":
                R = gmpy2.mpfr(p["R"])
                radii = [(R * gmpy2.sqrt(si),) for si in s]
            else:
                r1, r2 = (p["R"], p["R"]) if kind == "ball" else (p["r"], p["A"])
                radii = [(gmpy2.mpfr(r1) * gmpy2.sqrt(si), gmpy2.mpfr(r2) * gmpy2.sqrt(1 - si)) for si in s]
        d = len(radii[0])
        nodes, weights = [], []
        for rad, w in zip(radii, rw):
            wk = w / M**d
            for js in itertools.product(range(M), repeat=d):
                nodes.append(tuple(rad[i] * phases[js[i]] for i in range(d)))
                weights.append(wk)
        return nodes, weights


def quadrature_nodes_mp(wset: WeightedSet, exactness: int, bits: int):
    """Same nodes as :func:`quadrature_measure`, as gmpy2 numbers at ``bits`` precision."""
    return _quadrature_mp_cached(wset.key(), int(exactness), int(bits))


# ---------------------------------------------------------------------------
# dense samples of K


def sample_set(wset: WeightedSet, count: int) -> np.ndarray:
    """Roughly ``count`` points covering ``K`` (boundary samples for the C^2 sets)."""
    p = wset.p
    kind = wset.kind
    if kind == "circle":
        return (p["R"] * np.exp(2j * np.pi * np.arange(count) / count))[:, None]
    if kind == "interval":
        return np.linspace(p["a"], p["b"], count).astype(complex)[:, None]
    if kind == "disk":
        nr = max(2, int(math.sqrt(count / 6)) + 1)
        nt = max(8, -(-count // nr))
        r = p["R"] * np.sqrt(np.linspace(0.0, 1.0, nr))
        th = np.exp(2j * np.pi * np.arange(nt) / nt)
        return (r[:, None] * th[None, :]).reshape(-1, 1)
    if kind == "polydisk":
        m = max(4, int(math.ceil(math.sqrt(count))))
        return _tensor_nodes(np.array([[p["R"], p["R"]]]), m)
    nu = max(3, int(round(count ** (1 / 3))))
    nu += (nu + 1) % 2  # odd count puts a node at u = 1/2
    m = max(4, int(math.ceil(math.sqrt(count / nu))))
    u = np.linspace(0.0, 1.0, nu)
    r1, r2 = (p["R"], p["R"]) if kind == "ball" else (p["r"], p["A"])
    return _tensor_nodes(np.column_stack([r1 * np.sqrt(u), r2 * np.sqrt(1 - u)]), m)
