"""Coefficient laws, seeded streams and random polynomials ``G_n = sum xi_alpha p_{n,alpha}``.

Heavy-tailed laws can produce coefficients far beyond the double range
(``log-pareto`` with small ``gamma``), so a :class:`RandomPolynomial` keeps a
common scale ``exp(log_scale)`` apart from unit-sized coefficients.  Zeros and
``(1/n) log |G_n|`` only ever need the scale through its logarithm.
"""
from __future__ import annotations

import csv
import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import precision as mp
from .geometry import MultiIndexOrder
from .orthopoly import OrthonormalBasis, evaluate_basis, monomials
from . import kernels

LAW_KINDS = {
    "complex-gaussian": ("sigma",),
    "rademacher": (),
    "uniform-disk": ("R",),
    "log-pareto": ("gamma",),
}

# ---------------------------------------------------------------------------
# laws


@dataclass(frozen=True)
class CoefficientLaw:
    """Law of the i.i.d. coefficients.

    ``complex-gaussian(sigma)`` has independent real and imaginary parts of
    variance ``sigma^2 / 2``; ``rademacher`` takes the values +1 and -1;
    ``uniform-disk(R)`` is uniform on the closed disk of radius ``R``;
    ``log-pareto(gamma)`` has ``P(log(1 + |xi|) > t) = min(1, t^-gamma)`` and a
    uniform phase.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise ValueError(f"unknown coefficient law {self.kind!r}; expected one of {sorted(LAW_KINDS)}")
        given = dict(self.params)
        need = LAW_KINDS[self.kind]
        if set(given) != set(need):
            raise ValueError(f"law {self.kind} takes parameters {need}, got {tuple(given)}")
        for k, v in given.items():
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"law parameter {k} must be a positive real, got {v!r}")
        object.__setattr__(self, "params", tuple(sorted((k, float(v)) for k, v in given.items())))

    @classmethod
    def make(cls, kind: str, **params) -> "CoefficientLaw":
        return cls(kind, tuple(params.items()))

    @property
    def p(self) -> dict:
        return dict(self.params)

    @property
    def is_atomic(self) -> bool:
        return self.kind == "rademacher"

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.p}

    @classmethod
    def from_json(cls, obj: dict) -> "CoefficientLaw":
        return cls.make(obj["kind"], **obj.get("params", {}))

    def log_tail(self, t) -> np.ndarray:
        """Exact ``P(log(1 + |xi|) > t)``, used by the sampler tests."""
        t = np.asarray(t, dtype=float)
        p = self.p
        if self.kind == "log-pareto":
            with np.errstate(divide="ignore"):
                return np.minimum(1.0, np.where(t > 0, t, 0.0) ** (-p["gamma"]))
        r = np.expm1(np.maximum(t, 0.0))
        if self.kind == "complex-gaussian":
            return np.exp(-(r / p["sigma"]) ** 2)
        if self.kind == "uniform-disk":
            return np.clip(1.0 - (r / p["R"]) ** 2, 0.0, 1.0)
        return np.where(r < 1.0, 1.0, 0.0)


def classify_tail(law: CoefficientLaw, d: int) -> str:
    """Compare the tail of ``log(1 + |xi|)`` with the sharp ``o(t^-d)`` condition.

    Returns ``"satisfies"``, ``"boundary_fails"`` (tail exactly ``t^-d``) or
    ``"fails"``.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if law.kind != "log-pareto":
        return "satisfies"
    g = law.p["gamma"]
    if g > d:
        return "satisfies"
    return "boundary_fails" if g == d else "fails"


# ---------------------------------------------------------------------------
# seeds


@dataclass(frozen=True)
class SeedStream:
    """Stateless stream for one ``(trial, purpose)`` pair under a master seed.

    The generator is rebuilt from ``SeedSequence(master, spawn_key=(trial,
    crc32(purpose)))``, so trials can run in any order.
    """

    master: int
    trial: int = 0
    purpose: str = "coefficients"

    def generator(self) -> np.random.Generator:
        key = (int(self.trial), zlib.crc32(self.purpose.encode()))
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(self.master), spawn_key=key)))

    def record(self) -> dict:
        return {"master": int(self.master), "trial": int(self.trial), "purpose": self.purpose}


def sample_log_coefficients(law: CoefficientLaw, m: int, stream: SeedStream) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``m`` coefficients as ``(log|xi|, xi/|xi|)``; never overflows."""
    if m < 1:
        raise ValueError(f"coefficient count must be >= 1, got {m}")
    rng = stream.generator()
    p = law.p
    if law.kind == "rademacher":
        signs = np.where(rng.random(m) < 0.5, -1.0, 1.0)
        return np.zeros(m), signs.astype(complex)
    if law.kind == "complex-gaussian":
        xi = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) * (p["sigma"] / math.sqrt(2.0))
        with np.errstate(divide="ignore"):
            logmod = np.log(np.abs(xi))
        phase = np.where(xi != 0, xi / np.where(xi != 0, np.abs(xi), 1.0), 1.0)
        return logmod, phase
    u = 1.0 - rng.random(m)  # uniform on (0, 1]
    phase = np.exp(2j * np.pi * rng.random(m))
    if law.kind == "uniform-disk":
        with np.errstate(divide="ignore"):
            return math.log(p["R"]) + 0.5 * np.log(u), phase
    # log-pareto: |xi| = exp(t) - 1 with t = u^(-1/gamma) >= 1
    t = u ** (-1.0 / p["gamma"])
    return t + np.log1p(-np.exp(-t)), phase


def sample_coefficients(law: CoefficientLaw, m: int, stream: SeedStream) -> np.ndarray:
    """Draw ``m`` i.i.d. complex coefficients (may hold ``inf`` for extreme heavy tails)."""
    logmod, phase = sample_log_coefficients(law, m, stream)
    with np.errstate(over="ignore"):
        return np.exp(logmod) * phase


# ---------------------------------------------------------------------------
# random polynomials


@dataclass(frozen=True, eq=False)
class RandomPolynomial:
    """``G_n = exp(log_scale) * sum_alpha coeffs[alpha] p_{n,alpha}``.

    ``monomial`` holds the unit-scaled coefficients of ``G_n`` in the monomial
    basis (same index order as the basis).
    """

    basis: OrthonormalBasis
    coeffs: np.ndarray
    monomial: np.ndarray
    log_scale: float = 0.0
    seed: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def d(self) -> int:
        return self.basis.d

    @property
    def order(self) -> MultiIndexOrder:
        return self.basis.order

    @property
    def effective_degree(self) -> int:
        """Largest total degree carrying a nonzero monomial coefficient (-1 for ``G = 0``)."""
        nz = np.nonzero(self.monomial)[0]
        return int(self.order.degrees()[nz].max()) if nz.size else -1

    def xi(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return self.coeffs * np.exp(self.log_scale)


def _monomial_form(basis: OrthonormalBasis, coeffs: np.ndarray) -> np.ndarray:
    if basis.C_mp is None:
        return basis.C @ coeffs
    bits = basis.precision_bits
    x = mp.to_mp(coeffs, bits)
    with mp.context(bits):
        y = basis.C_mp @ x
    return mp.to_complex(y)


def assemble(basis: OrthonormalBasis, coeffs, log_scale: float = 0.0, seed: dict | None = None) -> RandomPolynomial:
    """Combine coefficients with the basis; ``G_n = exp(log_scale) sum coeffs[a] p_a``.

    The monomial coefficients ``C @ coeffs`` are accumulated at the basis
    precision when an extended-precision factor is available, then rounded.
    """
    c = np.asarray(coeffs, dtype=complex).reshape(-1)
    if c.size != basis.m:
        raise ValueError(f"coefficient count {c.size} does not match basis dimension {basis.m}")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite; pass heavy-tailed draws through log_scale")
    return RandomPolynomial(basis, c, _monomial_form(basis, c), float(log_scale), dict(seed or {}))


def random_polynomial(basis: OrthonormalBasis, law: CoefficientLaw, stream: SeedStream) -> RandomPolynomial:
    """Sample coefficients from ``law`` and assemble, normalizing by the largest modulus."""
    logmod, phase = sample_log_coefficients(law, basis.m, stream)
    top = float(np.max(logmod))
    if not math.isfinite(top):
        top = 0.0
    unit = np.exp(logmod - top) * phase
    seed = stream.record() | {"law": law.to_json()}
    return assemble(basis, unit, top, seed)


def evaluate_G(poly: RandomPolynomial, point) -> complex | np.ndarray:
    """``G_n(z)`` as a dot product with the basis values (``inf`` past double range)."""
    vals = evaluate_basis(poly.basis, point)
    with np.errstate(over="ignore", invalid="ignore"):
        out = (vals @ poly.coeffs) * np.exp(poly.log_scale)
    return complex(out) if np.ndim(out) == 0 else out


def evaluate_monomial(poly: RandomPolynomial, points) -> np.ndarray:
    """``G_n`` from the monomial form, for cross-checks against :func:`evaluate_G`."""
    pts = np.asarray(points, dtype=complex)
    pts = pts.reshape(-1, 1) if poly.d == 1 else pts.reshape(-1, poly.d)
    return (monomials(pts, poly.order) @ poly.monomial) * math.exp(poly.log_scale)


def log_abs_G(poly: RandomPolynomial, points, clamp: float = -50.0, normalize: int | None = None) -> np.ndarray:
    """``(1/n) log |G_n|`` without overflow, floored at ``clamp``.

    ``normalize`` replaces ``n`` in the prefactor (e.g. the effective degree).
    """
    n = poly.n if normalize is None else normalize
    pts = np.asarray(points, dtype=complex)
    if poly.d == 1:
        z = pts.reshape(-1)
        raw = kernels.poly_logabs(np.ascontiguousarray(poly.monomial[: poly.n + 1]), z)
    else:
        P = pts.reshape(-1, poly.d)
        r = np.max(np.abs(P), axis=1)
        big = r > 1.0
        rr = np.where(big, r, 1.0)
        q = P / rr[:, None]
        degs = poly.order.degrees()
        with np.errstate(divide="ignore"):
            logr = np.log(rr)
            mono = monomials(q, poly.order) * np.exp((degs[None, :] - poly.n) * logr[:, None])
            raw = np.log(np.abs(mono @ poly.monomial)) + poly.n * logr
    with np.errstate(invalid="ignore"):
        out = (raw + poly.log_scale) / n
    out = np.where(np.isnan(out), clamp, out)
    shape = pts.shape if poly.d == 1 else pts.shape[:-1]
    return np.maximum(out, clamp).reshape(shape)


def write_coefficients_csv(path, poly: RandomPolynomial) -> None:
    """Dump ``xi`` as ``re,im`` rows (unit-scaled; the scale goes in a comment)."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# log_scale={poly.log_scale!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re", "im"])
        for c in poly.coeffs:
            w.writerow([repr(float(c.real)), repr(float(c.imag))])
