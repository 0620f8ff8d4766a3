"""Specification of killed Markov-modulated Levy processes.

The object of study is a pair (W, J): J is a continuous-time Markov chain on
{0, ..., N-1} with generator Pi; while J sits in n, W accumulates a Levy
increment with exponent psi_n; each transition n -> n' adds an independent
jump with MGF upsilon_{nn'}; everything is stopped at the first arrival of a
state-inhomogeneous Poisson clock with rate phi_n.  All downstream analysis
works through the matrix function

    A(z) = diag(psi_n(z)) + Pi * Upsilon(z) - diag(phi_n)    (* elementwise)

whose assembly, domain bookkeeping, validation and JSON round-trip live here.
"""

from __future__ import annotations

import cmath
import hashlib
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from ._errors import DomainError

_INF = math.inf


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class DomainInterval:
    """Real convergence interval, possibly unbounded, with endpoint flags."""

    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, s: float) -> bool:
        if s < self.lo or s > self.hi:
            return False
        if s == self.lo and not self.lo_closed:
            return False
        if s == self.hi and not self.hi_closed:
            return False
        return True

    def interior_contains(self, s: float) -> bool:
        return self.lo < s < self.hi

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def intersect(self, other: "DomainInterval") -> "DomainInterval":
        if self.lo > other.lo:
            lo, lo_closed = self.lo, self.lo_closed
        elif other.lo > self.lo:
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_closed = self.hi, self.hi_closed
        elif other.hi < self.hi:
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed and other.hi_closed
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            raise ValueError("empty domain intersection")
        return DomainInterval(lo, hi, lo_closed, hi_closed)


_WHOLE_LINE = DomainInterval(-_INF, _INF, False, False)


# ---------------------------------------------------------------------------
# scalar helpers (overflow-tolerant: the root scan probes very large |s|)


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return _INF


def _safe_expm1(x: float) -> float:
    try:
        return math.expm1(x)
    except OverflowError:
        return _INF


def _expm1z(w):
    """exp(w) - 1 for float or complex, accurate near 0 on the real path."""
    if isinstance(w, complex):
        return cmath.exp(w) - 1.0
    return _safe_expm1(w)


def _expz(w):
    if isinstance(w, complex):
        return cmath.exp(w)
    return _safe_exp(w)


# ---------------------------------------------------------------------------
# quadrature for the truncated-Pareto exponential jump measure
#
# nu(dx) = c x^{-2} e^{-x} dx on [1, inf);  psi(z) = c * int_1^inf
# (e^{(z-1)x} - e^{-x}) x^{-2} dx, defined for Re z <= 1.  Integration is
# adaptive Gauss-Kronrod on dyadic pieces [1,2], [2,4], ... up to a cutoff X
# chosen so both exponential tail bounds fall below 1e-13.


def _dyadic_quad(f, hi: float) -> float:
    total = 0.0
    a = 1.0
    while a < hi:
        b = min(2.0 * a, hi)
        total += integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-12, limit=100)[0]
        a = b
    return total


def _pareto_cutoff(c: float, a: float) -> float:
    # tail of the growing piece <= e^{-aX}/(aX^2), of the decaying <= e^{-X}/X^2
    X = 32.0
    while X < 1e13:
        tail = c * (_safe_exp(-a * X) / (a * X * X) + _safe_exp(-X) / (X * X))
        if tail < 1e-13:
            return X
        X *= 2.0
    return X


@lru_cache(maxsize=16384)
def _pareto_psi_real(c: float, s: float) -> float:
    if s == 1.0:
        # analytic split at the boundary: int_1^inf x^{-2} dx = 1 exactly,
        # quadrature keeps only the decaying remainder
        X = _pareto_cutoff(c, 1.0)
        return c * (1.0 - _dyadic_quad(lambda x: math.exp(-x) / (x * x), X))
    a = 1.0 - s
    X = _pareto_cutoff(c, a)
    return c * _dyadic_quad(
        lambda x: (math.exp(-a * x) - math.exp(-x)) / (x * x), X
    )


@lru_cache(maxsize=16384)
def _pareto_dpsi_real(c: float, s: float) -> float:
    a = 1.0 - s
    X = 32.0
    while X < 1e13 and c * _safe_exp(-a * X) / (a * X) > 1e-13:
        X *= 2.0
    return c * _dyadic_quad(lambda x: math.exp(-a * x) / x, X)


@lru_cache(maxsize=1)
def _pareto_decay_const() -> float:
    # int_1^inf e^{-x} x^{-2} dx, shared by the complex evaluation path
    return _dyadic_quad(lambda x: math.exp(-x) / (x * x), _pareto_cutoff(1.0, 1.0))


def _pareto_psi_complex(c: float, z: complex) -> complex:
    # oscillatory Fourier quadrature handles the e^{itx} factor on [1, inf)
    s, t = z.real, z.imag
    g = lambda x: math.exp((s - 1.0) * x) / (x * x)
    re = integrate.quad(g, 1.0, np.inf, weight="cos", wvar=t, limlst=200)[0]
    im = integrate.quad(g, 1.0, np.inf, weight="sin", wvar=t, limlst=200)[0]
    return c * complex(re - _pareto_decay_const(), im)


def _pareto_dpsi_complex(c: float, z: complex) -> complex:
    s, t = z.real, z.imag
    g = lambda x: math.exp((s - 1.0) * x) / x
    re = integrate.quad(g, 1.0, np.inf, weight="cos", wvar=t, limlst=200)[0]
    im = integrate.quad(g, 1.0, np.inf, weight="sin", wvar=t, limlst=200)[0]
    return c * complex(re, im)


# ---------------------------------------------------------------------------
# state exponents


@dataclass(frozen=True)
class BrownianDrift:
    """Brownian motion with drift: psi(z) = mu z + sigma2 z^2 / 2."""

    mu: float
    sigma2: float

    def domain(self) -> DomainInterval:
        return _WHOLE_LINE

    def psi(self, z):
        if z == 0:
            return 0.0
        return self.mu * z + 0.5 * self.sigma2 * z * z

    def dpsi(self, z):
        return self.mu + self.sigma2 * z


@dataclass(frozen=True)
class LinearDrift:
    """Deterministic trend: psi(z) = mu z."""

    mu: float

    def domain(self) -> DomainInterval:
        return _WHOLE_LINE

    def psi(self, z):
        if z == 0:
            return 0.0
        return self.mu * z

    def dpsi(self, z):
        return self.mu + 0.0 * z


@dataclass(frozen=True)
class PoissonJump:
    """Poisson jumps of fixed size h at rate gamma: psi(z) = gamma(e^{zh}-1)."""

    gamma: float
    h: float = 1.0

    def domain(self) -> DomainInterval:
        return _WHOLE_LINE

    def psi(self, z):
        if z == 0:
            return 0.0
        return self.gamma * _expm1z(z * self.h)

    def dpsi(self, z):
        return self.gamma * self.h * _expz(z * self.h)


@dataclass(frozen=True)
class CompoundPoissonDiscrete:
    """Compound Poisson at rate gamma with a finite jump-size distribution.

    atoms is a tuple of (value, probability) pairs.
    """

    gamma: float
    atoms: tuple

    def domain(self) -> DomainInterval:
        return _WHOLE_LINE

    def psi(self, z):
        if z == 0:
            return 0.0
        # sum p (e^{zx} - 1) keeps psi(0) = 0 exact and is accurate near 0
        acc = 0.0 if not isinstance(z, complex) else 0.0j
        for x, p in self.atoms:
            acc += p * _expm1z(z * x)
        return self.gamma * acc

    def dpsi(self, z):
        acc = 0.0 if not isinstance(z, complex) else 0.0j
        for x, p in self.atoms:
            acc += p * x * _expz(z * x)
        return self.gamma * acc


@dataclass(frozen=True)
class TruncatedParetoExpJump:
    """Pure-jump component with intensity c x^{-2} e^{-x} dx on [1, inf).

    The exponent psi(z) = c * int (e^{zx} - 1) x^{-2} e^{-x} dx converges for
    Re z <= 1 only, making the joint domain right-bounded with a closed
    endpoint at 1.
    """

    c: float

    def domain(self) -> DomainInterval:
        return DomainInterval(-_INF, 1.0, False, True)

    def psi(self, z):
        if z == 0:
            return 0.0
        zz = complex(z)
        if zz.real > 1.0:
            raise DomainError("truncated-Pareto exponent needs Re z <= 1")
        if zz.imag == 0.0:
            return _pareto_psi_real(self.c, zz.real)
        return _pareto_psi_complex(self.c, zz)

    def dpsi(self, z):
        zz = complex(z)
        if zz.real >= 1.0:
            raise DomainError("truncated-Pareto derivative needs Re z < 1")
        if zz.imag == 0.0:
            return _pareto_dpsi_real(self.c, zz.real)
        return _pareto_dpsi_complex(self.c, zz)


@dataclass(frozen=True)
class CauchyStub:
    """Heavy-tailed placeholder whose MGF exists only at z = 0.

    It can sit in a spec (validation passes) but every analysis op that needs
    a non-degenerate strip rejects it through the degenerate domain.
    """

    def domain(self) -> DomainInterval:
        return DomainInterval(0.0, 0.0, True, True)

    def psi(self, z):
        if z == 0:
            return 0.0
        raise DomainError("Cauchy component: MGF exists only at z = 0")

    def dpsi(self, z):
        raise DomainError("Cauchy component: MGF not differentiable anywhere")


# ---------------------------------------------------------------------------
# transition-jump MGFs


@dataclass(frozen=True)
class DegenerateZero:
    """No transition jump: upsilon(z) = 1."""

    def domain(self) -> DomainInterval:
        return _WHOLE_LINE

    def upsilon(self, z):
        return 1.0 if not isinstance(z, complex) else 1.0 + 0.0j

    def dupsilon(self, z):
        return 0.0 * z


@dataclass(frozen=True)
class DegeneratePoint:
    """Deterministic jump of size a: upsilon(z) = e^{az}."""

    a: float

    def domain(self) -> DomainInterval:
        return _WHOLE_LINE

    def upsilon(self, z):
        if z == 0:
            return 1.0
        return _expz(z * self.a)

    def dupsilon(self, z):
        return self.a * _expz(z * self.a)


@dataclass(frozen=True)
class DiscreteAtoms:
    """Finite discrete jump distribution; atoms are (value, probability)."""

    atoms: tuple

    def domain(self) -> DomainInterval:
        return _WHOLE_LINE

    def upsilon(self, z):
        if z == 0:
            return 1.0
        acc = 0.0 if not isinstance(z, complex) else 0.0j
        for x, p in self.atoms:
            acc += p * _expm1z(z * x)
        return 1.0 + acc

    def dupsilon(self, z):
        acc = 0.0 if not isinstance(z, complex) else 0.0j
        for x, p in self.atoms:
            acc += p * x * _expz(z * x)
        return acc


@dataclass(frozen=True)
class Gaussian:
    """Gaussian jump: upsilon(z) = exp(mean z + variance z^2 / 2)."""

    mean: float
    variance: float

    def upsilon(self, z):
        if z == 0:
            return 1.0
        return _expz(self.mean * z + 0.5 * self.variance * z * z)

    def dupsilon(self, z):
        return (self.mean + self.variance * z) * self.upsilon(z)

    def domain(self) -> DomainInterval:
        return _WHOLE_LINE


EXPONENT_TYPES = (
    BrownianDrift,
    LinearDrift,
    PoissonJump,
    CompoundPoissonDiscrete,
    TruncatedParetoExpJump,
    CauchyStub,
)
JUMP_TYPES = (DegenerateZero, DegeneratePoint, DiscreteAtoms, Gaussian)


# ---------------------------------------------------------------------------
# model spec


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Killed Markov-modulated Levy process.

    varpi     initial distribution of J, length N
    generator Markov generator Pi (Metzler, zero row sums), N x N
    exponents per-state Levy exponents, length N
    phi       state-dependent killing rates, length N
    jumps     N x N grid of transition-jump MGFs; may be given as a dict
              {(i, j): mgf} or omitted (no transition jumps)
    """

    varpi: np.ndarray
    generator: np.ndarray
    exponents: tuple
    phi: np.ndarray
    jumps: tuple = None

    def __post_init__(self):
        exponents = tuple(self.exponents)
        n = len(exponents)
        varpi = np.array(self.varpi, dtype=float)
        generator = np.array(self.generator, dtype=float)
        phi = np.array(self.phi, dtype=float)
        for a in (varpi, generator, phi):
            a.setflags(write=False)
        jumps = self.jumps
        if jumps is None:
            jumps = {}
        if isinstance(jumps, dict):
            grid = [[DegenerateZero()] * n for _ in range(n)]
            for (i, j), mgf in jumps.items():
                grid[i][j] = mgf
            jumps = grid
        jumps = tuple(tuple(row) for row in jumps)
        object.__setattr__(self, "varpi", varpi)
        object.__setattr__(self, "generator", generator)
        object.__setattr__(self, "exponents", exponents)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "jumps", jumps)

    @property
    def n(self) -> int:
        return len(self.exponents)

    @property
    def domain(self) -> DomainInterval:
        return domain_interval(self)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):  # pragma: no cover - cosmetic
        if self.ok:
            return "valid"
        return "invalid:\n" + "\n".join(f"  - {v}" for v in self.violations)


def _check_atoms(atoms, where, out):
    try:
        pairs = [(float(x), float(p)) for x, p in atoms]
    except (TypeError, ValueError):
        out.append(f"{where}: atoms must be (value, probability) pairs")
        return
    if not pairs:
        out.append(f"{where}: atom list is empty")
        return
    if any(not math.isfinite(x) for x, _ in pairs):
        out.append(f"{where}: non-finite atom value")
    if any(p < 0 for _, p in pairs):
        out.append(f"{where}: negative atom probability")
    total = math.fsum(p for _, p in pairs)
    if abs(total - 1.0) > 1e-12:
        out.append(f"{where}: atom probabilities sum to {total!r}, not 1")


def validate(spec: ModelSpec) -> ValidationReport:
    """Structural checks; returns a report rather than raising."""
    v = []
    n = spec.n
    if n == 0:
        return ValidationReport(("spec has no states",))
    if spec.varpi.shape != (n,):
        v.append(f"varpi has shape {spec.varpi.shape}, expected ({n},)")
    else:
        if np.any(spec.varpi < 0):
            v.append("varpi has negative entries")
        total = float(np.sum(spec.varpi))
        if abs(total - 1.0) > 1e-12:
            v.append(f"varpi sums to {total!r}, not 1")
    if spec.generator.shape != (n, n):
        v.append(f"generator has shape {spec.generator.shape}, expected ({n}, {n})")
    else:
        off = spec.generator.copy()
        np.fill_diagonal(off, 0.0)
        if np.any(off < 0):
            v.append("generator has negative off-diagonal entries")
        scale = 1.0 + float(np.abs(spec.generator).max(initial=0.0))
        rowsums = np.abs(spec.generator.sum(axis=1))
        if np.any(rowsums > 1e-12 * scale):
            v.append("generator row sums exceed 1e-12 * scale")
    if spec.phi.shape != (n,):
        v.append(f"phi has shape {spec.phi.shape}, expected ({n},)")
    elif np.any(spec.phi < 0):
        v.append("phi has negative entries")

    for i, e in enumerate(spec.exponents):
        where = f"exponent[{i}]"
        if isinstance(e, BrownianDrift):
            if e.sigma2 < 0:
                v.append(f"{where}: sigma2 < 0")
        elif isinstance(e, PoissonJump):
            if e.gamma < 0:
                v.append(f"{where}: gamma < 0")
            if e.h == 0:
                v.append(f"{where}: jump size h is zero")
        elif isinstance(e, CompoundPoissonDiscrete):
            if e.gamma < 0:
                v.append(f"{where}: gamma < 0")
            _check_atoms(e.atoms, where, v)
        elif isinstance(e, TruncatedParetoExpJump):
            if e.c <= 0:
                v.append(f"{where}: intensity scale c must be positive")
        elif not isinstance(e, (LinearDrift, CauchyStub)):
            v.append(f"{where}: unknown exponent type {type(e).__name__}")

    if len(spec.jumps) != n or any(len(row) != n for row in spec.jumps):
        v.append("jumps grid is not N x N")
    else:
        for i in range(n):
            for j in range(n):
                jm = spec.jumps[i][j]
                where = f"jump[{i}->{j}]"
                if i == j and not isinstance(jm, DegenerateZero):
                    v.append(f"{where}: self-transitions cannot carry jumps")
                if isinstance(jm, DiscreteAtoms):
                    _check_atoms(jm.atoms, where, v)
                elif isinstance(jm, Gaussian):
                    if jm.variance < 0:
                        v.append(f"{where}: variance < 0")
                elif not isinstance(jm, (DegenerateZero, DegeneratePoint)):
                    v.append(f"{where}: unknown jump type {type(jm).__name__}")

    # reachability: states outside the support of varpi must be reachable
    # through positive transition rates, otherwise they are dead weight that
    # silently distorts spectral quantities
    if not v:
        seen = {i for i in range(n) if spec.varpi[i] > 0}
        stack = list(seen)
        while stack:
            i = stack.pop()
            for j in range(n):
                if j != i and spec.generator[i, j] > 0 and j not in seen:
                    seen.add(j)
                    stack.append(j)
        dead = sorted(set(range(n)) - seen)
        if dead:
            v.append(f"states {dead} unreachable from the support of varpi")

    return ValidationReport(tuple(v))


# ---------------------------------------------------------------------------
# evaluation ops


def evaluate_exponent(exponent, z):
    """psi(z) for one state component; DomainError outside its strip."""
    dom = exponent.domain()
    zz = complex(z)
    if not dom.contains(zz.real):
        raise DomainError(
            f"{type(exponent).__name__}: Re z = {zz.real!r} outside domain "
            f"[{dom.lo!r}, {dom.hi!r}]"
        )
    if zz.imag == 0.0:
        return float(exponent.psi(zz.real))
    return complex(exponent.psi(zz))


def exponent_derivative(exponent, z):
    """psi'(z); needs Re z interior to the component domain."""
    dom = exponent.domain()
    zz = complex(z)
    if not dom.interior_contains(zz.real):
        raise DomainError(
            f"{type(exponent).__name__}: derivative needs Re z interior to "
            f"({dom.lo!r}, {dom.hi!r})"
        )
    if zz.imag == 0.0:
        return float(exponent.dpsi(zz.real))
    return complex(exponent.dpsi(zz))


def jump_mgf(jump, z):
    zz = complex(z)
    if zz.imag == 0.0:
        return float(jump.upsilon(zz.real))
    return complex(jump.upsilon(zz))


def jump_mgf_derivative(jump, z):
    zz = complex(z)
    if zz.imag == 0.0:
        return float(jump.dupsilon(zz.real))
    return complex(jump.dupsilon(zz))


def domain_interval(spec: ModelSpec) -> DomainInterval:
    """Joint domain I: intersection of all component strips (0 is always in)."""
    dom = _WHOLE_LINE
    for e in spec.exponents:
        dom = dom.intersect(e.domain())
    for row in spec.jumps:
        for jm in row:
            dom = dom.intersect(jm.domain())
    return dom


def assemble_A(spec: ModelSpec, z):
    """A(z) = diag(psi) + Pi * Upsilon(z) - diag(phi).

    Real z yields a real Metzler matrix; A(0) equals Pi - diag(phi) exactly
    because every psi(0) is the literal float 0.0 and every upsilon(0) is 1.0.
    """
    zz = complex(z)
    real = zz.imag == 0.0
    arg = zz.real if real else zz
    n = spec.n
    A = np.zeros((n, n), dtype=float if real else complex)
    pi = spec.generator
    for i in range(n):
        A[i, i] = evaluate_exponent(spec.exponents[i], arg) + pi[i, i] - spec.phi[i]
        for j in range(n):
            if j != i and pi[i, j] != 0.0:
                A[i, j] = pi[i, j] * jump_mgf(spec.jumps[i][j], arg)
    return A


def derivative_A(spec: ModelSpec, z):
    """Entrywise d/dz of A(z); needs Re z interior to I."""
    zz = complex(z)
    real = zz.imag == 0.0
    arg = zz.real if real else zz
    n = spec.n
    dA = np.zeros((n, n), dtype=float if real else complex)
    pi = spec.generator
    for i in range(n):
        dA[i, i] = exponent_derivative(spec.exponents[i], arg)
        for j in range(n):
            if j != i and pi[i, j] != 0.0:
                dA[i, j] = pi[i, j] * jump_mgf_derivative(spec.jumps[i][j], arg)
    return dA


# ---------------------------------------------------------------------------
# JSON round-trip


def _atoms_to_obj(atoms):
    return [[float(x), float(p)] for x, p in atoms]


def _atoms_from_obj(obj):
    return tuple((float(x), float(p)) for x, p in obj)


def _exponent_to_obj(e):
    if isinstance(e, BrownianDrift):
        return {"type": "brownian", "mu": e.mu, "sigma2": e.sigma2}
    if isinstance(e, LinearDrift):
        return {"type": "linear", "mu": e.mu}
    if isinstance(e, PoissonJump):
        return {"type": "poisson", "gamma": e.gamma, "h": e.h}
    if isinstance(e, CompoundPoissonDiscrete):
        return {"type": "compound_poisson", "gamma": e.gamma,
                "atoms": _atoms_to_obj(e.atoms)}
    if isinstance(e, TruncatedParetoExpJump):
        return {"type": "truncated_pareto_exp", "c": e.c}
    if isinstance(e, CauchyStub):
        return {"type": "cauchy_stub"}
    raise ValueError(f"cannot serialize exponent {type(e).__name__}")


def _exponent_from_obj(obj):
    kind = obj.get("type")
    if kind == "brownian":
        return BrownianDrift(float(obj["mu"]), float(obj["sigma2"]))
    if kind == "linear":
        return LinearDrift(float(obj["mu"]))
    if kind == "poisson":
        return PoissonJump(float(obj["gamma"]), float(obj.get("h", 1.0)))
    if kind == "compound_poisson":
        return CompoundPoissonDiscrete(float(obj["gamma"]),
                                       _atoms_from_obj(obj["atoms"]))
    if kind == "truncated_pareto_exp":
        return TruncatedParetoExpJump(float(obj["c"]))
    if kind == "cauchy_stub":
        return CauchyStub()
    raise ValueError(f"unknown exponent type {kind!r}")


def _jump_to_obj(jm):
    if isinstance(jm, DegenerateZero):
        return {"type": "zero"}
    if isinstance(jm, DegeneratePoint):
        return {"type": "point", "a": jm.a}
    if isinstance(jm, DiscreteAtoms):
        return {"type": "discrete_atoms", "atoms": _atoms_to_obj(jm.atoms)}
    if isinstance(jm, Gaussian):
        return {"type": "gaussian", "mean": jm.mean, "variance": jm.variance}
    raise ValueError(f"cannot serialize jump {type(jm).__name__}")


def _jump_from_obj(obj):
    kind = obj.get("type")
    if kind == "zero":
        return DegenerateZero()
    if kind == "point":
        return DegeneratePoint(float(obj["a"]))
    if kind == "discrete_atoms":
        return DiscreteAtoms(_atoms_from_obj(obj["atoms"]))
    if kind == "gaussian":
        return Gaussian(float(obj["mean"]), float(obj["variance"]))
    raise ValueError(f"unknown jump type {kind!r}")


def spec_to_dict(spec: ModelSpec) -> dict:
    jumps = []
    for i in range(spec.n):
        for j in range(spec.n):
            jm = spec.jumps[i][j]
            if not isinstance(jm, DegenerateZero):
                jumps.append({"from": i, "to": j, "mgf": _jump_to_obj(jm)})
    out = {
        "varpi": [float(x) for x in spec.varpi],
        "generator": [[float(x) for x in row] for row in spec.generator],
        "phi": [float(x) for x in spec.phi],
        "states": [_exponent_to_obj(e) for e in spec.exponents],
    }
    if jumps:
        out["jumps"] = jumps
    return out


def spec_from_dict(obj: dict) -> ModelSpec:
    states = [_exponent_from_obj(e) for e in obj["states"]]
    n = len(states)
    jumps = {}
    for entry in obj.get("jumps", ()):
        i, j = int(entry["from"]), int(entry["to"])
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"jump entry {i}->{j} outside 0..{n - 1}")
        if i == j:
            raise ValueError("self-transitions cannot carry jumps")
        jumps[(i, j)] = _jump_from_obj(entry["mgf"])
    return ModelSpec(
        varpi=obj["varpi"],
        generator=obj["generator"],
        exponents=tuple(states),
        phi=obj["phi"],
        jumps=jumps,
    )


def spec_dumps(spec: ModelSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2) + "\n"


def spec_loads(text: str) -> ModelSpec:
    return spec_from_dict(json.loads(text))


def spec_hash(spec: ModelSpec) -> str:
    """Short content hash used for provenance in reports and CSV headers."""
    canon = json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
