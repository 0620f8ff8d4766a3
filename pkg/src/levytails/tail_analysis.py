"""Tail decay analysis of the stopped additive component W_T.

s -> zeta(A(s)) is convex on the domain strip with zeta(A(0)) < 0 whenever
killing is active, so there is at most one positive root alpha (upper tail
~ e^{-alpha w}) and one negative root -beta (lower tail ~ e^{-beta w}).
Around a simple root the stopped MGF has a simple pole; its residue feeds
two-sided tail-probability bounds, which collapse to an exact limit when the
increment distribution is certified non-lattice and otherwise form an
oscillation band of width set by the common lattice span.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.linalg import expm, lu_factor, lu_solve
from scipy.optimize import brentq

from ._errors import (
    BUnknownError,
    ConvergenceError,
    DegenerateError,
    DomainDegenerateError,
    DomainError,
    NotSimpleError,
    ReducibleError,
    SingularMatrixError,
)
from .process_model import (
    BrownianDrift,
    CauchyStub,
    CompoundPoissonDiscrete,
    DegeneratePoint,
    DegenerateZero,
    DiscreteAtoms,
    Gaussian,
    LinearDrift,
    ModelSpec,
    PoissonJump,
    TruncatedParetoExpJump,
    assemble_A,
    derivative_A,
    domain_interval,
    validate,
)
from .spectral_core import (
    is_irreducible,
    spectral_abscissa_metzler,
)

FOUND_INTERIOR = "FoundInterior"
NO_ROOT_IN_DOMAIN = "NoRootInDomain"
ROOT_AT_BOUNDARY = "RootAtBoundary"
DOMAIN_DEGENERATE = "DomainDegenerate"

_SCAN_CAP = 1e6  # doubling scan never probes beyond |s| = 1e6


@dataclass(frozen=True)
class DecayRates:
    """Decay rates and search outcomes.

    alpha is the positive root (upper tail), beta the magnitude of the
    negative root (lower tail); each is present when its status is
    FoundInterior or RootAtBoundary.  When a side ends with NoRootInDomain
    the abscissa value at the last evaluable point of that side is kept in
    *_boundary_zeta.
    """

    alpha: float | None
    beta: float | None
    alpha_status: str
    beta_status: str
    zeta_at_zero: float
    alpha_boundary_zeta: float | None = None
    beta_boundary_zeta: float | None = None


@dataclass(frozen=True)
class PoleData:
    location: float
    matrix_residue: np.ndarray
    c: float
    mgf_residue: float
    simple: bool


@dataclass(frozen=True)
class LatticeInfo:
    """Lattice certification of the increment distribution.

    non_lattice=True is a certificate (some component is provably
    non-lattice); non_lattice=False only means "not certified", with span
    set when all discrete sources share a common rational-ratio lattice and
    None otherwise (see reason).
    """

    non_lattice: bool
    span: float | None
    reason: str


@dataclass(frozen=True)
class NakagawaBounds:
    """Band for e^{aw} Pr(tail beyond w): liminf >= lower, limsup <= upper.

    B is the width of the singularity-free vertical band around the pole
    (infinite for certified non-lattice increments, where the band collapses
    to exact_limit = C / a).
    """

    C: float
    B: float
    lower: float
    upper: float
    exact_limit: float | None


def zeta_at(spec: ModelSpec, s: float) -> float:
    """Convenience: zeta(A(s)) without the simplicity check."""
    return spectral_abscissa_metzler(assemble_A(spec, float(s)),
                                     check_simple=False).zeta


def _zeta_raw(spec, s):
    # overflowed exponents give +inf entries; by convexity that means the
    # abscissa has long since crossed zero, so report +inf
    A = assemble_A(spec, s)
    if not np.all(np.isfinite(A)):
        return math.inf
    return spectral_abscissa_metzler(A, check_simple=False).zeta


def _refine_root(spec, lo, z_lo, hi, z_hi):
    # shrink an overflowed upper end until brentq sees finite values
    while not math.isfinite(z_hi):
        mid = 0.5 * (lo + hi)
        zm = _zeta_raw(spec, mid)
        if math.isfinite(zm) and zm <= 0.0:
            lo, z_lo = mid, zm
        else:
            hi, z_hi = mid, zm
    a, b = (lo, hi) if lo < hi else (hi, lo)
    root = brentq(lambda t: _zeta_raw(spec, t), a, b,
                  xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)
    # Newton polish through the Perron pair: zeta'(s) = y^T A'(s) x
    for _ in range(4):
        res = spectral_abscissa_metzler(assemble_A(spec, root),
                                        check_simple=False)
        if abs(res.zeta) <= 1e-12:
            break
        try:
            dz = float(res.left @ derivative_A(spec, root) @ res.right)
        except DomainError:
            break
        if not math.isfinite(dz) or dz == 0.0:
            break
        root = min(max(root - res.zeta / dz, a), b)
    return root


def _scan_side(spec, dom, sign, zeta0):
    """One-sided doubling scan for the root of zeta(A(s)) = 0.

    Returns (root, status, boundary_zeta)."""
    end = dom.hi if sign > 0 else dom.lo
    closed = dom.hi_closed if sign > 0 else dom.lo_closed
    if math.isinf(end):
        e_max, closed = sign * _SCAN_CAP, False
    else:
        e_max = end if closed else end - sign * 1e-12
    if sign * e_max <= 0:
        return None, NO_ROOT_IN_DOMAIN, zeta0

    s_prev, z_prev = 0.0, zeta0
    s = sign * 1e-3
    while True:
        clipped = e_max if sign * s >= sign * e_max else s
        z = _zeta_raw(spec, clipped)
        if not math.isfinite(z) or z > 0.0:
            root = _refine_root(spec, s_prev, z_prev, clipped, z)
            zr = _zeta_raw(spec, root)
            if abs(zr) > 1e-10:
                raise ConvergenceError(
                    f"root polish left |zeta| = {abs(zr):.3e} at s = {root!r}")
            if (closed and not math.isinf(end)
                    and abs(root - end) <= 1e-9 * (1.0 + abs(end))):
                return root, ROOT_AT_BOUNDARY, zr
            return root, FOUND_INTERIOR, None
        if clipped == e_max:
            if closed and abs(z) <= 1e-10:
                return clipped, ROOT_AT_BOUNDARY, z
            return None, NO_ROOT_IN_DOMAIN, z
        s_prev, z_prev = clipped, z
        s *= 2.0


def find_decay_rates(spec: ModelSpec) -> DecayRates:
    """Locate the positive and negative roots of zeta(A(s)) = 0.

    Needs a structurally valid spec (ValueError otherwise).  A single-point
    joint domain raises the degenerate-domain error; zeta(A(0)) >= -1e-12
    (no effective killing) returns immediately with DomainDegenerate
    statuses since the stopped variable then has no finite-MGF tail theory.
    """
    rep = validate(spec)
    if not rep.ok:
        raise ValueError("invalid spec: " + "; ".join(rep.violations))
    dom = domain_interval(spec)
    if dom.is_degenerate:
        raise DomainDegenerateError(
            "joint exponent domain is the single point {0}")
    zeta0 = _zeta_raw(spec, 0.0)
    if zeta0 >= -1e-12:
        return DecayRates(None, None, DOMAIN_DEGENERATE, DOMAIN_DEGENERATE,
                          zeta0)
    a_root, a_status, a_bz = _scan_side(spec, dom, +1, zeta0)
    b_root, b_status, b_bz = _scan_side(spec, dom, -1, zeta0)
    return DecayRates(
        alpha=a_root,
        beta=None if b_root is None else -b_root,
        alpha_status=a_status,
        beta_status=b_status,
        zeta_at_zero=zeta0,
        alpha_boundary_zeta=a_bz,
        beta_boundary_zeta=b_bz,
    )


def mgf_stopped(spec: ModelSpec, z):
    """E[e^{z W_T}] = varpi^T A(z)^{-1} A(0) 1 via partial-pivot LU.

    The value is the MGF of W_T on the strip where zeta(A(Re z)) < 0 and the
    analytic continuation of that rational-like expression elsewhere on the
    component domain.  Raises the singular-matrix error when an LU pivot
    falls below 1e-14 ||A(z)||_inf (z at or numerically near a pole).
    """
    zz = complex(z)
    real = zz.imag == 0.0
    A = assemble_A(spec, zz.real if real else zz)
    ones = np.ones(spec.n)
    b = assemble_A(spec, 0.0) @ ones
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # pivot check below supersedes scipy's
        lu, piv = lu_factor(A)
    norm = float(np.abs(A).sum(axis=1).max())
    if norm == 0.0 or float(np.abs(np.diag(lu)).min()) < 1e-14 * norm:
        raise SingularMatrixError(f"A(z) numerically singular at z = {z!r}")
    u = lu_solve((lu, piv), b)
    val = spec.varpi @ u
    return float(val) if real else complex(val)


def conditional_mgf_matrix(spec: ModelSpec, t: float, z, with_killing=True):
    """Matrix of E[e^{z W_t}; J_t = n', t < T | J_0 = n] = expm(t A(z)).

    With with_killing=False the killing rates are added back, giving the
    un-stopped transform expm(t (A(z) + diag(phi))); at z = 0 that matrix is
    stochastic.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    zz = complex(z)
    A = assemble_A(spec, zz.real if zz.imag == 0.0 else zz)
    if not with_killing:
        A = A + np.diag(spec.phi)
    return expm(t * A)


def pole_residue(spec: ModelSpec, s0: float) -> PoleData:
    """Residue data of the stopped MGF at a simple root s0 of zeta(A(s)).

    matrix_residue is the rank-one residue of A(z)^{-1} at the pole,
    x (y^T A'(s0) x)^{-1} y^T; mgf_residue is the induced scalar residue of
    the MGF.  The modulating chain must be irreducible and the Perron root
    simple.
    """
    if not is_irreducible(spec.generator):
        raise ReducibleError("modulating chain is reducible")
    s0 = float(s0)
    res = spectral_abscissa_metzler(assemble_A(spec, s0), check_simple=True)
    if abs(res.zeta) > 1e-8:
        raise ValueError(f"zeta(A(s0)) = {res.zeta:.3e}: s0 is not a root")
    if not res.simple:
        raise NotSimpleError("Perron root at s0 is not algebraically simple")
    x, y = res.right, res.left  # y^T x = 1
    denom = float(y @ derivative_A(spec, s0) @ x)
    if abs(denom) < 1e-12:
        raise NotSimpleError("y^T A'(s0) x vanishes: pole is not simple")
    c = 1.0 / denom
    b = assemble_A(spec, 0.0) @ np.ones(spec.n)
    mgf_residue = c * float(spec.varpi @ x) * float(y @ b)
    return PoleData(s0, c * np.outer(x, y), c, mgf_residue, True)


# ---------------------------------------------------------------------------
# lattice structure


def _rationalize(x: float):
    """Fraction under the 10^6-denominator cap, or None if x is not
    representable that way to relative 1e-14 (i.e. numerically irrational)."""
    fr = Fraction(x).limit_denominator(10**6)
    if abs(float(fr) - x) <= 1e-14 * max(1.0, abs(x)):
        return fr
    return None


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(math.gcd(a.numerator * b.denominator,
                             b.numerator * a.denominator),
                    a.denominator * b.denominator)


def lattice_info(spec: ModelSpec) -> LatticeInfo:
    """Certify non-lattice increments or find their common lattice span.

    Any diffusive or continuously-distributed component certifies
    non-lattice, as do provably incommensurable atoms inside one jump
    distribution.  Otherwise all active jump sizes must share rational
    ratios (denominator cap 10^6, accepted at relative 1e-14) to produce a
    span; pure drift components or cross-component irrational ratios leave
    the span undetermined (span=None, non_lattice=False, see reason).
    """
    comps = []  # value lists of active purely-discrete components
    drift = False
    for n, e in enumerate(spec.exponents):
        if isinstance(e, BrownianDrift):
            if e.sigma2 > 0:
                return LatticeInfo(True, None, f"Brownian diffusion in state {n}")
            if e.mu != 0:
                drift = True
        elif isinstance(e, LinearDrift):
            if e.mu != 0:
                drift = True
        elif isinstance(e, (TruncatedParetoExpJump, CauchyStub)):
            return LatticeInfo(True, None,
                               f"continuous jump density in state {n}")
        elif isinstance(e, PoissonJump):
            if e.gamma > 0:
                comps.append([e.h])
        elif isinstance(e, CompoundPoissonDiscrete):
            if e.gamma > 0:
                vals = [x for x, p in e.atoms if p > 0 and x != 0]
                if vals:
                    comps.append(vals)
    for i in range(spec.n):
        for j in range(spec.n):
            if i == j or spec.generator[i, j] <= 0:
                continue
            jm = spec.jumps[i][j]
            if isinstance(jm, Gaussian):
                if jm.variance > 0:
                    return LatticeInfo(True, None,
                                       f"Gaussian transition jump {i}->{j}")
                if jm.mean != 0:
                    comps.append([jm.mean])
            elif isinstance(jm, DegeneratePoint):
                if jm.a != 0:
                    comps.append([jm.a])
            elif isinstance(jm, DiscreteAtoms):
                vals = [x for x, p in jm.atoms if p > 0 and x != 0]
                if vals:
                    comps.append(vals)

    for vals in comps:
        for v in vals[1:]:
            if _rationalize(v / vals[0]) is None:
                return LatticeInfo(True, None,
                                   "incommensurable atoms within one "
                                   "jump distribution")
    if drift:
        return LatticeInfo(False, None, "degenerate drift components")
    allvals = [v for vals in comps for v in vals]
    if not allvals:
        return LatticeInfo(False, None, "no stochastic increments")
    base = allvals[0]
    fracs = []
    for v in allvals:
        fr = _rationalize(v / base)
        if fr is None:
            return LatticeInfo(False, None,
                               "incommensurable spans across components")
        fracs.append(fr)
    span = abs(base) * float(reduce(_frac_gcd, fracs))
    return LatticeInfo(False, span, "common lattice span")


def nakagawa_bounds(pole: PoleData, lattice: LatticeInfo) -> NakagawaBounds:
    """Asymptotic band for e^{aw} Pr(W_T > w) (or the mirrored lower tail).

    With C = |mgf residue| and a = |pole location|, a singularity-free band
    of width B around the pole gives

        (2 pi C / B) / (e^{2 pi a / B} - 1) <= liminf
        limsup <= (2 pi C / B) / (1 - e^{-2 pi a / B})

    B = 2 pi / span for lattice increments; certified non-lattice increments
    send B -> inf and both bounds to the exact limit C / a.  Upper-tail
    poles (location > 0) must carry a negative residue, lower-tail poles a
    positive one; an uncertified lattice structure (span None) raises the
    band-unknown error.
    """
    if not pole.simple:
        raise NotSimpleError("tail bounds need a simple dominant pole")
    loc = pole.location
    if loc == 0:
        raise ValueError("pole location must be nonzero")
    if loc > 0 and not pole.mgf_residue < 0:
        raise ValueError("upper-tail pole must carry a negative MGF residue")
    if loc < 0 and not pole.mgf_residue > 0:
        raise ValueError("lower-tail pole must carry a positive MGF residue")
    C = abs(pole.mgf_residue)
    a = abs(loc)
    if lattice.non_lattice:
        v = C / a
        return NakagawaBounds(C, math.inf, v, v, v)
    if lattice.span is None:
        raise BUnknownError(f"singularity-free band width unknown: "
                            f"{lattice.reason}")
    B = 2.0 * math.pi / lattice.span
    x = a * lattice.span  # = 2 pi a / B
    amp = C * lattice.span  # = 2 pi C / B
    return NakagawaBounds(C, B, amp / math.expm1(x), amp / (-math.expm1(-x)),
                          None)


# ---------------------------------------------------------------------------
# two-state closed form


def two_state_closed_form(mu, sigma2, pi, phi):
    """Real roots of the 2x2 determinant polynomial with admissibility flags.

    For states n = 1, 2 with Brownian-drift exponents, transition rates
    pi = (pi1, pi2) and killing rates phi, the decay-rate candidates solve
    g1(s) g2(s) = pi1 pi2, g_n(s) = sigma2_n s^2 / 2 + mu_n s - phi_n - pi_n,
    a polynomial of degree up to four; a candidate is a true decay rate iff
    the trace condition g1(s) + g2(s) <= 0 holds.  Returns (root, admissible)
    pairs sorted ascending.  Raises the degenerate error when no killing is
    present at all (s = 0 then solves the system trivially).
    """
    mu = [float(v) for v in mu]
    sigma2 = [float(v) for v in sigma2]
    pi = [float(v) for v in pi]
    phi = [float(v) for v in phi]
    if len(mu) != 2 or len(sigma2) != 2 or len(pi) != 2 or len(phi) != 2:
        raise ValueError("two states, four parameter pairs")
    if pi[0] <= 0 or pi[1] <= 0:
        raise ValueError("both transition rates must be positive")
    if any(v < 0 for v in sigma2) or any(v < 0 for v in phi):
        raise ValueError("sigma2 and phi must be nonnegative")
    if phi[0] == 0 and phi[1] == 0:
        raise DegenerateError("no killing anywhere: only the trivial root 0")
    g1 = np.array([0.5 * sigma2[0], mu[0], -phi[0] - pi[0]])
    g2 = np.array([0.5 * sigma2[1], mu[1], -phi[1] - pi[1]])
    f = np.polymul(g1, g2)
    f[-1] -= pi[0] * pi[1]
    f = np.trim_zeros(f, "f")
    if f.size <= 1:
        return []
    roots = np.roots(f)
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-9 * (1.0 + abs(r)):
            s = float(r.real)
            trace = float(np.polyval(g1, s) + np.polyval(g2, s))
            out.append((s, bool(trace <= 1e-9 * (1.0 + abs(s)))))
    out.sort(key=lambda t: t[0])
    return out
