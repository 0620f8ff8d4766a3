"""Flattened simulation plan consumed by both path kernels.

Everything a kernel needs is laid out in plain C-contiguous arrays: rates,
categorical CDF rows (last entry forced to exactly 1.0 so a uniform draw in
[0, 1) always lands), pooled atom tables for discrete jump distributions,
and one shared inverse-CDF table for the truncated-Pareto-exponential jump
density, which is simulated as a compound Poisson process with rate
c * (e^{-1} - E1(1)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import exp1

from .._errors import DomainError
from ..process_model import (
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
)

# total mass of the jump intensity x^{-2} e^{-x} dx on [1, inf) at c = 1
PARETO_UNIT_MASS = float(np.exp(-1.0) - exp1(1.0))

_TABLE_POINTS = 4096
_TABLE_XMAX = 40.0  # relative tail mass beyond 40 is ~3e-21, unreachable
_table_cache = None


def _pareto_table():
    global _table_cache
    if _table_cache is None:
        x = np.exp(np.linspace(0.0, np.log(_TABLE_XMAX), _TABLE_POINTS))
        w = np.exp(-x) / (x * x)
        cdf = cumulative_trapezoid(w, x, initial=0.0)
        cdf /= cdf[-1]
        cdf[-1] = 1.0
        _table_cache = (x, cdf)
    return _table_cache


@dataclass
class SimPlan:
    n: int
    varpi_cum: np.ndarray   # (n,)   initial-state CDF
    exit_rate: np.ndarray   # (n,)   total transition rate out of each state
    kill_rate: np.ndarray   # (n,)   stopping rate
    trans_cum: np.ndarray   # (n,n)  next-state CDF rows (self prob 0)
    mu: np.ndarray          # (n,)   drift
    sigma: np.ndarray       # (n,)   diffusion std dev
    jrate: np.ndarray       # (n,)   within-state jump arrival rate
    jkind: np.ndarray       # (n,)   0 none / 1 fixed / 2 atoms / 3 table
    jfix: np.ndarray        # (n,)   fixed jump size (kind 1)
    jump_off: np.ndarray    # (n,)   atom-pool offsets (kind 2)
    jump_len: np.ndarray
    atom_val: np.ndarray    # pooled atom values
    atom_cum: np.ndarray    # pooled atom CDFs (each slice ends at 1.0)
    tab_off: np.ndarray     # (n,)   table-pool offsets (kind 3)
    tab_len: np.ndarray
    tab_x: np.ndarray       # pooled inverse-CDF grids
    tab_cdf: np.ndarray
    tj_kind: np.ndarray     # (n,n)  0 none / 1 point / 2 atoms / 3 gaussian
    tj_a: np.ndarray        # (n,n)  point size or gaussian mean
    tj_b: np.ndarray        # (n,n)  gaussian std dev
    tj_off: np.ndarray      # (n,n)  atom-pool offsets (kind 2)
    tj_len: np.ndarray


def _cdf_from_probs(probs):
    cum = np.cumsum(probs)
    total = cum[-1]
    if total > 0:
        cum = cum / total
    cum = np.minimum(cum, 1.0)
    cum[-1] = 1.0
    return cum


def build_plan(spec: ModelSpec) -> SimPlan:
    n = spec.n
    varpi_cum = _cdf_from_probs(spec.varpi)
    gen = spec.generator
    off_mask = ~np.eye(n, dtype=bool)
    exit_rate = np.where(off_mask, gen, 0.0).sum(axis=1)
    trans_cum = np.ones((n, n))
    for i in range(n):
        if exit_rate[i] > 0:
            row = np.where(off_mask[i], gen[i], 0.0)
            trans_cum[i] = _cdf_from_probs(row)

    mu = np.zeros(n)
    sigma = np.zeros(n)
    jrate = np.zeros(n)
    jkind = np.zeros(n, dtype=np.int32)
    jfix = np.zeros(n)
    jump_off = np.zeros(n, dtype=np.int32)
    jump_len = np.zeros(n, dtype=np.int32)
    tab_off = np.zeros(n, dtype=np.int32)
    tab_len = np.zeros(n, dtype=np.int32)
    atom_val: list = []
    atom_cum: list = []
    tab_x: list = []
    tab_cdf: list = []

    def push_atoms(atoms):
        pairs = [(float(x), float(p)) for x, p in atoms if p > 0]
        off = len(atom_val)
        atom_val.extend(x for x, _ in pairs)
        atom_cum.extend(_cdf_from_probs([p for _, p in pairs]))
        return off, len(pairs)

    pareto_off = -1
    for i, e in enumerate(spec.exponents):
        if isinstance(e, BrownianDrift):
            mu[i] = e.mu
            sigma[i] = np.sqrt(e.sigma2)
        elif isinstance(e, LinearDrift):
            mu[i] = e.mu
        elif isinstance(e, PoissonJump):
            if e.gamma > 0:
                jrate[i] = e.gamma
                jkind[i] = 1
                jfix[i] = e.h
        elif isinstance(e, CompoundPoissonDiscrete):
            if e.gamma > 0 and any(p > 0 for _, p in e.atoms):
                jrate[i] = e.gamma
                jkind[i] = 2
                jump_off[i], jump_len[i] = push_atoms(e.atoms)
        elif isinstance(e, TruncatedParetoExpJump):
            if pareto_off < 0:
                pareto_off = len(tab_x)
                x, cdf = _pareto_table()
                tab_x.extend(x)
                tab_cdf.extend(cdf)
            jrate[i] = e.c * PARETO_UNIT_MASS
            jkind[i] = 3
            tab_off[i] = pareto_off
            tab_len[i] = _TABLE_POINTS
        elif isinstance(e, CauchyStub):
            raise DomainError(
                f"state {i}: the heavy-tailed stub cannot be simulated")
        else:
            raise DomainError(f"state {i}: no sampler for {type(e).__name__}")

    tj_kind = np.zeros((n, n), dtype=np.int32)
    tj_a = np.zeros((n, n))
    tj_b = np.zeros((n, n))
    tj_off = np.zeros((n, n), dtype=np.int32)
    tj_len = np.zeros((n, n), dtype=np.int32)
    for i in range(n):
        for j in range(n):
            if i == j or gen[i, j] <= 0:
                continue
            jm = spec.jumps[i][j]
            if isinstance(jm, DegenerateZero):
                continue
            if isinstance(jm, DegeneratePoint):
                tj_kind[i, j] = 1
                tj_a[i, j] = jm.a
            elif isinstance(jm, DiscreteAtoms):
                tj_kind[i, j] = 2
                tj_off[i, j], tj_len[i, j] = push_atoms(jm.atoms)
            elif isinstance(jm, Gaussian):
                if jm.variance > 0:
                    tj_kind[i, j] = 3
                    tj_a[i, j] = jm.mean
                    tj_b[i, j] = np.sqrt(jm.variance)
                else:  # degenerate gaussian is a point mass: no normal draw
                    tj_kind[i, j] = 1
                    tj_a[i, j] = jm.mean
            else:
                raise DomainError(
                    f"jump {i}->{j}: no sampler for {type(jm).__name__}")

    return SimPlan(
        n=n,
        varpi_cum=np.ascontiguousarray(varpi_cum),
        exit_rate=np.ascontiguousarray(exit_rate),
        kill_rate=np.array(spec.phi, dtype=float),
        trans_cum=np.ascontiguousarray(trans_cum),
        mu=mu,
        sigma=sigma,
        jrate=jrate,
        jkind=jkind,
        jfix=jfix,
        jump_off=jump_off,
        jump_len=jump_len,
        atom_val=np.asarray(atom_val, dtype=float),
        atom_cum=np.asarray(atom_cum, dtype=float),
        tab_off=tab_off,
        tab_len=tab_len,
        tab_x=np.asarray(tab_x, dtype=float),
        tab_cdf=np.asarray(tab_cdf, dtype=float),
        tj_kind=tj_kind,
        tj_a=tj_a,
        tj_b=tj_b,
        tj_off=tj_off,
        tj_len=tj_len,
    )
