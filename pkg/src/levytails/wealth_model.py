"""CARA consumption-saving economy with Markov-switching income.

An agent with exponential utility (risk aversion gamma) faces income y_n
switching by a continuous-time chain with generator Pi and dies at rate phi
(effective discount rho = rho_tilde + phi).  The optimal policy is linear in
wealth with state intercepts b_n solving

    b_n = y_n - 1/gamma + rho/(gamma r)
          - 1/(gamma r) * sum_n' pi_{nn'} exp(gamma (b_n - b_{n'}))

(the n' = n term contributes the constant pi_nn).  Stationary-wealth tails
then follow from the induced drift process with slopes y - b, and general
equilibrium picks r so aggregate net saving vanishes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ._errors import (BracketFailureError, ConvergenceError,
                      NoConvergenceError, ReducibleError)
from .process_model import LinearDrift, ModelSpec
from .spectral_core import is_irreducible, spectral_abscissa_metzler
from .tail_analysis import (DOMAIN_DEGENERATE, DecayRates, find_decay_rates)

_MAX_SWEEPS = 100_000
_NEWTON_CAP = 50


def stationary_distribution(generator) -> np.ndarray:
    """Unique probability vector w with w^T Pi = 0 (irreducible Pi)."""
    pi = np.asarray(generator, dtype=float)
    n = pi.shape[0]
    if pi.ndim != 2 or pi.shape != (n, n):
        raise ValueError("generator must be a square matrix")
    if not is_irreducible(pi):
        raise ReducibleError(
            "generator is reducible; stationary distribution is not unique")
    a = np.vstack([pi.T[:-1], np.ones(n)])
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    w = np.linalg.solve(a, rhs)
    w = np.linalg.solve(a, rhs) + np.linalg.solve(a, rhs - a @ w)  # refine
    res = float(np.abs(w @ pi).max())
    if res > 1e-12 * max(1.0, float(np.abs(pi).max())):
        raise ConvergenceError(
            f"stationary distribution residual {res:.3e} too large")
    return w


@dataclass(frozen=True, eq=False)
class WealthModel:
    y: np.ndarray
    generator: np.ndarray
    gamma: float
    rho_tilde: float
    phi: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        pi = np.asarray(self.generator, dtype=float)
        n = y.size
        if y.ndim != 1 or pi.shape != (n, n):
            raise ValueError("y must be a vector and generator N x N")
        if not np.all(np.isfinite(y)) or not np.all(np.isfinite(pi)):
            raise ValueError("non-finite model data")
        scale = max(1.0, float(np.abs(pi).max()))
        off = pi[~np.eye(n, dtype=bool)]
        if off.size and off.min() < -1e-12 * scale:
            raise ValueError("generator has negative off-diagonal entries")
        if float(np.abs(pi.sum(axis=1)).max()) > 1e-12 * scale:
            raise ValueError("generator rows must sum to zero")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.phi > 0:
            raise ValueError("phi must be positive")
        if not self.rho_tilde + self.phi > 0:
            raise ValueError("effective discount rate rho must be positive")
        y.flags.writeable = False
        pi.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "generator", pi)
        object.__setattr__(self, "_varpi", stationary_distribution(pi))

    @property
    def n_states(self) -> int:
        return int(self.y.size)

    @property
    def rho(self) -> float:
        """Effective discount rate rho_tilde + phi."""
        return self.rho_tilde + self.phi

    @property
    def varpi(self) -> np.ndarray:
        return self._varpi


@dataclass
class BSolution:
    r: float
    b: np.ndarray
    residual: float
    iterations: int
    k: float


@dataclass
class Equilibrium:
    r_star: float
    b: BSolution
    slopes: np.ndarray
    alpha: Optional[float]
    beta: Optional[float]
    rates: DecayRates
    g_residual: float


def _defect(model: WealthModel, r: float, b: np.ndarray) -> np.ndarray:
    g = model.gamma
    e = np.exp(g * (b[:, None] - b[None, :]))
    return (b - model.y + 1.0 / g - model.rho / (g * r)
            + (model.generator * e).sum(axis=1) / (g * r))


def _jacobian(model: WealthModel, r: float, b: np.ndarray) -> np.ndarray:
    g = model.gamma
    n = b.size
    p = np.where(~np.eye(n, dtype=bool),
                 model.generator * np.exp(g * (b[:, None] - b[None, :])), 0.0)
    return np.eye(n) + (np.diag(p.sum(axis=1)) - p) / r


def solve_b(model: WealthModel, r: float) -> BSolution:
    """Policy intercepts at interest rate r.

    Damped fixed-point iteration from the midpoint of the order interval
    (damping k makes the map monotone there), switching to clamped Newton
    once the steps are small; Newton falls back to further damping if it
    stalls.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    y = model.y
    g = model.gamma
    n = y.size
    base = y - 1.0 / g + model.rho / (g * r)
    u_lo = float(base.min()) - 1.0
    v_hi = float(base.max()) + 1.0
    off = np.where(~np.eye(n, dtype=bool), model.generator, 0.0)
    exit_max = float(off.sum(axis=1).max())
    k = 1.0 + (exit_max / r) * math.exp(min(g * (v_hi - u_lo), 700.0))

    def accept(bb):
        return float(np.abs(_defect(model, r, bb)).max()) \
            <= 1e-12 * (1.0 + float(np.abs(bb).max()))

    b = np.full(n, 0.5 * (u_lo + v_hi))
    iterations = 0

    def damp_until(threshold):
        nonlocal b, iterations
        while iterations < _MAX_SWEEPS:
            # the damped map f(b) = (k b + rhs(b))/(k+1) = b - defect/(k+1)
            nxt = b - _defect(model, r, b) / (k + 1.0)
            iterations += 1
            step = float(np.abs(nxt - b).max())
            b = nxt
            if step < threshold:
                return True
        return False

    def newton():
        nonlocal b, iterations
        for _ in range(_NEWTON_CAP):
            d = _defect(model, r, b)
            norm = float(np.abs(d).max())
            if norm <= 1e-13 * (1.0 + float(np.abs(b).max())):
                return True
            try:
                delta = np.linalg.solve(_jacobian(model, r, b), -d)
            except np.linalg.LinAlgError:
                return False
            b = np.clip(b + delta, u_lo, v_hi)
            iterations += 1
            if float(np.abs(delta).max()) < 1e-15 * (1.0 + np.abs(b).max()):
                return accept(b)
        return accept(b)

    damp_until(1e-6)
    if not newton():
        damp_until(1e-14)
    residual = float(np.abs(_defect(model, r, b)).max())
    if residual > 1e-12 * (1.0 + float(np.abs(b).max())):
        raise NoConvergenceError(
            f"policy-intercept solver stalled at residual {residual:.3e} "
            f"after {iterations} iterations (r={r:.6g})")
    return BSolution(r=float(r), b=b, residual=residual,
                     iterations=iterations, k=k)


def excess_supply(model: WealthModel, r: float) -> float:
    """Aggregate net saving g(r) = varpi . (y - b(r))."""
    sol = solve_b(model, r)
    return float(model.varpi @ (model.y - sol.b))


def wealth_tail_rates(model: WealthModel, r: float) -> DecayRates:
    """Tail-decay rates of the stationary wealth distribution at rate r.

    The wealth of an age-t individual drifts at slope y_n - b_n while the
    income state sits in n, and age is exponential with rate phi, so the
    cross-section is exactly a stopped drift process."""
    sol = solve_b(model, r)
    slopes = model.y - sol.b
    spec = ModelSpec(
        varpi=model.varpi,
        generator=model.generator,
        exponents=[LinearDrift(float(s)) for s in slopes],
        phi=np.full(model.n_states, model.phi),
    )
    return find_decay_rates(spec)


def budget_spectral_check(model: WealthModel, sol: BSolution) -> float:
    """Signed defect of the optimality identity zeta(-rho I - gamma r
    diag(y - b) + Pi) = -r; near zero iff b truly solves the system."""
    a = (-model.rho * np.eye(model.n_states)
         - model.gamma * sol.r * np.diag(model.y - sol.b)
         + model.generator)
    return spectral_abscissa_metzler(a, check_simple=False).zeta + sol.r


def solve_equilibrium(model: WealthModel) -> Equilibrium:
    """Interest rate clearing aggregate saving, with the tail rates there.

    Searches (0, rho]; if several roots lie in the bracket the largest is
    returned (a grid rescan toward rho follows the first hit).  Equal
    incomes short-circuit to the degenerate equilibrium r* = rho, b = y,
    where the cross-sectional wealth is identically zero."""
    y = model.y
    rho = model.rho
    if float(np.ptp(y)) == 0.0:
        sol = solve_b(model, rho)
        rates = DecayRates(
            alpha=None, beta=None,
            alpha_status=DOMAIN_DEGENERATE, beta_status=DOMAIN_DEGENERATE,
            zeta_at_zero=-model.phi)
        slopes = y - sol.b
        return Equilibrium(r_star=rho, b=sol, slopes=slopes,
                           alpha=None, beta=None, rates=rates,
                           g_residual=float(abs(model.varpi @ slopes)))

    g = lambda r: excess_supply(model, r)
    r_lo = rho / 2.0
    while g(r_lo) >= 0.0:
        r_lo /= 2.0
        if r_lo < 1e-12:
            raise BracketFailureError(
                "no sign change of excess supply found above r = 1e-12")
    r_star = float(brentq(g, r_lo, rho, xtol=1e-13, rtol=8.9e-16,
                          maxiter=200))

    # rescan toward rho for a larger root; keep the rightmost one
    if rho - r_star > 1e-12:
        pts = r_star + (rho - r_star) * np.arange(1, 65) / 64.0
        vals = [g(p) for p in pts]
        for i in range(len(pts) - 2, -1, -1):
            if vals[i] < 0.0 <= vals[i + 1]:
                r_star = float(brentq(g, pts[i], pts[i + 1], xtol=1e-13,
                                      rtol=8.9e-16, maxiter=200))
                break

    sol = solve_b(model, r_star)
    slopes = model.y - sol.b
    g_res = float(abs(model.varpi @ slopes))
    if g_res > 1e-10:
        raise ConvergenceError(
            f"equilibrium residual |g(r*)| = {g_res:.3e} exceeds 1e-10")
    rates = wealth_tail_rates(model, r_star)
    return Equilibrium(r_star=r_star, b=sol, slopes=slopes,
                       alpha=rates.alpha, beta=rates.beta, rates=rates,
                       g_residual=g_res)


# ---------------------------------------------------------------------------
# JSON round trip


def wealth_to_dict(model: WealthModel) -> dict:
    return {
        "y": [float(v) for v in model.y],
        "generator": [[float(v) for v in row] for row in model.generator],
        "gamma": float(model.gamma),
        "rho_tilde": float(model.rho_tilde),
        "phi": float(model.phi),
        "rho": float(model.rho),  # echoed, derived
    }


def wealth_from_dict(obj: dict) -> WealthModel:
    try:
        return WealthModel(
            y=np.asarray(obj["y"], dtype=float),
            generator=np.asarray(obj["generator"], dtype=float),
            gamma=float(obj["gamma"]),
            rho_tilde=float(obj["rho_tilde"]),
            phi=float(obj["phi"]),
        )
    except KeyError as exc:
        raise ValueError(f"wealth model JSON missing key {exc}") from exc


def wealth_dumps(model: WealthModel) -> str:
    return json.dumps(wealth_to_dict(model), indent=2, sort_keys=True)


def wealth_loads(text: str) -> WealthModel:
    return wealth_from_dict(json.loads(text))
