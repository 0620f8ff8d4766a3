"""Monte Carlo engine: path simulation, tail fitting, sample I/O."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .._errors import ConvergenceError, InsufficientTailError
from .._io import atomic_write_text
from ..process_model import DomainInterval, ModelSpec, spec_hash, validate
from ..spectral_core import spectral_abscissa_metzler
from ._plan import build_plan
from . import _pykernel

try:
    from . import _kernel
except ImportError:  # pure-Python fallback build
    _kernel = None

_BACKEND = "cython" if _kernel is not None else "python"


def backend() -> str:
    """Name of the path-kernel implementation selected at import time."""
    return _BACKEND


def _run_paths_fn(name):
    if name is None:
        name = _BACKEND
    if name == "python":
        return _pykernel.run_paths
    if name == "cython":
        if _kernel is None:
            raise ValueError("compiled kernel is not available in this build")
        return _kernel.run_paths
    raise ValueError(f"unknown backend {name!r}")


@dataclass
class SimConfig:
    n_paths: int
    seed: int
    antithetic: bool = False
    # None: stop chasing a path after 50 mean stopping times
    horizon_cap: Optional[float] = None


@dataclass
class SampleSet:
    """Simulation output.  `values` holds the stopped values of the paths
    that actually stopped, in path order; censored paths appear only in the
    per-path arrays (NaN value, mask bit set)."""
    values: np.ndarray
    censored: int
    seed: int
    spec_hash: str
    path_values: np.ndarray
    path_censored: np.ndarray
    path_states: Optional[np.ndarray] = None

    @property
    def n_paths(self) -> int:
        return int(self.path_values.size)


@dataclass
class TailFit:
    """OLS fit of the log empirical tail.  slope estimates -alpha on the
    upper side and -beta on the lower side; stderr is the plain OLS slope
    standard error (it treats the points as independent, which order
    statistics are not — treat it as a lower bound on the uncertainty)."""
    side: str
    slope: float
    stderr: float
    window: tuple
    n_window: int
    intercept: float


def _default_horizon(spec: ModelSpec) -> float:
    phi = np.asarray(spec.phi, dtype=float)
    pos = phi[phi > 0]
    if pos.size == 0:
        return 50.0
    return 50.0 / float(pos.min())


def _dispatch(fn, plan, seed, n_paths, antithetic, record, horizon, workers):
    values = np.empty(n_paths)
    censored = np.zeros(n_paths, dtype=np.uint8)
    states = np.zeros(n_paths, dtype=np.int64)
    if workers <= 1 or n_paths < 2 * workers:
        fn(plan, seed, 0, n_paths, antithetic, record, horizon,
           values, censored, states)
    else:
        chunk = (n_paths + workers - 1) // workers

        def job(s0):
            fn(plan, seed, s0, min(chunk, n_paths - s0), antithetic, record,
               horizon, values, censored, states)

        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(job, range(0, n_paths, chunk)))
    return values, censored, states


def _validated(spec: ModelSpec) -> None:
    report = validate(spec)
    if not report.ok:
        raise ValueError("invalid model: " + "; ".join(report.violations))


def simulate_stopped(spec: ModelSpec, config: SimConfig, workers: int = 1,
                     backend: Optional[str] = None) -> SampleSet:
    """Simulate the additive process until its state-dependent stopping time,
    censoring any path still alive at the horizon cap."""
    _validated(spec)
    fn = _run_paths_fn(backend)
    plan = build_plan(spec)
    horizon = config.horizon_cap
    if horizon is None:
        horizon = _default_horizon(spec)
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    values, censored, states = _dispatch(
        fn, plan, config.seed, config.n_paths, config.antithetic, False,
        float(horizon), workers)
    mask = censored.astype(bool)
    return SampleSet(
        values=values[~mask].copy(),
        censored=int(mask.sum()),
        seed=config.seed,
        spec_hash=spec_hash(spec),
        path_values=values,
        path_censored=mask,
        path_states=states,
    )


def simulate_fixed_time(spec: ModelSpec, t: float, config: SimConfig,
                        workers: int = 1, backend: Optional[str] = None,
                        with_killing: bool = False):
    """Value and state of the process at a deterministic time t.

    Returns (values, states).  With with_killing=True the stopping clock
    stays armed and a path whose clock rings before t is reported as NaN
    (its state is the state it died in); otherwise the clock is disarmed
    and every path survives to t.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    _validated(spec)
    fn = _run_paths_fn(backend)
    plan = build_plan(spec)
    if not with_killing:
        plan.kill_rate = np.zeros(spec.n)
    values, _, states = _dispatch(
        fn, plan, config.seed, config.n_paths, config.antithetic, True,
        float(t), workers)
    return values, states


def fit_tail(samples, side: str = "upper",
             window: tuple = (0.95, 0.9995)) -> TailFit:
    """Least-squares slope of the log empirical tail over a quantile window.

    side "upper": log survival of W against w (slope ~ -alpha).
    side "lower": the same fit applied to -W, i.e. log CDF of the deep lower
    tail (slope ~ -beta).  The top order statistic is always excluded (its
    survival estimate is zero).  Censored paths never enter.
    """
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    q_lo, q_hi = float(window[0]), float(window[1])
    if not 0.0 <= q_lo < q_hi <= 1.0:
        raise ValueError("need 0 <= q_lo < q_hi <= 1")
    values = samples.values if isinstance(samples, SampleSet) else samples
    w = np.asarray(values, dtype=float)
    if side == "lower":
        w = -w
    w = np.sort(w)
    n = w.size
    j_lo = max(math.ceil(q_lo * n) - 1, 0)
    j_hi = min(math.floor(q_hi * n) - 1, n - 2)
    m = j_hi - j_lo + 1
    if m < 50:
        raise InsufficientTailError(
            f"only {max(m, 0)} points in the fit window; need at least 50")
    idx = np.arange(j_lo, j_hi + 1)
    x = w[idx]
    y = np.log((n - 1.0 - idx) / n)
    xbar = x.mean()
    sxx = float(((x - xbar) ** 2).sum())
    if sxx <= 0.0:
        raise InsufficientTailError("fit window has no spread in w")
    slope = float(((x - xbar) * (y - y.mean())).sum()) / sxx
    intercept = float(y.mean()) - slope * xbar
    resid = y - intercept - slope * x
    stderr = math.sqrt(float(resid @ resid) / (m - 2) / sxx)
    return TailFit(side=side, slope=slope, stderr=stderr,
                   window=(q_lo, q_hi), n_window=m, intercept=intercept)


def empirical_mgf(samples: SampleSet, s: float,
                  domain: Optional[DomainInterval] = None):
    """Sample mean and standard error of exp(s * W_T) over uncensored paths.

    If the increment-domain interval is supplied, s within 5% of an endpoint
    (or outside) draws a warning: the estimator's variance blows up there.
    """
    if samples.censored > 0:
        warnings.warn(
            f"{samples.censored} censored path(s) excluded; the estimate "
            "is biased toward the stopped subpopulation", stacklevel=2)
    if domain is not None and not _comfortably_inside(domain, s):
        warnings.warn(
            "s is outside or within 5% of the boundary of the transform "
            "domain; the estimator may have infinite variance", stacklevel=2)
    g = np.exp(s * samples.values)
    n = g.size
    if n == 0:
        raise ValueError("no uncensored samples")
    mean = float(g.mean())
    stderr = float(g.std(ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    return mean, stderr


def _comfortably_inside(domain: DomainInterval, s: float) -> bool:
    lo, hi = domain.lo, domain.hi
    if math.isfinite(lo) and math.isfinite(hi):
        pad = 0.05 * (hi - lo)
    else:
        pad = 0.05 * max(abs(x) for x in (lo, hi) if math.isfinite(x)) \
            if (math.isfinite(lo) or math.isfinite(hi)) else 0.0
    lo2 = lo + pad if math.isfinite(lo) else lo
    hi2 = hi - pad if math.isfinite(hi) else hi
    return lo2 < s < hi2


def absorption_probability(generator, phi, tol: float = 1e-12,
                           max_sweeps: int = 2_000_000) -> np.ndarray:
    """Probability, per starting state, that the stopping clock ever rings.

    When the killed chain is uniformly transient (negative spectral abscissa
    of generator - diag(phi)) this is identically one; otherwise the minimal
    nonnegative solution is reached by monotone value iteration from zero.
    """
    gen = np.asarray(generator, dtype=float)
    phi = np.asarray(phi, dtype=float)
    n = gen.shape[0]
    if gen.shape != (n, n) or phi.shape != (n,):
        raise ValueError("generator must be square and phi of matching size")
    res = spectral_abscissa_metzler(gen - np.diag(phi), check_simple=False)
    if res.zeta < -1e-10:
        return np.ones(n)
    off = np.where(~np.eye(n, dtype=bool), gen, 0.0)
    denom = off.sum(axis=1) + phi
    live = denom > 0.0
    p = np.zeros(n)
    for _ in range(max_sweeps):
        nxt = np.zeros(n)
        nxt[live] = (phi[live] + (off @ p)[live]) / denom[live]
        step = float(np.abs(nxt - p).max())
        p = nxt
        if step < tol:
            return p
    raise ConvergenceError("absorption-probability iteration did not settle")


def write_samples_csv(path, samples: SampleSet) -> None:
    lines = [
        f"# seed={samples.seed}",
        f"# spec_hash={samples.spec_hash}",
        f"# n_paths={samples.n_paths}",
        "path_index,w_T,censored",
    ]
    vals = samples.path_values
    mask = samples.path_censored
    for i in range(samples.n_paths):
        if mask[i]:
            lines.append(f"{i},,1")
        else:
            lines.append(f"{i},{vals[i]:.17g},0")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_samples_csv(path) -> SampleSet:
    meta = {}
    rows = []
    with open(path, "r", newline="") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, val = body.split("=", 1)
                    meta[key.strip()] = val.strip()
                continue
            rows.append(line)
    if not rows or not rows[0].startswith("path_index"):
        raise ValueError(f"{path}: missing sample header row")
    if "seed" not in meta or "spec_hash" not in meta:
        raise ValueError(f"{path}: missing seed / spec_hash metadata")
    data = rows[1:]
    n = len(data)
    path_values = np.full(n, np.nan)
    mask = np.zeros(n, dtype=bool)
    for r in data:
        parts = r.split(",")
        if len(parts) != 3:
            raise ValueError(f"{path}: malformed row {r!r}")
        i = int(parts[0])
        if not 0 <= i < n:
            raise ValueError(f"{path}: path index {i} out of range")
        if parts[2] == "1":
            mask[i] = True
        else:
            path_values[i] = float(parts[1])
    return SampleSet(
        values=path_values[~mask].copy(),
        censored=int(mask.sum()),
        seed=int(meta["seed"]),
        spec_hash=meta["spec_hash"],
        path_values=path_values,
        path_censored=mask,
        path_states=None,
    )
