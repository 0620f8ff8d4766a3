"""Command-line front end.

Subcommands: analyze (decay rates, residues, tail bounds), simulate
(samples to CSV), verify (analytic vs empirical report), wealth (policy /
equilibrium solve), sweep (grid of the spectral abscissa or of excess
supply).  JSON reports go to stdout unless --out is given; all file writes
are atomic.  Exit codes: 0 success, 2 invalid input, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from ._errors import (BracketFailureError, BUnknownError, ConvergenceError,
                      DomainError, LevyTailsError, NoConvergenceError,
                      NotSimpleError, ReducibleError)
from ._io import atomic_write_text
from .process_model import domain_interval, spec_hash, spec_loads, validate
from .simulator import (SimConfig, backend, empirical_mgf, fit_tail,
                        simulate_stopped, write_samples_csv)
from .tail_analysis import (FOUND_INTERIOR, find_decay_rates, lattice_info,
                            mgf_stopped, nakagawa_bounds, pole_residue,
                            zeta_at)
from .wealth_model import (budget_spectral_check, excess_supply, solve_b,
                           solve_equilibrium, wealth_loads,
                           wealth_tail_rates, wealth_to_dict)

_ROOT_TOL = 1e-10  # |zeta(A(root))| accepted by the root finder


def _jsonable(x):
    """Make a result tree strict-JSON safe and deterministic."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _tool() -> dict:
    return {"name": "levytails", "version": __version__,
            "simulation_backend": backend()}


def _load_spec(path: str):
    with open(path, "r") as fh:
        text = fh.read()
    try:
        spec = spec_loads(text)
    except KeyError as exc:
        raise ValueError(f"{path}: missing field {exc}") from exc
    except (TypeError, AttributeError) as exc:
        raise ValueError(f"{path}: malformed model: {exc}") from exc
    report = validate(spec)
    if not report.ok:
        raise ValueError("invalid model: " + "; ".join(report.violations))
    return spec


def _load_wealth(path: str):
    with open(path, "r") as fh:
        text = fh.read()
    try:
        return wealth_loads(text)
    except (TypeError, AttributeError) as exc:
        raise ValueError(f"{path}: malformed model: {exc}") from exc


def _rate_entry(rates, side: str) -> dict:
    status = getattr(rates, f"{side}_status")
    entry = {"status": status, "root_tolerance": _ROOT_TOL}
    value = getattr(rates, side)
    if value is not None:
        entry["value"] = value
    bz = getattr(rates, f"{side}_boundary_zeta")
    if bz is not None:
        entry["boundary_zeta"] = bz
    return entry


def _tail_bounds(spec, rates, lat) -> dict:
    """Tail-bound block for both sides, tolerant of structure errors."""
    out = {}
    for side in ("upper", "lower"):
        if side == "upper":
            found = rates.alpha_status == FOUND_INTERIOR
            location = rates.alpha
        else:
            found = rates.beta_status == FOUND_INTERIOR
            location = -rates.beta if rates.beta is not None else None
        if not found or location is None:
            continue
        try:
            pole = pole_residue(spec, location)
            nb = nakagawa_bounds(pole, lat)
            out[side] = {
                "pole_location": location,
                "mgf_residue": pole.mgf_residue,
                "C": nb.C,
                "B": nb.B,
                "liminf_lower_bound": nb.lower,
                "limsup_upper_bound": nb.upper,
                "exact_limit": nb.exact_limit,
            }
        except (NotSimpleError, BUnknownError, ValueError) as exc:
            out[side] = {"pole_location": location, "error": str(exc)}
    return out


def _cmd_analyze(args) -> int:
    spec = _load_spec(args.spec)
    rates = find_decay_rates(spec)
    dom = domain_interval(spec)
    lat = lattice_info(spec)
    report = {
        "command": "analyze",
        "tool": _tool(),
        "spec_hash": spec_hash(spec),
        "status": "ok",
        "domain": {"lo": dom.lo, "hi": dom.hi,
                   "lo_closed": dom.lo_closed, "hi_closed": dom.hi_closed},
        "zeta_at_zero": {"value": rates.zeta_at_zero,
                         "negative_required_below": -1e-12},
        "alpha": _rate_entry(rates, "alpha"),
        "beta": _rate_entry(rates, "beta"),
        "lattice": {"non_lattice": lat.non_lattice, "span": lat.span,
                    "reason": lat.reason},
        "tail_bounds": _tail_bounds(spec, rates, lat),
    }
    _emit(report, args.out)
    return 0


def _cmd_simulate(args) -> int:
    spec = _load_spec(args.spec)
    cfg = SimConfig(n_paths=args.paths, seed=args.seed,
                    antithetic=args.antithetic, horizon_cap=args.horizon)
    samples = simulate_stopped(spec, cfg, workers=args.workers)
    write_samples_csv(args.out, samples)
    summary = {
        "command": "simulate",
        "tool": _tool(),
        "spec_hash": samples.spec_hash,
        "seed": samples.seed,
        "n_paths": samples.n_paths,
        "censored": samples.censored,
        "out": args.out,
    }
    sys.stdout.write(json.dumps(_jsonable(summary), indent=2,
                                sort_keys=True) + "\n")
    return 0


def _batched_slope(values: np.ndarray, side: str, window, k: int = 10):
    """Mean and replication stderr of the tail slope over k disjoint batches.

    The OLS stderr of a single fit badly understates the slope uncertainty
    (order statistics are dependent), so statistical comparisons use the
    scatter across independent batches instead."""
    n = values.size // k
    if n == 0:
        raise ValueError("not enough samples to batch")
    slopes = [fit_tail(values[i * n:(i + 1) * n], side, window).slope
              for i in range(k)]
    arr = np.asarray(slopes)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(k))


def _cmd_verify(args) -> int:
    spec = _load_spec(args.spec)
    rates = find_decay_rates(spec)
    window = _parse_window(args.window)
    cfg = SimConfig(n_paths=args.paths, seed=args.seed,
                    antithetic=args.antithetic, horizon_cap=args.horizon)
    samples = simulate_stopped(spec, cfg, workers=args.workers)
    checks = []

    def add_check(name, empirical, analytic, stderr, sigmas):
        gap = abs(empirical - analytic)
        ok = gap <= sigmas * stderr
        checks.append({"name": name, "empirical": empirical,
                       "analytic": analytic, "stderr": stderr,
                       "threshold_sigma": sigmas, "pass": ok})

    for side, rate, sign in (("upper", rates.alpha, -1.0),
                             ("lower", rates.beta, -1.0)):
        status = getattr(rates, "alpha_status" if side == "upper"
                         else "beta_status")
        if status != FOUND_INTERIOR or rate is None:
            continue
        try:
            mean_slope, se = _batched_slope(samples.values, side, window)
        except (ValueError, LevyTailsError) as exc:
            checks.append({"name": f"tail_slope_{side}", "skipped": str(exc)})
            continue
        add_check(f"tail_slope_{side}", mean_slope, sign * rate,
                  max(se, 1e-12), 3)

    s_probes = []
    if rates.alpha_status == FOUND_INTERIOR:
        s_probes.append(0.45 * rates.alpha)
    if rates.beta_status == FOUND_INTERIOR:
        s_probes.append(-0.45 * rates.beta)
    for s in s_probes:
        mean, se = empirical_mgf(samples, s)
        add_check(f"mgf_at_s={s:.6g}", mean, mgf_stopped(spec, s),
                  max(se, 1e-12), 4)

    report = {
        "command": "verify",
        "tool": _tool(),
        "spec_hash": samples.spec_hash,
        "seed": samples.seed,
        "n_paths": samples.n_paths,
        "censored": samples.censored,
        "window": list(window),
        "alpha": _rate_entry(rates, "alpha"),
        "beta": _rate_entry(rates, "beta"),
        "checks": checks,
        "all_pass": all(c.get("pass", True) for c in checks),
    }
    _emit(report, args.out)
    return 0


def _wealth_rates_entry(rates) -> dict:
    return {"alpha": _rate_entry(rates, "alpha"),
            "beta": _rate_entry(rates, "beta"),
            "zeta_at_zero": rates.zeta_at_zero}


def _cmd_wealth(args) -> int:
    model = _load_wealth(args.spec)
    report = {
        "command": "wealth",
        "tool": _tool(),
        "model": wealth_to_dict(model),
        "stationary": model.varpi,
    }
    if args.r is not None:
        sol = solve_b(model, args.r)
        rates = wealth_tail_rates(model, args.r)
        report.update({
            "mode": "policy",
            "r": args.r,
            "b": {"values": sol.b, "residual": sol.residual,
                  "residual_tolerance": 1e-12 * (1 + float(np.abs(sol.b).max())),
                  "iterations": sol.iterations, "damping_k": sol.k},
            "slopes": model.y - sol.b,
            "excess_supply": excess_supply(model, args.r),
            "budget_check": {"value": budget_spectral_check(model, sol),
                             "tolerance": 1e-8},
            "tail_rates": _wealth_rates_entry(rates),
        })
    else:
        eq = solve_equilibrium(model)
        report.update({
            "mode": "equilibrium",
            "r_star": eq.r_star,
            "g_residual": {"value": eq.g_residual, "tolerance": 1e-10},
            "b": {"values": eq.b.b, "residual": eq.b.residual,
                  "residual_tolerance": 1e-12 * (1 + float(np.abs(eq.b.b).max())),
                  "iterations": eq.b.iterations, "damping_k": eq.b.k},
            "slopes": eq.slopes,
            "budget_check": {"value": budget_spectral_check(model, eq.b),
                             "tolerance": 1e-8},
            "tail_rates": _wealth_rates_entry(eq.rates),
        })
    _emit(report, args.out)
    return 0


def _cmd_sweep(args) -> int:
    lo, hi, npts = args.from_, args.to, args.points
    if npts < 2:
        raise ValueError("--points must be at least 2")
    grid = np.linspace(lo, hi, npts)
    lines = [f"# tool=levytails {__version__}", "# command=sweep"]
    if args.var == "s":
        spec = _load_spec(args.spec)
        lines.append(f"# spec_hash={spec_hash(spec)}")
        lines.append("s,zeta_A")
        for s in grid:
            try:
                val = zeta_at(spec, float(s))
            except (DomainError, ValueError, np.linalg.LinAlgError):
                val = math.nan  # outside the transform domain
            lines.append(f"{s:.17g},{val:.17g}")
    else:
        model = _load_wealth(args.spec)
        if lo <= 0:
            raise ValueError("--from must be positive when sweeping r")
        lines.append("r,excess_supply")
        for r in grid:
            lines.append(f"{r:.17g},{excess_supply(model, float(r)):.17g}")
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _parse_window(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("--window must be QLO,QHI")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise ValueError("--window must be QLO,QHI") from None
    if not 0.0 <= lo < hi <= 1.0:
        raise ValueError("--window needs 0 <= QLO < QHI <= 1")
    return lo, hi


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="levytails",
        description="tail asymptotics of stopped modulated additive "
                    "processes, with simulation and a wealth model")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=False):
        sp.add_argument("--spec", required=True, help="model JSON file")
        sp.add_argument("--out", required=out_required,
                        help="output file (JSON report or CSV)")

    sp = sub.add_parser("analyze", help="decay rates, residues, tail bounds")
    common(sp)
    sp.set_defaults(fn=_cmd_analyze)

    def sim_flags(sp):
        sp.add_argument("--paths", type=int, default=100_000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--horizon", type=float, default=None,
                        help="censoring horizon (default: auto)")
        sp.add_argument("--antithetic", action="store_true")
        sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("simulate", help="write stopped-value samples to CSV")
    common(sp, out_required=True)
    sim_flags(sp)
    sp.set_defaults(fn=_cmd_simulate)

    sp = sub.add_parser("verify", help="compare analytic and empirical tails")
    common(sp)
    sim_flags(sp)
    sp.add_argument("--window", default="0.95,0.9995",
                    help="tail-fit quantile window QLO,QHI")
    sp.set_defaults(fn=_cmd_verify)

    sp = sub.add_parser("wealth", help="solve the consumption-saving economy")
    common(sp)
    sp.add_argument("--r", type=float, default=None,
                    help="solve at this rate instead of equilibrium")
    sp.set_defaults(fn=_cmd_wealth)

    sp = sub.add_parser("sweep", help="grid of zeta(A(s)) or excess supply")
    common(sp, out_required=True)
    sp.add_argument("--var", choices=("s", "r"), required=True)
    sp.add_argument("--from", dest="from_", type=float, required=True)
    sp.add_argument("--to", type=float, required=True)
    sp.add_argument("--points", type=int, required=True)
    sp.set_defaults(fn=_cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConvergenceError, NoConvergenceError, BracketFailureError) as exc:
        print(f"levytails: did not converge: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError, json.JSONDecodeError,
            ReducibleError, LevyTailsError) as exc:
        print(f"levytails: invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
