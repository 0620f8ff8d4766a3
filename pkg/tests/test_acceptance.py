"""End-to-end acceptance suite.

Eight numbered checks, each printing one PASS/FAIL line straight to the
terminal (bypassing capture) so the whole gate can be read at a glance.
Statistical comparisons use fixed seeds; tail-slope uncertainty comes from
disjoint-batch replication because the single-fit OLS standard error treats
dependent order statistics as independent and is far too small.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm
from scipy.special import exp1

from levytails.process_model import (BrownianDrift, LinearDrift, ModelSpec,
                                     PoissonJump, TruncatedParetoExpJump,
                                     assemble_A, validate)
from levytails.simulator import (SimConfig, absorption_probability,
                                 empirical_mgf, fit_tail, simulate_fixed_time,
                                 simulate_stopped)
from levytails.spectral_core import (is_irreducible, spectral_abscissa_complex,
                                     spectral_abscissa_metzler)
from levytails.tail_analysis import (DOMAIN_DEGENERATE, FOUND_INTERIOR,
                                     NO_ROOT_IN_DOMAIN, conditional_mgf_matrix,
                                     find_decay_rates, lattice_info,
                                     mgf_stopped, nakagawa_bounds,
                                     pole_residue, two_state_closed_form,
                                     zeta_at)
from levytails.wealth_model import (WealthModel, budget_spectral_check,
                                    solve_b, solve_equilibrium,
                                    wealth_tail_rates)

from conftest import brownian_spec, poisson_spec, random_generator, random_spec

WORKERS = 4


def _report(capsys, num, label, failures, t0):
    dt = time.perf_counter() - t0
    status = "PASS" if not failures else "FAIL"
    with capsys.disabled():
        print(f"[acceptance {num}] {label}: {status} ({dt:.1f}s)")
    assert not failures, f"acceptance check {num}: " + " | ".join(failures)


def batched_slope(values, side, k=10, window=(0.95, 0.9995)):
    """Tail slope averaged over k disjoint batches, with replication stderr."""
    n = values.size // k
    slopes = [fit_tail(values[i * n:(i + 1) * n], side, window).slope
              for i in range(k)]
    arr = np.asarray(slopes)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(k))


def test_01_brownian_laplace_reproduction(capsys):
    t0 = time.perf_counter()
    failures = []
    mu, sigma2, phi = 0.0, 1.0, 0.5
    spec = brownian_spec(mu, sigma2, phi)
    rates = find_decay_rates(spec)
    alpha_cf = (-mu + math.sqrt(mu * mu + 2 * sigma2 * phi)) / sigma2
    beta_cf = (mu + math.sqrt(mu * mu + 2 * sigma2 * phi)) / sigma2
    if abs(rates.alpha - alpha_cf) > 1e-10:
        failures.append(f"alpha {rates.alpha} vs {alpha_cf}")
    if abs(rates.beta - beta_cf) > 1e-10:
        failures.append(f"beta {rates.beta} vs {beta_cf}")

    a, b = rates.alpha, rates.beta
    for z in np.linspace(-0.95 * b, 0.95 * a, 20):
        expected = a * b / ((a - z) * (b + z))
        got = mgf_stopped(spec, float(z))
        if abs(got - expected) > 1e-10:
            failures.append(f"mgf at z={z:.3f}: {got} vs {expected}")
            break

    nb = nakagawa_bounds(pole_residue(spec, a), lattice_info(spec))
    if nb.exact_limit is None or abs(nb.exact_limit - 0.5) > 1e-10:
        failures.append(f"exact_limit {nb.exact_limit} vs 0.5")

    out = simulate_stopped(spec, SimConfig(n_paths=1_000_000, seed=20240811),
                           workers=WORKERS)
    if out.censored:
        failures.append(f"{out.censored} censored paths")
    n = out.values.size
    for w in (3.0, 4.0, 5.0):
        p = 0.5 * math.exp(-w)  # upper Laplace(1) tail
        phat = float((out.values > w).mean())
        se = math.sqrt(p * (1 - p) / n)
        scaled = math.exp(w) * phat
        if abs(phat - p) > 3 * se:
            failures.append(f"survival at w={w}: e^w*phat={scaled:.4f}, "
                            f"z={(phat - p) / se:.2f}")
    if time.perf_counter() - t0 > 120:
        failures.append("runtime over 2 minutes")
    _report(capsys, 1, "brownian stopped value is asymmetric Laplace",
            failures, t0)


def test_02_poisson_lattice_oscillation(capsys):
    t0 = time.perf_counter()
    failures = []
    gamma = phi = 1.0
    spec = poisson_spec(gamma=gamma, phi=phi)
    rates = find_decay_rates(spec)
    if abs(rates.alpha - math.log(2.0)) > 1e-12:
        failures.append(f"alpha {rates.alpha} vs log 2")
    if rates.beta_status != NO_ROOT_IN_DOMAIN:
        failures.append(f"beta_status {rates.beta_status}")

    nb = nakagawa_bounds(pole_residue(spec, rates.alpha), lattice_info(spec))
    if abs(nb.lower - 0.5) > 1e-10 or abs(nb.upper - 1.0) > 1e-10:
        failures.append(f"band [{nb.lower}, {nb.upper}] vs [0.5, 1.0]")
    if nb.exact_limit is not None:
        failures.append("lattice case must not report an exact limit")
    if abs(nb.B - 2 * math.pi) > 1e-12:
        failures.append(f"band width {nb.B} vs 2*pi")

    out = simulate_stopped(spec, SimConfig(n_paths=1_000_000, seed=20240812),
                           workers=WORKERS)
    n = out.values.size
    alpha = rates.alpha
    for k in range(3, 7):
        for w in (k - 0.5, k - 1e-6):
            p = 0.5 ** k  # P(W >= k) for the geometric stopped value
            target = (gamma / (gamma + phi)) ** (math.floor(w) - w + 1.0)
            phat = float((out.values > w).mean())
            se = math.sqrt(p * (1 - p) / n)
            z = (phat - p) / se
            if abs(math.exp(alpha * w) * phat - target) > \
                    3 * math.exp(alpha * w) * se:
                failures.append(f"w={w}: scaled tail "
                                f"{math.exp(alpha * w) * phat:.4f} vs "
                                f"{target:.4f} (z={z:.2f})")
    _report(capsys, 2, "unit-jump tail oscillates within the lattice band",
            failures, t0)


def _two_state_spec(mu, sigma2, pi, phi):
    exps = [BrownianDrift(mu=m, sigma2=s2) if s2 > 0 else LinearDrift(m)
            for m, s2 in zip(mu, sigma2)]
    return ModelSpec(varpi=[0.5, 0.5],
                     generator=[[-pi[0], pi[0]], [pi[1], -pi[1]]],
                     exponents=exps, phi=list(phi))


def test_03_two_state_closed_forms(capsys):
    t0 = time.perf_counter()
    failures = []
    rng = np.random.default_rng(20240803)

    def check_roots_match(mu, sigma2, pi, phi, tag):
        roots = two_state_closed_form(mu, sigma2, pi, phi)
        admissible = [s for s, ok in roots if ok]
        rates = find_decay_rates(_two_state_spec(mu, sigma2, pi, phi))
        pos = [s for s in admissible if s > 0]
        neg = [s for s in admissible if s < 0]
        if rates.alpha_status == FOUND_INTERIOR:
            if not pos or abs(min(pos) - rates.alpha) > 1e-8:
                failures.append(f"{tag}: alpha mismatch {pos} vs {rates.alpha}")
        elif pos:
            failures.append(f"{tag}: closed form finds alpha, solver does not")
        if rates.beta_status == FOUND_INTERIOR:
            if not neg or abs(max(neg) + rates.beta) > 1e-8:
                failures.append(f"{tag}: beta mismatch {neg} vs {-rates.beta}")
        elif neg:
            failures.append(f"{tag}: closed form finds beta, solver does not")
        return roots

    for trial in range(12):  # Brownian: full quartic with interval structure
        mu = rng.uniform(-1.0, 1.0, 2)
        sigma2 = rng.uniform(0.3, 1.5, 2)
        pi = rng.uniform(0.3, 2.0, 2)
        phi = rng.uniform(0.1, 1.0, 2)
        roots = check_roots_match(mu, sigma2, pi, phi, f"brownian#{trial}")
        if len(roots) != 4 or len({round(s, 12) for s, _ in roots}) != 4:
            failures.append(f"brownian#{trial}: expected 4 distinct real "
                            f"roots, got {roots}")
            continue
        disc = [(-m + math.sqrt(m * m + 2 * s2 * (f + p))) / s2
                for m, s2, p, f in zip(mu, sigma2, pi, phi)]
        disc_neg = [(m + math.sqrt(m * m + 2 * s2 * (f + p))) / s2
                    for m, s2, p, f in zip(mu, sigma2, pi, phi)]
        intervals = [(-math.inf, -max(disc_neg)), (-min(disc_neg), 0.0),
                     (0.0, min(disc)), (max(disc), math.inf)]
        for lo, hi in intervals:
            inside = [s for s, _ in roots if lo < s < hi]
            if len(inside) != 1:
                failures.append(f"brownian#{trial}: interval ({lo:.3f},"
                                f"{hi:.3f}) holds {len(inside)} roots")

    for trial in range(4):  # linear case 2: both drifts positive
        mu = np.sort(rng.uniform(0.2, 1.2, 2))
        pi = rng.uniform(0.3, 2.0, 2)
        phi = rng.uniform(0.1, 1.0, 2)
        roots = check_roots_match(mu, (0.0, 0.0), pi, phi,
                                  f"linear2#{trial}")
        pos = [(s, ok) for s, ok in roots if s > 0]
        if len(pos) != 2:
            failures.append(f"linear2#{trial}: expected two positive roots")
            continue
        if pos[0][1] is not True or pos[1][1] is not False:
            failures.append(f"linear2#{trial}: larger root must be the "
                            f"inadmissible one: {pos}")

    for trial in range(2):  # linear case 1: opposite drifts
        mu = (float(rng.uniform(-1.2, -0.2)), float(rng.uniform(0.2, 1.2)))
        check_roots_match(mu, (0.0, 0.0),
                          rng.uniform(0.3, 2.0, 2),
                          rng.uniform(0.1, 1.0, 2), f"linear1#{trial}")

    for trial in range(2):  # linear case 3: both drifts negative
        mu = -np.sort(rng.uniform(0.2, 1.2, 2))[::-1]
        check_roots_match(tuple(mu), (0.0, 0.0),
                          rng.uniform(0.3, 2.0, 2),
                          rng.uniform(0.1, 1.0, 2), f"linear3#{trial}")

    _report(capsys, 3, "two-state solver matches quartic closed forms",
            failures, t0)


def test_04_convexity_and_structure(capsys):
    t0 = time.perf_counter()
    failures = []
    rng = np.random.default_rng(20240804)

    for trial in range(200):
        spec = random_spec(rng)
        s1, s2 = np.sort(rng.uniform(-0.8, 0.8, 2))
        z1, z2 = zeta_at(spec, s1), zeta_at(spec, s2)
        zm = zeta_at(spec, 0.5 * (s1 + s2))
        if zm > 0.5 * (z1 + z2) + 1e-9:
            failures.append(f"#{trial}: midpoint convexity violated by "
                            f"{zm - 0.5 * (z1 + z2):.2e}")
        z0 = zeta_at(spec, 0.0)
        if z0 > 1e-12:
            failures.append(f"#{trial}: zeta(A(0)) = {z0:.2e} > 0")
        s = float(rng.uniform(-0.6, 0.6))
        zs = zeta_at(spec, s)
        for tt in (0.5, 2.0):
            zline = spectral_abscissa_complex(assemble_A(spec, s + 1j * tt))
            if zline > zs + 1e-8:
                failures.append(f"#{trial}: vertical line bound broken at "
                                f"t={tt}")

        # Metzler structure theorems on the same draw
        n = int(rng.integers(2, 6))
        a = rng.exponential(1.0, size=(n, n))
        np.fill_diagonal(a, rng.normal(0, 2, size=n))
        sigma = float(rng.normal(0, 2))
        rows = a.copy()
        np.fill_diagonal(rows, 0.0)
        np.fill_diagonal(rows, sigma - rows.sum(axis=1))
        zr = spectral_abscissa_metzler(rows, check_simple=False).zeta
        if abs(zr - sigma) > 1e-10 * (1 + abs(sigma)):
            failures.append(f"#{trial}: row-sum law off by {zr - sigma:.2e}")

        res = spectral_abscissa_metzler(a)
        if is_irreducible(a) and (res.right.min() <= 0 or res.left.min() <= 0):
            failures.append(f"#{trial}: Perron vectors not strictly positive")
        i, j = rng.integers(0, n, 2)
        b = a.copy()
        drop = 0.1 + rng.random()
        if i != j:
            drop = min(drop, b[i, j])
        b[i, j] -= drop
        zb = spectral_abscissa_metzler(b, check_simple=False).zeta
        if zb > res.zeta + 1e-10:
            failures.append(f"#{trial}: abscissa rose after entry decrease")

    if time.perf_counter() - t0 > 300:
        failures.append("runtime over 5 minutes")
    _report(capsys, 4, "spectral abscissa convexity and Metzler structure",
            failures, t0)


def _reducible_pattern(rng, n_transient, n_closed):
    """Transient block that can escape into a killing-free closed class."""
    n = n_transient + n_closed
    gen = np.zeros((n, n))
    gen[:n_transient, :n_transient] = \
        random_generator(rng, n_transient) if n_transient > 1 else 0.0
    for i in range(n_transient):  # escape routes
        j = n_transient + int(rng.integers(0, n_closed))
        gen[i, j] = 0.3 + rng.random()
    if n_closed > 1:
        gen[n_transient:, n_transient:] = random_generator(rng, n_closed)
    np.fill_diagonal(gen, 0.0)
    d = gen.sum(axis=1)
    np.fill_diagonal(gen, -d)
    phi = np.zeros(n)
    phi[:n_transient] = 0.3 + rng.random(n_transient)
    return gen, phi


def test_05_absorption_equivalence(capsys):
    t0 = time.perf_counter()
    failures = []
    rng = np.random.default_rng(20240805)
    sim_cases = []

    for trial in range(100):
        kind = trial % 5
        if kind < 3:  # irreducible, killing present (possibly sparse)
            n = int(rng.integers(2, 6))
            gen = random_generator(rng, n)
            phi = rng.random(n) * (rng.random(n) < 0.7)
            if kind == 0:
                phi[int(rng.integers(0, n))] += 0.5  # ensure some killing
        elif kind == 3:  # no killing at all
            n = int(rng.integers(2, 5))
            gen = random_generator(rng, n)
            phi = np.zeros(n)
        else:  # reducible escape pattern
            gen, phi = _reducible_pattern(rng, int(rng.integers(1, 3)),
                                          int(rng.integers(1, 3)))
            n = gen.shape[0]
        p = absorption_probability(gen, phi)
        zeta = spectral_abscissa_metzler(gen - np.diag(phi),
                                         check_simple=False).zeta
        certain = bool(np.all(p >= 1.0 - 1e-9))
        if certain != (zeta < -1e-10):
            failures.append(f"#{trial}: p==1 is {certain} but zeta={zeta:.2e}")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-9):
            failures.append(f"#{trial}: p out of [0,1]: {p}")
        if zeta >= -1e-10 and np.any(phi > 0):
            sim_cases.append((gen, phi, p))

    for ci, (gen, phi, p) in enumerate(sim_cases[:8]):
        n = gen.shape[0]
        for start in range(n):
            varpi = np.zeros(n)
            varpi[start] = 1.0
            spec = ModelSpec(varpi=varpi, generator=gen,
                             exponents=[LinearDrift(0.0)] * n, phi=phi)
            if not validate(spec).ok:
                continue  # closed-class start cannot see the whole chain
            out = simulate_stopped(spec, SimConfig(n_paths=100_000,
                                                   seed=9000 + 17 * ci + start),
                                   workers=WORKERS)
            phat = 1.0 - out.censored / out.n_paths
            se = math.sqrt(max(p[start] * (1 - p[start]), 1e-12) / out.n_paths)
            if abs(phat - p[start]) > 3 * se + 1e-9:
                failures.append(
                    f"sim#{ci} start={start}: {phat:.5f} vs {p[start]:.5f} "
                    f"(z={(phat - p[start]) / se:.2f})")

    _report(capsys, 5, "certain stopping iff negative killed abscissa",
            failures, t0)


def test_06_mgf_simulation_consistency(capsys):
    t0 = time.perf_counter()
    failures = []
    rng = np.random.default_rng(20240806)

    accepted = 0
    guard = 0
    while accepted < 10 and guard < 80:
        guard += 1
        spec = random_spec(rng)
        rates = find_decay_rates(spec)
        if rates.alpha_status != FOUND_INTERIOR \
                or rates.beta_status != FOUND_INTERIOR:
            continue
        accepted += 1
        out = simulate_stopped(spec, SimConfig(n_paths=200_000,
                                               seed=6000 + accepted),
                               workers=WORKERS)
        if out.censored:
            failures.append(f"spec#{accepted}: {out.censored} censored")
        a, b = rates.alpha, rates.beta
        for s in (-0.40 * b, -0.20 * b, 0.10 * a, 0.25 * a, 0.45 * a):
            mean, se = empirical_mgf(out, float(s))
            target = mgf_stopped(spec, float(s))
            if abs(mean - target) > 4 * max(se, 1e-12):
                failures.append(f"spec#{accepted} s={s:.3f}: {mean:.5f} vs "
                                f"{target:.5f} "
                                f"(z={(mean - target) / se:.2f})")

        z = min(0.3, 0.3 * a)
        for tt in (0.5, 2.0):
            values, states = simulate_fixed_time(
                spec, tt, SimConfig(n_paths=100_000, seed=6500 + accepted),
                with_killing=True, workers=WORKERS)
            m = conditional_mgf_matrix(spec, tt, z, with_killing=True)
            target_row = np.asarray(spec.varpi) @ m
            g = np.where(np.isnan(values), 0.0, np.exp(z * values))
            for j in range(spec.n):
                gj = g * (states == j)
                mean = float(gj.mean())
                se = float(gj.std(ddof=1)) / math.sqrt(gj.size)
                if abs(mean - target_row[j]) > 4 * max(se, 1e-12):
                    failures.append(
                        f"spec#{accepted} t={tt} state={j}: {mean:.5f} vs "
                        f"{target_row[j]:.5f} "
                        f"(z={(mean - target_row[j]) / se:.2f})")
    if accepted < 10:
        failures.append(f"only {accepted} two-sided specs in 80 draws")
    _report(capsys, 6, "simulated transforms agree with analytic transforms",
            failures, t0)


def test_07_truncated_pareto_no_root(capsys):
    t0 = time.perf_counter()
    failures = []
    c, phi = 1.0, 1.0
    spec = ModelSpec(varpi=[1.0], generator=[[0.0]],
                     exponents=[TruncatedParetoExpJump(c=c)], phi=[phi])
    rates = find_decay_rates(spec)
    psi1 = c * (1.0 - (math.exp(-1.0) - exp1(1.0)))
    if psi1 >= phi:
        failures.append("parameter choice broken: psi(1) >= phi")
    if rates.alpha_status != NO_ROOT_IN_DOMAIN:
        failures.append(f"alpha_status {rates.alpha_status}")
    if rates.alpha_boundary_zeta is None \
            or abs(rates.alpha_boundary_zeta - (psi1 - phi)) > 1e-12:
        failures.append(f"boundary zeta {rates.alpha_boundary_zeta} vs "
                        f"{psi1 - phi}")

    val, err = quad(lambda x: (1.0 - math.exp(-x)) / (x * x), 1.0, np.inf,
                    limit=400, epsabs=1e-13, epsrel=1e-13)
    if err > 1e-9 or abs(c * val - psi1) > 1e-8:
        failures.append(f"quadrature {c * val} vs analytic split {psi1}")
    if abs(zeta_at(spec, 1.0) - (psi1 - phi)) > 1e-10:
        failures.append("zeta at the boundary disagrees with psi(1) - phi")
    _report(capsys, 7, "subcritical heavy-ish jumps report no admissible root",
            failures, t0)


def test_08_wealth_model_end_to_end(capsys):
    t0 = time.perf_counter()
    failures = []

    single = WealthModel(y=[1.7], generator=[[0.0]], gamma=1.3,
                         rho_tilde=0.04, phi=0.02)
    eq1 = solve_equilibrium(single)
    if abs(eq1.r_star - single.rho) > 1e-12:
        failures.append(f"single-state r* {eq1.r_star} vs rho {single.rho}")
    if abs(eq1.b.b[0] - 1.7) > 1e-12:
        failures.append(f"single-state b {eq1.b.b[0]} vs y 1.7")

    model = WealthModel(y=[1.0, -1.0], generator=[[-1.5, 1.5], [0.75, -0.75]],
                        gamma=1.0, rho_tilde=0.04, phi=0.02)
    eq = solve_equilibrium(model)
    tol_b = 1e-12 * (1 + float(np.abs(eq.b.b).max()))
    if eq.b.residual > tol_b:
        failures.append(f"policy residual {eq.b.residual:.2e} > {tol_b:.2e}")
    base = model.y - 1.0 / model.gamma + model.rho / (model.gamma * eq.r_star)
    if np.any(eq.b.b < base.min() - 1e-10) or np.any(eq.b.b > base.max() + 1e-10):
        failures.append("solution bounds violated")
    if abs(eq.g_residual) > 1e-10:
        failures.append(f"|g(r*)| = {abs(eq.g_residual):.2e}")
    if abs(budget_spectral_check(model, eq.b)) > 1e-8:
        failures.append("budget spectral identity broken")
    slopes = eq.slopes
    if not (slopes.max() > 0 > slopes.min()):
        failures.append(f"slopes not mixed-sign: {slopes}")
    if eq.rates.alpha_status != FOUND_INTERIOR \
            or eq.rates.beta_status != FOUND_INTERIOR:
        failures.append(f"tail rates missing: {eq.rates.alpha_status}, "
                        f"{eq.rates.beta_status}")

    sim_spec = ModelSpec(varpi=model.varpi, generator=model.generator,
                         exponents=[LinearDrift(float(s)) for s in slopes],
                         phi=np.full(2, model.phi))
    out = simulate_stopped(sim_spec, SimConfig(n_paths=1_000_000,
                                               seed=20240808),
                           workers=WORKERS)
    if out.censored:
        failures.append(f"{out.censored} censored paths")
    slope, se = batched_slope(out.values, "upper")
    z = (slope + eq.alpha) / se
    if abs(slope + eq.alpha) > 3 * se:
        failures.append(f"tail slope {slope:.5f} vs -alpha {-eq.alpha:.5f} "
                        f"(z={z:.2f})")
    if time.perf_counter() - t0 > 180:
        failures.append("runtime over 3 minutes")
    _report(capsys, 8, "wealth equilibrium and simulated wealth tail",
            failures, t0)
