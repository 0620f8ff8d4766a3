"""Shared builders for randomized model specs used across the test suite."""

import numpy as np
import pytest

from levytails.process_model import (BrownianDrift, CompoundPoissonDiscrete,
                                     DegeneratePoint, DiscreteAtoms, Gaussian,
                                     LinearDrift, ModelSpec, PoissonJump,
                                     validate)


def brownian_spec(mu=0.0, sigma2=1.0, phi=0.5):
    """One-state killed Brownian motion (stopped value is asymmetric Laplace)."""
    return ModelSpec(varpi=[1.0], generator=[[0.0]],
                     exponents=[BrownianDrift(mu=mu, sigma2=sigma2)],
                     phi=[phi])


def poisson_spec(gamma=1.0, phi=1.0, h=1.0):
    """One-state unit-jump Poisson process with killing (geometric stopped value)."""
    return ModelSpec(varpi=[1.0], generator=[[0.0]],
                     exponents=[PoissonJump(gamma=gamma, h=h)], phi=[phi])


def two_state_linear_spec():
    # opposite unit drifts, unit switching, phi = 0.5: alpha = beta = sqrt(1.25)
    return ModelSpec(varpi=[0.5, 0.5], generator=[[-1.0, 1.0], [1.0, -1.0]],
                     exponents=[LinearDrift(1.0), LinearDrift(-1.0)],
                     phi=[0.5, 0.5])


def random_generator(rng, n, density=0.8):
    """Random irreducible Markov generator with a guaranteed n-cycle."""
    off = rng.exponential(1.0, size=(n, n)) * (rng.random((n, n)) < density)
    np.fill_diagonal(off, 0.0)
    for i in range(n):  # cycle keeps the chain irreducible
        off[i, (i + 1) % n] += 0.3 + rng.random()
    gen = off.copy()
    np.fill_diagonal(gen, -off.sum(axis=1))
    return gen


def _random_exponent(rng, kind):
    if kind == 0:
        return BrownianDrift(mu=rng.normal(0, 0.6),
                             sigma2=0.2 + rng.random())
    if kind == 1:
        return LinearDrift(mu=rng.normal(0, 0.8))
    if kind == 2:
        return PoissonJump(gamma=0.2 + rng.random(),
                           h=rng.choice([-1.0, 0.5, 1.0]) * (0.5 + rng.random()))
    vals = rng.normal(0, 0.7, size=2)
    w = rng.random(2) + 0.2
    w = w / w.sum()
    return CompoundPoissonDiscrete(
        gamma=0.2 + rng.random(),
        atoms=((float(vals[0]), float(w[0])), (float(vals[1]), float(w[1]))))


def _random_jump(rng):
    k = rng.integers(0, 3)
    if k == 0:
        return DegeneratePoint(a=float(rng.normal(0, 0.4)))
    if k == 1:
        vals = rng.normal(0, 0.4, size=2)
        return DiscreteAtoms(atoms=((float(vals[0]), 0.5),
                                    (float(vals[1]), 0.5)))
    return Gaussian(mean=float(rng.normal(0, 0.3)),
                    variance=float(0.01 + 0.05 * rng.random()))


def random_spec(rng, n=None, with_jumps=True, phi_min=0.25):
    """Random validated spec over entire-domain exponent families.

    All exponents here have MGFs finite on the whole real line, so the
    transform domain never truncates the root search and the killing floor
    keeps zeta(A(0)) strictly negative.
    """
    if n is None:
        n = int(rng.integers(2, 5))
    gen = random_generator(rng, n)
    exps = [_random_exponent(rng, int(rng.integers(0, 4))) for _ in range(n)]
    phi = phi_min + rng.random(n)
    varpi = rng.random(n) + 0.1
    varpi = varpi / varpi.sum()
    jumps = {}
    if with_jumps:
        for i in range(n):
            for j in range(n):
                if i != j and gen[i, j] > 0 and rng.random() < 0.3:
                    jumps[(i, j)] = _random_jump(rng)
    spec = ModelSpec(varpi=varpi, generator=gen, exponents=exps, phi=phi,
                     jumps=jumps or None)
    report = validate(spec)
    assert report.ok, report.violations
    return spec


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
