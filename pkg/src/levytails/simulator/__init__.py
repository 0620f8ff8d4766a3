"""Path simulation of the modulated additive process with state-dependent
stopping, plus estimators that consume the samples."""

from ._plan import PARETO_UNIT_MASS, SimPlan, build_plan
from .engine import (
    SampleSet,
    SimConfig,
    TailFit,
    absorption_probability,
    backend,
    empirical_mgf,
    fit_tail,
    read_samples_csv,
    simulate_fixed_time,
    simulate_stopped,
    write_samples_csv,
)

__all__ = [
    "PARETO_UNIT_MASS",
    "SimPlan",
    "build_plan",
    "SampleSet",
    "SimConfig",
    "TailFit",
    "absorption_probability",
    "backend",
    "empirical_mgf",
    "fit_tail",
    "read_samples_csv",
    "simulate_fixed_time",
    "simulate_stopped",
    "write_samples_csv",
]
