"""levytails: exponential tail asymptotics of modulated, randomly stopped
additive processes, with Monte Carlo validation and a CARA wealth model.

The pipeline: describe a process (`ModelSpec`), locate the decay rates of
its stopped law (`find_decay_rates`), refine them into sharp tail bounds
(`pole_residue`, `nakagawa_bounds`), validate by simulation (`simulator`),
or go straight to the consumption-saving economy that generates such a
process (`wealth_model`).
"""

from ._errors import (
    BracketFailureError,
    BUnknownError,
    ConvergenceError,
    DegenerateError,
    DomainDegenerateError,
    DomainError,
    InsufficientTailError,
    LevyTailsError,
    NoConvergenceError,
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
    DomainInterval,
    Gaussian,
    LinearDrift,
    ModelSpec,
    PoissonJump,
    TruncatedParetoExpJump,
    ValidationReport,
    assemble_A,
    derivative_A,
    domain_interval,
    spec_dumps,
    spec_from_dict,
    spec_hash,
    spec_loads,
    spec_to_dict,
    validate,
)
from .simulator import (
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
from .spectral_core import (
    SpectralResult,
    is_irreducible,
    spectral_abscissa_complex,
    spectral_abscissa_metzler,
)
from .tail_analysis import (
    DOMAIN_DEGENERATE,
    FOUND_INTERIOR,
    NO_ROOT_IN_DOMAIN,
    ROOT_AT_BOUNDARY,
    DecayRates,
    LatticeInfo,
    NakagawaBounds,
    PoleData,
    conditional_mgf_matrix,
    find_decay_rates,
    lattice_info,
    mgf_stopped,
    nakagawa_bounds,
    pole_residue,
    two_state_closed_form,
    zeta_at,
)
from .wealth_model import (
    BSolution,
    Equilibrium,
    WealthModel,
    budget_spectral_check,
    excess_supply,
    solve_b,
    solve_equilibrium,
    stationary_distribution,
    wealth_dumps,
    wealth_from_dict,
    wealth_loads,
    wealth_tail_rates,
    wealth_to_dict,
)

__version__ = "0.1.0"
