"""Thermal master equations for discrete quantum systems.

Builds the global (eigenbasis) generator for a system coupled to several
bosonic baths, solves for nonequilibrium steady states and heat currents, and
provides closed-form three-level diagnostics plus an N-site chain model for
studying population migration along thermal gradients.
"""

__version__ = "0.1.0"

from .chain import (
    ChainSpec,
    ExplicitProfile,
    LinearProfile,
    SweepPoint,
    ThermophoresisVerdict,
    chain_system,
    classify,
    default_survey_panels,
    population_sweep,
    site_populations,
)
from .davies import (
    DEFAULT_FREQ_TOL,
    BathSpec,
    FlatDensity,
    JumpOperatorSet,
    JumpTerm,
    Liouvillian,
    OhmicDensity,
    OpenSystem,
    bohr_frequencies,
    bose_occupation,
    evolve,
    gibbs_state,
    heat_currents,
    jump_operators,
    liouvillian,
    steady_state,
)
from .errors import (
    AccuracyError,
    AmbiguousGroupingError,
    ConfigError,
    DegenerateInputError,
    DimensionMismatchError,
    InvariantViolationError,
    NonUniqueSteadyStateError,
    NumericalConsistencyError,
    QThermoError,
    SolverFailureError,
    UnsupportedModelError,
)
from .linalg import (
    EigenDecomposition,
    devectorize,
    eigh,
    expectation,
    hermitize,
    trace_distance,
    vectorize,
)
from .three_level import (
    LevelPopulations,
    OscillatorCoefficients,
    ThermoDiagnostics,
    ThreeLevelParams,
    dufour_currents,
    finite_capacity_heating,
    high_temperature_force,
    lambda_system,
    mean_position_trajectory,
    occupations,
    oscillator_coefficients,
    overdamped_ratio,
    populations_from_state,
    rate_matrix,
    rate_rhs,
    steady_unbalance,
    thermo_diagnostics,
    thermophoretic_force,
    three_level_system,
    vee_system,
)

__all__ = [name for name in dir() if not name.startswith("_")]
