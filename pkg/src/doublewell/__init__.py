"""Quantum state diffusion simulations of the driven, damped double-well oscillator.

The package follows one dimensionless model end to end: Fock-space
operators (`operators`), single stochastic trajectories (`qsd`), averaged
ensembles (`ensemble`), position/phase-space observables (`observables`),
the classical limit (`classical`), a dense master-equation oracle
(`oracle`), and the mapping from doubly-clamped beam parameters onto the
dimensionless model (`nems`).  `config` and `cli` wrap everything for
file-driven runs.
"""

__version__ = "0.1.0"

from .classical import ClassicalState, CloudSpec, classical_histogram, classical_step
from .ensemble import (
    DensityMatrix,
    EnsembleConfig,
    EnsembleResult,
    Histogram,
    density_matrix_from_states,
    final_density_matrix,
    final_states,
    merge_histograms,
    run_ensemble,
)
from .errors import (
    ConfigError,
    DoubleWellError,
    GridCoverageWarning,
    IntegratorBlowupError,
    InvariantViolationError,
    LeakageWarning,
    OracleFailureError,
)
from .nems import (
    BeamSpec,
    CircularSection,
    Material,
    MATERIALS,
    PotentialCoefficients,
    RectangularSection,
    beta_from_beam,
    buckling_ratio,
    critical_tension,
    potential_coefficients,
    quality_factor_to_gamma,
    tension_from_buckling_ratio,
)
from .observables import (
    GridSpec,
    WignerGrid,
    default_grid,
    expectations,
    hermite_functions,
    position_density,
    position_density_from_rho,
    truncation_leakage,
    wavefunction,
    wigner,
)
from .operators import (
    OperatorSet,
    PhysicsParams,
    build_ladder,
    build_operator_set,
    classical_potential,
    hamiltonian_at,
    harmonic_operator_set,
)
from .oracle import MasterState, evolve_master, lindblad_rhs, trace_distance
from .qsd import (
    IntegratorConfig,
    NoiseStream,
    StateVector,
    TrajectoryResult,
    coherent_state,
    default_initial_state,
    qsd_step,
    run_trajectory,
    sample_step_indices,
    trajectory_seed,
)
from .config import SimConfig, emit_config, parse_config, parse_config_file
