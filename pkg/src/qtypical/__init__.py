"""Typicality calculus for grid-discretized 1D quantum systems.

The package computes probabilistic and quantum typicality functions,
wave-packet overlap measures, asymptotic-velocity projectors and
subtree/branch diagnostics, together with a dense finite-dimensional
oracle and randomized suites that verify every inequality the formalism
rests on.
"""

from .errors import (
    ConfigError,
    ContractError,
    DegenerateInputError,
    NodeError,
    NumericsError,
    TypicalityError,
    UnsupportedDynamicsError,
)
from .grid import (
    Grid,
    GridState,
    Hamiltonian,
    Region,
    VelocityRegion,
    evolve,
    make_gaussian_packet,
    momentum_amplitudes,
    momentum_project,
    project,
    propagate,
)
from .csets import CSet, born_weight, cset_apply
from .dense import DenseInstance, embed_grid_instance, oracle_random_instance
from .prob import (
    DEFAULT_EPS,
    FiniteMeasureSpace,
    TypicalityValue,
    absolute_typicality,
    mutual_typicality,
    prob_typicality,
    relative_typicality,
    typicality_measure,
)
from .quantum import (
    QuantumTypicalityReport,
    born_alternative_mutual,
    optimal_region,
    quantum_absolute,
    quantum_mutual,
    quantum_relative_equal_time,
    quantum_relative_general,
    quantum_report,
    quantum_typicality_measure,
)
from .overlap import (
    OverlapProfile,
    is_support,
    overlapping_measure,
    packet_overlap_profile,
    splitting_region,
)
from .asymptotics import (
    ConvergenceProfile,
    asymptotic_overlap_limit,
    convergence_profile,
    f_projector,
    optimal_velocity_region,
)
from .pathspace import (
    ClassicalSystem,
    CylinderQuery,
    Interval,
    OccupationReport,
    PathEnsemble,
    PhaseSpaceBox,
    additivity_gap,
    bohmian_ensemble,
    bohmian_velocity,
    classical_ensemble,
    ensemble_diagnostics,
    equivariance_check,
    everett_bell_fdd,
    memory_report,
    mu_q_fdd,
    occupation_report,
)
from .branching import (
    BranchReport,
    TimeRegionMap,
    asymptotic_support_check,
    branch_verify,
    build_subtree,
    default_shrinkage_candidates,
    irreducible_check,
    subtree_support_scan,
)
from .consistency import (
    SuiteConfig,
    SuiteReport,
    replay_certificate,
    run_equal_time_reduction_suite,
    run_implication_suite,
    run_inequality_suite,
)

__version__ = "0.1.0"
