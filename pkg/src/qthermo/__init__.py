"""Local entropy production for open quantum systems with time-local generators."""
from .entropy import (
    ClausiusSplit,
    EprSample,
    MapEprVerdict,
    TotalEntropy,
    WitnessResult,
    clausius_split,
    default_log_eps_schedule,
    eigensign_witness,
    epr_general,
    epr_many,
    epr_qubit,
    expansion_residual,
    fisher_product,
    relative_entropy_asymmetry,
    sigma_map_probe,
    total_entropy_production,
)
from .errors import *  # noqa: F401,F403
from .generators import (
    GeneratorSpec,
    PDivVerdict,
    SpectralDecomposition,
    SuperopMatrix,
    adjoint_check,
    apply_adjoint,
    apply_generator,
    build_superop,
    instantaneous_fixed_point,
    kossakowski_matrix,
    kossakowski_scan,
    random_generator,
    spectral_decompose,
    unvec,
    vec,
)
from .markovianity import FlowSample, information_flow, nonmarkov_measure, positive_part_integral
from .phase_covariant import (
    COUNTEREXAMPLE_VZ_STAR,
    DecayFunctions,
    PDivConditions,
    PhaseCovariantRates,
    Region,
    appendix_c_bounds,
    bloch_velocity,
    counterexample_rates,
    cp_conditions,
    decay_functions,
    ifp_bloch,
    make_generator,
    pdiv_conditions,
    pdiv_onset,
    propagate_bloch,
    random_unital_rates,
    region_classify,
    region_d_bound_coefficients,
    region_d_lower_bound,
)
from .propagation import Trajectory, attach_epr, instantaneous_map_step, integrate, propagator, rk4_vec, uniform_grid
from .schedules import PiecewisePolynomial, Segment
from .states import (
    EIGEN_FLOOR,
    PAULIS,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    bloch_to_state,
    check_state,
    helstrom_norm,
    is_state,
    matrix_log,
    r_vector,
    random_hermitian,
    random_state,
    random_unitary,
    relative_entropy,
    state_to_bloch,
    trace_distance,
    trace_norm,
    von_neumann_entropy,
)

__version__ = "0.1.0"
