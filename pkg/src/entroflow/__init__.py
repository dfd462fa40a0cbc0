"""Entropy rates, entropy-change bounds, and memory/unitarity witnesses for
open quantum dynamics on finite-dimensional (and truncated bosonic) systems."""

from .linalg import (
    INFINITE_DIVERGENCE,
    DensityMatrix,
    EigenSystem,
    LinalgError,
    SupportProjector,
    is_infinite,
    matrix_log_on_support,
    partial_trace,
    relative_entropy,
    schatten_norm,
    spectral_decompose,
    support_projector,
    trace_distance,
    trace_function_derivative,
    von_neumann_entropy,
)
from .channels import (
    ChannelError,
    ConstantCoefficient,
    CosineSquaredCoefficient,
    CptpReport,
    ExponentialCoefficient,
    JumpTerm,
    LindbladGenerator,
    QuantumChannel,
    SuperOperator,
    UnitalityClass,
    UnitalityTag,
    annihilation_operator,
    bosonic_generator,
    choi_of,
    compose,
    dephasing_channel,
    dephasing_generator,
    depolarizing,
    depolarizing_generator,
    gadc,
    gadc_coherence,
    identity_channel,
    is_cptp,
    lindblad_adjoint_apply,
    lindblad_apply,
    partial_trace_channel,
    thermal_state,
    transpose_superoperator,
    unitality_class,
    unitary_channel,
)
from .dynamics import (
    ChannelFamily,
    DephasingFamily,
    DivisibilityReport,
    GadcFamily,
    GeneratorFamily,
    IntegrationError,
    TailMassError,
    Trajectory,
    closed_form_trajectory,
    cp_divisibility_check,
    damping_qubit_trajectory,
    entropy_rate,
    entropy_rate_fd,
    export_trajectory,
    intermediate_map,
    oscillating_qubit_trajectory,
    propagate,
)
from .witnesses import (
    MeasureResult,
    PinskerGap,
    SandwichBounds,
    WitnessReport,
    blp_measure,
    entropy_change,
    entropy_change_lower_bound,
    entropy_change_upper_bound,
    entropy_change_upper_bound_holder,
    environment_simulation_bound,
    epsilon_derivative,
    measure_channel,
    measure_generator,
    nonunitality_witness,
    pinsker_gap,
    semigroup_sandwich,
    test_a,
    test_b,
    test_c,
    theorem2_bound,
    witness_f_channel,
    witness_reports,
)
from .nonunitarity import (
    OslashResult,
    PureBipartiteState,
    diamond_distance,
    oslash_depolarizing_analytic,
    oslash_norm,
    oslash_objective,
    proposition7_bound,
    proposition7_check,
    success_probability,
)

__version__ = "0.1.0"
