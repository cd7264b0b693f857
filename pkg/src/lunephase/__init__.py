"""Two-spin NMR interferometry toolkit for mixed-state geometric phases.

The package simulates a heteronuclear spin pair at the pulse-program level:
state preparation through pulses and crusher gradients, a conditional cycle
that carries one spin around a closed two-geodesic loop on the Bloch sphere,
and interferometric readout of the resulting mixed-state phase, together
with the spherical geometry and closed-form phase theory needed to check
every step.
"""
from .conventions import DEFAULT_CONVENTIONS, Conventions
from .errors import ConventionError, DomainError, SequenceSyntaxError
from .experiment import (
    DEFAULT_THETAS,
    MODELS,
    ExperimentConfig,
    RunRecord,
    controlled_cycle,
    cycle_program,
    idealized_controlled_cycle,
    idealized_eigenvector_path,
    lune_holonomy,
    mixing_program,
    prepare_effective_pure,
    prepare_mixed,
    prepare_pure_program,
    readout_phase,
    records_to_csv,
    records_to_json,
    run_single,
    run_sweep,
    spin_a_coherence,
    sweep_summary,
    thermal_state,
)
from .geometry import (
    BlochPath,
    LuneSpec,
    StatePath,
    check_geodesic,
    dynamical_phase,
    lune_path,
    pancharatnam_phase,
    scaled_trajectory,
    solid_angle,
    trace_eigenvector_path,
)
from .phases import (
    PhaseResult,
    TheoryRow,
    arctan_phase,
    qubit_mixed_phase,
    signed_mixed_phase,
    sjoqvist_average,
    theory_curve,
)
from .policy import POLICY, NumericPolicy
from .pulse import (
    Delay,
    FrameOffset,
    Gradient,
    Rotation,
    SequenceProgram,
    SpinSystemParams,
    apply_t2_relaxation,
    branch_propagators,
    gradient_crusher,
    make_program,
    run_sequence,
)
from .pulseprog import parse_sequence, render_sequence
from .qcore import (
    DensityOperator,
    bloch_to_density,
    density_to_bloch,
    eigendecompose_qubit,
    evolve,
    partial_trace,
    principal_angle,
    rotation_unitary,
    spinor_pair,
    tensor,
)

__version__ = "0.1.0"

__all__ = [
    "BlochPath",
    "Conventions",
    "ConventionError",
    "DEFAULT_CONVENTIONS",
    "DEFAULT_THETAS",
    "Delay",
    "DensityOperator",
    "DomainError",
    "ExperimentConfig",
    "FrameOffset",
    "Gradient",
    "LuneSpec",
    "MODELS",
    "NumericPolicy",
    "POLICY",
    "PhaseResult",
    "Rotation",
    "RunRecord",
    "SequenceProgram",
    "SequenceSyntaxError",
    "SpinSystemParams",
    "StatePath",
    "TheoryRow",
    "apply_t2_relaxation",
    "arctan_phase",
    "bloch_to_density",
    "branch_propagators",
    "check_geodesic",
    "controlled_cycle",
    "cycle_program",
    "density_to_bloch",
    "dynamical_phase",
    "eigendecompose_qubit",
    "evolve",
    "gradient_crusher",
    "idealized_controlled_cycle",
    "idealized_eigenvector_path",
    "lune_holonomy",
    "lune_path",
    "make_program",
    "mixing_program",
    "pancharatnam_phase",
    "parse_sequence",
    "partial_trace",
    "prepare_effective_pure",
    "prepare_mixed",
    "prepare_pure_program",
    "principal_angle",
    "qubit_mixed_phase",
    "readout_phase",
    "records_to_csv",
    "records_to_json",
    "render_sequence",
    "rotation_unitary",
    "run_sequence",
    "run_single",
    "run_sweep",
    "scaled_trajectory",
    "signed_mixed_phase",
    "sjoqvist_average",
    "solid_angle",
    "spin_a_coherence",
    "spinor_pair",
    "sweep_summary",
    "tensor",
    "theory_curve",
    "thermal_state",
    "trace_eigenvector_path",
    "__version__",
]
