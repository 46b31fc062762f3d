"""icolab: simulations and audits for indefinite causal order.

Quantum-switch states, CHSH statistics, process matrices with validity and
causal-separability checks, causal-polytope membership for behavior tables,
and temporal-locality audits of definite-order models.
"""

from .bell import (
    BehaviorTable,
    CHSHResult,
    MeasurementSetting,
    TSIRELSON,
    behavior,
    chsh,
    classical_chsh_bound,
    correlation_matrix,
    optimize_chsh,
)
from .causal import (
    AuditReport,
    CausalDecomposition,
    LambdaModel,
    NotCausal,
    SignalingDirections,
    audit_deviations_csv,
    behavior_from_switch_scenario,
    causal_membership,
    lambda_model_from_definite_order,
    signaling_directions,
    temporal_locality_audit,
)
from .linalg import NAMED_UNITARIES, SpaceLayout, partial_trace, tensor
from .process import (
    Instrument,
    ProcessMatrix,
    SeparabilityReport,
    ValidityReport,
    born_probabilities,
    born_probabilities_with_future,
    choi_of_kraus,
    choi_of_unitary,
    mix,
    ordered_process,
    quantum_switch_process,
    separability_heuristic,
    validate_process,
    witness_value,
)
from .scenarios import (
    BUILTIN_SCENARIOS,
    ConfigError,
    RunReport,
    ScenarioConfig,
    list_scenarios,
    load_config,
    run_scenario,
    sweep,
)
from .switch import (
    ControlMeasurement,
    DoubleSwitchSpec,
    SwitchSpec,
    conditioned_target_state,
    double_switch_output,
    event_input_state,
    measure_control,
    reduced_target_state,
    switch_output,
    target_entanglement,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "BUILTIN_SCENARIOS",
    "BehaviorTable",
    "CHSHResult",
    "CausalDecomposition",
    "ConfigError",
    "ControlMeasurement",
    "DoubleSwitchSpec",
    "Instrument",
    "LambdaModel",
    "MeasurementSetting",
    "NAMED_UNITARIES",
    "NotCausal",
    "ProcessMatrix",
    "RunReport",
    "ScenarioConfig",
    "SeparabilityReport",
    "SignalingDirections",
    "SpaceLayout",
    "SwitchSpec",
    "TSIRELSON",
    "ValidityReport",
    "audit_deviations_csv",
    "behavior",
    "behavior_from_switch_scenario",
    "born_probabilities",
    "born_probabilities_with_future",
    "causal_membership",
    "chsh",
    "choi_of_kraus",
    "choi_of_unitary",
    "classical_chsh_bound",
    "conditioned_target_state",
    "correlation_matrix",
    "double_switch_output",
    "event_input_state",
    "lambda_model_from_definite_order",
    "list_scenarios",
    "load_config",
    "measure_control",
    "mix",
    "optimize_chsh",
    "ordered_process",
    "partial_trace",
    "quantum_switch_process",
    "reduced_target_state",
    "run_scenario",
    "separability_heuristic",
    "signaling_directions",
    "sweep",
    "switch_output",
    "target_entanglement",
    "temporal_locality_audit",
    "tensor",
    "validate_process",
    "witness_value",
]
