"""Simulation and verification toolkit for bearing-only ring formation control."""

from .analysis import (
    BoundReport,
    Lemma1Oracle,
    ProofDiagnostics,
    bound_report,
    decay_rhs,
    displacement_check,
    k_constant,
    kappa_constant,
    lemma1_bound,
    lemma1_oracle,
    lemma2_bound,
    lemma3_check,
    lyapunov,
    mixed_sign_check,
    norm_equivalence_constant,
    proof_diagnostics,
)
from .controller import (
    LocalFrame,
    agent_control,
    control_velocity,
    local_measurements,
    ring_control_velocities,
    sigma,
)
from .dynamics import (
    DiagnosticsSample,
    FormationState,
    SimParams,
    TargetFormation,
    TrajectoryLog,
    diagnostics,
    settling_time,
    simulate,
    step,
)
from .errors import (
    CoincidentAgents,
    CollisionError,
    DegenerateD,
    InfeasibleWinding,
    InvalidExponent,
    InvalidOrder,
    MixedSignViolated,
    NotSymmetric,
    PreconditionViolated,
    RingformError,
    ScenarioError,
)
from .geometry import (
    angle_error,
    bearing,
    perp,
    projection,
    rotate,
    subtended_angle,
)
from .scenario import (
    RunSummary,
    Scenario,
    load_scenario,
    make_regular_scenario,
    reproduce_scenarios,
    run_scenario,
    run_sweep,
    save_scenario,
    write_outputs,
)
from .topology import (
    bearing_diagonal,
    ring_incidence,
    ring_lambda2,
    symmetric_eigenvalues,
)

__version__ = "0.1.0"
