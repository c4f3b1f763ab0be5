"""Coupled Stuart-Landau oscillators with heterogeneous coupling strengths.

Simulation (RK4 on the mean-field or full-network equations), stationary
observables (order parameter, lock detection, phase/amplitude profiles),
and the matching mean-field theory (locked/drifting self-consistency,
state classification, parameter-plane boundaries).
"""

from .model import (
    CouplingSet,
    EnsembleState,
    ModelParams,
    NetworkGraph,
    full_network_rhs,
    mean_field_rhs,
    polar_rhs,
)
from .integrate import (
    FullNetworkSystem,
    IntegrationError,
    IntegrationPlan,
    MeanFieldSystem,
    Trajectory,
    export_snapshot,
    export_trajectory,
    init_state,
    integrate,
    rk4_step,
)
from .networks import (
    DistributionSpec,
    GraphGenerationError,
    export_edge_list,
    generate_graph_from_degrees,
    degrees_from_couplings,
    degrees_to_couplings,
    load_adjacency,
    load_couplings,
    sample_couplings,
    save_couplings,
)
from .observables import (
    LockPartition,
    OrderParameterSeries,
    amplitude_slope,
    detect_locked,
    export_profiles,
    order_parameter,
    order_series,
    stationary_profiles,
    summarize_run,
    write_summary,
)
from .theory import (
    AmplitudeCollapse,
    DriftingOscillator,
    NoStableRoot,
    SelfConsistentSolution,
    StateLabel,
    TheoryError,
    classify_state,
    drift_contribution,
    export_predicted_profiles,
    field_residual,
    incoherent_amplitude,
    lock_boundaries,
    locked_contribution,
    locked_phase,
    locking_range,
    phase_slope_dK,
    amplitude_slope_dK,
    phi_slope_sign,
    predict_profiles,
    r_slope_sign,
    solve_amplitude,
    solve_self_consistency,
    theory_summary,
)
from .sweep import (
    CellRecord,
    SweepGrid,
    SweepResult,
    SweepSpec,
    boundary_curves,
    cell_seed,
    export_boundaries,
    export_grid,
    load_grid,
    run_grid,
    run_point,
    theory_point,
)

__version__ = "0.1.0"
