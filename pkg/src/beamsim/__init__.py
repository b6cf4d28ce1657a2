"""Hybrid analog/digital receive beamforming simulation and optimization."""

from .array import (
    Scenario,
    SnapshotBlock,
    generate_snapshots,
    interference_matrix,
    load_scenario,
    recombine_snapshots,
    sample_covariance,
    save_scenario,
    snapshot_components,
    steering_matrix,
    steering_vector,
    true_reduced_covariance,
)
from .hybrid import (
    AnalogBeamformer,
    analog_from_angle,
    beampattern,
    cost_function,
    distortionless,
    export_beampattern,
    export_weights,
    identity_analog,
    output_sinr,
)
from .closed_form import (
    DEFAULT_LOADING_LEVEL,
    LoadingPolicy,
    capon_weights,
    smf_loading_level,
    solve_digital,
)
from .metaheuristics import (
    BatConfig,
    BoundedObjective,
    ImprovedBatConfig,
    ba_optimize,
    iba_optimize,
    inverse_sinr_objective,
    phase_objective,
    pso_optimize,
    write_cost_trace,
)
from .apals import (
    DEFAULT_GRID_POINTS,
    HybridSolution,
    PIPELINE_METHODS,
    ScanResult,
    SearchGrid,
    apals_search,
    run_pipeline,
    scan_grid,
)

__version__ = "0.1.0"
