"""Simulator and exact scheduler for collectives on reconfigurable photonic fabrics."""

from .collectives import (
    Collective,
    Step,
    aggregate_demand,
    all_to_all,
    load_collective,
    recursive_halving_doubling,
    ring_allreduce,
    swing_allreduce,
    validate_matching,
)
from .config import ExperimentConfig, load_config
from .costmodel import (
    Assignment,
    CostBreakdown,
    Schedule,
    SystemParams,
    all_base,
    all_matched,
    demand_completion_time,
    schedule_cost,
    static_collective_time,
)
from .errors import (
    CollectiveFormatError,
    ConfigError,
    InfeasibleDemandError,
    InternalInvariantError,
    InvalidParameterError,
    OpticschedError,
    TooLargeError,
    UnsupportedSizeError,
    WrongMethodError,
)
from .flow import (
    FlowMetricsCache,
    FlowResult,
    approx_concurrent_flow,
    step_metrics,
    unique_path_flow,
)
from .scheduler import (
    SolveReport,
    baseline_bvn,
    baseline_static,
    solve_brute_force,
    solve_dp,
    solve_threshold,
)
from .sweep import SweepRow, evaluate_grid_point, run_sweep, write_sweep_csv
from .topology import (
    Topology,
    coprime_ring_union,
    custom_topology,
    matched_topology,
    ring,
    shortest_path_hops,
)

__version__ = "0.1.0"
