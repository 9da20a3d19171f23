//! Local-search improvement of multi-agent path finding (MAPF) plans on
//! directed graphs.
//!
//! Given any feasible plan, [`improve`] repeatedly searches a bounded
//! neighborhood of the current plan for a strictly shorter one, using a
//! dynamic program over plan classes with dominance pruning ([`dynprog`]).
//! The crate also ships the pieces needed to exercise it: random strongly
//! connected graph generation, a prioritized initial planner, an exhaustive
//! makespan oracle for small instances, JSON file formats and a benchmark
//! harness.

pub mod bench;
pub mod digraph;
pub mod dynprog;
pub mod error;
pub mod improve;
pub mod io;
pub mod mapf;
pub mod metrics;
pub mod planners;

pub use digraph::{random_strongly_connected, Digraph, Vertex};
pub use dynprog::{dominates, dynprog, dynprog_with, expand, transition, Reference, SearchOptions, SearchOutcome, SearchStats, State, StateCap};
pub use error::{
    ConfigError, DegenerateInstance, FormatError, GraphError, MetricError, OracleError, PlanError, SearchError,
    SolutionError, StepError,
};
pub use improve::{improve, improve_with, percentage_decrease, ImproveResult, PercentDecrease};
pub use io::{load_instance, load_plan, save_instance, save_plan, Instance};
pub use mapf::{
    apply_joint, apply_plan, check_solution, normalize_plan, trajectory, trajectory_states, validate_solution,
    AgentAction, Configuration, JointAction, Plan,
};
pub use metrics::{
    ball_border_bound, config_ball_bound, config_distance, neighborhood_bound, plan_distance, point_to_trajectory,
    DistanceKind,
};
pub use planners::{joint_bfs_oracle, prioritized_initial, prioritized_with_retries, PlannerOutcome};
