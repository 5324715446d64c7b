//! Simulation of job scheduling, cascading hardware failure and
//! communication cost in a hierarchy-tree cloud data centre.
//!
//! A run places `J` jobs of `T` tasks, each task replicated `R` times, onto
//! a tree of aisles, racks, chassis, blades and services using one of three
//! schedulers. Hardware then fails at random during the run and each failure
//! takes out its whole subtree. A job survives if every task keeps at least
//! one live copy. Surviving jobs pay a per-tick communication cost set by how
//! far apart their nearest live copies sit in the tree.
//!
//! ```
//! use dcsim::{run_simulation, ScenarioConfig};
//!
//! let config = ScenarioConfig::default();
//! let result = run_simulation(&config, 7).unwrap();
//! assert!((0.0..=1.0).contains(&result.s_j));
//! ```

pub mod commnet;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod failure;
pub mod placement;
pub mod rng;
pub mod topology;
pub mod workload;

pub use commnet::{build_comm_graph, job_network_cost, CommEdge, CommGraph};
pub use engine::{evaluate_outcome, run_simulation, Outcome, RunResult, Simulation};
pub use error::{Error, Result};
pub use experiment::{aggregate, normalize_costs, run_scenario, Aggregate, ScenarioOutcome, Stat};
pub use failure::{apply_failure, plan_failures, FailureEvent, FailureTrace};
pub use placement::{schedule, schedule_cluster, schedule_pack, schedule_random, Placement, Scheduler};
pub use topology::{Address, Cost, HierarchySpec, Level, ServiceId, Topology, UnitCounts, UnitId};
pub use workload::{derive_dc_size, job_failed, InstanceId, InstanceState, JobSet, ScenarioConfig, Sizing};
