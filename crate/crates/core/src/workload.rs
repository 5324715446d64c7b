//! Jobs, task instances and scenario configuration.
//!
//! A job is a `T x R` matrix of task instances: row `t` is one logical
//! task, column `r` one complete copy of the job (a redundancy group).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::placement::Scheduler;
use crate::topology::HierarchySpec;

/// How the data-centre size is derived from the workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sizing {
    /// `2 * J * T * R` services: twice what the task instances need.
    Variable,
    /// `20 * J * T` services, independent of redundancy.
    Fixed,
}

impl Sizing {
    pub const ALL: [Sizing; 2] = [Sizing::Variable, Sizing::Fixed];

    pub fn name(self) -> &'static str {
        match self {
            Sizing::Variable => "variable",
            Sizing::Fixed => "fixed",
        }
    }
}

impl fmt::Display for Sizing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sizing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "variable" => Ok(Sizing::Variable),
            "fixed" => Ok(Sizing::Fixed),
            other => {
                Err(Error::config("sizing", format!("unknown sizing `{other}`; expected one of: variable, fixed")))
            }
        }
    }
}

/// One point of an experiment: workload, data centre, scheduler and failure level.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub jobs: usize,
    pub tasks: usize,
    pub redundancy: usize,
    /// Fraction of hardware units that fail (top-level events) over a run.
    pub failure_fraction: f64,
    pub hierarchy: HierarchySpec,
    pub sizing: Sizing,
    pub scheduler: Scheduler,
    /// Simulated run length, normalized.
    pub duration: f64,
    /// Communication-cost samples per run.
    pub ticks: usize,
    pub base_seed: u64,
    pub repetitions: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            jobs: 10,
            tasks: 10,
            redundancy: 3,
            failure_fraction: 0.05,
            hierarchy: HierarchySpec::new(8, 4, 16, 16).expect("valid default hierarchy"),
            sizing: Sizing::Fixed,
            scheduler: Scheduler::Cluster,
            duration: 1.0,
            ticks: 100,
            base_seed: 0,
            repetitions: 30,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("jobs", self.jobs),
            ("tasks", self.tasks),
            ("redundancy", self.redundancy),
            ("ticks", self.ticks),
            ("repetitions", self.repetitions),
        ];
        for (key, value) in positive {
            if value == 0 {
                return Err(Error::config(key, "must be >= 1"));
            }
        }
        if !(self.failure_fraction > 0.0 && self.failure_fraction < 1.0) {
            return Err(Error::config(
                "failure_fraction",
                format!("must lie strictly between 0 and 1, got {}", self.failure_fraction),
            ));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::config("duration", "must be a positive number"));
        }
        self.hierarchy.validate()
    }

    pub fn job_set(&self) -> JobSet {
        JobSet::new(self.jobs, self.tasks, self.redundancy)
    }

    /// Total task instances, `J * T * R`.
    pub fn total_instances(&self) -> usize {
        self.jobs * self.tasks * self.redundancy
    }
}

/// Number of services in the data centre for a scenario.
pub fn derive_dc_size(config: &ScenarioConfig) -> usize {
    match config.sizing {
        Sizing::Variable => 2 * config.jobs * config.tasks * config.redundancy,
        Sizing::Fixed => 20 * config.jobs * config.tasks,
    }
}

/// Task instance `(job, task row, redundancy column)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceId {
    pub job: usize,
    pub task: usize,
    pub copy: usize,
}

impl InstanceId {
    pub fn new(job: usize, task: usize, copy: usize) -> Self {
        Self { job, task, copy }
    }
}

/// The `J` job matrices of a scenario.
///
/// Instances are stored densely, job-major then row then column, and
/// addressed by that flat index elsewhere in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobSet {
    pub jobs: usize,
    pub tasks: usize,
    pub redundancy: usize,
}

impl JobSet {
    pub fn new(jobs: usize, tasks: usize, redundancy: usize) -> Self {
        Self { jobs, tasks, redundancy }
    }

    pub fn len(&self) -> usize {
        self.jobs * self.tasks * self.redundancy
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn instances_per_job(&self) -> usize {
        self.tasks * self.redundancy
    }

    pub fn index(&self, id: InstanceId) -> usize {
        debug_assert!(id.job < self.jobs && id.task < self.tasks && id.copy < self.redundancy);
        (id.job * self.tasks + id.task) * self.redundancy + id.copy
    }

    pub fn id(&self, index: usize) -> InstanceId {
        let copy = index % self.redundancy;
        let rest = index / self.redundancy;
        InstanceId::new(rest / self.tasks, rest % self.tasks, copy)
    }

    /// Flat index range of one job's instances.
    pub fn job_range(&self, job: usize) -> std::ops::Range<usize> {
        let n = self.instances_per_job();
        job * n..(job + 1) * n
    }

    pub fn instances(&self) -> impl Iterator<Item = InstanceId> + '_ {
        (0..self.len()).map(|i| self.id(i))
    }

    /// The instances of redundancy group `(job, copy)`, in row order.
    pub fn group(&self, job: usize, copy: usize) -> impl Iterator<Item = InstanceId> {
        (0..self.tasks).map(move |t| InstanceId::new(job, t, copy))
    }
}

/// Liveness of every task instance, indexed like [`JobSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceState {
    alive: Vec<bool>,
}

impl InstanceState {
    pub fn all_alive(jobs: &JobSet) -> Self {
        Self { alive: vec![true; jobs.len()] }
    }

    pub fn is_alive(&self, index: usize) -> bool {
        self.alive[index]
    }

    /// Returns whether the instance was alive.
    pub fn kill(&mut self, index: usize) -> bool {
        std::mem::replace(&mut self.alive[index], false)
    }

    pub fn live_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }
}

/// A job fails iff some task row has lost every copy.
pub fn job_failed(jobs: &JobSet, job: usize, states: &InstanceState) -> bool {
    let base = jobs.job_range(job).start;
    (0..jobs.tasks).any(|t| {
        let row = base + t * jobs.redundancy;
        (row..row + jobs.redundancy).all(|i| !states.is_alive(i))
    })
}
