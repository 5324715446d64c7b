//! A single simulation run.
//!
//! Jobs are placed before the clock starts. The run then walks `ticks`
//! equally spaced sampling points, one at the midpoint of each of `ticks`
//! equal intervals of the run. Before a tick is sampled, every failure
//! event at or before the tick's time is applied. At the tick every job
//! that has not failed pays the cost of its current nearest-copy graph.

use crate::commnet::build_comm_graph;
use crate::error::Result;
use crate::failure::{apply_failure, plan_failures, FailureEvent, FailureTrace};
use crate::placement::{schedule, Placement};
use crate::rng::{stream, Stream};
use crate::topology::{Cost, Topology};
use crate::workload::{derive_dc_size, job_failed, InstanceState, JobSet, ScenarioConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    /// Every service failed at some point during the run.
    pub rejected: bool,
    pub job_success: Vec<bool>,
    /// Per-job accumulated cost divided by the number of ticks.
    pub job_cost: Vec<f64>,
    pub jobs_succeeded: usize,
    /// Fraction of jobs that completed.
    pub s_j: f64,
    /// Mean time-averaged cost over completed jobs; `None` if none completed.
    pub c_j: Option<f64>,
    /// Applied failure events per level, indexed by [`crate::Level::index`].
    pub failure_event_counts: [usize; 5],
    /// Fraction of services alive at the end of the run.
    pub surviving_service_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub job_success: Vec<bool>,
    pub rejected: bool,
}

/// Per-job success from the final state, plus the rejection flag (no
/// service left alive).
pub fn evaluate_outcome(topology: &Topology, jobs: &JobSet, states: &InstanceState) -> Outcome {
    Outcome {
        job_success: (0..jobs.jobs).map(|j| !job_failed(jobs, j, states)).collect(),
        rejected: topology.all_services_failed(),
    }
}

/// Sampling times: the midpoints of `ticks` equal intervals of `[0, duration]`.
pub fn tick_times(duration: f64, ticks: usize) -> impl Iterator<Item = f64> {
    let step = duration / ticks as f64;
    (0..ticks).map(move |k| (k as f64 + 0.5) * step)
}

/// A placed workload on a fresh data centre, ready to be run against a trace.
#[derive(Debug, Clone)]
pub struct Simulation {
    topology: Topology,
    jobs: JobSet,
    placement: Placement,
    duration: f64,
    ticks: usize,
}

impl Simulation {
    pub fn new(topology: Topology, jobs: JobSet, placement: Placement, duration: f64, ticks: usize) -> Self {
        assert!(ticks >= 1, "at least one sampling tick is needed");
        Self { topology, jobs, placement, duration, ticks }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    /// Runs the workload through `trace`. Events after `duration` are ignored.
    pub fn run(&self, trace: &FailureTrace, seed: u64) -> RunResult {
        let jobs = &self.jobs;
        let mut live = LiveState::new(self);
        let mut pending = trace.events().iter().filter(|e| e.time <= self.duration).peekable();
        let mut accumulated: Vec<Cost> = vec![0; jobs.jobs];

        for tick in tick_times(self.duration, self.ticks) {
            while let Some(event) = pending.next_if(|e| e.time <= tick) {
                live.apply(event);
            }
            for (j, total) in accumulated.iter_mut().enumerate() {
                if !live.failed[j] {
                    *total += live.cost(j);
                }
            }
        }
        for event in pending {
            live.apply(event);
        }

        let outcome = evaluate_outcome(&live.topology, jobs, &live.states);
        let job_cost: Vec<f64> = accumulated.iter().map(|&c| c as f64 / self.ticks as f64).collect();
        let succeeded: Vec<f64> =
            outcome.job_success.iter().zip(&job_cost).filter(|(ok, _)| **ok).map(|(_, &c)| c).collect();
        let jobs_succeeded = succeeded.len();
        RunResult {
            seed,
            rejected: live.rejected || outcome.rejected,
            s_j: jobs_succeeded as f64 / jobs.jobs as f64,
            c_j: (jobs_succeeded > 0).then(|| succeeded.iter().sum::<f64>() / jobs_succeeded as f64),
            jobs_succeeded,
            job_success: outcome.job_success,
            job_cost,
            failure_event_counts: live.event_counts,
            surviving_service_fraction: live.topology.surviving_service_fraction(),
        }
    }
}

/// Mutable state of one run in progress.
struct LiveState<'a> {
    sim: &'a Simulation,
    topology: Topology,
    states: InstanceState,
    occupants: Vec<Option<usize>>,
    failed: Vec<bool>,
    // graph cost per job, dropped when one of the job's instances dies
    cached: Vec<Option<Cost>>,
    event_counts: [usize; 5],
    rejected: bool,
}

impl<'a> LiveState<'a> {
    fn new(sim: &'a Simulation) -> Self {
        let jobs = sim.jobs.jobs;
        Self {
            sim,
            topology: sim.topology.clone(),
            states: InstanceState::all_alive(&sim.jobs),
            occupants: sim.placement.occupants(sim.topology.service_count()),
            failed: vec![false; jobs],
            cached: vec![None; jobs],
            event_counts: [0; 5],
            rejected: false,
        }
    }

    fn apply(&mut self, event: &FailureEvent) {
        let jobs = &self.sim.jobs;
        self.event_counts[event.level().index()] += 1;
        for id in apply_failure(&mut self.topology, &mut self.states, jobs, &self.occupants, event) {
            self.cached[id.job] = None;
            if !self.failed[id.job] && job_failed(jobs, id.job, &self.states) {
                self.failed[id.job] = true;
            }
        }
        self.rejected |= self.topology.all_services_failed();
    }

    fn cost(&mut self, job: usize) -> Cost {
        let (sim, states, topology) = (self.sim, &self.states, &self.topology);
        *self.cached[job]
            .get_or_insert_with(|| build_comm_graph(&sim.jobs, job, states, &sim.placement, topology).cost())
    }
}

/// Builds, schedules and fails a data centre for one repetition of `config`.
pub fn run_simulation(config: &ScenarioConfig, seed: u64) -> Result<RunResult> {
    config.validate()?;
    let topology = Topology::build(config.hierarchy, derive_dc_size(config))?;
    let jobs = config.job_set();
    let placement = schedule(config.scheduler, &jobs, &topology, &mut stream(seed, Stream::Placement))?;
    let trace = plan_failures(&topology, config.failure_fraction, config.duration, &mut stream(seed, Stream::Failure))?;
    Ok(Simulation::new(topology, jobs, placement, config.duration, config.ticks).run(&trace, seed))
}
