//! Per-job communication networks.
//!
//! Every live task instance talks to the cheapest live copy of every other
//! task row of its job. The job's network is the undirected, deduplicated
//! union of those links, so two instances that pick each other contribute
//! one edge.

use crate::placement::Placement;
use crate::topology::{Cost, Topology};
use crate::workload::{job_failed, InstanceId, InstanceState, JobSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommEdge {
    /// The endpoint with the lower flat index.
    pub a: InstanceId,
    pub b: InstanceId,
    pub cost: Cost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    pub job: usize,
    pub edges: Vec<CommEdge>,
}

impl CommGraph {
    pub fn cost(&self) -> Cost {
        job_network_cost(self)
    }
}

/// Builds the nearest-copy graph of a job that has not failed.
///
/// Ties between equally cheap copies go to the copy on the lowest service
/// index, which keeps the graph independent of how columns are labelled.
///
/// Panics if the job has failed.
pub fn build_comm_graph(
    jobs: &JobSet,
    job: usize,
    states: &InstanceState,
    placement: &Placement,
    topology: &Topology,
) -> CommGraph {
    assert!(!job_failed(jobs, job, states), "job {job} has failed; it has no communication graph");
    let base = jobs.job_range(job).start;
    let copies = jobs.redundancy;
    let at = |t: usize, r: usize| base + t * copies + r;

    let mut pairs = Vec::new();
    for t in 0..jobs.tasks {
        for r in (0..copies).filter(|&r| states.is_alive(at(t, r))) {
            let me = at(t, r);
            let here = placement.service(me);
            for other in (0..jobs.tasks).filter(|&o| o != t) {
                let nearest = (0..copies)
                    .map(|c| at(other, c))
                    .filter(|&i| states.is_alive(i))
                    .map(|i| {
                        let there = placement.service(i);
                        (topology.service_cost(here, there), there, i)
                    })
                    .min()
                    .expect("a live job has a live copy of every row");
                let (cost, _, peer) = nearest;
                pairs.push((me.min(peer), me.max(peer), cost));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();

    CommGraph {
        job,
        edges: pairs.into_iter().map(|(a, b, cost)| CommEdge { a: jobs.id(a), b: jobs.id(b), cost }).collect(),
    }
}

/// Total cost of one sampling interval of a job's communication.
pub fn job_network_cost(graph: &CommGraph) -> Cost {
    graph.edges.iter().map(|e| e.cost).sum()
}
