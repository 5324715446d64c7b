//! Hardware failure traces and cascading failure.
//!
//! A run targets `N_f = round(f_hw * h_all)` top-level failure events, where
//! `h_all` counts every unit at every level. Event times form a Poisson
//! process of rate `N_f / duration`, so the realized count is random with
//! mean close to `N_f`. Each event picks a level with probability
//! proportional to its alive unit count, then a uniformly random alive unit
//! of that level. A failed unit takes its whole subtree with it, so units
//! are drawn against the trace's own cascade as it is generated.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::topology::{Level, Topology, UnitId};
use crate::workload::{InstanceId, InstanceState, JobSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureEvent {
    pub time: f64,
    pub unit: UnitId,
}

impl FailureEvent {
    pub fn new(time: f64, level: Level, index: usize) -> Self {
        Self { time, unit: UnitId::new(level, index) }
    }

    pub fn level(&self) -> Level {
        self.unit.level
    }
}

/// Failure events in time order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FailureTrace {
    events: Vec<FailureEvent>,
}

impl FailureTrace {
    /// A hand-written trace. Events are sorted by time.
    pub fn scripted(mut events: Vec<FailureEvent>) -> Self {
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Self { events }
    }

    pub fn events(&self) -> &[FailureEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events per level, indexed by [`Level::index`].
    pub fn level_counts(&self) -> [usize; 5] {
        let mut counts = [0; 5];
        for e in &self.events {
            counts[e.level().index()] += 1;
        }
        counts
    }
}

/// Target number of top-level failure events, `round(f_hw * h_all)`.
pub fn failure_budget(topology: &Topology, f_hw: f64) -> usize {
    (f_hw * topology.unit_counts().total() as f64).round() as usize
}

/// Alive units of each level, with O(1) removal.
struct AliveUnits {
    members: [Vec<usize>; 5],
    position: [Vec<usize>; 5],
}

impl AliveUnits {
    fn new(topology: &Topology) -> Self {
        let members = Level::BOTTOM_UP.map(|level| {
            (0..topology.unit_counts().get(level))
                .filter(|&u| !topology.is_failed(UnitId::new(level, u)))
                .collect::<Vec<_>>()
        });
        let position = Level::BOTTOM_UP.map(|level| {
            let mut pos = vec![usize::MAX; topology.unit_counts().get(level)];
            for (i, &u) in members[level.index()].iter().enumerate() {
                pos[u] = i;
            }
            pos
        });
        Self { members, position }
    }

    fn total(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }

    fn remove(&mut self, unit: UnitId) {
        let l = unit.level.index();
        let at = std::mem::replace(&mut self.position[l][unit.index], usize::MAX);
        self.members[l].swap_remove(at);
        if let Some(&moved) = self.members[l].get(at) {
            self.position[l][moved] = at;
        }
    }

    /// Maps a draw in `0..total()` to a unit: levels weighted by alive count,
    /// then uniform within the level.
    fn pick(&self, mut draw: usize) -> UnitId {
        for level in Level::TOP_DOWN {
            let members = &self.members[level.index()];
            if draw < members.len() {
                return UnitId::new(level, members[draw]);
            }
            draw -= members.len();
        }
        unreachable!("draw exceeds alive unit count")
    }
}

/// Draws a failure trace for one run.
///
/// `topology` is not modified; the cascade used to avoid picking dead units
/// is tracked on a private copy.
pub fn plan_failures<R: Rng + ?Sized>(
    topology: &Topology,
    f_hw: f64,
    duration: f64,
    rng: &mut R,
) -> Result<FailureTrace> {
    if !(f_hw > 0.0 && f_hw < 1.0) {
        return Err(Error::config("failure_fraction", format!("must lie strictly between 0 and 1, got {f_hw}")));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::config("duration", "must be a positive number"));
    }
    let budget = failure_budget(topology, f_hw);
    let mut events = Vec::new();
    if budget == 0 {
        return Ok(FailureTrace { events });
    }

    let gaps = Exp::new(budget as f64 / duration).expect("positive finite rate");
    let mut scratch = topology.clone();
    let mut alive = AliveUnits::new(&scratch);
    let mut time = 0.0;
    loop {
        time += gaps.sample(rng);
        if time > duration || alive.total() == 0 {
            break;
        }
        let unit = alive.pick(rng.gen_range(0..alive.total()));
        for dead in scratch.fail_unit(unit) {
            alive.remove(dead);
        }
        events.push(FailureEvent { time, unit });
    }
    Ok(FailureTrace { events })
}

/// Applies one failure event: the unit and its subtree fail and every
/// instance hosted there dies. Returns the instances killed by this event.
///
/// `occupants[s]` is the flat instance index hosted on service `s`, if any.
pub fn apply_failure(
    topology: &mut Topology,
    states: &mut InstanceState,
    jobs: &JobSet,
    occupants: &[Option<usize>],
    event: &FailureEvent,
) -> Vec<InstanceId> {
    topology
        .fail_unit(event.unit)
        .into_iter()
        .filter(|u| u.level == Level::Service)
        .filter_map(|u| occupants[u.index])
        .filter(|&i| states.kill(i))
        .map(|i| jobs.id(i))
        .collect()
}
