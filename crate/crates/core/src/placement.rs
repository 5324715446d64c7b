//! Scheduling task instances onto services.
//!
//! Every scheduler returns a total, injective map from task instance to
//! service: one instance per service, every instance placed.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::topology::{Address, Level, ServiceId, Topology, UnitId};
use crate::workload::{InstanceId, JobSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheduler {
    /// Uniformly random services, ignoring job and redundancy group.
    Random,
    /// Consecutive services in canonical order, each redundancy group contiguous.
    Pack,
    /// Each redundancy group on the smallest unit it fits, groups spread at random.
    Cluster,
}

impl Scheduler {
    pub const ALL: [Scheduler; 3] = [Scheduler::Random, Scheduler::Pack, Scheduler::Cluster];

    pub fn name(self) -> &'static str {
        match self {
            Scheduler::Random => "random",
            Scheduler::Pack => "pack",
            Scheduler::Cluster => "cluster",
        }
    }
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheduler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(Scheduler::Random),
            "pack" => Ok(Scheduler::Pack),
            "cluster" => Ok(Scheduler::Cluster),
            other => Err(Error::config(
                "scheduler",
                format!("unknown scheduler `{other}`; expected one of: random, pack, cluster"),
            )),
        }
    }
}

/// Service assigned to each task instance, indexed like [`JobSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    jobs: JobSet,
    services: Vec<ServiceId>,
}

impl Placement {
    /// Wraps an explicit assignment, checking it is total and injective.
    pub fn from_services(jobs: JobSet, topology: &Topology, services: Vec<ServiceId>) -> Result<Self> {
        if services.len() != jobs.len() {
            return Err(Error::config(
                "placement",
                format!("{} services given for {} instances", services.len(), jobs.len()),
            ));
        }
        let mut used = vec![false; topology.service_count()];
        for s in &services {
            if s.0 >= used.len() || std::mem::replace(&mut used[s.0], true) {
                return Err(Error::config("placement", format!("service {} is out of range or reused", s.0)));
            }
        }
        Ok(Self { jobs, services })
    }

    pub fn jobs(&self) -> &JobSet {
        &self.jobs
    }

    /// Service of the instance with flat index `index`.
    #[inline]
    pub fn service(&self, index: usize) -> ServiceId {
        self.services[index]
    }

    pub fn service_of(&self, id: InstanceId) -> ServiceId {
        self.services[self.jobs.index(id)]
    }

    pub fn address_of(&self, topology: &Topology, id: InstanceId) -> Address {
        topology.address(self.service_of(id))
    }

    pub fn services(&self) -> &[ServiceId] {
        &self.services
    }

    /// Instance hosted by each service, if any.
    pub fn occupants(&self, service_count: usize) -> Vec<Option<usize>> {
        let mut occ = vec![None; service_count];
        for (i, s) in self.services.iter().enumerate() {
            occ[s.0] = Some(i);
        }
        occ
    }
}

fn check_capacity(jobs: &JobSet, topology: &Topology) -> Result<()> {
    if jobs.len() > topology.service_count() {
        return Err(Error::InsufficientServices { services: topology.service_count(), instances: jobs.len() });
    }
    Ok(())
}

pub fn schedule<R: Rng + ?Sized>(
    scheduler: Scheduler,
    jobs: &JobSet,
    topology: &Topology,
    rng: &mut R,
) -> Result<Placement> {
    match scheduler {
        Scheduler::Random => schedule_random(jobs, topology, rng),
        Scheduler::Pack => schedule_pack(jobs, topology),
        Scheduler::Cluster => schedule_cluster(jobs, topology, rng),
    }
}

/// Samples `#T` distinct services uniformly without replacement.
pub fn schedule_random<R: Rng + ?Sized>(jobs: &JobSet, topology: &Topology, rng: &mut R) -> Result<Placement> {
    check_capacity(jobs, topology)?;
    let picked = index::sample(rng, topology.service_count(), jobs.len());
    let services = picked.into_iter().map(ServiceId).collect();
    Ok(Placement { jobs: *jobs, services })
}

/// Fills services from the first one, enumerating instances by job, then
/// redundancy column, then task row.
pub fn schedule_pack(jobs: &JobSet, topology: &Topology) -> Result<Placement> {
    check_capacity(jobs, topology)?;
    let mut services = vec![ServiceId(0); jobs.len()];
    let mut next = 0;
    for j in 0..jobs.jobs {
        for r in 0..jobs.redundancy {
            for id in jobs.group(j, r) {
                services[jobs.index(id)] = ServiceId(next);
                next += 1;
            }
        }
    }
    Ok(Placement { jobs: *jobs, services })
}

/// Free-service bookkeeping for every unit at every level.
struct Occupancy<'a> {
    topology: &'a Topology,
    used: Vec<bool>,
    free: [Vec<usize>; 5],
}

impl<'a> Occupancy<'a> {
    fn new(topology: &'a Topology) -> Self {
        let free = Level::BOTTOM_UP.map(|level| {
            (0..topology.unit_counts().get(level))
                .map(|u| topology.service_range(UnitId::new(level, u)).len())
                .collect()
        });
        Self { topology, used: vec![false; topology.service_count()], free }
    }

    fn free(&self, unit: UnitId) -> usize {
        self.free[unit.level.index()][unit.index]
    }

    fn take(&mut self, service: ServiceId) {
        debug_assert!(!self.used[service.0]);
        self.used[service.0] = true;
        for level in Level::BOTTOM_UP {
            let u = self.topology.ancestor(service, level);
            self.free[level.index()][u] -= 1;
        }
    }

    /// Takes up to `n` free services of `unit` in canonical order.
    fn take_from(&mut self, unit: UnitId, n: usize) -> Vec<ServiceId> {
        let picked: Vec<_> =
            self.topology.service_range(unit).filter(|&s| !self.used[s]).take(n).map(ServiceId).collect();
        for &s in &picked {
            self.take(s);
        }
        picked
    }

    fn eligible(&self, level: Level, need: usize) -> Vec<usize> {
        self.free[level.index()].iter().enumerate().filter(|(_, &f)| f >= need).map(|(u, _)| u).collect()
    }
}

/// Places each redundancy group on one unit of the smallest level whose full
/// capacity holds the group, choosing uniformly among units with room.
///
/// If no unit of that level has room, larger levels are tried. If no unit at
/// all can hold the group, as many instances as fit go to the aisle with the
/// most free services and the rest go one at a time to the free service with
/// the lowest summed cost to the members already placed.
pub fn schedule_cluster<R: Rng + ?Sized>(jobs: &JobSet, topology: &Topology, rng: &mut R) -> Result<Placement> {
    check_capacity(jobs, topology)?;
    let group_size = jobs.tasks;
    let base_level =
        Level::BOTTOM_UP.into_iter().find(|&l| topology.unit_capacity(l) >= group_size).unwrap_or(Level::Aisle);

    let mut occ = Occupancy::new(topology);
    let mut services = vec![ServiceId(0); jobs.len()];

    for j in 0..jobs.jobs {
        for r in 0..jobs.redundancy {
            let placed = place_group(&mut occ, base_level, group_size, rng);
            for (id, s) in jobs.group(j, r).zip(placed) {
                services[jobs.index(id)] = s;
            }
        }
    }
    Ok(Placement { jobs: *jobs, services })
}

fn place_group<R: Rng + ?Sized>(
    occ: &mut Occupancy<'_>,
    base_level: Level,
    size: usize,
    rng: &mut R,
) -> Vec<ServiceId> {
    for level in Level::BOTTOM_UP.into_iter().filter(|&l| l >= base_level) {
        let eligible = occ.eligible(level, size);
        if !eligible.is_empty() {
            let unit = UnitId::new(level, eligible[rng.gen_range(0..eligible.len())]);
            return occ.take_from(unit, size);
        }
    }

    // Overflow: nothing has room for the whole group.
    let topology = occ.topology;
    let roomiest = (0..topology.aisle_count())
        .map(|a| UnitId::new(Level::Aisle, a))
        .max_by_key(|&u| (occ.free(u), std::cmp::Reverse(u.index)))
        .expect("topology has at least one aisle");
    let mut placed = occ.take_from(roomiest, size);
    while placed.len() < size {
        let next = (0..topology.service_count())
            .filter(|&s| !occ.used[s])
            .map(ServiceId)
            .min_by_key(|&s| {
                let total: u64 = placed.iter().map(|&p| topology.service_cost(p, s)).sum();
                (total, s)
            })
            .expect("capacity was checked up front");
        occ.take(next);
        placed.push(next);
    }
    placed
}
