//! Data-centre hierarchy tree.
//!
//! A data centre is a tree of aisles, racks, chassis, blades and services
//! (VM slots). Branching below the aisle is fixed by a [`HierarchySpec`];
//! the number of aisles is whatever the requested service count needs.
//! Services are numbered in canonical address order and the tree is the
//! minimal prefix holding that many services, so the last blade, chassis,
//! rack or aisle may be only partly populated.
//!
//! Because of the prefix construction every unit at every level covers a
//! contiguous range of service indices, which the rest of the crate leans on.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dimensionless communication cost.
pub type Cost = u64;

/// Cost between two different services on the same blade.
pub const COST_INTER_SERVICE: Cost = 1;
/// Cost between two blades of the same chassis.
pub const COST_INTER_BLADE: Cost = 10;
/// Cost between two chassis of the same rack.
pub const COST_INTER_CHASSIS: Cost = 100;
/// Cost between two racks of the same aisle.
pub const COST_INTER_RACK: Cost = 1_000;
/// Cost between two aisles.
pub const COST_INTER_AISLE: Cost = 10_000;

/// A level of the hardware tree. Ordered so that `Service < Blade < ... < Aisle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Service,
    Blade,
    Chassis,
    Rack,
    Aisle,
}

impl Level {
    /// All levels, top of the tree first.
    pub const TOP_DOWN: [Level; 5] = [Level::Aisle, Level::Rack, Level::Chassis, Level::Blade, Level::Service];

    /// All levels, leaves first.
    pub const BOTTOM_UP: [Level; 5] = [Level::Service, Level::Blade, Level::Chassis, Level::Rack, Level::Aisle];

    /// Dense index, `Service = 0` through `Aisle = 4`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::Service => "service",
            Level::Blade => "blade",
            Level::Chassis => "chassis",
            Level::Rack => "rack",
            Level::Aisle => "aisle",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Branching factors below the aisle, written `a-b-c-d` (`h-a-b-c-d`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HierarchySpec {
    pub racks_per_aisle: usize,
    pub chassis_per_rack: usize,
    pub blades_per_chassis: usize,
    pub services_per_blade: usize,
}

impl HierarchySpec {
    pub fn new(
        racks_per_aisle: usize,
        chassis_per_rack: usize,
        blades_per_chassis: usize,
        services_per_blade: usize,
    ) -> Result<Self> {
        let spec = Self { racks_per_aisle, chassis_per_rack, blades_per_chassis, services_per_blade };
        spec.validate()?;
        Ok(spec)
    }

    /// The same branching factor at every level (`h-5`, `h-10`).
    pub fn uniform(factor: usize) -> Result<Self> {
        Self::new(factor, factor, factor, factor)
    }

    pub fn validate(&self) -> Result<()> {
        let factors = [self.racks_per_aisle, self.chassis_per_rack, self.blades_per_chassis, self.services_per_blade];
        if factors.contains(&0) {
            return Err(Error::config("hierarchy", format!("branching factors must all be >= 1, got {self}")));
        }
        Ok(())
    }

    /// Number of services in one fully populated unit of `level`.
    pub fn unit_capacity(&self, level: Level) -> usize {
        let blade = self.services_per_blade;
        let chassis = blade * self.blades_per_chassis;
        let rack = chassis * self.chassis_per_rack;
        match level {
            Level::Service => 1,
            Level::Blade => blade,
            Level::Chassis => chassis,
            Level::Rack => rack,
            Level::Aisle => rack * self.racks_per_aisle,
        }
    }
}

impl fmt::Display for HierarchySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}-{}-{}",
            self.racks_per_aisle, self.chassis_per_rack, self.blades_per_chassis, self.services_per_blade
        )
    }
}

impl FromStr for HierarchySpec {
    type Err = Error;

    /// Accepts `8-4-16-16`, `h-8-4-16-16`, and the shorthand `h-N` for `N-N-N-N`.
    fn from_str(s: &str) -> Result<Self> {
        let malformed = || {
            Error::config(
                "hierarchy",
                format!("malformed hierarchy `{s}`; expected a-b-c-d, h-a-b-c-d or h-N (e.g. 8-4-16-16, h-5)"),
            )
        };
        let trimmed = s.trim();
        let (shorthand_allowed, body) = match trimmed.strip_prefix("h-") {
            Some(rest) => (true, rest),
            None => (false, trimmed),
        };
        let parts =
            body.split('-').map(|p| p.trim().parse::<usize>().map_err(|_| malformed())).collect::<Result<Vec<_>>>()?;
        match parts.as_slice() {
            [n] if shorthand_allowed => Self::uniform(*n),
            [a, b, c, d] => Self::new(*a, *b, *c, *d),
            _ => Err(malformed()),
        }
    }
}

/// Canonical index of a service, in lexicographic address order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ServiceId(pub usize);

/// A hardware unit: a level plus the unit's index among all units of that level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitId {
    pub level: Level,
    pub index: usize,
}

impl UnitId {
    pub fn new(level: Level, index: usize) -> Self {
        Self { level, index }
    }
}

/// Position of a service in the tree. Every component except `aisle` is
/// local to its parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address {
    pub aisle: usize,
    pub rack: usize,
    pub chassis: usize,
    pub blade: usize,
    pub service: usize,
}

/// Per-level counts of existing units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UnitCounts([usize; 5]);

impl UnitCounts {
    pub fn get(&self, level: Level) -> usize {
        self.0[level.index()]
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Level, usize)> + '_ {
        Level::TOP_DOWN.into_iter().map(move |l| (l, self.get(l)))
    }
}

impl std::ops::Index<Level> for UnitCounts {
    type Output = usize;

    fn index(&self, level: Level) -> &usize {
        &self.0[level.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    spec: HierarchySpec,
    service_count: usize,
    capacity: [usize; 5],
    counts: UnitCounts,
    failed: [Vec<bool>; 5],
    alive: [usize; 5],
}

impl Topology {
    /// Builds the minimal tree holding `service_count` services, all alive.
    pub fn build(spec: HierarchySpec, service_count: usize) -> Result<Self> {
        spec.validate()?;
        if service_count == 0 {
            return Err(Error::config("service_count", "data centre needs at least one service"));
        }
        let capacity = Level::BOTTOM_UP.map(|l| spec.unit_capacity(l));
        let counts = UnitCounts(capacity.map(|c| service_count.div_ceil(c)));
        let failed = counts.0.map(|n| vec![false; n]);
        Ok(Self { spec, service_count, capacity, counts, failed, alive: counts.0 })
    }

    pub fn spec(&self) -> &HierarchySpec {
        &self.spec
    }

    pub fn service_count(&self) -> usize {
        self.service_count
    }

    pub fn aisle_count(&self) -> usize {
        self.counts.get(Level::Aisle)
    }

    /// Units that contain at least one service, per level.
    pub fn unit_counts(&self) -> UnitCounts {
        self.counts
    }

    /// Services in one full unit of `level`.
    pub fn unit_capacity(&self, level: Level) -> usize {
        self.capacity[level.index()]
    }

    pub fn contains(&self, unit: UnitId) -> bool {
        unit.index < self.counts.get(unit.level)
    }

    /// Services covered by a unit, as a range of canonical indices.
    ///
    /// Panics if the unit does not exist.
    pub fn service_range(&self, unit: UnitId) -> Range<usize> {
        assert!(self.contains(unit), "no such unit: {unit:?}");
        let cap = self.unit_capacity(unit.level);
        let start = unit.index * cap;
        start..(start + cap).min(self.service_count)
    }

    /// Units of level `lower` (at or below `unit.level`) inside `unit`.
    pub fn descendant_range(&self, unit: UnitId, lower: Level) -> Range<usize> {
        assert!(lower <= unit.level, "{lower} is not below {}", unit.level);
        let services = self.service_range(unit);
        let cap = self.unit_capacity(lower);
        services.start / cap..services.end.div_ceil(cap)
    }

    /// Index of the `level` unit containing `service`.
    pub fn ancestor(&self, service: ServiceId, level: Level) -> usize {
        service.0 / self.unit_capacity(level)
    }

    pub fn address(&self, service: ServiceId) -> Address {
        assert!(service.0 < self.service_count, "no such service: {service:?}");
        let s = service.0;
        let spec = &self.spec;
        Address {
            aisle: s / self.unit_capacity(Level::Aisle),
            rack: (s / self.unit_capacity(Level::Rack)) % spec.racks_per_aisle,
            chassis: (s / self.unit_capacity(Level::Chassis)) % spec.chassis_per_rack,
            blade: (s / self.unit_capacity(Level::Blade)) % spec.blades_per_chassis,
            service: s % spec.services_per_blade,
        }
    }

    /// Inverse of [`Topology::address`]; `None` if the address is out of bounds.
    pub fn service_at(&self, addr: &Address) -> Option<ServiceId> {
        let spec = &self.spec;
        if addr.rack >= spec.racks_per_aisle
            || addr.chassis >= spec.chassis_per_rack
            || addr.blade >= spec.blades_per_chassis
            || addr.service >= spec.services_per_blade
        {
            return None;
        }
        let idx = addr.aisle * self.unit_capacity(Level::Aisle)
            + addr.rack * self.unit_capacity(Level::Rack)
            + addr.chassis * self.unit_capacity(Level::Chassis)
            + addr.blade * self.unit_capacity(Level::Blade)
            + addr.service;
        (idx < self.service_count).then_some(ServiceId(idx))
    }

    /// Communication cost between two addresses.
    ///
    /// Panics if either address is not a service of this topology.
    pub fn path_cost(&self, a: &Address, b: &Address) -> Cost {
        let sa = self.service_at(a).unwrap_or_else(|| panic!("invalid address {a:?}"));
        let sb = self.service_at(b).unwrap_or_else(|| panic!("invalid address {b:?}"));
        self.service_cost(sa, sb)
    }

    /// [`Topology::path_cost`] on canonical indices.
    #[inline]
    pub fn service_cost(&self, a: ServiceId, b: ServiceId) -> Cost {
        if a == b {
            return 0;
        }
        let same = |level: Level| {
            let cap = self.capacity[level.index()];
            a.0 / cap == b.0 / cap
        };
        if same(Level::Blade) {
            COST_INTER_SERVICE
        } else if same(Level::Chassis) {
            COST_INTER_BLADE
        } else if same(Level::Rack) {
            COST_INTER_CHASSIS
        } else if same(Level::Aisle) {
            COST_INTER_RACK
        } else {
            COST_INTER_AISLE
        }
    }

    /// Addresses of every service under a unit, in canonical order.
    pub fn subtree_services(&self, level: Level, unit_index: usize) -> Vec<Address> {
        self.service_range(UnitId::new(level, unit_index)).map(|s| self.address(ServiceId(s))).collect()
    }

    pub fn is_failed(&self, unit: UnitId) -> bool {
        self.failed[unit.level.index()][unit.index]
    }

    #[inline]
    pub fn service_alive(&self, service: ServiceId) -> bool {
        !self.failed[Level::Service.index()][service.0]
    }

    /// Alive units at `level`.
    pub fn alive_count(&self, level: Level) -> usize {
        self.alive[level.index()]
    }

    pub fn alive_counts(&self) -> UnitCounts {
        UnitCounts(self.alive)
    }

    pub fn all_services_failed(&self) -> bool {
        self.alive[Level::Service.index()] == 0
    }

    /// Fraction of services still alive.
    pub fn surviving_service_fraction(&self) -> f64 {
        self.alive_count(Level::Service) as f64 / self.service_count as f64
    }

    /// Marks a unit and its whole subtree failed. Returns the units that
    /// went from alive to failed, `unit` first when it was alive. Failing an
    /// already-failed unit is a no-op.
    pub fn fail_unit(&mut self, unit: UnitId) -> Vec<UnitId> {
        assert!(self.contains(unit), "no such unit: {unit:?}");
        let mut newly = Vec::new();
        if self.is_failed(unit) {
            return newly;
        }
        for level in Level::TOP_DOWN.into_iter().filter(|&l| l <= unit.level) {
            for index in self.descendant_range(unit, level) {
                let flag = &mut self.failed[level.index()][index];
                if !*flag {
                    *flag = true;
                    self.alive[level.index()] -= 1;
                    newly.push(UnitId::new(level, index));
                }
            }
        }
        newly
    }
}
