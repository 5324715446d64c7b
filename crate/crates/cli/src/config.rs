//! Sweep configuration: a flat `key = value` text format.
//!
//! ```text
//! # resilience sweep
//! hierarchy = 8-4-16-16
//! sizing = fixed
//! scheduler = random, pack, cluster
//! redundancy = 1..10
//! failure_fraction = 0.01, 0.05, 0.1
//! ```
//!
//! Lists are comma separated; integer keys also accept inclusive ranges
//! `a..b`. Text after `#` is ignored.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use dcsim::{derive_dc_size, Error, HierarchySpec, ScenarioConfig, Scheduler, Sizing};

pub const KEYS: [&str; 11] = [
    "jobs",
    "tasks",
    "redundancy",
    "failure_fraction",
    "sizing",
    "scheduler",
    "hierarchy",
    "ticks",
    "duration",
    "seed",
    "repetitions",
];

/// The Cartesian grid of scenarios plus the settings shared by all of them.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub hierarchy: Vec<HierarchySpec>,
    pub sizing: Vec<Sizing>,
    pub scheduler: Vec<Scheduler>,
    pub jobs: Vec<usize>,
    pub tasks: Vec<usize>,
    pub failure_fraction: Vec<f64>,
    pub redundancy: Vec<usize>,
    pub duration: f64,
    pub ticks: usize,
    pub seed: u64,
    pub repetitions: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            hierarchy: vec![HierarchySpec::new(8, 4, 16, 16).expect("valid")],
            sizing: vec![Sizing::Fixed],
            scheduler: Scheduler::ALL.to_vec(),
            jobs: vec![10],
            tasks: vec![10],
            failure_fraction: vec![0.05],
            redundancy: (1..=10).collect(),
            duration: 1.0,
            ticks: 100,
            seed: 0,
            repetitions: 30,
        }
    }
}

fn list<T>(key: &str, value: &str, parse: impl Fn(&str) -> Result<T, Error>) -> Result<Vec<T>, Error> {
    let items: Vec<T> =
        value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(Error::config(key, "needs at least one value"));
    }
    Ok(items)
}

fn integer<T: FromStr>(key: &str, s: &str) -> Result<T, Error> {
    s.trim().parse().map_err(|_| Error::config(key, format!("`{s}` is not a non-negative integer")))
}

fn integer_list(key: &str, value: &str) -> Result<Vec<usize>, Error> {
    let parts = list(key, value, |item| match item.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi): (usize, usize) = (integer(key, lo)?, integer(key, hi)?);
            if lo > hi {
                return Err(Error::config(key, format!("empty range `{item}`")));
            }
            Ok((lo..=hi).collect::<Vec<_>>())
        }
        None => Ok(vec![integer(key, item)?]),
    })?;
    Ok(parts.into_iter().flatten().collect())
}

fn number(key: &str, s: &str) -> Result<f64, Error> {
    s.trim().parse().map_err(|_| Error::config(key, format!("`{s}` is not a number")))
}

fn single<T>(key: &str, mut values: Vec<T>) -> Result<T, Error> {
    if values.len() != 1 {
        return Err(Error::config(key, "takes a single value"));
    }
    Ok(values.remove(0))
}

impl SweepSpec {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        match key {
            "jobs" => self.jobs = integer_list(key, value)?,
            "tasks" => self.tasks = integer_list(key, value)?,
            "redundancy" => self.redundancy = integer_list(key, value)?,
            "failure_fraction" => self.failure_fraction = list(key, value, |s| number(key, s))?,
            "sizing" => self.sizing = list(key, value, Sizing::from_str)?,
            "scheduler" => self.scheduler = list(key, value, Scheduler::from_str)?,
            "hierarchy" => self.hierarchy = list(key, value, HierarchySpec::from_str)?,
            "ticks" => self.ticks = single(key, integer_list(key, value)?)?,
            "duration" => self.duration = single(key, list(key, value, |s| number(key, s))?)?,
            "seed" => self.seed = integer(key, value)?,
            "repetitions" => self.repetitions = single(key, integer_list(key, value)?)?,
            other => return Err(Error::config(other, format!("unknown key; accepted keys: {}", KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file.
    pub fn apply_text(&mut self, text: &str) -> Result<(), Error> {
        let mut seen = BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", n + 1), format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::config(key, format!("set twice (line {})", n + 1)));
            }
            self.set(key, value.trim())?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut spec = Self::default();
        spec.apply_text(text)?;
        Ok(spec)
    }

    /// Every scenario of the grid, in output order: hierarchy, sizing,
    /// scheduler, jobs, tasks, failure fraction, then redundancy varying fastest.
    pub fn scenarios(&self) -> Vec<ScenarioConfig> {
        let mut out = Vec::new();
        for &hierarchy in &self.hierarchy {
            for &sizing in &self.sizing {
                for &scheduler in &self.scheduler {
                    for &jobs in &self.jobs {
                        for &tasks in &self.tasks {
                            for &failure_fraction in &self.failure_fraction {
                                for &redundancy in &self.redundancy {
                                    out.push(ScenarioConfig {
                                        jobs,
                                        tasks,
                                        redundancy,
                                        failure_fraction,
                                        hierarchy,
                                        sizing,
                                        scheduler,
                                        duration: self.duration,
                                        ticks: self.ticks,
                                        base_seed: self.seed,
                                        repetitions: self.repetitions,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Checks every scenario of the grid before anything runs.
    pub fn validate(&self) -> Result<Vec<ScenarioConfig>, Error> {
        let scenarios = self.scenarios();
        if scenarios.is_empty() {
            return Err(Error::config("sweep", "the scenario grid is empty"));
        }
        for s in &scenarios {
            s.validate()?;
            let services = derive_dc_size(s);
            if services < s.total_instances() {
                return Err(Error::config(
                    "redundancy",
                    format!(
                        "R={} needs {} services but {} sizing gives {}",
                        s.redundancy,
                        s.total_instances(),
                        s.sizing,
                        services
                    ),
                ));
            }
        }
        Ok(scenarios)
    }

    /// Names of the grid dimensions with more than one value.
    pub fn swept(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.redundancy.len() > 1 {
            out.push("R");
        }
        if self.failure_fraction.len() > 1 {
            out.push("f_hw");
        }
        if self.tasks.len() > 1 {
            out.push("T");
        }
        if self.jobs.len() > 1 {
            out.push("J");
        }
        out
    }

    /// The effective configuration in the same text format.
    pub fn to_config_text(&self) -> String {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
        }
        let mut s = String::from("# effective configuration\n");
        let _ = writeln!(s, "hierarchy = {}", join(&self.hierarchy));
        let _ = writeln!(s, "sizing = {}", join(&self.sizing));
        let _ = writeln!(s, "scheduler = {}", join(&self.scheduler));
        let _ = writeln!(s, "jobs = {}", join(&self.jobs));
        let _ = writeln!(s, "tasks = {}", join(&self.tasks));
        let _ = writeln!(s, "failure_fraction = {}", join(&self.failure_fraction));
        let _ = writeln!(s, "redundancy = {}", join(&self.redundancy));
        let _ = writeln!(s, "duration = {}", self.duration);
        let _ = writeln!(s, "ticks = {}", self.ticks);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "repetitions = {}", self.repetitions);
        s
    }
}
