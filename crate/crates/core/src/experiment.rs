//! Repeated runs of a scenario and their summary statistics.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::engine::{run_simulation, RunResult};
use crate::error::{Error, Result};
use crate::workload::ScenarioConfig;

/// z-value of a two-sided 95% normal interval.
pub const Z_95: f64 = 1.96;

/// Sample mean with the half-width of its 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub ci95: f64,
    pub n: usize,
}

impl Stat {
    pub fn lower(&self) -> f64 {
        self.mean - self.ci95
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci95
    }

    /// Whether the two confidence intervals intersect.
    pub fn overlaps(&self, other: &Stat) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }
}

/// Mean and normal-approximation 95% half-width, `1.96 * sd / sqrt(n)`
/// with the sample (n - 1) standard deviation.
///
/// Panics on an empty slice.
pub fn aggregate(values: &[f64]) -> Stat {
    assert!(!values.is_empty(), "cannot aggregate an empty sample");
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let ci95 = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Z_95 * var.sqrt() / (n as f64).sqrt()
    };
    Stat { mean, ci95, n }
}

/// Summary of one scenario over its non-rejected repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub config: ScenarioConfig,
    pub reps_total: usize,
    pub reps_rejected: usize,
    /// `None` when every run was rejected.
    pub s_j: Option<Stat>,
    /// Over accepted runs with at least one completed job.
    pub c_j: Option<Stat>,
}

impl Aggregate {
    pub fn from_runs(config: &ScenarioConfig, runs: &[RunResult]) -> Self {
        let accepted: Vec<&RunResult> = runs.iter().filter(|r| !r.rejected).collect();
        let s_j: Vec<f64> = accepted.iter().map(|r| r.s_j).collect();
        let c_j: Vec<f64> = accepted.iter().filter_map(|r| r.c_j).collect();
        Self {
            config: config.clone(),
            reps_total: runs.len(),
            reps_rejected: runs.len() - accepted.len(),
            s_j: (!s_j.is_empty()).then(|| aggregate(&s_j)),
            c_j: (!c_j.is_empty()).then(|| aggregate(&c_j)),
        }
    }

    pub fn is_reportable(&self) -> bool {
        self.reps_total > self.reps_rejected
    }

    /// The aggregate, or [`Error::Unreportable`] if every run was rejected.
    pub fn reportable(&self) -> Result<&Self> {
        if self.is_reportable() {
            Ok(self)
        } else {
            Err(Error::Unreportable(self.reps_total))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub aggregate: Aggregate,
    /// One result per repetition, in repetition order.
    pub runs: Vec<RunResult>,
}

/// Seed of repetition `rep`.
pub fn rep_seed(base_seed: u64, rep: usize) -> u64 {
    base_seed.wrapping_add(rep as u64)
}

/// Runs `repetitions` independent repetitions in parallel on the current
/// rayon pool. Repetition `i` uses seed `base_seed + i`.
pub fn run_scenario(config: &ScenarioConfig, repetitions: usize) -> Result<ScenarioOutcome> {
    if repetitions == 0 {
        return Err(Error::config("repetitions", "must be >= 1"));
    }
    config.validate()?;
    let runs = (0..repetitions)
        .into_par_iter()
        .map(|rep| run_simulation(config, rep_seed(config.base_seed, rep)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioOutcome { aggregate: Aggregate::from_runs(config, &runs), runs })
}

/// Divides a redundancy-indexed cost series by its value at the largest
/// redundancy.
pub fn normalize_costs(series: &BTreeMap<usize, f64>) -> Result<BTreeMap<usize, f64>> {
    let (&r_max, &reference) = series.last_key_value().ok_or(Error::MissingReference(0))?;
    if !(reference.is_finite() && reference > 0.0) {
        return Err(Error::MissingReference(r_max));
    }
    Ok(series.iter().map(|(&r, &c)| (r, c / reference)).collect())
}

/// Coefficient of determination of the least-squares line through `(x, y)`.
///
/// Returns 1 for a constant `y`, which a horizontal line fits exactly.
pub fn linear_r_squared(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    if sxx == 0.0 {
        return 0.0;
    }
    sxy * sxy / (sxx * syy)
}
