//! CSV output: per-run rows, per-scenario summaries and plot series.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dcsim::experiment::Stat;
use dcsim::{normalize_costs, Level, RunResult, ScenarioConfig, ScenarioOutcome};

use crate::config::SweepSpec;
use crate::CliError;

pub const RUNS_HEADER: &str = "scenario_id,scheduler,hierarchy,sizing,J,T,R,f_hw,rep,seed,rejected,jobs_succeeded,S_J,C_J,events_aisle,events_rack,events_chassis,events_blade,events_service";
pub const SUMMARY_HEADER: &str =
    "scenario_id,scheduler,hierarchy,sizing,J,T,R,f_hw,reps_total,reps_rejected,S_J_mean,S_J_ci95,C_J_mean,C_J_ci95";
pub const PLOT_HEADER: &str = "scheduler,hierarchy,sizing,J,T,R,f_hw,x,mean,ci95";

pub const RUNS_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const EFFECTIVE_CONFIG_FILE: &str = "effective-config";

/// Formats a number with at most six significant digits, without
/// trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    if magnitude >= 6 {
        let scale = 10f64.powi(magnitude - 5);
        return format!("{}", (x / scale).round() * scale);
    }
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn identity(id: usize, c: &ScenarioConfig) -> String {
    format!(
        "{id},{},{},{},{},{},{},{}",
        c.scheduler,
        c.hierarchy,
        c.sizing,
        c.jobs,
        c.tasks,
        c.redundancy,
        fmt_num(c.failure_fraction)
    )
}

fn stat_cells(stat: Option<Stat>) -> String {
    match stat {
        Some(s) => format!("{},{}", fmt_num(s.mean), fmt_num(s.ci95)),
        None => ",".into(),
    }
}

fn run_row(id: usize, c: &ScenarioConfig, rep: usize, r: &RunResult) -> String {
    let events = Level::TOP_DOWN.map(|l| r.failure_event_counts[l.index()].to_string()).join(",");
    format!(
        "{},{rep},{},{},{},{},{},{events}",
        identity(id, c),
        r.seed,
        r.rejected,
        r.jobs_succeeded,
        fmt_num(r.s_j),
        r.c_j.map(fmt_num).unwrap_or_default(),
    )
}

pub fn runs_csv(outcomes: &[ScenarioOutcome]) -> String {
    let mut s = format!("{RUNS_HEADER}\n");
    for (id, o) in outcomes.iter().enumerate() {
        for (rep, r) in o.runs.iter().enumerate() {
            let _ = writeln!(s, "{}", run_row(id, &o.aggregate.config, rep, r));
        }
    }
    s
}

pub fn summary_csv(outcomes: &[ScenarioOutcome]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for (id, o) in outcomes.iter().enumerate() {
        let a = &o.aggregate;
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            identity(id, &a.config),
            a.reps_total,
            a.reps_rejected,
            stat_cells(a.s_j),
            stat_cells(a.c_j)
        );
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    SuccessRate,
    Cost,
    /// Cost divided by the cost at the largest redundancy of the series.
    NormalizedCost,
}

impl Metric {
    fn name(self) -> &'static str {
        match self {
            Metric::SuccessRate => "S_J",
            Metric::Cost => "C_J",
            Metric::NormalizedCost => "C_J_norm",
        }
    }
}

fn sweep_value(c: &ScenarioConfig, dim: &str) -> f64 {
    match dim {
        "R" => c.redundancy as f64,
        "f_hw" => c.failure_fraction,
        "T" => c.tasks as f64,
        "J" => c.jobs as f64,
        _ => unreachable!("unknown sweep dimension {dim}"),
    }
}

type Point<'a> = (f64, Option<Stat>, &'a ScenarioConfig);

/// One plot series per combination of the non-swept parameters; rows are
/// sorted by series, then by the swept value. Scenarios without a value
/// for the metric are skipped.
pub fn plot_csv(outcomes: &[ScenarioOutcome], metric: Metric, dim: &str) -> String {
    let mut series: BTreeMap<String, Vec<Point>> = BTreeMap::new();
    for o in outcomes {
        let c = &o.aggregate.config;
        let mut key = c.clone();
        match dim {
            "R" => key.redundancy = 0,
            "f_hw" => key.failure_fraction = 0.0,
            "T" => key.tasks = 0,
            "J" => key.jobs = 0,
            _ => unreachable!(),
        }
        let label = format!(
            "{:?}",
            (
                key.scheduler.name(),
                key.hierarchy.to_string(),
                key.sizing.name(),
                key.jobs,
                key.tasks,
                key.redundancy,
                fmt_num(key.failure_fraction)
            )
        );
        let stat = match metric {
            Metric::SuccessRate => o.aggregate.s_j,
            Metric::Cost | Metric::NormalizedCost => o.aggregate.c_j,
        };
        series.entry(label).or_default().push((sweep_value(c, dim), stat, c));
    }

    let mut s = format!("{PLOT_HEADER}\n");
    for points in series.values_mut() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let scale = if metric == Metric::NormalizedCost {
            let by_r: BTreeMap<usize, f64> =
                points.iter().filter_map(|(x, st, _)| st.map(|st| (*x as usize, st.mean))).collect();
            match normalize_costs(&by_r) {
                Ok(norm) => by_r.iter().next_back().map(|(r, c)| norm[r] / c),
                Err(_) => None,
            }
        } else {
            Some(1.0)
        };
        let Some(scale) = scale else { continue };
        for (x, stat, c) in points.iter() {
            let Some(st) = stat else { continue };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                c.scheduler,
                c.hierarchy,
                c.sizing,
                c.jobs,
                c.tasks,
                c.redundancy,
                fmt_num(c.failure_fraction),
                fmt_num(*x),
                fmt_num(st.mean * scale),
                fmt_num(st.ci95 * scale)
            );
        }
    }
    s
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Writes `runs.csv`, `summary.csv`, the effective configuration and one
/// plot file per metric and swept dimension. Returns the files written.
///
/// The summary is written last and atomically, so a failed emit never
/// leaves a partial summary behind.
pub fn emit_results(out_dir: &Path, sweep: &SweepSpec, outcomes: &[ScenarioOutcome]) -> Result<Vec<PathBuf>, CliError> {
    if outcomes.is_empty() {
        return Err(CliError::Config(dcsim::Error::config("sweep", "no scenarios to report")));
    }
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;

    let mut written = vec![
        write(out_dir.join(EFFECTIVE_CONFIG_FILE), &sweep.to_config_text())?,
        write(out_dir.join(RUNS_FILE), &runs_csv(outcomes))?,
    ];
    for dim in sweep.swept() {
        let mut metrics = vec![Metric::SuccessRate, Metric::Cost];
        if dim == "R" {
            metrics.push(Metric::NormalizedCost);
        }
        for metric in metrics {
            let name = format!("plot_{}_vs_{dim}.csv", metric.name());
            written.push(write(out_dir.join(name), &plot_csv(outcomes, metric, dim))?);
        }
    }

    let tmp = out_dir.join(format!(".{SUMMARY_FILE}.tmp"));
    write(tmp.clone(), &summary_csv(outcomes))?;
    let summary = out_dir.join(SUMMARY_FILE);
    fs::rename(&tmp, &summary).map_err(|source| CliError::Io { path: summary.clone(), source })?;
    written.push(summary);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dcsim::experiment::Aggregate;
    use dcsim::{Scheduler, Sizing};

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.1), "0.1");
        assert_eq!(fmt_num(0.05), "0.05");
        assert_eq!(fmt_num(2.0 / 3.0), "0.666667");
        assert_eq!(fmt_num(12345.678), "12345.7");
        assert_eq!(fmt_num(123456.7), "123457");
        assert_eq!(fmt_num(1234567.0), "1234570");
        assert_eq!(fmt_num(-0.5), "-0.5");
        assert_eq!(fmt_num(0.000123456789), "0.000123457");
        assert_eq!(fmt_num(9.9999999), "10");
    }

    fn outcome(scheduler: Scheduler, r: usize, runs: Vec<RunResult>) -> ScenarioOutcome {
        let config = ScenarioConfig { scheduler, redundancy: r, sizing: Sizing::Fixed, ..Default::default() };
        ScenarioOutcome { aggregate: Aggregate::from_runs(&config, &runs), runs }
    }

    fn run(seed: u64, rejected: bool, s_j: f64, c_j: Option<f64>) -> RunResult {
        RunResult {
            seed,
            rejected,
            job_success: vec![],
            job_cost: vec![],
            jobs_succeeded: (s_j * 10.0) as usize,
            s_j,
            c_j,
            failure_event_counts: [4, 3, 2, 1, 0],
            surviving_service_fraction: 1.0,
        }
    }

    #[test]
    fn golden_csv() {
        let outcomes = vec![
            outcome(Scheduler::Cluster, 3, vec![run(0, false, 1.0, Some(45.0)), run(1, false, 0.8, Some(60.5))]),
            outcome(Scheduler::Pack, 3, vec![run(0, true, 0.0, None)]),
        ];
        let runs = runs_csv(&outcomes);
        let expected_runs = "\
scenario_id,scheduler,hierarchy,sizing,J,T,R,f_hw,rep,seed,rejected,jobs_succeeded,S_J,C_J,events_aisle,events_rack,events_chassis,events_blade,events_service
0,cluster,8-4-16-16,fixed,10,10,3,0.05,0,0,false,10,1,45,0,1,2,3,4
0,cluster,8-4-16-16,fixed,10,10,3,0.05,1,1,false,8,0.8,60.5,0,1,2,3,4
1,pack,8-4-16-16,fixed,10,10,3,0.05,0,0,true,0,0,,0,1,2,3,4
";
        assert_eq!(runs, expected_runs);

        let summary = summary_csv(&outcomes);
        let ci_s = fmt_num(1.96 * (0.02f64).sqrt() / 2f64.sqrt());
        let ci_c = fmt_num(1.96 * (15.5f64 * 15.5 / 2.0).sqrt() / 2f64.sqrt());
        let expected_summary = format!(
            "{SUMMARY_HEADER}\n0,cluster,8-4-16-16,fixed,10,10,3,0.05,2,0,0.9,{ci_s},52.75,{ci_c}\n1,pack,8-4-16-16,fixed,10,10,3,0.05,1,1,,,,\n"
        );
        assert_eq!(summary, expected_summary);
    }

    #[test]
    fn normalized_plot_ends_at_one() {
        let outcomes: Vec<_> = [(1, 5.0), (2, 20.0), (10, 50.0)]
            .into_iter()
            .map(|(r, c)| outcome(Scheduler::Random, r, vec![run(0, false, 1.0, Some(c))]))
            .collect();
        let csv = plot_csv(&outcomes, Metric::NormalizedCost, "R");
        let means: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(8).unwrap()).collect();
        assert_eq!(means, vec!["0.1", "0.4", "1"]);
    }

    #[test]
    fn refuses_empty_results() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        assert!(matches!(emit_results(&out, &SweepSpec::default(), &[]), Err(CliError::Config(_))));
        assert!(!out.exists());
    }

    #[test]
    fn unwritable_directory_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let outcomes = vec![outcome(Scheduler::Pack, 1, vec![run(0, false, 1.0, Some(1.0))])];
        let err = emit_results(&blocker.join("out"), &SweepSpec::default(), &outcomes).unwrap_err();
        assert!(matches!(err, CliError::Io { .. }));
        assert_eq!(err.exit_code(), 3);
    }
}
