//! Acceptance suite. Every criterion prints one `[PASS]` or `[FAIL]` line;
//! the process fails if any criterion does.
//!
//! Run alone with `cargo test -p dcsim-validation --test acceptance`; pass criterion
//! numbers as arguments to run a subset.

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};

use dcsim::experiment::{linear_r_squared, Stat};
use dcsim::failure::failure_budget;
use dcsim::rng::{stream, Stream};
use dcsim::{
    build_comm_graph, job_failed, plan_failures, run_scenario, InstanceId, InstanceState, JobSet, Level, Placement,
    ScenarioConfig, Scheduler, ServiceId, Sizing, Topology,
};
use dcsim_cli::config::SweepSpec;
use dcsim_cli::report::{emit_results, RUNS_FILE};
use dcsim_cli::run_sweep;

type Verdict = (bool, String);
type Criterion<'a> = (usize, &'static str, Box<dyn Fn() -> Verdict + 'a>);

fn grid(
    base: &ScenarioConfig,
    schedulers: &[Scheduler],
    rs: &[usize],
    reps: usize,
) -> BTreeMap<(Scheduler, usize), Stat2> {
    let mut out = BTreeMap::new();
    for &scheduler in schedulers {
        for &redundancy in rs {
            let config = ScenarioConfig { scheduler, redundancy, repetitions: reps, ..base.clone() };
            let agg = run_scenario(&config, reps).expect("valid scenario").aggregate;
            out.insert((scheduler, redundancy), Stat2 { s_j: agg.s_j, c_j: agg.c_j });
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Stat2 {
    s_j: Option<Stat>,
    c_j: Option<Stat>,
}

impl Stat2 {
    fn s(&self) -> Stat {
        self.s_j.expect("some runs accepted")
    }
    fn c(&self) -> Stat {
        self.c_j.expect("some jobs completed")
    }
}

fn fmt(s: Stat) -> String {
    format!("{:.3}±{:.3}", s.mean, s.ci95)
}

fn resilience_base() -> ScenarioConfig {
    ScenarioConfig {
        jobs: 10,
        tasks: 10,
        failure_fraction: 0.10,
        hierarchy: "8-4-16-16".parse().unwrap(),
        sizing: Sizing::Fixed,
        ..Default::default()
    }
}

fn cost_base() -> ScenarioConfig {
    ScenarioConfig { failure_fraction: 0.05, ..resilience_base() }
}

fn two_blade_costs() -> Verdict {
    let topology = Topology::build("1-1-2-3".parse().unwrap(), 6).unwrap();
    let jobs = JobSet::new(1, 3, 2);
    let services = jobs.instances().map(|id| ServiceId(id.copy * 3 + id.task)).collect();
    let placement = Placement::from_services(jobs, &topology, services).unwrap();
    let mut states = InstanceState::all_alive(&jobs);
    let before = build_comm_graph(&jobs, 0, &states, &placement, &topology).cost();
    states.kill(jobs.index(InstanceId::new(0, 1, 0)));
    let after = build_comm_graph(&jobs, 0, &states, &placement, &topology).cost();
    (before == 6 && after == 24, format!("initial {before} (want 6), after one failure {after} (want 24)"))
}

fn failure_predicate() -> Verdict {
    let mut runner = TestRunner::new(PropConfig { cases: 10_000, failure_persistence: None, ..PropConfig::default() });
    let strategy = (1usize..4, 1usize..6, 1usize..5).prop_flat_map(|(j, t, r)| {
        let n = j * t * r;
        (Just(JobSet::new(j, t, r)), proptest::collection::vec(0..n, 0..2 * n), proptest::collection::vec(0..n, 0..n))
    });
    let result = runner.run(&strategy, |(jobs, kills, more)| {
        let mut states = InstanceState::all_alive(&jobs);
        for &k in &kills {
            states.kill(k);
        }
        for j in 0..jobs.jobs {
            let dead_row = (0..jobs.tasks)
                .any(|t| (0..jobs.redundancy).all(|r| !states.is_alive(jobs.index(InstanceId::new(j, t, r)))));
            prop_assert_eq!(job_failed(&jobs, j, &states), dead_row);
        }
        let mut worse = states.clone();
        for &k in &more {
            worse.kill(k);
        }
        for j in 0..jobs.jobs {
            prop_assert!(!job_failed(&jobs, j, &states) || job_failed(&jobs, j, &worse));
        }
        Ok(())
    });
    match result {
        Ok(()) => (true, "10000 kill-sets agree with the dead-row oracle and are monotone".into()),
        Err(e) => (false, e.to_string()),
    }
}

fn resilience_ordering() -> Verdict {
    let rs = [1, 2, 3, 5, 7, 10];
    let g = grid(&resilience_base(), &Scheduler::ALL, &rs, 50);
    let mut problems = Vec::new();
    for scheduler in [Scheduler::Random, Scheduler::Cluster] {
        for w in rs.windows(2) {
            let (a, b) = (g[&(scheduler, w[0])].s(), g[&(scheduler, w[1])].s());
            if b.mean < a.mean && !a.overlaps(&b) {
                problems.push(format!("(a) {scheduler} drops R={}→{}: {}→{}", w[0], w[1], fmt(a), fmt(b)));
            }
        }
    }
    for &r in &rs {
        let cluster = g[&(Scheduler::Cluster, r)].s();
        for other in [Scheduler::Random, Scheduler::Pack] {
            let o = g[&(other, r)].s();
            if cluster.mean < o.mean - o.ci95 {
                problems.push(format!("(b) R={r}: cluster {} < {other} {}", fmt(cluster), fmt(o)));
            }
        }
    }
    let row = |s: Scheduler| rs.iter().map(|&r| format!("{:.3}", g[&(s, r)].s().mean)).collect::<Vec<_>>().join(" ");
    let detail = format!(
        "S_J over R={rs:?}: random [{}] pack [{}] cluster [{}]",
        row(Scheduler::Random),
        row(Scheduler::Pack),
        row(Scheduler::Cluster)
    );
    if problems.is_empty() {
        (true, detail)
    } else {
        (false, format!("{detail}; {}", problems.join("; ")))
    }
}

fn pack_plateau() -> Verdict {
    let rs = [7, 8, 9, 10];
    let g = grid(&resilience_base(), &[Scheduler::Pack, Scheduler::Cluster], &rs, 100);
    let pack: Vec<f64> = rs.iter().map(|&r| g[&(Scheduler::Pack, r)].s().mean).collect();
    let cluster: Vec<f64> = rs.iter().map(|&r| g[&(Scheduler::Cluster, r)].s().mean).collect();
    let ok = pack.iter().all(|&m| m < 0.97) && cluster.iter().all(|&m| m > 0.97);
    (ok, format!("R=7..10 mean S_J: pack {pack:.3?} (want < 0.97), cluster {cluster:.3?} (want > 0.97)"))
}

fn hierarchy_dip() -> Verdict {
    let base = ScenarioConfig { hierarchy: "h-5".parse().unwrap(), sizing: Sizing::Variable, ..resilience_base() };
    let g = grid(&base, &[Scheduler::Pack, Scheduler::Cluster], &[4, 5, 6], 100);
    let s = |sched, r| g[&(sched, r)].s();
    let (p4, p5, p6) = (s(Scheduler::Pack, 4), s(Scheduler::Pack, 5), s(Scheduler::Pack, 6));
    let (c4, c5, c6) = (s(Scheduler::Cluster, 4), s(Scheduler::Cluster, 5), s(Scheduler::Cluster, 6));
    let within = |x: Stat, n: Stat| x.mean >= n.lower() && x.mean <= n.upper();
    let pack_dip = p5.mean < p4.mean && p5.mean < p6.mean;
    let cluster_flat = within(c5, c4) && within(c5, c6);
    (
        pack_dip && cluster_flat,
        format!(
            "pack R=4,5,6: {} {} {} (dip: {pack_dip}); cluster: {} {} {} (no dip: {cluster_flat})",
            fmt(p4),
            fmt(p5),
            fmt(p6),
            fmt(c4),
            fmt(c5),
            fmt(c6)
        ),
    )
}

fn cost_grid() -> BTreeMap<(Scheduler, usize), Stat2> {
    grid(&cost_base(), &Scheduler::ALL, &[1, 2, 5, 10], 30)
}

fn cost_ordering(g: &BTreeMap<(Scheduler, usize), Stat2>) -> Verdict {
    let c = |s, r| g[&(s, r)].c().mean;
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [2, 5, 10] {
        let (rand, clus, pack) = (c(Scheduler::Random, r), c(Scheduler::Cluster, r), c(Scheduler::Pack, r));
        ok &= rand > clus && clus > pack;
        parts.push(format!("R={r}: random {rand:.1} cluster {clus:.1} pack {pack:.1}"));
    }
    let (clus, pack) = (c(Scheduler::Cluster, 1), c(Scheduler::Pack, 1));
    ok &= clus <= pack;
    parts.push(format!("R=1: cluster {clus:.1} <= pack {pack:.1}"));
    (ok, parts.join("; "))
}

fn cluster_cost_invariance(g: &BTreeMap<(Scheduler, usize), Stat2>) -> Verdict {
    let (c2, c10) = (g[&(Scheduler::Cluster, 2)].c().mean, g[&(Scheduler::Cluster, 10)].c().mean);
    let ratio = c10 / c2;
    (
        (0.75..=1.33).contains(&ratio),
        format!("cluster C_J(R=10)/C_J(R=2) = {c10:.1}/{c2:.1} = {ratio:.3} (want [0.75, 1.33])"),
    )
}

fn linear_cost_scaling() -> Verdict {
    let rs: Vec<usize> = (1..=10).collect();
    let series = [
        (Scheduler::Random, Sizing::Fixed),
        (Scheduler::Random, Sizing::Variable),
        (Scheduler::Pack, Sizing::Fixed),
        (Scheduler::Pack, Sizing::Variable),
        (Scheduler::Cluster, Sizing::Variable),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (scheduler, sizing) in series {
        let base = ScenarioConfig { sizing, ..cost_base() };
        let g = grid(&base, &[scheduler], &rs, 30);
        let points: Vec<(f64, f64)> = rs.iter().map(|&r| (r as f64, g[&(scheduler, r)].c().mean)).collect();
        let r2 = linear_r_squared(&points);
        ok &= r2 >= 0.98;
        parts.push(format!("{scheduler}/{sizing} R²={r2:.3}"));
    }
    (ok, format!("{} (want >= 0.98)", parts.join(", ")))
}

fn single_task_baseline() -> Verdict {
    let config =
        ScenarioConfig { jobs: 100, tasks: 1, redundancy: 1, scheduler: Scheduler::Random, ..resilience_base() };
    let out = run_scenario(&config, 100).unwrap();
    let accepted: Vec<_> = out.runs.iter().filter(|r| !r.rejected).collect();
    let survived = accepted.iter().map(|r| r.surviving_service_fraction).sum::<f64>() / accepted.len() as f64;
    let s_j = out.aggregate.s_j.unwrap().mean;
    (
        (s_j - survived).abs() <= 0.03,
        format!(
            "mean S_J {s_j:.4} vs surviving services {survived:.4} over {} accepted runs (want within 0.03)",
            accepted.len()
        ),
    )
}

fn failure_statistics() -> Verdict {
    // ten aisles, so whole-DC loss within a run is negligible
    let topology = Topology::build("2-2-2-3".parse().unwrap(), 240).unwrap();
    let counts = topology.unit_counts();
    let h_all = counts.total() as f64;
    let mut observed = [0usize; 5];
    let samples = 10_000;
    for seed in 0..samples {
        let trace = plan_failures(&topology, 0.05, 1.0, &mut stream(seed, Stream::Failure)).unwrap();
        observed[trace.events()[0].level().index()] += 1;
    }
    let chi2: f64 = Level::BOTTOM_UP
        .iter()
        .map(|&l| {
            let expected = samples as f64 * counts[l] as f64 / h_all;
            (observed[l.index()] as f64 - expected).powi(2) / expected
        })
        .sum();
    // chi-squared critical value, 4 degrees of freedom, p = 0.01
    let critical = 13.2767;

    let config = ScenarioConfig {
        jobs: 1,
        tasks: 12,
        redundancy: 1,
        failure_fraction: 0.05,
        hierarchy: "2-2-2-3".parse().unwrap(),
        sizing: Sizing::Fixed,
        ticks: 1,
        ..Default::default()
    };
    let runs = 1000;
    let out = run_scenario(&config, runs).unwrap();
    let budget = failure_budget(&topology, 0.05) as f64;
    let mean_events =
        out.runs.iter().map(|r| r.failure_event_counts.iter().sum::<usize>()).sum::<usize>() as f64 / runs as f64;
    let rel = (mean_events - budget).abs() / budget;
    (
        chi2 < critical && rel <= 0.05,
        format!(
            "first-event chi² = {chi2:.2} (want < {critical}), observed {observed:?} (service..aisle); \
             mean events {mean_events:.2} vs N_f {budget} ({:.1}% off, want <= 5%)",
            rel * 100.0
        ),
    )
}

fn determinism() -> Verdict {
    let mut sweep = SweepSpec::default();
    for (key, value) in
        [("seed", "12345"), ("repetitions", "10"), ("redundancy", "1, 3, 5"), ("failure_fraction", "0.1")]
    {
        sweep.set(key, value).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let outcomes = pool.install(|| run_sweep(&sweep)).unwrap();
        let out = dir.path().join(threads.to_string());
        emit_results(&out, &sweep, &outcomes).unwrap();
        outputs.push(fs::read(out.join(RUNS_FILE)).unwrap());
    }
    (
        outputs[0] == outputs[1],
        format!(
            "two executions with seed 12345 (1 and 4 threads) wrote {} and {} bytes of runs.csv",
            outputs[0].len(),
            outputs[1].len()
        ),
    )
}

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: usize| only.is_empty() || only.contains(&n);

    let costs = std::cell::OnceCell::new();
    let cost_grid = || costs.get_or_init(cost_grid);
    let mut criteria: Vec<Criterion> = vec![
        (1, "communication cost of the two-blade example", Box::new(two_blade_costs)),
        (2, "job failure predicate", Box::new(failure_predicate)),
        (3, "resilience monotone in R, cluster most resilient", Box::new(resilience_ordering)),
        (4, "pack plateaus below 0.97, cluster exceeds it", Box::new(pack_plateau)),
        (5, "pack dips at R=5 on h-5, cluster does not", Box::new(hierarchy_dip)),
    ];
    criteria.push((6, "cost ordering random > cluster > pack", Box::new(move || cost_ordering(cost_grid()))));
    criteria.push((7, "cluster cost flat for R >= 2", Box::new(move || cluster_cost_invariance(cost_grid()))));
    criteria.push((8, "linear cost scaling in R", Box::new(linear_cost_scaling)));
    criteria.push((9, "single-task baseline tracks surviving services", Box::new(single_task_baseline)));
    criteria.push((10, "failure model statistics", Box::new(failure_statistics)));
    criteria.push((11, "byte-identical runs.csv for equal seeds", Box::new(determinism)));

    let mut failed = Vec::new();
    for (n, name, check) in criteria.iter().filter(|c| wanted(c.0)) {
        let start = Instant::now();
        let (ok, detail) = check();
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {n:>2}: {name} ({:.1}s): {detail}", start.elapsed().as_secs_f64());
        if !ok {
            failed.push(*n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: criteria {failed:?} failed");
        std::process::exit(1);
    }
}
