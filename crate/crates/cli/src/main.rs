use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use dcsim_cli::config::SweepSpec;
use dcsim_cli::report::{emit_results, fmt_num};
use dcsim_cli::{run_sweep, CliError};

/// Simulates job scheduling and cascading hardware failure in a
/// hierarchical data centre and writes CSV results.
///
/// List-valued options take comma separated values; integer lists also
/// accept inclusive ranges such as `1..10`. Options override the config file.
#[derive(Debug, Parser)]
#[command(name = "dcsim", version)]
struct Args {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Base seed; repetition i uses seed + i.
    #[arg(long)]
    seed: Option<String>,
    /// Repetitions per scenario.
    #[arg(long)]
    reps: Option<String>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long)]
    threads: Option<usize>,
    /// Schedulers: random, pack, cluster.
    #[arg(long)]
    scheduler: Option<String>,
    /// Hierarchies as a-b-c-d, h-a-b-c-d or h-N.
    #[arg(long)]
    hierarchy: Option<String>,
    /// Data-centre sizing: fixed or variable.
    #[arg(long)]
    sizing: Option<String>,
    /// Jobs per run.
    #[arg(long)]
    jobs: Option<String>,
    /// Tasks per job.
    #[arg(long)]
    tasks: Option<String>,
    /// Copies of every task.
    #[arg(long)]
    redundancy: Option<String>,
    /// Hardware failure fraction.
    #[arg(long)]
    failure_fraction: Option<String>,
    /// Cost samples per run.
    #[arg(long)]
    ticks: Option<String>,
    /// Simulated duration.
    #[arg(long)]
    duration: Option<String>,
    /// Print the scenario grid and exit without running.
    #[arg(long)]
    list_scenarios: bool,
}

fn build_sweep(args: &Args) -> Result<SweepSpec, CliError> {
    let mut sweep = SweepSpec::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        sweep.apply_text(&text)?;
    }
    let overrides = [
        ("seed", &args.seed),
        ("repetitions", &args.reps),
        ("scheduler", &args.scheduler),
        ("hierarchy", &args.hierarchy),
        ("sizing", &args.sizing),
        ("jobs", &args.jobs),
        ("tasks", &args.tasks),
        ("redundancy", &args.redundancy),
        ("failure_fraction", &args.failure_fraction),
        ("ticks", &args.ticks),
        ("duration", &args.duration),
    ];
    for (key, value) in overrides {
        if let Some(value) = value {
            sweep.set(key, value)?;
        }
    }
    Ok(sweep)
}

fn run(args: &Args) -> Result<(), CliError> {
    let sweep = build_sweep(args)?;
    let scenarios = sweep.validate()?;

    if args.list_scenarios {
        println!("scenario_id,scheduler,hierarchy,sizing,J,T,R,f_hw");
        for (id, s) in scenarios.iter().enumerate() {
            println!(
                "{id},{},{},{},{},{},{},{}",
                s.scheduler,
                s.hierarchy,
                s.sizing,
                s.jobs,
                s.tasks,
                s.redundancy,
                fmt_num(s.failure_fraction)
            );
        }
        return Ok(());
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(dcsim::Error::config("threads", "must be >= 1").into());
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| dcsim::Error::config("threads", e.to_string()))?;
    let outcomes = pool.install(|| run_sweep(&sweep))?;

    let files = emit_results(&args.out, &sweep, &outcomes)?;
    let rejected: usize = outcomes.iter().map(|o| o.aggregate.reps_rejected).sum();
    eprintln!(
        "{} scenarios x {} repetitions, {rejected} runs rejected; wrote {} files to {}",
        outcomes.len(),
        sweep.repetitions,
        files.len(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
