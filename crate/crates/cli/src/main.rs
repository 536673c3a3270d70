mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use cycle_patrol::io::{read_json, write_json, Scenario};
use cycle_patrol::metrics::{plot_csv, theorem_verdicts};
use cycle_patrol::scenario::{build_tour, TaskSet, TourMethod};
use cycle_patrol::sweep::{
    factor_fleet, geometric_factors, rows_to_csv, sweep_point, uniform_fleet, FactorTarget, SweepRow,
};
use cycle_patrol::RepositionPolicy;
use rayon::prelude::*;

use verify::{Fault, Suite};

#[derive(Parser)]
#[command(name = "cycle-patrol", version, about = "Simulate and analyse robots patrolling a cycle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a closed tour through task locations.
    Tour {
        tasks: PathBuf,
        #[arg(long, value_enum, default_value = "mst")]
        method: Method,
        #[arg(short, long, default_value = "cyclegraph.json")]
        output: PathBuf,
    },
    /// Run a fleet and write trace.csv, plot.csv and report.json.
    #[command(group(ArgGroup::new("horizon").required(true).args(["until", "events"])))]
    Simulate {
        scenario: PathBuf,
        /// Simulated time to stop at.
        #[arg(long)]
        until: Option<f64>,
        /// Number of events to process.
        #[arg(long)]
        events: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Robots facing forward when orientations are drawn (default n/2).
        #[arg(long)]
        n_forward: Option<usize>,
        #[arg(long, value_enum, default_value = "travel")]
        policy: Policy,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run property suites; exits 3 when any case fails.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Revisiting time against fleet size or against a capability factor.
    #[command(group(ArgGroup::new("axis").required(true).args(["vary", "factor"])))]
    Sweep {
        /// Fleet sizes, `n=A..B`.
        #[arg(long)]
        vary: Option<String>,
        /// Factor range `A..B` applied to robots 1 and 2 of a six-robot fleet.
        #[arg(long)]
        factor: Option<String>,
        /// Geometrically spaced factors in the range.
        #[arg(long, default_value_t = 12)]
        steps: usize,
        #[arg(long, value_enum, default_value = "all")]
        target: Target,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Mst,
    Nn,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Travel,
    Snap,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Radius,
    Speed,
    Both,
    All,
}

/// Command-line mistakes: bad paths, malformed ranges.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Failing property suites.
#[derive(Debug)]
struct SuiteFailed;

impl std::fmt::Display for SuiteFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("property suite failed")
    }
}

impl std::error::Error for SuiteFailed {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.is::<SuiteFailed>() {
        return 3;
    }
    if e.is::<Usage>() {
        return 1;
    }
    match e.downcast_ref::<cycle_patrol::Error>() {
        Some(cycle_patrol::Error::Io(_)) => 1,
        Some(_) => 2,
        None if e.is::<std::io::Error>() => 1,
        None => 2,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("CYCLE_PATROL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| anyhow!(Usage(format!("CYCLE_PATROL_THREADS must be a positive integer, got {raw:?}"))))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Tour { tasks, method, output } => tour(&tasks, method, &output),
        Command::Simulate {
            scenario,
            until,
            events,
            seed,
            n_forward,
            policy,
            out,
        } => simulate(&scenario, until, events, seed, n_forward, policy, &out),
        Command::Verify { suite, inject_fault } => run_suites(suite, inject_fault),
        Command::Sweep {
            vary,
            factor,
            steps,
            target,
            seed,
            out,
        } => sweep(vary.as_deref(), factor.as_deref(), steps, target, seed, &out),
    }
}

fn require_file(path: &Path) -> anyhow::Result<()> {
    if !path.is_file() {
        bail!(Usage(format!("no such file: {}", path.display())));
    }
    Ok(())
}

fn tour(tasks: &Path, method: Method, output: &Path) -> anyhow::Result<()> {
    require_file(tasks)?;
    let set: TaskSet<f64> = read_json(tasks).with_context(|| format!("reading {}", tasks.display()))?;
    let method = match method {
        Method::Mst => TourMethod::Mst,
        Method::Nn => TourMethod::NearestNeighbor,
    };
    let graph = build_tour(&set, method)?;
    if set.len() == 1 {
        eprintln!("warning: a single task gives a cycle of length 0");
    }
    write_json(output, &graph)?;
    println!("L = {} over {} waypoints -> {}", graph.total_length, graph.len(), output.display());
    Ok(())
}

fn simulate(
    path: &Path,
    until: Option<f64>,
    events: Option<usize>,
    seed: u64,
    n_forward: Option<usize>,
    policy: Policy,
    out: &Path,
) -> anyhow::Result<()> {
    require_file(path)?;
    match (until, events) {
        (Some(t), _) if !(t > 0.0 && t.is_finite()) => bail!(Usage(format!("--until must be positive, got {t}"))),
        (_, Some(0)) => bail!(Usage("--events must be positive".into())),
        _ => {}
    }
    let scenario: Scenario<f64> = read_json(path).with_context(|| format!("reading {}", path.display()))?;
    let fleet = scenario.fleet()?;
    let policy = match policy {
        Policy::Travel => RepositionPolicy::Travel,
        Policy::Snap => RepositionPolicy::Snap,
    };
    let mut sim = scenario.simulation(seed, n_forward)?.with_policy(policy);
    match (until, events) {
        (Some(t), _) => {
            sim.run_until_time(t)?;
        }
        (None, Some(k)) => sim.run_events(k)?,
        (None, None) => unreachable!("clap requires a horizon"),
    }
    let report = theorem_verdicts(sim.trace(), &fleet)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("trace.csv"), sim.trace().to_csv_string())?;
    fs::write(out.join("plot.csv"), plot_csv(sim.trace(), report.n_bal.max(1))?)?;
    let mut json = report.to_json()?;
    json.push('\n');
    fs::write(out.join("report.json"), json)?;

    println!("t* = {}", report.t_star);
    println!("predicted revisiting time = {}", report.predicted_revisit);
    for v in &report.verdicts {
        println!("{:<18} {}", v.name, v.status);
    }
    println!("{} events -> {}", sim.events_processed(), out.display());
    Ok(())
}

fn run_suites(suite: Suite, fault: Option<Fault>) -> anyhow::Result<()> {
    let mut failed = false;
    for s in suite.expand() {
        let result = verify::run(s, fault);
        let status = if result.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status} {}: {} cases, {} failures ({:.2} s)",
            result.suite,
            result.cases,
            result.failures.len(),
            result.seconds
        );
        for f in result.failures.iter().take(5) {
            println!("  {f}");
        }
        failed |= !result.passed();
    }
    if failed {
        bail!(SuiteFailed);
    }
    Ok(())
}

fn parse_range<T: std::str::FromStr>(raw: &str) -> Option<(T, T)> {
    let (lo, hi) = raw.split_once("..")?;
    Some((lo.trim().parse().ok()?, hi.trim().parse().ok()?))
}

fn sweep(
    vary: Option<&str>,
    factor: Option<&str>,
    steps: usize,
    target: Target,
    seed: u64,
    out: &Path,
) -> anyhow::Result<()> {
    const MAX_EVENTS: usize = 5_000_000;
    let rows: Vec<SweepRow> = if let Some(raw) = vary {
        let (lo, hi) = raw
            .strip_prefix("n=")
            .and_then(parse_range::<usize>)
            .filter(|&(lo, hi)| lo >= 2 && lo <= hi)
            .ok_or_else(|| anyhow!(Usage(format!("--vary expects n=A..B with 2 <= A <= B, got {raw:?}"))))?;
        (lo..=hi)
            .into_par_iter()
            .map(|n| {
                let fleet = uniform_fleet(n, 2.0, 50.0, 10_000.0)?;
                sweep_point("n", n as f64, &fleet, seed, MAX_EVENTS)
            })
            .collect::<Result<_, _>>()?
    } else {
        let raw = factor.expect("clap requires an axis");
        let (lo, hi) = parse_range::<f64>(raw)
            .filter(|&(lo, hi)| lo > 0.0 && lo <= hi)
            .ok_or_else(|| anyhow!(Usage(format!("--factor expects A..B with 0 < A <= B, got {raw:?}"))))?;
        if steps == 0 {
            bail!(Usage("--steps must be positive".into()));
        }
        let factors = geometric_factors(lo, hi, if lo == hi { 1 } else { steps })?;
        let targets: Vec<FactorTarget> = match target {
            Target::Radius => vec![FactorTarget::Radius],
            Target::Speed => vec![FactorTarget::Speed],
            Target::Both => vec![FactorTarget::Both],
            Target::All => FactorTarget::ALL.to_vec(),
        };
        let points: Vec<(FactorTarget, f64)> = targets
            .iter()
            .flat_map(|&t| factors.iter().map(move |&f| (t, f)))
            .collect();
        points
            .into_par_iter()
            .map(|(t, f)| sweep_point(t.as_str(), f, &factor_fleet(t, f)?, seed, MAX_EVENTS))
            .collect::<Result<_, _>>()?
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join("sweep.csv");
    fs::write(&path, rows_to_csv(&rows))?;
    println!("{} rows -> {}", rows.len(), path.display());
    Ok(())
}
