use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use sattask::access::find_opportunities;
use sattask::evaluation::EvaluationReport;
use sattask::pipeline::{self, Manifest};
use sattask::scenario::{PlannerKind, Scenario, TargetSource};
use sattask::Error;

/// Output root used when `--out-dir` is not given.
const OUTPUT_ROOT_ENV: &str = "SATTASK_OUTPUT_ROOT";

const EXIT_CONFIG: u8 = 2;
const EXIT_STAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "sattask", version, about = "Earth-observation tasking under orbit uncertainty")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON; built-in defaults when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,

    /// Output directory (default: $SATTASK_OUTPUT_ROOT/<name> or output/<name>).
    #[arg(long)]
    out_dir: Option<PathBuf>,

    /// Comma-separated subset of graph, mdp, milp.
    #[arg(long)]
    planners: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write targets.json.
    Targets {
        #[command(flatten)]
        common: Common,
        /// Generate this many random targets instead of the scenario's source.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, requires = "count")]
        seed: Option<u64>,
    },
    /// Propagate the nominal orbit.
    Propagate {
        #[command(flatten)]
        common: Common,
    },
    /// Imaging windows and collects from targets.json and the nominal trajectory.
    Windows {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo window statistics and collect probabilities.
    McStats {
        #[command(flatten)]
        common: Common,
    },
    /// Run the planners on collects.csv.
    Plan {
        #[command(flatten)]
        common: Common,
    },
    /// Score plans against sampled true trajectories.
    Evaluate {
        #[command(flatten)]
        common: Common,
    },
    /// Full pipeline from a scenario or a previous run's manifest.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "scenario")]
        manifest: Option<PathBuf>,
    },
}

enum Failure {
    Config(anyhow::Error),
    Stage(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.into()),
            other => Failure::Stage(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::Config(_)) => Failure::Config(e),
            _ => Failure::Stage(e),
        }
    }
}

struct Workdir {
    scenario: Scenario,
    dir: PathBuf,
}

fn load_scenario(common: &Common, manifest: Option<&Path>) -> Result<Scenario, Failure> {
    let mut scenario = match (manifest, &common.scenario) {
        (Some(m), _) => Manifest::read(m)?.scenario,
        (None, Some(path)) => Scenario::load(path)?,
        (None, None) => Scenario::default(),
    };
    if let Some(list) = &common.planners {
        scenario.planners.enabled = PlannerKind::parse_list(list)?;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn prepare(common: &Common, scenario: Scenario) -> Result<Workdir, Failure> {
    let dir = match &common.out_dir {
        Some(d) => d.clone(),
        None => {
            let root = std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| "output".into());
            pipeline::default_output_dir(&root, &scenario)
        }
    };
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::Stage)?;
    Ok(Workdir { scenario, dir })
}

fn stage<T>(name: &str, r: sattask::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Config(_) => Failure::Config(e.into()),
        e => Failure::Stage(anyhow::Error::new(e).context(format!("stage {name} failed"))),
    })
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Targets { common, count, seed } => {
            let mut scenario = load_scenario(&common, None)?;
            if let Some(count) = count {
                scenario.targets = TargetSource::Generate {
                    count,
                    seed: seed.unwrap_or(1),
                };
                scenario.validate()?;
            }
            let ctx = prepare(&common, scenario)?;
            let targets = stage("targets", pipeline::stage_targets(&ctx.scenario, &ctx.dir))?;
            println!("{} targets -> {}", targets.len(), ctx.dir.join(pipeline::TARGETS_FILE).display());
        }
        Command::Propagate { common } => {
            let ctx = prepare(&common, load_scenario(&common, None)?)?;
            let traj = stage("propagate", pipeline::stage_propagate(&ctx.scenario, &ctx.dir))?;
            println!("{} states -> {}", traj.len(), ctx.dir.join(pipeline::TRAJECTORY_FILE).display());
        }
        Command::Windows { common } => {
            let ctx = prepare(&common, load_scenario(&common, None)?)?;
            let (windows, collects) = stage("windows", (|| {
                let targets = pipeline::load_targets_from(&ctx.dir)?;
                let traj = pipeline::load_trajectory(&ctx.scenario, &ctx.dir)?;
                pipeline::stage_windows(&ctx.dir, &targets, &traj)
            })())?;
            let n: usize = windows.iter().map(Vec::len).sum();
            println!("{n} windows, {} collects", collects.len());
        }
        Command::McStats { common } => {
            let ctx = prepare(&common, load_scenario(&common, None)?)?;
            let probs = stage("mc-stats", (|| {
                let targets = pipeline::load_targets_from(&ctx.dir)?;
                let traj = pipeline::load_trajectory(&ctx.scenario, &ctx.dir)?;
                let collects = pipeline::load_collects(&ctx.dir)?;
                let nominal = find_opportunities(&traj, &targets);
                pipeline::stage_uncertainty(&ctx.scenario, &ctx.dir, &targets, nominal, &collects)
            })())?;
            println!("{} collect probabilities", probs.probabilities.len());
        }
        Command::Plan { common } => {
            let ctx = prepare(&common, load_scenario(&common, None)?)?;
            let plans = stage("plan", (|| {
                let targets = pipeline::load_targets_from(&ctx.dir)?;
                let collects = pipeline::load_collects(&ctx.dir)?;
                let probs = pipeline::load_probabilities(&ctx.dir)?;
                pipeline::stage_plan(&ctx.scenario, &ctx.dir, &targets, &collects, &probs)
            })())?;
            for p in plans {
                println!("{:<6} nominal {:>8.1}  runtime {:.3} s", p.planner, p.nominal_reward, p.runtime_s);
            }
        }
        Command::Evaluate { common } => {
            let ctx = prepare(&common, load_scenario(&common, None)?)?;
            let reports = stage("evaluate", (|| {
                let targets = pipeline::load_targets_from(&ctx.dir)?;
                let plans = pipeline::load_plans(&ctx.scenario, &ctx.dir)?;
                pipeline::stage_evaluate(&ctx.scenario, &ctx.dir, &targets, &plans)
            })())?;
            print_reports(&reports);
        }
        Command::Run { common, manifest } => {
            let ctx = prepare(&common, load_scenario(&common, manifest.as_deref())?)?;
            match pipeline::run_pipeline(&ctx.scenario, &ctx.dir) {
                Ok(m) => {
                    let reports: Vec<EvaluationReport> = std::fs::read(ctx.dir.join(pipeline::EVALUATION_JSON_FILE))
                        .map_err(anyhow::Error::from)
                        .and_then(|b| Ok(serde_json::from_slice(&b)?))
                        .map_err(Failure::Stage)?;
                    print_reports(&reports);
                    println!("run {} -> {}", m.config_sha256, ctx.dir.display());
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(())
}

fn print_reports(reports: &[EvaluationReport]) {
    println!("{:<8}{:>12}{:>12}{:>12}{:>12}", "approach", "runtime_s", "nominal", "mean", "stdev");
    for r in reports {
        println!(
            "{:<8}{:>12.3}{:>12.1}{:>12.2}{:>12.2}",
            r.planner, r.runtime_s, r.nominal_reward, r.mean_reward, r.stdev_reward
        );
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_STAGE)
        }
    }
}
