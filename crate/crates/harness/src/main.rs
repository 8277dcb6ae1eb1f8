use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use femtonet::Exec;
use femtonet_harness::config::{parse_seeds, ExperimentConfig};
use femtonet_harness::{apply_budget, oracle, run, write_outcome, HarnessError};

#[derive(Parser)]
#[command(name = "femtonet", version, about = "Femtocell multicast and video-streaming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multicast power scenario
    Multicast(Common),
    /// Run a video streaming scenario
    Stream(Common),
    /// Compare solvers against exhaustive and closed-form oracles
    OracleCheck(Common),
    /// Run the config's sweep, whatever the scenario
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: PathBuf,
    /// Seed range `a..b` (half-open); overrides the config
    #[arg(long)]
    seeds: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dual iterations per slot
    #[arg(long)]
    budget: Option<usize>,
    /// Run on one thread
    #[arg(long)]
    sequential: bool,
}

fn load(args: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(s) = &args.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(b) = args.budget {
        apply_budget(&mut cfg, b)?;
    }
    Ok(cfg)
}

fn out_dir(args: &Common, cfg: &ExperimentConfig) -> PathBuf {
    args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| Path::new("out").join(cfg.scenario.name()))
}

fn exec(args: &Common) -> Exec {
    if args.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn experiment(args: &Common, want_multicast: Option<bool>, need_sweep: bool) -> Result<ExitCode, HarnessError> {
    let cfg = load(args)?;
    if let Some(m) = want_multicast {
        if cfg.scenario.is_multicast() != m {
            return Err(HarnessError::config(format!(
                "scenario {} does not belong to this subcommand",
                cfg.scenario.name()
            )));
        }
    }
    if need_sweep && cfg.sweep.is_none() {
        return Err(HarnessError::config("config has no sweep"));
    }
    let outcome = run(&cfg, exec(args))?;
    let dir = out_dir(args, &cfg);
    write_outcome(&dir, &cfg, &outcome)?;
    println!("{} rows written to {}", outcome.rows.len(), dir.display());
    Ok(ExitCode::SUCCESS)
}

fn oracle_check(args: &Common) -> Result<ExitCode, HarnessError> {
    let cfg = load(args)?;
    let checks = oracle::oracle_check(&cfg, exec(args))?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        if !c.passed {
            println!("FAIL {}: {}", c.name, c.detail);
        }
    }
    println!("{} checks, {failed} failed", checks.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Multicast(a) => experiment(a, Some(true), false),
        Command::Stream(a) => experiment(a, Some(false), false),
        Command::Sweep(a) => experiment(a, None, true),
        Command::OracleCheck(a) => oracle_check(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
