//! Command-line front end: `run`, `validate` and `report`.
//!
//! Exit codes: 0 pass, 1 check failure or solver error, 2 config or invocation error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use transport_hjb::campaign::{parse_config, render_report, run_campaign, RunConfig, MANIFEST};
use transport_hjb::Error;

#[derive(Parser)]
#[command(name = "hjb-sim", version, about = "Stochastic HJB simulation campaigns on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the campaign described by a config file.
    Run(Common),
    /// Check a config file and print its hash.
    Validate(Common),
    /// Re-render summary.md from an existing artifact tree.
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Replaces the seed list (or the first seed of an ensemble).
    #[arg(long)]
    seed: Option<u64>,
    /// Output root; the run writes to `<out>/<config hash>/`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Artifact directory, or the output root when `--config` is given.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

const CONFIG_ERROR: u8 = 2;

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig, ExitCode> {
    let mut cfg = parse_config(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        ExitCode::from(CONFIG_ERROR)
    })?;
    if let Some(s) = seed {
        cfg.override_seed(s);
    }
    Ok(cfg)
}

fn run(args: Common) -> ExitCode {
    let cfg = match load(&args.config, args.seed) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if args.workers == Some(0) {
        eprintln!("--workers must be at least 1");
        return ExitCode::from(CONFIG_ERROR);
    }
    let root = args.out.unwrap_or_else(|| cfg.output_dir.clone());
    match run_campaign(&cfg, &root, args.workers) {
        Ok(outcome) => {
            println!("{} {:?}: {}", cfg.campaign.name(), outcome.status, outcome.dir.display());
            for (k, v) in &outcome.summary {
                println!("  {k} = {v}");
            }
            if let Some(e) = &outcome.error {
                eprintln!("error: {e}");
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!("see {}", outcome.report.display());
                ExitCode::from(1)
            }
        }
        Err(e @ (Error::Config(_) | Error::MixedOutput { .. })) => {
            eprintln!("{e}");
            ExitCode::from(CONFIG_ERROR)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}

fn validate(args: Common) -> ExitCode {
    match load(&args.config, args.seed) {
        Ok(cfg) => {
            let seeds = cfg.seed_list();
            println!("valid {} config, {} seed(s), hash {}", cfg.campaign.name(), seeds.len(), cfg.hash());
            ExitCode::SUCCESS
        }
        Err(code) => code,
    }
}

fn report(args: ReportArgs) -> ExitCode {
    let dir = match &args.config {
        Some(path) => match load(path, args.seed) {
            Ok(cfg) => args.out.join(cfg.hash()),
            Err(code) => return code,
        },
        None => args.out.clone(),
    };
    if !dir.join(MANIFEST).exists() {
        eprintln!("{} is not an artifact directory (no {MANIFEST})", dir.display());
        return ExitCode::from(CONFIG_ERROR);
    }
    match render_report(&dir) {
        Ok(r) => {
            println!("{} ({}): {}", r.path.display(), r.hash, r.status);
            if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Validate(a) => validate(a),
        Command::Report(a) => report(a),
    }
}
