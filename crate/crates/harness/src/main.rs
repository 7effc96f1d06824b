use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpme_harness::{emit_report, run, Cache, ExperimentConfig, Format, Mode, Overrides, Runtime};

#[derive(Parser)]
#[command(name = "fpme", version, about = "Long-jump exclusion process experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Particle ensembles against the continuum solution.
    Hydro(Common),
    /// Stationarity, reversibility, Dirichlet form and thinning on small rings.
    Invariance(Common),
    /// Discrete operator convergence and extra-term decay.
    Operators(Common),
    /// Continuum solver refinement studies.
    Pde(Common),
    /// Exhaustive integer audits of the rate factors.
    RatesAudit(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Md,
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    m: Option<u32>,
    /// Scaling parameter; repeat for several values.
    #[arg(long = "n")]
    n: Vec<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the report.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Recompute every stage and store nothing.
    #[arg(long)]
    no_cache: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Hydro(a) => (Mode::Hydro, a),
        Command::Invariance(a) => (Mode::Invariance, a),
        Command::Operators(a) => (Mode::Operators, a),
        Command::Pde(a) => (Mode::Pde, a),
        Command::RatesAudit(a) => (Mode::RatesAudit, a),
    };
    match execute(mode, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(mode: Mode, args: Common) -> fpme_harness::Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::for_mode(mode),
    };
    cfg.apply(&Overrides {
        mode: Some(mode),
        gamma: args.gamma,
        m: args.m,
        n: args.n,
        seed: args.seed,
        out: args.out,
    });
    cfg.validate()?;
    let cache = if args.no_cache {
        Cache::disabled()
    } else {
        Cache::from_env(cfg.output_dir.join("cache"))
    };
    let rt = Runtime::new(args.jobs, cache)?;
    let report = run(&cfg, &rt)?;
    let format = match args.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
        FormatArg::Md => Format::Md,
    };
    let path = emit_report(&report, format, &cfg.output_dir)?;
    let passed = report.checks.iter().filter(|c| c.passed).count();
    eprintln!(
        "{}: {passed}/{} checks passed in {:.1} s, report at {}",
        mode.name(),
        report.checks.len(),
        report.wall_time.0.unwrap_or(0.0),
        path.display()
    );
    for c in report.failed() {
        eprintln!("FAIL {}: {} = {:?}", c.name, c.detail, c.value);
    }
    Ok(report.all_passed())
}
