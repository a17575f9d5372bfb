//! `timechange`: runs the registered experiments and evaluates closed forms.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use timechange_core::config::ExperimentConfig;
use timechange_core::experiments::{self, Report, EXPERIMENTS};
use timechange_core::formulas;
use timechange_core::Error;

const CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "timechange", version, about = "Lifetimes of time-changed processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a registered experiment.
    Run(RunArgs),
    /// List the registered experiments.
    List,
    /// Evaluate a closed form, e.g. `formula rho_threshold alpha=0.6 d=1`.
    Formula {
        name: Option<String>,
        /// key=value arguments.
        args: Vec<String>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    experiment: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    confidence: Option<f64>,
    /// Exit with status 3 if any check fails.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config file; flags and --set override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print parameters and CSV columns instead of running.
    #[arg(long)]
    describe: bool,
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(&args.experiment, path)?,
        None => ExperimentConfig::new(&args.experiment)?,
    };
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if let Some(v) = args.dt {
        cfg.dt = v;
    }
    if let Some(v) = args.threads {
        cfg.threads = Some(v);
    }
    if let Some(v) = args.confidence {
        cfg.confidence = v;
    }
    if let Some(v) = &args.out {
        cfg.output_dir = v.clone();
    }
    for pair in &args.set {
        cfg.set_pair(pair)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_checks(report: &Report) {
    for c in &report.checks {
        println!(
            "{} {}: measured {} target {} tolerance {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.target,
            c.tolerance
        );
    }
}

fn run(args: &RunArgs) -> Result<u8, Error> {
    if args.describe {
        print!("{}", experiments::describe(experiments::find(&args.experiment)?));
        return Ok(0);
    }
    let cfg = build_config(args)?;
    let report = experiments::run(&cfg)?;
    println!("wrote {}", report.csv_path.display());
    println!("wrote {}", report.summary_path.display());
    if args.check {
        print_checks(&report);
        let failed = report.failed_checks().len();
        if failed > 0 {
            eprintln!("{failed} of {} checks failed", report.checks.len());
            return Ok(CHECK_FAILED);
        }
    }
    Ok(0)
}

fn formula(name: Option<&str>, args: &[String]) -> Result<u8, Error> {
    let Some(name) = name else {
        for (n, keys) in formulas::CLOSED_FORMS {
            println!("{n} {}", keys.join(" "));
        }
        return Ok(0);
    };
    let mut params = BTreeMap::new();
    for a in args {
        let (k, v) = a.split_once('=').ok_or_else(|| Error::Config(format!("expected key=value, got '{a}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("cannot parse {k} = '{v}'")))?;
        params.insert(k.trim().to_string(), v);
    }
    let cf = formulas::closed_form(name, &params)?;
    println!("{}", serde_json::to_string(&cf)?);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::List => {
            for e in EXPERIMENTS {
                println!("{:<24} {}", e.name, e.about);
            }
            Ok(0)
        }
        Command::Formula { name, args } => formula(name.as_deref(), args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
