use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use simpose::{run, JobConfig, Status, Task};

/// Find and trace simplices inscribed in embedded spheres.
#[derive(Debug, Parser)]
#[command(name = "simpose", version)]
struct Args {
    /// JSON job description.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare analytic and finite-difference Jacobians at every solve.
    #[arg(long)]
    check_jacobian: bool,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match JobConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("simpose: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output.dir = out;
    }
    if args.check_jacobian {
        cfg.solver.newton.check_jacobian = true;
    }
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("simpose: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let report = &outcome.report;
    if !args.quiet {
        if report.task == Task::Cm {
            println!("{}", serde_json::to_string_pretty(&report.result).unwrap_or_default());
        }
        for f in &outcome.files {
            println!("wrote {}", f.display());
        }
    }
    if let Some(hint) = &report.hint {
        eprintln!("hint: {hint}");
    }
    match report.status {
        Status::Ok => ExitCode::SUCCESS,
        Status::Failed => {
            eprintln!("simpose: {}", report.error.as_deref().unwrap_or("solver failure"));
            ExitCode::from(1)
        }
    }
}
