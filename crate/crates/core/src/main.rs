use std::path::PathBuf;
use std::process::ExitCode;

use burstkin::cli::{run_experiment, run_sweep, ExperimentConfig, Mode, RunError, SweepSpec};
use burstkin::par::Exec;
use clap::Parser;

/// Bursting gene-expression experiments: stationary laws, transients,
/// simulation, transition operators, rate inversion, modes, ergodicity.
#[derive(Debug, Parser)]
#[command(name = "burstkin", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    mode: Mode,
    /// Config file with `section.key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `numeric.seed` (simulation modes only).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep one key, e.g. `burst.b=0.1:0.9:9`.
    #[arg(long)]
    sweep: Option<String>,
    /// Run the inner loops sequentially.
    #[arg(long)]
    sequential: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    init_threads();
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("burstkin: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

// BURSTKIN_THREADS sizes the global pool; unset means one thread per core.
fn init_threads() {
    #[cfg(feature = "parallel")]
    if let Some(n) = std::env::var("BURSTKIN_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn run(args: &Args) -> Result<u8, RunError> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = ExperimentConfig::parse_for(&text, args.mode)?;
    if let Some(seed) = args.seed {
        cfg.set("numeric.seed", &seed.to_string())?;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.text("output.dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("burstkin-out"));
    let exec = if args.sequential { Exec::Sequential } else { Exec::Parallel };
    match &args.sweep {
        None => {
            let summary = run_experiment(&cfg, &out, exec)?;
            println!(
                "{} finished in {:.3}s, wrote {} to {}",
                summary.mode,
                summary.wall_time_s,
                summary.files.join(", "),
                out.display()
            );
            for (k, v) in &summary.scalars {
                println!("  {k} = {v:e}");
            }
            Ok(0)
        }
        Some(spec) => {
            let spec: SweepSpec = spec.parse()?;
            let points = run_sweep(&cfg, &spec, &out, exec)?;
            let mut worst = 0;
            for p in &points {
                if let Some(e) = &p.error {
                    eprintln!("point {} ({} = {}): {e}", p.index, spec.key, p.value);
                }
                worst = worst.max(p.status);
            }
            println!("{} sweep points written to {}", points.len(), out.join("sweep.csv").display());
            Ok(worst as u8)
        }
    }
}
