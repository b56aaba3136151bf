use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kg_reduce::app::{emit, run, ErrorRecord};
use kg_reduce::config::{Mode, OmegaSpec, RunConfig};
use kg_reduce::Error;

/// Reduce a quasi-periodically forced Klein-Gordon operator to constant
/// coefficients and check the result.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    /// JSON run configuration; defaults describe the built-in reference instance.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, default_value = "kg-reduce-out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated frequency vector, overrides the config.
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    verbose: bool,
}

fn fail(e: &Error) -> ExitCode {
    let rec = ErrorRecord::from_error(e);
    eprintln!("{}", serde_json::to_string(&rec).unwrap());
    ExitCode::from(rec.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("KG_REDUCE_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => return fail(&Error::InvalidParameter(format!("KG_REDUCE_THREADS={n} is not a positive integer"))),
        }
    }
    let mut cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        },
        None => RunConfig::default(),
    };
    if let Some(m) = cli.mode {
        cfg.mode = m;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(g) = cli.gamma {
        cfg.gamma = g;
    }
    if let Some(w) = &cli.omega {
        let parsed: Result<Vec<f64>, _> = w.split(',').map(|t| t.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => cfg.omega = OmegaSpec::List(vec![v]),
            Err(e) => return fail(&Error::InvalidParameter(format!("--omega: {e}"))),
        }
    }
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    if cli.verbose {
        for w in &out.report.warnings {
            eprintln!("warning: {w}");
        }
        for f in &out.report.frequencies {
            let eps = f.pipeline.as_ref().and_then(|p| p.eps_sequence.last().copied());
            eprintln!("omega[{}] = {:?}: final eps {:?}, errors {:?}", f.index, f.omega, eps, f.errors);
        }
    }
    match emit(&out, &cli.out) {
        Ok(paths) => {
            if cli.verbose {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({"error": "io", "message": e.to_string(), "index": null}));
            return ExitCode::from(1);
        }
    }
    if out.report.failed() {
        for f in out.report.frequencies.iter().filter(|f| !f.errors.is_empty()) {
            let rec = serde_json::json!({"error": "stage_failure", "message": f.errors.join("; "), "index": f.index});
            eprintln!("{rec}");
        }
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
