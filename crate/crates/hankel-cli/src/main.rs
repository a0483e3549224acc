//! `hankel-sign`: run one analysis described by a JSON config file.
//!
//! Exit status: 0 on success, 1 for an invalid config, 2 for a numeric failure.
//! Failures print a diagnostic JSON object on stderr; numeric failures also leave
//! it as `diagnostic.json` in the output directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hankel_sign::run::{run, Format, RunConfig};
use hankel_sign::Error;

#[derive(Debug, Parser)]
#[command(name = "hankel-sign", version, about = "Sign-definiteness analysis of Hankel operators")]
struct Args {
    /// JSON run config.
    config: PathBuf,
    /// Override `basis_size`.
    #[arg(long)]
    basis_size: Option<usize>,
    /// Override `tol_rel`.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the output format (csv or json).
    #[arg(long)]
    format: Option<String>,
}

fn load(args: &Args) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = RunConfig::from_json(&text)?;
    if let Some(n) = args.basis_size {
        config.basis_size = n;
    }
    if let Some(t) = args.tol {
        config.tol_rel = t;
    }
    if let Some(o) = &args.out {
        config.output.path = o.clone();
    }
    if let Some(f) = &args.format {
        config.output.format = f.parse::<Format>()?;
    }
    config.validate()?;
    Ok(config)
}

fn diagnostic(e: &Error, stage: &str) -> String {
    serde_json::json!({ "status": "error", "stage": stage, "kind": e.kind(), "message": e.to_string() }).to_string()
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", diagnostic(&e, "config"));
            return ExitCode::from(1);
        }
    };
    match run(&config) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string(&outcome).expect("outcome serialises"));
            ExitCode::SUCCESS
        }
        Err(e) if e.is_input_error() => {
            eprintln!("{}", diagnostic(&e, "config"));
            ExitCode::from(1)
        }
        Err(e) => {
            let d = diagnostic(&e, "run");
            eprintln!("{d}");
            let _ = std::fs::create_dir_all(&config.output.path);
            let _ = std::fs::write(config.output.path.join("diagnostic.json"), format!("{d}\n"));
            ExitCode::from(2)
        }
    }
}
