use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hopf_dde_cli::{execute, exit, resolve_workers, Command, Formats, Invocation, WORKERS_ENV};

/// Stability and Hopf bifurcation workbench for the delayed p53-Mdm2 model.
#[derive(Debug, Parser)]
#[command(name = "hopf-dde", version)]
struct Args {
    /// equilibrium | stability | hopf | normal-form | simulate | sweep | report
    command: String,
    /// Path to the key = value run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv,json,svg (overrides output.formats).
    #[arg(long)]
    format: Option<String>,
    /// Worker threads for sweeps; falls back to HOPF_DDE_WORKERS, then the core count.
    #[arg(long)]
    workers: Option<usize>,
}

fn fail(code: i32, kind: &str, message: String) -> ExitCode {
    let block = serde_json::json!({ "error": {
        "kind": kind, "module": "cli", "operation": "arguments",
        "stage": null, "message": message, "violations": [] } });
    eprintln!("{block}");
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(exit::CONFIG, "config", e.to_string()),
    };
    let command: Command = match args.command.parse() {
        Ok(c) => c,
        Err(msg) => return fail(exit::CONFIG, "config", msg),
    };
    let formats = match args.format.as_deref().map(Formats::parse).transpose() {
        Ok(f) => f,
        Err(msg) => return fail(exit::CONFIG, "config", msg),
    };
    let env = std::env::var(WORKERS_ENV).ok();
    let workers = match resolve_workers(args.workers, env.as_deref()) {
        Ok(w) => w,
        Err(f) => {
            eprintln!("{}", f.to_json());
            return ExitCode::from(f.code as u8);
        }
    };

    let inv = Invocation {
        command,
        config: &args.config,
        out: args.out,
        formats,
        workers,
    };
    match execute(&inv) {
        Ok((_, written)) => {
            for p in written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code as u8)
        }
    }
}
