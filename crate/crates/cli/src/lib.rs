//! Command-line workbench over the `hopf-dde` analysis library: parses run
//! configurations, runs the analysis stages (optionally as a parallel
//! sweep) and writes CSV, JSON and SVG reports.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::result_large_err)]

pub mod config;
pub mod emit;
pub mod pipeline;
pub mod report;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{parse_config, Command, ConfigError, Formats, RunConfig};
pub use emit::emit_outputs;
pub use pipeline::run_pipeline;
pub use report::Report;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const MATH: i32 = 3;
    pub const IO: i32 = 4;
}

pub const WORKERS_ENV: &str = "HOPF_DDE_WORKERS";

/// Machine-readable error block written to stderr on failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub kind: &'static str,
    pub module: String,
    pub operation: String,
    pub stage: Option<String>,
    pub message: String,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub diagnostic: Diagnostic,
}

impl Failure {
    fn config(operation: &str, message: String, violations: Vec<String>) -> Self {
        Self {
            code: exit::CONFIG,
            diagnostic: Diagnostic {
                kind: "config",
                module: "cli".into(),
                operation: operation.into(),
                stage: None,
                message,
                violations,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.diagnostic }).to_string()
    }
}

/// `--workers` wins over the environment; `None` means one per core.
pub fn resolve_workers(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>, Failure> {
    if let Some(n) = flag {
        return if n == 0 {
            Err(Failure::config("workers", "--workers must be at least 1".into(), vec![]))
        } else {
            Ok(Some(n))
        };
    }
    match env.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::config(
                "workers",
                format!("{WORKERS_ENV}='{v}' is not a positive integer"),
                vec![],
            )),
        },
    }
}

/// Everything the binary does after argument parsing.
pub struct Invocation<'a> {
    pub command: Command,
    pub config: &'a Path,
    pub out: Option<PathBuf>,
    pub formats: Option<Formats>,
    pub workers: Option<usize>,
}

pub fn execute(inv: &Invocation<'_>) -> Result<(Report, Vec<PathBuf>), Failure> {
    let text = std::fs::read_to_string(inv.config).map_err(|e| {
        Failure::config(
            "read_config",
            format!("{}: {e}", inv.config.display()),
            vec![],
        )
    })?;
    let mut cfg = parse_config(&text, Some(inv.command))
        .map_err(|e| Failure::config("parse_config", e.to_string(), e.messages()))?;
    if let Some(dir) = &inv.out {
        cfg.output_dir = dir.clone();
    }
    if let Some(f) = inv.formats {
        cfg.formats = f;
    }

    let report = run_pipeline(&cfg, inv.workers);
    if cfg.command != Command::Sweep {
        if let Some(e) = report.first_error() {
            return Err(Failure {
                code: exit::MATH,
                diagnostic: Diagnostic {
                    kind: "math",
                    module: e.module.clone(),
                    operation: e.operation.clone(),
                    stage: Some(e.stage.clone()),
                    message: e.message.clone(),
                    violations: vec![],
                },
            });
        }
    }
    let written = emit_outputs(&report, cfg.formats, &cfg.output_dir).map_err(|e| Failure {
        code: exit::IO,
        diagnostic: Diagnostic {
            kind: "io",
            module: "cli".into(),
            operation: "emit_outputs".into(),
            stage: None,
            message: e.to_string(),
            violations: vec![],
        },
    })?;
    Ok((report, written))
}
