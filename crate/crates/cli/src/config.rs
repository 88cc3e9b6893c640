//! Line-oriented `key = value` run configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! command = normal-form
//! model.k = 17.5
//! model.tau = 60
//! sim.tau_factor = 1.05
//! sweep.variable = tau
//! sweep.from = 0.9
//! sweep.to = 1.05
//! sweep.steps = 2
//! sweep.relative = true
//! output.dir = out
//! output.formats = csv,json,svg
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hopf_dde::ModelParams;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Equilibrium,
    Stability,
    Hopf,
    NormalForm,
    Simulate,
    Sweep,
    Report,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Equilibrium,
        Command::Stability,
        Command::Hopf,
        Command::NormalForm,
        Command::Simulate,
        Command::Sweep,
        Command::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::Stability => "stability",
            Command::Hopf => "hopf",
            Command::NormalForm => "normal-form",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Report => "report",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Command::ALL.iter().map(|c| c.as_str()).collect();
                format!("unknown command '{s}' (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    K,
    Tau,
}

/// Delay used for one case, possibly relative to that case's first
/// critical delay `tau0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum TauChoice {
    Absolute(f64),
    /// `factor * tau0`.
    Factor(f64),
    /// `tau0 + mu`.
    Offset(f64),
}

impl TauChoice {
    pub fn needs_tau0(&self) -> bool {
        !matches!(self, TauChoice::Absolute(_))
    }

    pub fn resolve(&self, tau0: Option<f64>) -> Option<f64> {
        match *self {
            TauChoice::Absolute(t) => Some(t),
            TauChoice::Factor(f) => tau0.map(|t| f * t),
            TauChoice::Offset(mu) => tau0.map(|t| t + mu),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    /// For `tau` sweeps: values are multiples of each case's `tau0`.
    pub relative: bool,
    pub simulate: bool,
}

impl SweepSpec {
    /// Log-spaced for `k`, linear for `tau`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                match self.variable {
                    SweepVariable::K => (self.from.ln() + u * (self.to.ln() - self.from.ln())).exp(),
                    SweepVariable::Tau => self.from + u * (self.to - self.from),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSpec {
    /// Delay override; `None` uses the case's model delay.
    pub tau: Option<TauChoice>,
    pub steps_per_delay: usize,
    pub t_end: Option<f64>,
    /// Simulation length in predicted periods when `t_end` is not given.
    pub periods: f64,
    pub perturbation: [f64; 2],
    pub transient: f64,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            tau: None,
            steps_per_delay: 128,
            t_end: None,
            periods: 40.0,
            perturbation: [0.1, 0.0],
            transient: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Formats {
    pub const ALL: Formats = Formats {
        csv: true,
        json: true,
        svg: true,
    };

    pub fn parse(list: &str) -> Result<Self, String> {
        let mut f = Formats::default();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => return Err(format!("unknown format '{other}' (expected csv, json, svg)")),
            }
        }
        if f == Formats::default() {
            return Err("format list is empty".into());
        }
        Ok(f)
    }
}

/// One parameter set of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseSpec {
    pub index: usize,
    pub params: ModelParams,
    /// Delay for the analysis stages; relative choices resolve against `tau0`.
    pub tau: TauChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Base parameters. `k` or `tau` may be `NaN` when the sweep supplies them.
    pub params: ModelParams,
    pub sweep: Option<SweepSpec>,
    pub sim: Option<SimSpec>,
    pub output_dir: PathBuf,
    pub formats: Formats,
}

impl RunConfig {
    pub fn cases(&self) -> Vec<CaseSpec> {
        let base = |index, params: ModelParams, tau| CaseSpec { index, params, tau };
        match &self.sweep {
            None => vec![base(0, self.params, TauChoice::Absolute(self.params.tau))],
            Some(sw) => sw
                .values()
                .into_iter()
                .enumerate()
                .map(|(i, v)| match sw.variable {
                    SweepVariable::K => {
                        base(i, self.params.with_k(v), TauChoice::Absolute(self.params.tau))
                    }
                    SweepVariable::Tau if sw.relative => {
                        base(i, self.params, TauChoice::Factor(v))
                    }
                    SweepVariable::Tau => {
                        base(i, self.params.with_tau(v), TauChoice::Absolute(v))
                    }
                })
                .collect(),
        }
    }

    pub fn simulates(&self) -> bool {
        match self.command {
            Command::Simulate => true,
            Command::Report => self.sim.is_some(),
            Command::Sweep => self.sweep.as_ref().is_some_and(|s| s.simulate) || self.sim.is_some(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("invalid configuration: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl ConfigError {
    pub fn messages(&self) -> Vec<String> {
        match self {
            ConfigError::Parse { line, detail } => vec![format!("line {line}: {detail}")],
            ConfigError::Invalid(v) => v.clone(),
        }
    }
}

const KEYS: &[&str] = &[
    "command",
    "model.s",
    "model.a",
    "model.b",
    "model.c",
    "model.d",
    "model.k",
    "model.k1",
    "model.tau",
    "sim.tau",
    "sim.tau_factor",
    "sim.mu",
    "sim.h",
    "sim.steps_per_delay",
    "sim.t_end",
    "sim.periods",
    "sim.perturbation",
    "sim.transient",
    "sweep.variable",
    "sweep.from",
    "sweep.to",
    "sweep.steps",
    "sweep.relative",
    "sweep.simulate",
    "output.dir",
    "output.formats",
];

struct Entry {
    line: usize,
    value: String,
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Entry>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            detail: format!("expected 'key = value', found '{content}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::Parse {
                line,
                detail: format!("unknown key '{key}'"),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                detail: format!("missing value for '{key}'"),
            });
        }
        if let Some(prev) = map.get(key) {
            let Entry { line: first, .. } = prev;
            return Err(ConfigError::Parse {
                line,
                detail: format!("duplicate key '{key}' (first set on line {first})"),
            });
        }
        map.insert(
            key.to_string(),
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    Ok(map)
}

struct Reader {
    map: BTreeMap<String, Entry>,
}

impl Reader {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.map.get(key)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| ConfigError::Parse {
                line: e.line,
                detail: format!("cannot parse '{}' for '{key}'", e.value),
            }),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v: Option<f64> = self.parse(key)?;
        match (v, self.raw(key)) {
            (Some(x), Some(e)) if !x.is_finite() => Err(ConfigError::Parse {
                line: e.line,
                detail: format!("'{key}' must be finite"),
            }),
            _ => Ok(v),
        }
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.map.keys().any(|k| k.starts_with(prefix))
    }
}

/// Parses a configuration document. `command` overrides the document's
/// `command` key when given.
pub fn parse_config(text: &str, command: Option<Command>) -> Result<RunConfig, ConfigError> {
    let r = Reader { map: tokenize(text)? };
    let mut problems = Vec::new();

    let command = match (command, r.raw("command")) {
        (Some(c), _) => c,
        (None, Some(e)) => e.value.parse().map_err(|detail| ConfigError::Parse {
            line: e.line,
            detail,
        })?,
        (None, None) => {
            problems.push("command: not given on the command line or in the file".into());
            Command::Report
        }
    };

    let sweep = if r.has_prefix("sweep.") || command == Command::Sweep {
        let variable = match r.raw("sweep.variable").map(|e| (e.line, e.value.as_str())) {
            Some((_, "k")) => Some(SweepVariable::K),
            Some((_, "tau")) => Some(SweepVariable::Tau),
            Some((line, other)) => {
                return Err(ConfigError::Parse {
                    line,
                    detail: format!("sweep.variable must be 'k' or 'tau', found '{other}'"),
                })
            }
            None => {
                problems.push("sweep.variable: required for a sweep".into());
                None
            }
        };
        let from = r.number("sweep.from")?;
        let to = r.number("sweep.to")?;
        let steps: Option<usize> = r.parse("sweep.steps")?;
        let relative = r.parse("sweep.relative")?.unwrap_or(false);
        let simulate = r.parse("sweep.simulate")?.unwrap_or(false);
        if from.is_none() {
            problems.push("sweep.from: required for a sweep".into());
        }
        if to.is_none() {
            problems.push("sweep.to: required for a sweep".into());
        }
        if let (Some(a), Some(b)) = (from, to) {
            if !(a < b) {
                problems.push(format!("sweep.from ({a}) must be less than sweep.to ({b})"));
            }
            if variable == Some(SweepVariable::K) && !(a > 0.0) {
                problems.push(format!("sweep.from ({a}) must be positive for a log-spaced k sweep"));
            }
            if variable == Some(SweepVariable::Tau) && !(a > 0.0) {
                problems.push(format!("sweep.from ({a}) must be positive for a tau sweep"));
            }
        }
        match steps {
            None => problems.push("sweep.steps: required for a sweep".into()),
            Some(n) if n < 2 => problems.push(format!("sweep.steps ({n}) must be at least 2")),
            _ => {}
        }
        if relative && variable == Some(SweepVariable::K) {
            problems.push("sweep.relative applies only to tau sweeps".into());
        }
        match (variable, from, to, steps) {
            (Some(variable), Some(from), Some(to), Some(steps)) => Some(SweepSpec {
                variable,
                from,
                to,
                steps,
                relative,
                simulate,
            }),
            _ => None,
        }
    } else {
        None
    };
    if command == Command::Sweep && sweep.is_none() && problems.is_empty() {
        problems.push("sweep: the sweep command needs sweep.* settings".into());
    }

    let sweeps = |v| sweep.as_ref().is_some_and(|s| s.variable == v);
    let mut params = ModelParams::base(f64::NAN, f64::NAN);
    for (key, slot) in [
        ("model.s", &mut params.s),
        ("model.a", &mut params.a),
        ("model.b", &mut params.b),
        ("model.c", &mut params.c),
        ("model.d", &mut params.d),
        ("model.k1", &mut params.k1),
        ("model.k", &mut params.k),
        ("model.tau", &mut params.tau),
    ] {
        if let Some(v) = r.number(key)? {
            *slot = v;
        }
    }
    if params.k.is_nan() && !sweeps(SweepVariable::K) {
        problems.push("model.k: required".into());
    }
    if params.tau.is_nan() && !sweeps(SweepVariable::Tau) {
        problems.push("model.tau: required".into());
    }
    // Validate with placeholders standing in for swept or missing values.
    let mut probe = params;
    if probe.k.is_nan() {
        probe.k = 1.0;
    }
    if probe.tau.is_nan() {
        probe.tau = 1.0;
    }
    problems.extend(probe.violations().into_iter().map(|v| format!("model.{v}")));

    let sim = if r.has_prefix("sim.") || command == Command::Simulate {
        let mut spec = SimSpec::default();
        let choices: Vec<TauChoice> = [
            ("sim.tau", TauChoice::Absolute as fn(f64) -> TauChoice),
            ("sim.tau_factor", TauChoice::Factor),
            ("sim.mu", TauChoice::Offset),
        ]
        .into_iter()
        .filter_map(|(key, make)| r.number(key).transpose().map(|v| v.map(make)))
        .collect::<Result<_, _>>()?;
        if choices.len() > 1 {
            problems.push("sim.tau, sim.tau_factor and sim.mu are mutually exclusive".into());
        }
        spec.tau = choices.first().copied();
        match spec.tau {
            Some(TauChoice::Absolute(t)) | Some(TauChoice::Factor(t)) if !(t > 0.0) => {
                problems.push(format!("sim delay setting ({t}) must be positive"));
            }
            _ => {}
        }
        if let Some(n) = r.parse::<usize>("sim.steps_per_delay")? {
            spec.steps_per_delay = n;
        }
        if r.raw("sim.h").is_some() && r.raw("sim.steps_per_delay").is_some() {
            problems.push("sim.h and sim.steps_per_delay are mutually exclusive".into());
        }
        if let Some(h) = r.number("sim.h")? {
            if !(h > 0.0) {
                problems.push(format!("sim.h ({h}) must be positive"));
            } else {
                match spec.tau.unwrap_or(TauChoice::Absolute(params.tau)) {
                    TauChoice::Absolute(t) if t.is_finite() => {
                        spec.steps_per_delay = (t / h).round() as usize;
                        if ((t / h) - (t / h).round()).abs() > 1e-9 * (t / h) {
                            problems.push(format!("sim.h ({h}) must divide the delay ({t})"));
                        }
                    }
                    _ => problems.push(
                        "sim.h needs an absolute delay; use sim.steps_per_delay with relative delays"
                            .into(),
                    ),
                }
            }
        }
        if spec.steps_per_delay < 10 {
            problems.push(format!(
                "sim.steps_per_delay ({}) must be at least 10",
                spec.steps_per_delay
            ));
        }
        spec.t_end = r.number("sim.t_end")?;
        if let Some(t) = spec.t_end {
            if !(t > 0.0) {
                problems.push(format!("sim.t_end ({t}) must be positive"));
            }
        }
        if let Some(p) = r.number("sim.periods")? {
            spec.periods = p;
            if !(p > 0.0) {
                problems.push(format!("sim.periods ({p}) must be positive"));
            }
        }
        if let Some(e) = r.raw("sim.perturbation") {
            let parts: Vec<Option<f64>> = e.value.split(',').map(|s| s.trim().parse().ok()).collect();
            match parts.as_slice() {
                [Some(a), Some(b)] if a.is_finite() && b.is_finite() => spec.perturbation = [*a, *b],
                _ => {
                    return Err(ConfigError::Parse {
                        line: e.line,
                        detail: format!("sim.perturbation must be two numbers 'dy1, dy2', found '{}'", e.value),
                    })
                }
            }
        }
        if let Some(t) = r.number("sim.transient")? {
            spec.transient = t;
            if !(0.0..1.0).contains(&t) {
                problems.push(format!("sim.transient ({t}) must lie in [0, 1)"));
            }
        }
        Some(spec)
    } else {
        None
    };

    let output_dir = r
        .raw("output.dir")
        .map(|e| PathBuf::from(&e.value))
        .unwrap_or_else(|| PathBuf::from("."));
    let formats = match r.raw("output.formats") {
        None => Formats {
            csv: true,
            json: true,
            svg: false,
        },
        Some(e) => Formats::parse(&e.value).map_err(|detail| ConfigError::Parse {
            line: e.line,
            detail,
        })?,
    };

    if !problems.is_empty() {
        return Err(ConfigError::Invalid(problems));
    }
    Ok(RunConfig {
        command,
        params,
        sweep,
        sim,
        output_dir,
        formats,
    })
}
