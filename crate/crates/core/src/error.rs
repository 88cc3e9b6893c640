use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure carries the module and operation it came from so that
/// front ends can emit a structured diagnostic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{operation}: input outside the model domain: {detail}")]
    Domain {
        operation: &'static str,
        detail: String,
    },

    #[error("invalid model parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("eval_derivatives: radicand {radicand:e} is too close to zero")]
    Singularity { radicand: f64 },

    #[error("solve_equilibrium: phi does not change sign on the bracket (phi(lo) = {lo:e}, phi(hi) = {hi:e})")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("curves_f1_f2: pole at x = {x}")]
    Pole { x: f64 },

    #[error("omega_candidates: no positive critical frequency, delay cannot destabilize the equilibrium")]
    NoCriticalFrequency,

    #[error("tau_critical: characteristic residual {residual:e} at omega = {omega} exceeds tolerance")]
    Verification { omega: f64, residual: f64 },

    #[error("{operation}: degenerate quantity ({detail})")]
    Degenerate {
        operation: &'static str,
        detail: String,
    },

    #[error("center_manifold_w: resonant linear system ({detail})")]
    Resonance { detail: String },

    #[error("integrate: invalid step configuration: {detail}")]
    StepConfig { detail: String },

    #[error("integrate: solution blew up at t = {t}")]
    BlowUp { t: f64 },

    #[error("integrate: state became negative at t = {t} with step h = {h}; reduce the step size")]
    Negativity { t: f64, h: f64 },

    #[error("measure_oscillation: signal has no mean crossings")]
    NoCrossings,

    #[error("measure_oscillation: {detail}")]
    TooShort { detail: String },

    #[error("reconstruct_waveform: normal-form radius undefined ({detail})")]
    UndefinedRadius { detail: String },
}

impl Error {
    /// Name of the module the error originated in.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Domain { .. } | Error::InvalidParams(_) | Error::Singularity { .. } => "model",
            Error::BracketFailure { .. } | Error::Pole { .. } => "equilibrium",
            Error::NoCriticalFrequency | Error::Verification { .. } => "spectral",
            Error::Degenerate { operation, .. } if *operation == "transversality" => "spectral",
            Error::Degenerate { .. } | Error::Resonance { .. } => "normal_form",
            Error::StepConfig { .. }
            | Error::BlowUp { .. }
            | Error::Negativity { .. }
            | Error::NoCrossings
            | Error::TooShort { .. }
            | Error::UndefinedRadius { .. } => "sim",
        }
    }

    pub fn operation(&self) -> &'static str {
        match self {
            Error::Domain { operation, .. } | Error::Degenerate { operation, .. } => operation,
            Error::InvalidParams(_) => "validate",
            Error::Singularity { .. } => "eval_derivatives",
            Error::BracketFailure { .. } => "solve_equilibrium",
            Error::Pole { .. } => "curves_f1_f2",
            Error::NoCriticalFrequency => "omega_candidates",
            Error::Verification { .. } => "tau_critical",
            Error::Resonance { .. } => "center_manifold_w",
            Error::StepConfig { .. } | Error::BlowUp { .. } | Error::Negativity { .. } => {
                "integrate"
            }
            Error::NoCrossings | Error::TooShort { .. } => "measure_oscillation",
            Error::UndefinedRadius { .. } => "reconstruct_waveform",
        }
    }
}
