//! Serializable report structures and their flat CSV view.

use hopf_dde::sim::Trajectory;
use hopf_dde::spectral::CriticalPair;
use hopf_dde::{Complex64, Equilibrium, HopfPoint, ModelParams, NormalForm};
use hopf_dde::normal_form::NormalFormResiduals;
use serde::Serialize;

use crate::config::{CaseSpec, SweepSpec};

/// Tolerances reported next to the quantities they govern.
pub mod tol {
    pub const EQUILIBRIUM: f64 = 1e-10;
    pub const CHARACTERISTIC: f64 = 1e-9;
    pub const TRANSVERSALITY: f64 = 1e-4;
    pub const PAIRING: f64 = 1e-8;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageError {
    pub stage: String,
    pub module: String,
    pub operation: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumBlock {
    pub y1: f64,
    pub y2: f64,
    pub residual: f64,
    /// Relative to `max(s, d y2)`.
    pub tolerance: f64,
    pub bracket: (f64, f64),
}

impl EquilibriumBlock {
    pub fn new(eq: &Equilibrium, p: &ModelParams) -> Self {
        Self {
            y1: eq.y1,
            y2: eq.y2,
            residual: eq.residual,
            tolerance: tol::EQUILIBRIUM * eq.residual_scale(p),
            bracket: eq.bracket,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityBlock {
    pub p1: f64,
    pub p0: f64,
    pub q1: f64,
    pub q0: f64,
    pub stable_without_delay: bool,
    pub omega_candidates: Vec<f64>,
    pub critical_delays: Vec<CriticalPair>,
    /// Rightmost characteristic root at the case delay.
    pub rightmost_root: Option<ComplexValue>,
    pub stable_at_tau: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfBlock {
    pub omega0: f64,
    pub tau0: f64,
    pub period: f64,
    pub residual: f64,
    pub m: f64,
    pub n: f64,
    pub implicit: ComplexValue,
    pub transversality_discrepancy: f64,
    pub arcsine_tau: Option<f64>,
    pub arcsine_residual: Option<f64>,
    pub frequency_condition: f64,
}

impl HopfBlock {
    pub fn new(hp: &HopfPoint) -> Self {
        Self {
            omega0: hp.omega,
            tau0: hp.tau,
            period: hp.period(),
            residual: hp.residual,
            m: hp.m,
            n: hp.n,
            implicit: hp.dlambda_implicit.into(),
            transversality_discrepancy: hp.transversality_discrepancy,
            arcsine_tau: hp.arcsine_tau,
            arcsine_residual: hp.arcsine_residual,
            frequency_condition: hp.frequency_condition,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalFormBlock {
    pub g20: ComplexValue,
    pub g11: ComplexValue,
    pub g02: ComplexValue,
    pub g21: ComplexValue,
    pub c1: ComplexValue,
    pub mu2: f64,
    pub beta2: f64,
    pub t2: f64,
    pub classification: String,
    pub residuals: NormalFormResiduals,
}

impl NormalFormBlock {
    pub fn new(nf: &NormalForm) -> Self {
        Self {
            g20: nf.g20.into(),
            g11: nf.g11.into(),
            g02: nf.g02.into(),
            g21: nf.g21.into(),
            c1: nf.c1.into(),
            mu2: nf.mu2,
            beta2: nf.beta2,
            t2: nf.t2,
            classification: nf.classification.to_string(),
            residuals: nf.residuals,
        }
    }

    fn max_residual(&self) -> f64 {
        let r = &self.residuals;
        [r.eigen, r.adjoint, r.pairing, r.pairing_conj, r.e1, r.e2]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationBlock {
    pub tau: f64,
    pub h: f64,
    pub t_end: f64,
    pub steps: usize,
    pub perturbation: [f64; 2],
    pub transient: f64,
    pub predicted_period: Option<f64>,
    /// `None` when the signal has no mean crossings.
    pub period: Option<f64>,
    pub amplitude: Option<f64>,
    pub decaying: bool,
    /// Last-period amplitude over the amplitude three periods earlier.
    pub amplitude_ratio: Option<f64>,
    pub crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub index: usize,
    pub params: ModelParams,
    /// Resolved analysis delay.
    pub tau: Option<f64>,
    pub equilibrium: Option<EquilibriumBlock>,
    pub stability: Option<StabilityBlock>,
    pub hopf: Option<HopfBlock>,
    pub normal_form: Option<NormalFormBlock>,
    pub simulation: Option<SimulationBlock>,
    pub error: Option<StageError>,
    #[serde(skip)]
    pub trajectory: Option<Trajectory<2>>,
}

impl CaseReport {
    pub fn new(case: &CaseSpec) -> Self {
        Self {
            index: case.index,
            params: case.params,
            tau: None,
            equilibrium: None,
            stability: None,
            hopf: None,
            normal_form: None,
            simulation: None,
            error: None,
            trajectory: None,
        }
    }

    /// `case003`-style identifier used in file names and CSV rows.
    pub fn label(&self) -> String {
        format!("case{:03}", self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub sweep: Option<SweepSpec>,
    pub cases: Vec<CaseReport>,
}

impl Report {
    pub fn first_error(&self) -> Option<&StageError> {
        self.cases.iter().find_map(|c| c.error.as_ref())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub case: String,
    pub name: String,
    pub value: String,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub provenance: &'static str,
}

pub const CSV_HEADER: &str = "case,name,value,residual,tolerance,provenance";

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn rows(case: &CaseReport) -> Vec<Row> {
    let label = case.label();
    let mut out = Vec::new();
    let mut push = |name: &str, value: String, residual: Option<f64>, tolerance: Option<f64>, provenance| {
        out.push(Row {
            case: label.clone(),
            name: name.into(),
            value,
            residual,
            tolerance,
            provenance,
        })
    };

    for (name, v) in case.params.fields() {
        push(&format!("model.{name}"), num(v), None, None, "input");
    }
    if let Some(t) = case.tau {
        push("tau", num(t), None, None, "resolved");
    }
    if let Some(e) = &case.equilibrium {
        push("y1_eq", num(e.y1), Some(e.residual), Some(e.tolerance), "equilibrium:bisection+newton");
        push("y2_eq", num(e.y2), Some(e.residual), Some(e.tolerance), "equilibrium:bisection+newton");
    }
    if let Some(s) = &case.stability {
        for (name, v) in [("p1", s.p1), ("p0", s.p0), ("q1", s.q1), ("q0", s.q0)] {
            push(name, num(v), None, None, "spectral:linearization");
        }
        push(
            "stable_without_delay",
            s.stable_without_delay.to_string(),
            None,
            None,
            "spectral:routh-hurwitz",
        );
        if let Some(z) = s.rightmost_root {
            push("rightmost_root_re", num(z.re), None, None, "spectral:newton");
            push("rightmost_root_im", num(z.im), None, None, "spectral:newton");
        }
    }
    if let Some(h) = &case.hopf {
        let r = Some(h.residual);
        let t = Some(tol::CHARACTERISTIC);
        push("omega0", num(h.omega0), r, t, "spectral:quartic");
        push("tau0", num(h.tau0), r, t, "spectral:phase");
        push("period0", num(h.period), r, t, "spectral:phase");
        let d = Some(h.transversality_discrepancy);
        let t = Some(tol::TRANSVERSALITY);
        push("M", num(h.m), d, t, "spectral:transversality");
        push("N", num(h.n), d, t, "spectral:transversality");
    }
    if let Some(nf) = &case.normal_form {
        let r = Some(nf.max_residual());
        let t = Some(tol::PAIRING);
        for (name, z) in [("g20", nf.g20), ("g11", nf.g11), ("g02", nf.g02), ("g21", nf.g21), ("c1", nf.c1)] {
            push(&format!("{name}_re"), num(z.re), r, t, "normal_form:center-manifold");
            push(&format!("{name}_im"), num(z.im), r, t, "normal_form:center-manifold");
        }
        push("mu2", num(nf.mu2), r, t, "normal_form:lyapunov");
        push("beta2", num(nf.beta2), r, t, "normal_form:lyapunov");
        push("T2", num(nf.t2), r, t, "normal_form:lyapunov");
        push("classification", nf.classification.clone(), None, None, "normal_form:lyapunov");
    }
    if let Some(s) = &case.simulation {
        push("sim_tau", num(s.tau), None, None, "sim:input");
        push("sim_h", num(s.h), None, None, "sim:input");
        if let Some(p) = s.period {
            push("sim_period", num(p), None, None, "sim:mean-crossings");
        }
        if let Some(a) = s.amplitude {
            push("sim_amplitude", num(a), None, None, "sim:mean-crossings");
        }
        push("sim_decaying", s.decaying.to_string(), None, None, "sim:mean-crossings");
    }
    if let Some(e) = &case.error {
        push(
            "error",
            format!("{}/{}/{}: {}", e.stage, e.module, e.operation, e.message),
            None,
            None,
            "pipeline",
        );
    }
    out
}
