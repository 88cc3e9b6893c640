//! Stage orchestration for one or many parameter sets.

use std::f64::consts::PI;

use hopf_dde::equilibrium::solve_equilibrium;
use hopf_dde::model::eval_derivatives;
use hopf_dde::sim::{self, History, Trajectory};
use hopf_dde::spectral::{
    char_coeffs, critical_pairs, find_hopf, linearize, omega_candidates, rightmost_root,
    stable_without_delay,
};
use hopf_dde::{Error, HopfPoint, ModelParams, NormalForm};
use log::{debug, info};
use rayon::prelude::*;

use crate::config::{CaseSpec, Command, RunConfig};
use crate::report::{
    CaseReport, EquilibriumBlock, HopfBlock, NormalFormBlock, Report, SimulationBlock,
    StabilityBlock, StageError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Equilibrium,
    Stability,
    Hopf,
    NormalForm,
    Simulate,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Equilibrium => "equilibrium",
            Stage::Stability => "stability",
            Stage::Hopf => "hopf",
            Stage::NormalForm => "normal-form",
            Stage::Simulate => "simulate",
        }
    }
}

/// The last analysis stage a command needs.
fn depth(cmd: Command) -> Stage {
    match cmd {
        Command::Equilibrium => Stage::Equilibrium,
        Command::Stability => Stage::Stability,
        Command::Hopf => Stage::Hopf,
        Command::NormalForm | Command::Report | Command::Sweep => Stage::NormalForm,
        Command::Simulate => Stage::Equilibrium,
    }
}

/// Number of critical-delay branches listed in the stability block.
const LISTED_BRANCHES: u32 = 3;

fn tag(stage: Stage, e: Error) -> StageError {
    StageError {
        stage: stage.as_str().into(),
        module: e.module().into(),
        operation: e.operation().into(),
        message: e.to_string(),
    }
}

/// Runs every stage the command needs for one case, stopping at the first error.
pub fn run_case(cfg: &RunConfig, case: &CaseSpec) -> CaseReport {
    let mut report = CaseReport::new(case);
    if let Err(e) = fill_case(cfg, case, &mut report) {
        report.error = Some(e);
    }
    report
}

fn fill_case(cfg: &RunConfig, case: &CaseSpec, out: &mut CaseReport) -> Result<(), StageError> {
    let depth = depth(cfg.command);
    let simulate = cfg.simulates();
    // The delay does not enter the equilibrium or the characteristic
    // coefficients; a placeholder keeps validation meaningful when the
    // case delay is still relative to tau0.
    let params = if case.params.tau.is_finite() {
        case.params
    } else {
        case.params.with_tau(1.0)
    };

    let eq = solve_equilibrium(&params).map_err(|e| tag(Stage::Equilibrium, e))?;
    out.equilibrium = Some(EquilibriumBlock::new(&eq, &params));
    if depth == Stage::Equilibrium && !simulate {
        return Ok(());
    }

    let derivs = eval_derivatives(eq.point(), &params).map_err(|e| tag(Stage::Stability, e))?;
    let lin = linearize(&eq, &derivs, &params);
    let cc = char_coeffs(&lin, &derivs, &params);

    let sim_tau = cfg.sim.as_ref().and_then(|s| s.tau).unwrap_or(case.tau);
    let needs_hopf = depth >= Stage::Hopf
        || case.tau.needs_tau0()
        || (simulate && (sim_tau.needs_tau0() || cfg.sim.as_ref().is_some_and(|s| s.t_end.is_none())));
    let hopf = if needs_hopf {
        Some(find_hopf(&cc).map_err(|e| tag(Stage::Hopf, e))?)
    } else {
        None
    };
    let tau0 = hopf.map(|h| h.tau);
    let tau = case.tau.resolve(tau0);
    out.tau = tau;

    if depth >= Stage::Stability {
        let pairs = critical_pairs(&cc, LISTED_BRANCHES).map_err(|e| tag(Stage::Stability, e))?;
        let root = tau.and_then(|t| rightmost_root(&cc, t));
        out.stability = Some(StabilityBlock {
            p1: cc.p1,
            p0: cc.p0,
            q1: cc.q1,
            q0: cc.q0,
            stable_without_delay: stable_without_delay(&cc),
            omega_candidates: omega_candidates(&cc),
            critical_delays: pairs,
            rightmost_root: root.map(Into::into),
            stable_at_tau: root.map(|z| z.re < 0.0),
        });
    }
    if let Some(hp) = &hopf {
        if depth >= Stage::Hopf {
            out.hopf = Some(HopfBlock::new(hp));
        }
    }
    if depth >= Stage::NormalForm {
        let hp = hopf.as_ref().expect("hopf computed for normal-form depth");
        let nf = NormalForm::compute(hp, &lin, &derivs, &params)
            .map_err(|e| tag(Stage::NormalForm, e))?;
        out.normal_form = Some(NormalFormBlock::new(&nf));
    }

    if simulate {
        let (block, traj) = simulate_case(cfg, &params, &eq.as_array(), sim_tau.resolve(tau0), hopf.as_ref())?;
        out.simulation = Some(block);
        out.trajectory = Some(traj);
    }
    Ok(())
}

fn simulate_case(
    cfg: &RunConfig,
    params: &ModelParams,
    x0: &[f64; 2],
    tau: Option<f64>,
    hopf: Option<&HopfPoint>,
) -> Result<(SimulationBlock, Trajectory<2>), StageError> {
    let spec = cfg.sim.clone().unwrap_or_default();
    let cli_error = |operation: &str, message: String| StageError {
        stage: Stage::Simulate.as_str().into(),
        module: "cli".into(),
        operation: operation.into(),
        message,
    };
    let tau = tau.ok_or_else(|| cli_error("simulate", "relative delay needs a Hopf point".into()))?;
    let predicted_period = hopf.map(|h| 2.0 * PI / h.omega);
    let t_end = match (spec.t_end, predicted_period) {
        (Some(t), _) => t,
        (None, Some(p)) => spec.periods * p,
        (None, None) => {
            return Err(cli_error(
                "simulate",
                "sim.t_end is required when there is no Hopf point to set the length".into(),
            ))
        }
    };
    let h = tau / spec.steps_per_delay as f64;
    let history = History::constant([x0[0] + spec.perturbation[0], x0[1] + spec.perturbation[1]]);
    let p = params.with_tau(tau);
    info!("simulating tau = {tau}, h = {h}, t_end = {t_end}");
    let traj = sim::integrate(&p, &history, t_end, h).map_err(|e| tag(Stage::Simulate, e))?;

    let mut block = SimulationBlock {
        tau,
        h,
        t_end: traj.t_end(),
        steps: traj.len() - 1,
        perturbation: spec.perturbation,
        transient: spec.transient,
        predicted_period,
        period: None,
        amplitude: None,
        decaying: true,
        amplitude_ratio: None,
        crossings: 0,
    };
    match sim::measure_oscillation(&traj, spec.transient) {
        Ok(o) => {
            block.period = Some(o.period);
            block.amplitude = Some(o.amplitude);
            block.decaying = o.decaying;
            block.amplitude_ratio = Some(o.last_amplitude / o.earlier_amplitude);
            block.crossings = o.crossings;
        }
        Err(Error::NoCrossings) => debug!("no mean crossings at tau = {tau}"),
        Err(e) => return Err(tag(Stage::Simulate, e)),
    }
    Ok((block, traj))
}

/// Runs all cases on a pool of `workers` threads (`None`: one per core).
/// Case order in the report follows the configuration, whatever the
/// scheduling.
pub fn run_pipeline(cfg: &RunConfig, workers: Option<usize>) -> Report {
    let cases = cfg.cases();
    let run = || -> Vec<CaseReport> { cases.par_iter().map(|c| run_case(cfg, c)).collect() };
    let mut reports = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(run))
            .unwrap_or_else(|_| cases.iter().map(|c| run_case(cfg, c)).collect()),
        None => run(),
    };
    reports.sort_by_key(|r| r.index);
    Report {
        command: cfg.command.as_str().into(),
        sweep: cfg.sweep.clone(),
        cases: reports,
    }
}
