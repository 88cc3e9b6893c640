//! The full analysis chain for one parameter set.

use serde::Serialize;

use crate::equilibrium::{solve_equilibrium, Equilibrium};
use crate::error::Result;
use crate::model::{eval_derivatives, DerivativeTensors, ModelParams};
use crate::normal_form::NormalForm;
use crate::spectral::{char_coeffs, find_hopf, linearize, stable_without_delay, CharCoeffs, HopfPoint, LinearizationPair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Analysis {
    pub params: ModelParams,
    pub equilibrium: Equilibrium,
    pub derivatives: DerivativeTensors,
    pub linearization: LinearizationPair,
    pub char_coeffs: CharCoeffs,
    pub stable_without_delay: bool,
    pub hopf: HopfPoint,
    pub normal_form: NormalForm,
}

/// Equilibrium, linearization, first Hopf point and its normal form.
/// The delay in `params` only enters through validation.
pub fn analyze(params: &ModelParams) -> Result<Analysis> {
    let equilibrium = solve_equilibrium(params)?;
    let derivatives = eval_derivatives(equilibrium.point(), params)?;
    let linearization = linearize(&equilibrium, &derivatives, params);
    let cc = char_coeffs(&linearization, &derivatives, params);
    let hopf = find_hopf(&cc)?;
    let normal_form = NormalForm::compute(&hopf, &linearization, &derivatives, params)?;
    Ok(Analysis {
        params: *params,
        equilibrium,
        derivatives,
        linearization,
        char_coeffs: cc,
        stable_without_delay: stable_without_delay(&cc),
        hopf,
        normal_form,
    })
}
