//! Linear stability of the equilibrium under the delay.
//!
//! The linearization `u' = A u(t) + B u(t - tau)` has the characteristic
//! function
//!
//! ```text
//! Delta(lambda, tau) = lambda^2 + p1 lambda + p0 - (q1 lambda + q0) e^{-lambda tau}
//! ```
//!
//! Purely imaginary roots `i omega` satisfy `|P(i omega)| = |Q(i omega)|`,
//! a quadratic in `omega^2`; each such `omega` yields a ladder of critical
//! delays, one per `2 pi / omega`.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use serde::Serialize;

use crate::equilibrium::Equilibrium;
use crate::error::{Error, Result};
use crate::linalg::{self, c, Mat2};
use crate::model::{DerivativeTensors, ModelParams};

/// Instantaneous and delayed Jacobians at the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearizationPair {
    pub a: Mat2,
    pub b: Mat2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharCoeffs {
    pub p1: f64,
    pub p0: f64,
    pub q1: f64,
    pub q0: f64,
}

impl CharCoeffs {
    /// Coefficients `(B, C)` of `u^2 + B u + C` with `u = omega^2`.
    pub fn frequency_quadratic(&self) -> (f64, f64) {
        (
            self.p1 * self.p1 - 2.0 * self.p0 - self.q1 * self.q1,
            self.p0 * self.p0 - self.q0 * self.q0,
        )
    }

    /// Scale for the characteristic residual at `i omega`.
    pub fn residual_scale(&self, omega: f64) -> f64 {
        self.p0.abs() + omega * omega
    }
}

pub fn linearize(_eq: &Equilibrium, derivs: &DerivativeTensors, p: &ModelParams) -> LinearizationPair {
    let (rho, gamma) = (&derivs.rho, &derivs.gamma);
    LinearizationPair {
        a: [[-(p.b + p.a * rho.d10), -p.a * rho.d01], [0.0, -p.d]],
        b: [[0.0, 0.0], [p.c * gamma.d10, p.c * gamma.d01]],
    }
}

pub fn char_coeffs(_lin: &LinearizationPair, derivs: &DerivativeTensors, p: &ModelParams) -> CharCoeffs {
    let (rho, gamma) = (&derivs.rho, &derivs.gamma);
    let own = p.b + p.a * rho.d10;
    CharCoeffs {
        p1: p.b + p.d + p.a * rho.d10,
        p0: p.d * own,
        q1: p.c * gamma.d01,
        q0: p.c * gamma.d01 * own - p.a * p.c * rho.d01 * gamma.d10,
    }
}

pub fn delta(lambda: Complex64, tau: f64, cc: &CharCoeffs) -> Complex64 {
    lambda * lambda + cc.p1 * lambda + cc.p0 - (cc.q1 * lambda + cc.q0) * (-lambda * tau).exp()
}

/// `d Delta / d lambda`.
pub fn delta_dlambda(lambda: Complex64, tau: f64, cc: &CharCoeffs) -> Complex64 {
    let e = (-lambda * tau).exp();
    2.0 * lambda + cc.p1 - cc.q1 * e + tau * (cc.q1 * lambda + cc.q0) * e
}

/// Without delay the equilibrium is asymptotically stable iff both
/// coefficients of `lambda^2 + (p1 - q1) lambda + (p0 - q0)` are positive.
pub fn stable_without_delay(cc: &CharCoeffs) -> bool {
    cc.p1 - cc.q1 > 0.0 && cc.p0 - cc.q0 > 0.0
}

/// All `omega > 0` with `Delta(i omega, tau) = 0` for some `tau`, ascending.
pub fn omega_candidates(cc: &CharCoeffs) -> Vec<f64> {
    let (b, cst) = cc.frequency_quadratic();
    let disc = b * b - 4.0 * cst;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Stable quadratic roots: one from the formula, the other from the product.
    let big = -0.5 * (b + b.signum() * sq);
    let roots = if big == 0.0 {
        [0.0, 0.0]
    } else {
        [big, cst / big]
    };
    let mut out: Vec<f64> = roots.iter().filter(|&&u| u > 0.0).map(|u| u.sqrt()).collect();
    out.sort_by(|x, y| x.total_cmp(y));
    out.dedup();
    out
}

/// Phase `theta in [0, 2 pi)` with `cos(omega tau) = cos theta`,
/// `sin(omega tau) = sin theta` on the imaginary axis.
fn critical_phase(omega: f64, cc: &CharCoeffs) -> f64 {
    let w2 = omega * omega;
    let den = cc.q0 * cc.q0 + cc.q1 * cc.q1 * w2;
    let cos = (cc.q0 * (cc.p0 - w2) + cc.q1 * cc.p1 * w2) / den;
    let sin = (cc.q1 * omega * (cc.p0 - w2) - cc.q0 * omega * cc.p1) / den;
    sin.atan2(cos).rem_euclid(2.0 * PI)
}

const TAU_VERIFY_TOL: f64 = 1e-8;

/// Critical delay for `omega` on branch `branch` (the `branch`-th positive
/// solution), verified against the characteristic function.
pub fn tau_critical(omega: f64, cc: &CharCoeffs, branch: u32) -> Result<f64> {
    if !(omega > 0.0) || (cc.q0 == 0.0 && cc.q1 == 0.0) {
        return Err(Error::Verification {
            omega,
            residual: f64::INFINITY,
        });
    }
    let theta = critical_phase(omega, cc);
    // theta == 0 would give tau == 0, which is not a positive delay.
    let shift = if theta == 0.0 { 1.0 } else { 0.0 };
    let tau = (theta + 2.0 * PI * (branch as f64 + shift)) / omega;
    let residual = delta(c(0.0, omega), tau, cc).norm() / cc.residual_scale(omega);
    if residual > TAU_VERIFY_TOL {
        return Err(Error::Verification { omega, residual });
    }
    Ok(tau)
}

/// The two-arcsine closed form for the critical delay (branch 0). Kept as a
/// diagnostic; `None` when an arcsine argument leaves `[-1, 1]`.
pub fn tau_arcsine_form(omega: f64, cc: &CharCoeffs) -> Option<f64> {
    let w2 = omega * omega;
    let den = ((cc.p0 - w2).powi(2) + w2 * cc.p1 * cc.p1).sqrt();
    let (s1, s2) = (cc.p1 * omega / den, cc.q1 * omega / den);
    if s1.abs() > 1.0 || s2.abs() > 1.0 {
        return None;
    }
    Some((PI + s1.asin() + s2.asin()) / omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transversality {
    /// `Re d lambda / d tau` at criticality.
    pub m: f64,
    /// `Im d lambda / d tau` at criticality.
    pub n: f64,
    pub l1: f64,
    pub l2: f64,
}

/// Closed-form real and imaginary parts of `d lambda / d tau` at `(i omega, tau)`.
pub fn transversality(omega: f64, tau: f64, cc: &CharCoeffs) -> Result<Transversality> {
    let CharCoeffs { p1, p0, q1, q0 } = *cc;
    let w = omega;
    let (w2, w3, w4, w5, w6, w7) = (w * w, w.powi(3), w.powi(4), w.powi(5), w.powi(6), w.powi(7));
    let l1 = -q1 * w2 + p1 * q0 - q1 * p0 + tau * (-q1 * p1 * w2 - q0 * w2 + q0 * p0);
    let l2 = 2.0 * w * q0 + tau * (-q1 * w3 + p0 * q1 * w + p1 * q0 * w);
    let den = l1 * l1 + l2 * l2;
    // Degeneracy is judged against the natural scale of l1, l2.
    let unit = (q0.abs() + q1.abs() * w) * (1.0 + tau * (p1.abs() * w + p0.abs() + w2));
    if den < 1e-30 * unit * unit || den == 0.0 {
        return Err(Error::Degenerate {
            operation: "transversality",
            detail: format!("l1^2 + l2^2 = {den:e}"),
        });
    }
    let (p12, q12, q02, p02) = (p1 * p1, q1 * q1, q0 * q0, p0 * p0);
    let m = (q12 * w6 + 2.0 * q02 * w4 + (p12 * q02 - p02 * q12 - 2.0 * p0 * q02) * w2) / den;
    let n = (-q12 * tau * w7
        + w5 * (q0 * q1 - p1 * q12 + tau * (2.0 * p0 * q12 - p12 * q12 - q02))
        + w3 * (-p1 * q02 - 2.0 * p0 * q0 * q1 + p12 * q0 * q1 - p0 * p1 * q12
            + tau * (-p12 * q02 - q12 * p02 + 2.0 * p0 * q02))
        + w * (-p0 * p1 * q02 + p02 * q0 * q1 - tau * p02 * q02))
        / den;
    Ok(Transversality { m, n, l1, l2 })
}

/// `d lambda / d tau` from the implicit function theorem applied to `Delta`.
pub fn implicit_dlambda_dtau(lambda: Complex64, tau: f64, cc: &CharCoeffs) -> Complex64 {
    let e = (-lambda * tau).exp();
    let d_tau = lambda * (cc.q1 * lambda + cc.q0) * e;
    -d_tau / delta_dlambda(lambda, tau, cc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPair {
    pub omega: f64,
    pub tau: f64,
    pub branch: u32,
    /// Scaled `|Delta(i omega, tau)|`.
    pub residual: f64,
}

/// Critical `(omega, tau)` pairs for the first `branches` branches of every
/// candidate frequency, sorted by delay.
pub fn critical_pairs(cc: &CharCoeffs, branches: u32) -> Result<Vec<CriticalPair>> {
    let mut out = Vec::new();
    for omega in omega_candidates(cc) {
        for branch in 0..branches {
            let tau = tau_critical(omega, cc, branch)?;
            let residual = delta(c(0.0, omega), tau, cc).norm() / cc.residual_scale(omega);
            out.push(CriticalPair {
                omega,
                tau,
                branch,
                residual,
            });
        }
    }
    out.sort_by(|x, y| x.tau.total_cmp(&y.tau));
    Ok(out)
}

/// Relative discrepancy above which the two transversality routes trigger a warning.
pub const TRANSVERSALITY_WARN: f64 = 1e-4;

/// The first stability switch: smallest positive critical delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfPoint {
    pub omega: f64,
    pub tau: f64,
    pub branch: u32,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    /// Scaled `|Delta(i omega, tau)|`.
    pub residual: f64,
    pub m: f64,
    pub n: f64,
    pub l1: f64,
    pub l2: f64,
    /// `d lambda / d tau` from the implicit function theorem.
    pub dlambda_implicit: Complex64,
    /// Max relative discrepancy between the two transversality routes.
    pub transversality_discrepancy: f64,
    /// The arcsine closed form evaluated at the same `omega`, with its residual.
    pub arcsine_tau: Option<f64>,
    pub arcsine_residual: Option<f64>,
    /// `p1^2 q0^2 - q1^2 p0^2 - 2 p0 q0^2`, reported alongside `m`.
    pub frequency_condition: f64,
}

impl HopfPoint {
    /// The same point seen from the conjugate eigenvalue.
    pub fn conjugate(&self) -> Self {
        Self {
            omega: -self.omega,
            lambda1: self.lambda2,
            lambda2: self.lambda1,
            n: -self.n,
            dlambda_implicit: self.dlambda_implicit.conj(),
            ..*self
        }
    }

    pub fn dlambda(&self) -> Complex64 {
        c(self.m, self.n)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega.abs()
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

pub fn find_hopf(cc: &CharCoeffs) -> Result<HopfPoint> {
    let pairs = critical_pairs(cc, 1)?;
    let first = pairs.first().ok_or(Error::NoCriticalFrequency)?;
    let (omega, tau) = (first.omega, first.tau);
    let tr = transversality(omega, tau, cc)?;
    let lambda1 = c(0.0, omega);
    let implicit = implicit_dlambda_dtau(lambda1, tau, cc);
    let discrepancy = rel_diff(tr.m, implicit.re).max(rel_diff(tr.n, implicit.im));
    if discrepancy > TRANSVERSALITY_WARN {
        warn!(
            "transversality routes disagree: closed form ({}, {}) vs implicit ({}, {})",
            tr.m, tr.n, implicit.re, implicit.im
        );
    }
    let arcsine_tau = tau_arcsine_form(omega, cc);
    let arcsine_residual =
        arcsine_tau.map(|t| delta(lambda1, t, cc).norm() / cc.residual_scale(omega));
    let CharCoeffs { p1, p0, q1, q0 } = *cc;
    Ok(HopfPoint {
        omega,
        tau,
        branch: first.branch,
        lambda1,
        lambda2: lambda1.conj(),
        residual: first.residual,
        m: tr.m,
        n: tr.n,
        l1: tr.l1,
        l2: tr.l2,
        dlambda_implicit: implicit,
        transversality_discrepancy: discrepancy,
        arcsine_tau,
        arcsine_residual,
        frequency_condition: p1 * p1 * q0 * q0 - q1 * q1 * p0 * p0 - 2.0 * p0 * q0 * q0,
    })
}

/// Newton iteration on `Delta(., tau)` from `seed`. `None` if it fails to
/// converge or wanders into overflow.
pub fn newton_root(seed: Complex64, tau: f64, cc: &CharCoeffs) -> Option<Complex64> {
    let scale = cc.p1.abs() + cc.p0.abs().sqrt() + cc.q1.abs() + cc.q0.abs().sqrt();
    let mut z = seed;
    for _ in 0..100 {
        if -z.re * tau > 600.0 || !z.re.is_finite() {
            return None;
        }
        let step = delta(z, tau, cc) / delta_dlambda(z, tau, cc);
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        z -= step;
        if step.norm() <= 1e-15 * (z.norm() + scale) {
            let resid = delta(z, tau, cc).norm();
            let ok = resid <= 1e-10 * (z.norm_sqr() + cc.p0.abs() + cc.q0.abs());
            return ok.then_some(z);
        }
    }
    None
}

/// Rightmost characteristic root found by Newton from a grid of seeds.
/// Not a full spectrum computation; seeds cover the strip where the
/// low-frequency roots of this model live.
pub fn rightmost_root(cc: &CharCoeffs, tau: f64) -> Option<Complex64> {
    let scale = cc.p1.abs().max(cc.q1.abs()).max(cc.p0.abs().sqrt()).max(cc.q0.abs().sqrt());
    let im_step = (scale / 20.0).min(PI / tau.max(1e-300));
    let im_count = ((3.0 * scale / im_step).ceil() as usize).min(4000);
    let re_seeds = [-scale, -scale / 3.0, -scale / 10.0, -scale / 100.0, 0.0, scale / 100.0];
    let mut best: Option<Complex64> = None;
    for i in 0..=im_count {
        for &re in &re_seeds {
            if let Some(z) = newton_root(c(re, i as f64 * im_step), tau, cc) {
                if best.is_none_or(|b| z.re > b.re) {
                    best = Some(z);
                }
            }
        }
    }
    best
}

/// Coefficient matrix `A + e^{-lambda tau} B - lambda I` of the eigenproblem.
pub fn eigen_matrix(lin: &LinearizationPair, lambda: Complex64, tau: f64) -> linalg::CMat2 {
    linalg::combine(&lin.a, &lin.b, (-lambda * tau).exp(), lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_equilibrium;
    use crate::model::eval_derivatives;

    fn setup(k: f64) -> (ModelParams, LinearizationPair, CharCoeffs) {
        let p = ModelParams::base(k, 60.0);
        let eq = solve_equilibrium(&p).unwrap();
        let d = eval_derivatives(eq.point(), &p).unwrap();
        let lin = linearize(&eq, &d, &p);
        let cc = char_coeffs(&lin, &d, &p);
        (p, lin, cc)
    }

    #[test]
    fn no_production_means_no_delayed_coupling() {
        let mut p = ModelParams::base(17.5, 60.0);
        let eq = solve_equilibrium(&p).unwrap();
        let d = eval_derivatives(eq.point(), &p).unwrap();
        p.c = 0.0;
        let lin = linearize(&eq, &d, &p);
        assert_eq!(lin.b, [[0.0; 2]; 2]);
        let cc = char_coeffs(&lin, &d, &p);
        assert_eq!((cc.q1, cc.q0), (0.0, 0.0));
    }

    #[test]
    fn sign_pattern_of_jacobians() {
        let (_, lin, _) = setup(17.5);
        assert!(lin.a[0][0] < 0.0 && lin.a[0][1] < 0.0 && lin.a[1][0] == 0.0 && lin.a[1][1] < 0.0);
        assert!(lin.b[0] == [0.0, 0.0] && lin.b[1][0] > 0.0);
    }

    #[test]
    fn coefficients_match_trace_and_determinants() {
        let (_, lin, cc) = setup(17.5);
        assert!((cc.p0 - linalg::det(&lin.a)).abs() < 1e-18);
        assert!((cc.p1 + linalg::trace(&lin.a)).abs() < 1e-16);
        let neg_sum = [
            [-(lin.a[0][0] + lin.b[0][0]), -(lin.a[0][1] + lin.b[0][1])],
            [-(lin.a[1][0] + lin.b[1][0]), -(lin.a[1][1] + lin.b[1][1])],
        ];
        assert!((cc.p0 - cc.q0 - linalg::det(&neg_sum)).abs() < 1e-18);
    }

    #[test]
    fn delta_trivial_cases() {
        let cc = CharCoeffs { p1: 0.3, p0: 0.02, q1: -0.1, q0: 0.05 };
        assert!((delta(c(0.0, 0.0), 17.0, &cc) - c(cc.p0 - cc.q0, 0.0)).norm() < 1e-15);
        let free = CharCoeffs { q1: 0.0, q0: 0.0, ..cc };
        let l = c(-0.2, 0.7);
        assert!((delta(l, 3.0, &free) - (l * l + cc.p1 * l + cc.p0)).norm() < 1e-15);
    }

    #[test]
    fn stability_without_delay_rule() {
        let cc = CharCoeffs { p1: 2.0, p0: 3.0, q1: 1.0, q0: 1.0 };
        assert!(stable_without_delay(&cc));
        assert!(!stable_without_delay(&CharCoeffs { p1: 1.0, q1: 2.0, ..cc }));
        assert!(!stable_without_delay(&CharCoeffs { p1: 1.0, q1: 2.0, p0: 100.0, q0: -5.0 }));
        let (_, _, base) = setup(17.5);
        assert!(stable_without_delay(&base));
    }

    #[test]
    fn frequencies_solve_modulus_balance() {
        // |P(i w)|^2 = |Q(i w)|^2 checked directly, independent of the quadratic.
        let cc = CharCoeffs { p1: 0.5, p0: 0.1, q1: 0.9, q0: 0.3 };
        let ws = omega_candidates(&cc);
        assert!(!ws.is_empty());
        for w in ws {
            let p = c(cc.p0 - w * w, cc.p1 * w).norm_sqr();
            let q = c(cc.q0, cc.q1 * w).norm_sqr();
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn undelayed_damped_oscillator_has_no_crossing() {
        // lambda^2 + 2 lambda + 1 has no imaginary roots.
        let cc = CharCoeffs { p1: 2.0, p0: 1.0, q1: 0.0, q0: 0.0 };
        assert!(omega_candidates(&cc).is_empty());
    }

    #[test]
    fn one_frequency_when_constant_term_negative() {
        for (p1, q1) in [(0.1, 0.5), (2.0, 0.01), (0.3, 3.0)] {
            let cc = CharCoeffs { p1, p0: 0.2, q1, q0: 0.7 };
            assert_eq!(omega_candidates(&cc).len(), 1);
        }
    }

    #[test]
    fn frequencies_invariant_under_feedback_sign_flip() {
        let (_, _, cc) = setup(17.5);
        let flipped = CharCoeffs { q1: -cc.q1, q0: -cc.q0, ..cc };
        let (a, b) = (omega_candidates(&cc), omega_candidates(&flipped));
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * x);
        }
    }

    #[test]
    fn critical_delays_have_small_residual() {
        let cc = CharCoeffs { p1: 0.5, p0: 0.1, q1: 0.9, q0: 0.3 };
        for pair in critical_pairs(&cc, 4).unwrap() {
            assert!(pair.residual < 1e-9);
        }
        let (_, _, cc) = setup(17.5);
        let hp = find_hopf(&cc).unwrap();
        assert!(hp.residual < 1e-9);
        assert!(hp.m > 0.0);
        assert!(hp.transversality_discrepancy < 1e-8);
    }

    #[test]
    fn branches_step_by_one_period() {
        let (_, _, cc) = setup(17.5);
        let w = omega_candidates(&cc)[0];
        let t0 = tau_critical(w, &cc, 0).unwrap();
        let t1 = tau_critical(w, &cc, 1).unwrap();
        assert!(((t1 - t0) - 2.0 * PI / w).abs() < 1e-9 * t1);
    }

    #[test]
    fn stable_model_has_no_hopf_point() {
        let (_, _, cc) = setup(120.0);
        assert!(omega_candidates(&cc).is_empty());
        assert!(matches!(find_hopf(&cc), Err(Error::NoCriticalFrequency)));
    }
}
