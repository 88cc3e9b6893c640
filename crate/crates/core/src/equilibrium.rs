//! The unique positive stationary state.
//!
//! Eliminating `f` and `g` from the steady-state equations leaves a cubic
//! `phi(x)` in the p53 level that is strictly increasing on
//! `(s/(a+b), s/b)`, negative at the left end and positive at the right end.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, ModelParams, StatePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub y1: f64,
    pub y2: f64,
    /// Max-norm of the steady-state equations at `(y1, y2)`.
    pub residual: f64,
    pub bracket: (f64, f64),
}

impl Equilibrium {
    pub fn point(&self) -> StatePoint {
        StatePoint {
            y1: self.y1,
            y2: self.y2,
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.y1, self.y2]
    }

    /// Scale used for the residual invariant: `max(s, d*y2)`.
    pub fn residual_scale(&self, params: &ModelParams) -> f64 {
        params.s.max(params.d * self.y2)
    }
}

pub fn phi(x: f64, p: &ModelParams) -> f64 {
    let lin = (p.a + p.b) * x - p.s;
    p.a * p.c * lin * lin - p.d * (p.k1 * p.a + lin) * (p.k * p.a + lin) * (p.s - p.b * x)
}

/// The two steady-state curves `y2 = f1(y1)` and `y2 = f2(y1)`; their
/// intersection is the equilibrium.
pub fn curves_f1_f2(x: f64, p: &ModelParams) -> Result<(f64, f64)> {
    let lin = (p.a + p.b) * x - p.s;
    let den1 = p.d * (p.k1 * p.a + lin);
    let den2 = p.a * lin;
    let eps = 1e-14 * p.s;
    if lin.abs() <= eps || (p.k1 * p.a + lin).abs() <= eps {
        return Err(Error::Pole { x });
    }
    let f1 = p.c * lin / den1;
    let f2 = (p.s - p.b * x) * (p.k * p.a + lin) / den2;
    Ok((f1, f2))
}

const BISECTION_RTOL: f64 = 1e-12;
const NEWTON_POLISH_STEPS: usize = 3;

/// Bisection on `phi` over the inset bracket, then a short Newton polish.
pub fn solve_equilibrium(p: &ModelParams) -> Result<Equilibrium> {
    p.validate()?;
    let bracket = p.bracket();
    let inset = 1e-12 * (bracket.1 - bracket.0);
    let (mut lo, mut hi) = (bracket.0 + inset, bracket.1 - inset);
    let (phi_lo, phi_hi) = (phi(lo, p), phi(hi, p));
    if !(phi_lo < 0.0 && phi_hi > 0.0) {
        return Err(Error::BracketFailure {
            lo: phi_lo,
            hi: phi_hi,
        });
    }

    while hi - lo > BISECTION_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        let v = phi(mid, p);
        if v == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..NEWTON_POLISH_STEPS {
        let fx = phi(x, p);
        let h = 1e-7 * x;
        let slope = (phi(x + h, p) - phi(x - h, p)) / (2.0 * h);
        if !(slope > 0.0) {
            break;
        }
        let next = x - fx / slope;
        // Only accept steps that stay inside the last bracket and improve phi.
        if next <= lo || next >= hi || phi(next, p).abs() > fx.abs() {
            break;
        }
        x = next;
    }

    let (y2, _) = curves_f1_f2(x, p)?;
    let point = [x, y2];
    let [r1, r2] = model::rhs_unchecked(point, point, p);
    Ok(Equilibrium {
        y1: x,
        y2,
        residual: r1.abs().max(r2.abs()),
        bracket,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn phi_endpoint_values() {
        let p = ModelParams::base(17.5, 60.0);
        let (lo, hi) = p.bracket();
        let (a, c, d, k, k1, s) = (p.a, p.c, p.d, p.k, p.k1, p.s);
        let left = -a.powi(3) * d * k * k1 * s / (a + p.b);
        let right = a.powi(3) * c * s * s / (p.b * p.b);
        assert!(rel(phi(lo, &p), left) < 1e-12);
        assert!(rel(phi(hi, &p), right) < 1e-12);
    }

    #[test]
    fn reproduces_reference_equilibria() {
        for (k, y1, y2) in [
            (17.5, 1.674122637, 4.587857801),
            (120.0, 3.853801769, 11.20502079),
            (1750.0, 14.88816840, 34.27918463),
        ] {
            let p = ModelParams::base(k, 60.0);
            let eq = solve_equilibrium(&p).unwrap();
            assert!(rel(eq.y1, y1) < 1e-6, "k={k}: y1={}", eq.y1);
            assert!(rel(eq.y2, y2) < 1e-6, "k={k}: y2={}", eq.y2);
            assert!(eq.residual < 1e-10 * eq.residual_scale(&p));
        }
    }

    #[test]
    fn phi_vanishes_at_reference_root() {
        let p = ModelParams::base(17.5, 60.0);
        assert!(phi(1.674122637, &p).abs() < 1e-10);
    }

    #[test]
    fn curves_are_monotone_and_meet_at_root() {
        let p = ModelParams::base(17.5, 60.0);
        let (lo, hi) = p.bracket();
        let grid: Vec<f64> = (1..200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect();
        let vals: Vec<(f64, f64)> = grid.iter().map(|&x| curves_f1_f2(x, &p).unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[1].0 > w[0].0, "f1 not increasing");
            assert!(w[1].1 < w[0].1, "f2 not decreasing");
        }
        let eq = solve_equilibrium(&p).unwrap();
        let (f1, f2) = curves_f1_f2(eq.y1, &p).unwrap();
        assert!((f1 - f2).abs() < 1e-8);
    }

    #[test]
    fn pole_at_left_end() {
        let p = ModelParams::base(17.5, 60.0);
        assert!(matches!(
            curves_f1_f2(p.bracket().0, &p),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = ModelParams::base(17.5, 60.0);
        p.s = -0.01;
        assert!(matches!(solve_equilibrium(&p), Err(Error::InvalidParams(_))));
    }
}
