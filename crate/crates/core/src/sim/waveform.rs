use log::warn;
use num_complex::Complex64;
use serde::Serialize;

use crate::equilibrium::Equilibrium;
use crate::error::{Error, Result};
use crate::normal_form::{Eigenpair, NormalForm};
use crate::spectral::HopfPoint;

use super::integrator::Trajectory;

/// A uniform time grid `t0 + i h`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub h: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, h: f64, n: usize) -> Self {
        Self { t0, h, n }
    }
}

/// Normal-form approximation of the bifurcating periodic solution at
/// `tau = tau0 + mu`.
///
/// `z` follows the truncated reduced equation
/// `z' = lambda1 z + g20 z^2/2 + g11 |z|^2 + g02 conj(z)^2/2 + g21 z^2 conj(z)/2`
/// starting from the cycle radius, and the state is rebuilt from the
/// center-manifold expansion at `theta = 0`.
pub fn reconstruct_waveform(
    nf: &NormalForm,
    ep: &Eigenpair,
    eq: &Equilibrium,
    hp: &HopfPoint,
    mu: f64,
    grid: TimeGrid,
) -> Result<Trajectory<2>> {
    if !(grid.h > 0.0) || grid.n == 0 {
        return Err(Error::StepConfig {
            detail: format!("waveform grid needs h > 0 and n > 0 (h = {}, n = {})", grid.h, grid.n),
        });
    }
    let r2 = -hp.m * mu / nf.c1.re;
    if !r2.is_finite() || r2 < 0.0 {
        return Err(Error::UndefinedRadius {
            detail: format!(
                "mu = {mu} lies on the side without cycles (mu2 = {:e}, Re C1 = {:e})",
                nf.mu2, nf.c1.re
            ),
        });
    }
    if mu.abs() / hp.tau > 0.1 {
        warn!("mu / tau0 = {} is outside the small-amplitude regime", mu / hp.tau);
    }

    let lambda = ep.lambda;
    let (g20, g11, g02, g21) = (nf.g20, nf.g11, nf.g02, nf.g21);
    let field = |z: Complex64| {
        let zb = z.conj();
        lambda * z + g20 * z * z / 2.0 + g11 * z * zb + g02 * zb * zb / 2.0 + g21 * z * z * zb / 2.0
    };
    let v = ep.v;
    let w20 = nf.manifold.w20.eval(0.0);
    let w11 = nf.manifold.w11.eval(0.0);
    let x0 = eq.as_array();
    let state = |z: Complex64| -> ([f64; 2], [f64; 2]) {
        let dz = field(z);
        let zz = z.norm_sqr();
        let x = std::array::from_fn(|i| {
            x0[i] + 2.0 * (z * v[i]).re + (w20[i] * z * z).re + w11[i].re * zz
        });
        let dx = std::array::from_fn(|i| {
            2.0 * (dz * v[i]).re
                + (2.0 * w20[i] * z * dz).re
                + 2.0 * w11[i].re * (z.conj() * dz).re
        });
        (x, dx)
    };

    let h = grid.h;
    let mut z = Complex64::new(r2.sqrt(), 0.0);
    let mut states = Vec::with_capacity(grid.n);
    let mut slopes = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let (x, dx) = state(z);
        states.push(x);
        slopes.push(dx);
        if i + 1 < grid.n {
            let k1 = field(z);
            let k2 = field(z + 0.5 * h * k1);
            let k3 = field(z + 0.5 * h * k2);
            let k4 = field(z + h * k3);
            z += h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        }
    }
    Ok(Trajectory {
        t0: grid.t0,
        h,
        states,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_equilibrium;
    use crate::model::{eval_derivatives, ModelParams};
    use crate::sim::measure_oscillation;
    use crate::spectral::{char_coeffs, find_hopf, linearize};

    fn setup() -> (NormalForm, Equilibrium, HopfPoint) {
        let p = ModelParams::base(17.5, 60.0);
        let eq = solve_equilibrium(&p).unwrap();
        let d = eval_derivatives(eq.point(), &p).unwrap();
        let lin = linearize(&eq, &d, &p);
        let hp = find_hopf(&char_coeffs(&lin, &d, &p)).unwrap();
        (NormalForm::compute(&hp, &lin, &d, &p).unwrap(), eq, hp)
    }

    #[test]
    fn zero_amplitude_is_the_equilibrium() {
        let (nf, eq, hp) = setup();
        let traj =
            reconstruct_waveform(&nf, &nf.eigenpair, &eq, &hp, 0.0, TimeGrid::new(0.0, 10.0, 50))
                .unwrap();
        for x in &traj.states {
            assert_eq!(*x, eq.as_array());
        }
    }

    #[test]
    fn wrong_side_is_rejected() {
        let (nf, eq, hp) = setup();
        let mu = -nf.mu2.signum();
        let r = reconstruct_waveform(&nf, &nf.eigenpair, &eq, &hp, mu, TimeGrid::new(0.0, 1.0, 10));
        assert!(matches!(r, Err(Error::UndefinedRadius { .. })));
    }

    #[test]
    fn amplitude_scales_as_square_root() {
        let (nf, eq, hp) = setup();
        let h = hp.period() / 200.0;
        let grid = TimeGrid::new(0.0, h, 2001);
        let mus = [0.5, 1.0, 2.0, 4.0];
        let pts: Vec<(f64, f64)> = mus
            .iter()
            .map(|&mu| {
                let traj = reconstruct_waveform(&nf, &nf.eigenpair, &eq, &hp, mu, grid).unwrap();
                let o = measure_oscillation(&traj, 0.0).unwrap();
                assert!((o.period - hp.period()).abs() < 0.01 * hp.period());
                (mu.ln(), o.amplitude.ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / n, sy / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope - 0.5).abs() < 0.1, "slope {slope}");
    }
}
