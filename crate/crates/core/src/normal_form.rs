//! Center-manifold reduction at the Hopf point.
//!
//! On the center manifold the flow is `z' = lambda1 z + g(z, conj z)` with
//!
//! ```text
//! g = g20 z^2/2 + g11 z conj(z) + g02 conj(z)^2/2 + g21 z^2 conj(z)/2 + ...
//! ```
//!
//! The coefficients are contractions of the quadratic and cubic Taylor terms
//! of the vector field along the critical eigenfunction `Phi(theta) = v
//! e^{lambda1 theta}`, projected with the adjoint eigenvector. The first
//! Lyapunov quantity `C1(0)` then gives the direction (`mu2`), orbital
//! stability (`beta2`) and period trend (`T2`) of the bifurcating cycles.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CVec2};
use crate::model::{DerivativeTensors, ModelParams};
use crate::spectral::{eigen_matrix, HopfPoint, LinearizationPair};

/// Right eigenvector `v` and adjoint eigenvector `w` of the critical pair.
///
/// `Phi(theta) = v e^{lambda theta}` on `[-tau, 0]` and
/// `Psi(s) = w e^{lambda s}` on `[0, tau]`, normalized so that
/// `<Psi, Phi> = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenpair {
    pub lambda: Complex64,
    pub tau: f64,
    pub v: CVec2,
    pub w: CVec2,
    /// Pairing of the unnormalized adjoint with `Phi`; `w2 = 1 / conj(eta)`.
    pub eta: Complex64,
}

impl Eigenpair {
    pub fn phi(&self, theta: f64) -> CVec2 {
        linalg::scale(&self.v, (self.lambda * theta).exp())
    }

    pub fn psi(&self, s: f64) -> CVec2 {
        linalg::scale(&self.w, (self.lambda * s).exp())
    }

    /// `conj(w)`, the row vector used for projections.
    pub fn w_bar(&self) -> CVec2 {
        linalg::conj(&self.w)
    }
}

/// `int_{-tau}^{0} e^{rate xi} d xi`, with a series near `rate = 0`.
fn exp_integral(rate: Complex64, tau: f64) -> Complex64 {
    let x = rate * tau;
    if x.norm() < 1e-4 {
        // tau * (1 - x/2 + x^2/6 - x^3/24)
        tau * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0)
    } else {
        (1.0 - (-x).exp()) / rate
    }
}

/// The bilinear form `<Psi, Phi>` for `Psi(s) = psi e^{lambda_psi s}` and
/// `Phi(theta) = phi e^{lambda_phi theta}`.
///
/// The delayed part of the linear operator is a point mass `B` at
/// `theta = -tau`, so the double integral collapses to
/// `int_{-tau}^0 conj(Psi)(xi + tau)^T B Phi(xi) d xi`.
pub fn bilinear_pairing(
    psi: &CVec2,
    lambda_psi: Complex64,
    phi: &CVec2,
    lambda_phi: Complex64,
    lin: &LinearizationPair,
    tau: f64,
) -> Complex64 {
    let psi_bar = linalg::conj(psi);
    let direct = linalg::dot(&psi_bar, phi);
    let bphi = linalg::real_mat_vec(&lin.b, phi);
    let coupling = linalg::dot(&psi_bar, &bphi);
    if coupling == c(0.0, 0.0) {
        return direct;
    }
    let rate_bar = lambda_psi.conj();
    direct + coupling * (rate_bar * tau).exp() * exp_integral(rate_bar + lambda_phi, tau)
}

pub fn eigenvectors(
    hp: &HopfPoint,
    lin: &LinearizationPair,
    derivs: &DerivativeTensors,
    p: &ModelParams,
) -> Result<Eigenpair> {
    let lambda = hp.lambda1;
    let tau = hp.tau;
    let (rho, gamma) = (&derivs.rho, &derivs.gamma);
    let own = p.b + p.a * rho.d10 + lambda;
    let v = [c(-p.a * rho.d01, 0.0), own];
    if linalg::norm(&v) < 1e-14 {
        return Err(Error::Degenerate {
            operation: "eigenvectors",
            detail: "right eigenvector vanishes".into(),
        });
    }
    // Left null vector of A + e^{-lambda tau} B - lambda I, with second entry 1.
    let e = (-lambda * tau).exp();
    let w_bar_raw = [p.c * gamma.d10 * e / own, c(1.0, 0.0)];
    let w_raw = linalg::conj(&w_bar_raw);
    let eta = bilinear_pairing(&w_raw, lambda, &v, lambda, lin, tau);
    if eta.norm() < 1e-300 {
        return Err(Error::Degenerate {
            operation: "eigenvectors",
            detail: "adjoint pairing vanishes".into(),
        });
    }
    let w = linalg::scale(&w_raw, c(1.0, 0.0) / eta.conj());
    Ok(Eigenpair {
        lambda,
        tau,
        v,
        w,
        eta,
    })
}

/// Quadratic and cubic Taylor contractions of the two vector-field components.
/// Superscript 1/2 in the usual notation becomes `f1_`/`f2_` here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FTerms {
    pub f1_20: Complex64,
    pub f2_20: Complex64,
    pub f1_11: Complex64,
    pub f2_11: Complex64,
    pub f1_02: Complex64,
    pub f2_02: Complex64,
    pub f1_21: Complex64,
    pub f2_21: Complex64,
}

impl FTerms {
    pub fn f20(&self) -> CVec2 {
        [self.f1_20, self.f2_20]
    }
    pub fn f11(&self) -> CVec2 {
        [self.f1_11, self.f2_11]
    }
    pub fn f02(&self) -> CVec2 {
        [self.f1_02, self.f2_02]
    }
    pub fn f21(&self) -> CVec2 {
        [self.f1_21, self.f2_21]
    }
}

/// The `z^2`, `z conj z` and `conj z^2` contractions (`F20`, `F11`, `F02`).
pub fn quadratic_terms(ep: &Eigenpair, derivs: &DerivativeTensors, p: &ModelParams) -> [CVec2; 3] {
    let (r, g) = (&derivs.rho, &derivs.gamma);
    let [v1, v2] = ep.v;
    let (u1, u2) = (v1.conj(), v2.conj());
    let e2 = (-2.0 * ep.lambda * ep.tau).exp();
    let f1_20 = -p.a * (r.d20 * v1 * v1 + 2.0 * r.d11 * v1 * v2 + r.d02 * v2 * v2);
    let f2_20 = p.c * (g.d20 * v1 * v1 + g.d02 * v2 * v2 + 2.0 * g.d11 * v1 * v2) * e2;
    let f1_11 = -p.a * (r.d20 * v1 * u1 + r.d11 * (v1 * u2 + u1 * v2) + r.d02 * v2 * u2);
    let f2_11 = p.c * (g.d20 * v1 * u1 + g.d11 * (v1 * u2 + u1 * v2) + g.d02 * v2 * u2);
    [
        [f1_20, f2_20],
        [f1_11, f2_11],
        [f1_20.conj(), f2_20.conj()],
    ]
}

/// A finite sum of exponential modes `sum_j coeff_j e^{rate_j theta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSum {
    pub modes: [(Complex64, CVec2); 3],
}

impl ModeSum {
    pub fn eval(&self, theta: f64) -> CVec2 {
        self.modes.iter().fold([c(0.0, 0.0); 2], |acc, (rate, coeff)| {
            linalg::add(&acc, &linalg::scale(coeff, (rate * theta).exp()))
        })
    }

    pub fn conj(&self) -> Self {
        let mut modes = self.modes;
        for m in &mut modes {
            *m = (m.0.conj(), linalg::conj(&m.1));
        }
        Self { modes }
    }
}

/// Second-order center-manifold coefficients `w20(theta)`, `w11(theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterManifold {
    pub w20: ModeSum,
    pub w11: ModeSum,
    pub e1: CVec2,
    pub e2: CVec2,
    /// Back-substitution residuals, relative to the right-hand sides.
    pub e1_residual: f64,
    pub e2_residual: f64,
}

impl CenterManifold {
    pub fn w02(&self) -> ModeSum {
        self.w20.conj()
    }
}

const RESONANCE_RTOL: f64 = 1e-8;

fn relative_residual(m: &linalg::CMat2, x: &CVec2, rhs: &CVec2) -> f64 {
    let r = linalg::sub(&linalg::mat_vec(m, x), rhs);
    let s = linalg::norm(rhs);
    if s == 0.0 {
        linalg::norm(&r)
    } else {
        linalg::norm(&r) / s
    }
}

fn check_nonresonant(m: &linalg::CMat2, what: &str) -> Result<()> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = (m[0][0].norm() + m[0][1].norm()) * (m[1][0].norm() + m[1][1].norm());
    if det.norm() <= RESONANCE_RTOL * scale {
        return Err(Error::Resonance {
            detail: format!("{what}: |det| = {:e}", det.norm()),
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn center_manifold_w(
    ep: &Eigenpair,
    g20: Complex64,
    g11: Complex64,
    g02: Complex64,
    hp: &HopfPoint,
    lin: &LinearizationPair,
    f20: &CVec2,
    f11: &CVec2,
) -> Result<CenterManifold> {
    let lambda = ep.lambda;
    let tau = hp.tau;

    // (2 lambda I - A - e^{-2 lambda tau} B) E1 = F20
    let m1 = {
        let mut m = eigen_matrix(lin, 2.0 * lambda, tau);
        for row in &mut m {
            for z in row.iter_mut() {
                *z = -*z;
            }
        }
        m
    };
    check_nonresonant(&m1, "2 lambda1 is a characteristic root")?;
    let e1 = linalg::solve(&m1, f20, 1e-14).ok_or_else(|| Error::Resonance {
        detail: "E1 system is singular".into(),
    })?;

    // -(A + B) E2 = F11
    let m2 = {
        let mut m = linalg::to_complex(&lin.a);
        for (row, brow) in m.iter_mut().zip(&lin.b) {
            for (x, b) in row.iter_mut().zip(brow) {
                *x = -(*x + b);
            }
        }
        m
    };
    check_nonresonant(&m2, "0 is a characteristic root")?;
    let e2 = linalg::solve(&m2, f11, 1e-14).ok_or_else(|| Error::Resonance {
        detail: "E2 system is singular".into(),
    })?;

    let v = ep.v;
    let v_bar = linalg::conj(&v);
    let lam_bar = lambda.conj();
    let zero = c(0.0, 0.0);
    let w20 = ModeSum {
        modes: [
            (lambda, linalg::scale(&v, -g20 / lambda)),
            (lam_bar, linalg::scale(&v_bar, -g02.conj() / (3.0 * lambda))),
            (2.0 * lambda, e1),
        ],
    };
    let w11 = ModeSum {
        modes: [
            (lambda, linalg::scale(&v, g11 / lambda)),
            (lam_bar, linalg::scale(&v_bar, -g11.conj() / lambda)),
            (zero, e2),
        ],
    };
    Ok(CenterManifold {
        w20,
        w11,
        e1,
        e2,
        e1_residual: relative_residual(&m1, &e1, f20),
        e2_residual: relative_residual(&m2, &e2, f11),
    })
}

/// All quadratic and cubic contractions, given the second-order manifold
/// coefficients at `theta = 0` and `theta = -tau`.
pub fn f_terms(
    ep: &Eigenpair,
    derivs: &DerivativeTensors,
    cm: &CenterManifold,
    p: &ModelParams,
) -> FTerms {
    let [f20, f11, f02] = quadratic_terms(ep, derivs, p);
    let (r, g) = (&derivs.rho, &derivs.gamma);
    let [v1, v2] = ep.v;
    let (u1, u2) = (v1.conj(), v2.conj());
    let tau = ep.tau;
    let em = (-ep.lambda * tau).exp();
    let ep_ = (ep.lambda * tau).exp();

    let [a20, b20] = cm.w20.eval(0.0);
    let [a11, b11] = cm.w11.eval(0.0);
    let f1_21 = -p.a
        * (r.d20 * (2.0 * v1 * a11 + u1 * a20)
            + 2.0 * r.d11 * (v1 * b11 + u1 * b20 / 2.0 + u2 * a20 / 2.0 + v2 * a11)
            + r.d02 * (2.0 * v2 * b11 + u2 * b20)
            + r.d30 * v1 * v1 * u1
            + 2.0 * r.d21 * v1 * v2 * u1
            + 2.0 * r.d12 * v1 * v2 * u2
            + r.d03 * v2 * v2 * u2
            + r.d21 * v1 * v1 * u2
            + r.d12 * u1 * v2 * v2);

    let [a20, b20] = cm.w20.eval(-tau);
    let [a11, b11] = cm.w11.eval(-tau);
    let f2_21 = p.c
        * (g.d20 * (2.0 * v1 * a11 * em + u1 * a20 * ep_)
            + 2.0 * g.d11 * (v1 * b11 * em + u1 * b20 * ep_ / 2.0 + u2 * a20 * ep_ / 2.0 + v2 * a11 * em)
            + g.d02 * (2.0 * v2 * b11 * em + u2 * b20 * ep_)
            + g.d30 * v1 * v1 * u1 * em
            + g.d21 * (2.0 * v1 * u1 * v2 * em + v1 * v1 * u2 * em)
            + g.d12 * (2.0 * v1 * v2 * u2 * em + u1 * v2 * v2 * em)
            + g.d03 * v2 * v2 * u2 * em);

    FTerms {
        f1_20: f20[0],
        f2_20: f20[1],
        f1_11: f11[0],
        f2_11: f11[1],
        f1_02: f02[0],
        f2_02: f02[1],
        f1_21,
        f2_21,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Supercritical,
    Subcritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitalStability {
    OrbitallyStable,
    OrbitallyUnstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodTrend {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub direction: Direction,
    pub stability: OrbitalStability,
    pub period: PeriodTrend,
}

impl Classification {
    pub fn from_signs(mu2: f64, beta2: f64, t2: f64) -> Self {
        Self {
            direction: if mu2 > 0.0 {
                Direction::Supercritical
            } else {
                Direction::Subcritical
            },
            stability: if beta2 < 0.0 {
                OrbitalStability::OrbitallyStable
            } else {
                OrbitalStability::OrbitallyUnstable
            },
            period: if t2 > 0.0 {
                PeriodTrend::Increasing
            } else {
                PeriodTrend::Decreasing
            },
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = match self.direction {
            Direction::Supercritical => "supercritical",
            Direction::Subcritical => "subcritical",
        };
        let stab = match self.stability {
            OrbitalStability::OrbitallyStable => "orbitally stable",
            OrbitalStability::OrbitallyUnstable => "orbitally unstable",
        };
        let per = match self.period {
            PeriodTrend::Increasing => "period increasing",
            PeriodTrend::Decreasing => "period decreasing",
        };
        write!(f, "{dir}, {stab}, {per}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovQuantities {
    pub c1: Complex64,
    pub mu2: f64,
    pub beta2: f64,
    pub t2: f64,
    pub classification: Classification,
}

pub fn lyapunov_quantities(
    g20: Complex64,
    g11: Complex64,
    g02: Complex64,
    g21: Complex64,
    hp: &HopfPoint,
) -> Result<LyapunovQuantities> {
    let omega = hp.lambda1.im;
    if hp.m == 0.0 || omega == 0.0 {
        return Err(Error::Degenerate {
            operation: "lyapunov_quantities",
            detail: format!("M = {}, omega = {omega}", hp.m),
        });
    }
    let c1 = c(0.0, 1.0) / (2.0 * omega)
        * (g20 * g11 - 2.0 * g11.norm_sqr() - g02.norm_sqr() / 3.0)
        + g21 / 2.0;
    if c1.re.abs() < 1e-18 {
        return Err(Error::Degenerate {
            operation: "lyapunov_quantities",
            detail: format!("Re C1(0) = {:e}", c1.re),
        });
    }
    let mu2 = -c1.re / hp.m;
    let t2 = -(c1.im + mu2 * hp.n) / omega;
    let beta2 = 2.0 * c1.re;
    Ok(LyapunovQuantities {
        c1,
        mu2,
        beta2,
        t2,
        classification: Classification::from_signs(mu2, beta2, t2),
    })
}

/// Diagnostics carried with the normal form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalFormResiduals {
    /// `|(A + e^{-lambda tau} B - lambda I) v| / |v|`.
    pub eigen: f64,
    /// `|conj(w)^T (A + e^{-lambda tau} B - lambda I)| / |w|`.
    pub adjoint: f64,
    /// `|<Psi, Phi> - 1|`.
    pub pairing: f64,
    /// `|<Psi, conj Phi>|`.
    pub pairing_conj: f64,
    pub e1: f64,
    pub e2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalForm {
    pub eigenpair: Eigenpair,
    pub f_terms: FTerms,
    pub g20: Complex64,
    pub g11: Complex64,
    pub g02: Complex64,
    pub g21: Complex64,
    pub manifold: CenterManifold,
    pub c1: Complex64,
    pub mu2: f64,
    pub beta2: f64,
    pub t2: f64,
    pub classification: Classification,
    pub residuals: NormalFormResiduals,
}

impl NormalForm {
    /// Full reduction at `hp`. Passing `hp.conjugate()` runs the same
    /// computation on the conjugate eigenvalue.
    pub fn compute(
        hp: &HopfPoint,
        lin: &LinearizationPair,
        derivs: &DerivativeTensors,
        p: &ModelParams,
    ) -> Result<Self> {
        let ep = eigenvectors(hp, lin, derivs, p)?;
        let w_bar = ep.w_bar();
        let [f20, f11, f02] = quadratic_terms(&ep, derivs, p);
        let g20 = linalg::dot(&w_bar, &f20);
        let g11 = linalg::dot(&w_bar, &f11);
        let g02 = linalg::dot(&w_bar, &f02);
        let manifold = center_manifold_w(&ep, g20, g11, g02, hp, lin, &f20, &f11)?;
        let f_terms = f_terms(&ep, derivs, &manifold, p);
        let g21 = linalg::dot(&w_bar, &f_terms.f21());
        let lq = lyapunov_quantities(g20, g11, g02, g21, hp)?;

        let m = eigen_matrix(lin, ep.lambda, ep.tau);
        let residuals = NormalFormResiduals {
            eigen: linalg::norm(&linalg::mat_vec(&m, &ep.v)) / linalg::norm(&ep.v),
            adjoint: linalg::norm(&linalg::vec_mat(&w_bar, &m)) / linalg::norm(&ep.w),
            pairing: (bilinear_pairing(&ep.w, ep.lambda, &ep.v, ep.lambda, lin, ep.tau)
                - 1.0)
                .norm(),
            pairing_conj: bilinear_pairing(
                &ep.w,
                ep.lambda,
                &linalg::conj(&ep.v),
                ep.lambda.conj(),
                lin,
                ep.tau,
            )
            .norm(),
            e1: manifold.e1_residual,
            e2: manifold.e2_residual,
        };

        Ok(Self {
            eigenpair: ep,
            f_terms,
            g20,
            g11,
            g02,
            g21,
            manifold,
            c1: lq.c1,
            mu2: lq.mu2,
            beta2: lq.beta2,
            t2: lq.t2,
            classification: lq.classification,
            residuals,
        })
    }

    /// Critical-mode amplitude `|z|` of the cycle at `tau = tau0 + mu`,
    /// `sqrt(-M mu / Re C1(0))`. `None` on the side where no cycle exists.
    pub fn cycle_radius(&self, hp: &HopfPoint, mu: f64) -> Option<f64> {
        let r2 = -hp.m * mu / self.c1.re;
        (r2 >= 0.0).then(|| r2.sqrt())
    }

    /// Predicted half peak-to-trough of `y1` on the cycle, to leading order.
    pub fn predicted_y1_amplitude(&self, hp: &HopfPoint, mu: f64) -> Option<f64> {
        self.cycle_radius(hp, mu)
            .map(|r| 2.0 * r * self.eigenpair.v[0].norm())
    }
}
