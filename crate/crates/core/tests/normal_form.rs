//! Normal-form coefficients against independent numerical oracles.

use std::f64::consts::PI;

use hopf_dde::linalg::{self, c, CVec2};
use hopf_dde::model::rhs;
use hopf_dde::normal_form::bilinear_pairing;
use hopf_dde::{analyze, Analysis, Complex64, ModelParams, StatePoint};

fn base(k: f64) -> Analysis {
    analyze(&ModelParams::base(k, 60.0)).unwrap()
}

/// Composite Simpson rule over `[-tau, 0]` for the delayed part of the pairing.
fn pairing_by_quadrature(an: &Analysis, psi: &CVec2, lp: Complex64, phi: &CVec2, lf: Complex64) -> Complex64 {
    let tau = an.hopf.tau;
    let b = &an.linearization.b;
    let psi_bar = linalg::conj(psi);
    let integrand = |xi: f64| {
        let row = linalg::scale(&psi_bar, (lp.conj() * (xi + tau)).exp());
        let col = linalg::real_mat_vec(b, &linalg::scale(phi, (lf * xi).exp()));
        linalg::dot(&row, &col)
    };
    let n = 200;
    let h = tau / n as f64;
    let mut sum = integrand(-tau) + integrand(0.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(-tau + i as f64 * h);
    }
    linalg::dot(&psi_bar, phi) + sum * h / 3.0
}

#[test]
fn pairing_closed_form_matches_quadrature() {
    let an = base(17.5);
    let ep = an.normal_form.eigenpair;
    let lam = ep.lambda;
    let v_bar = linalg::conj(&ep.v);
    for (phi, lf) in [(ep.v, lam), (v_bar, lam.conj())] {
        let closed = bilinear_pairing(&ep.w, lam, &phi, lf, &an.linearization, ep.tau);
        let quad = pairing_by_quadrature(&an, &ep.w, lam, &phi, lf);
        assert!((closed - quad).norm() < 1e-8, "closed {closed} vs quadrature {quad}");
    }
}

#[test]
fn e1_matches_explicit_inverse() {
    let an = base(17.5);
    let nf = &an.normal_form;
    let lam = nf.eigenpair.lambda;
    let (a, b) = (&an.linearization.a, &an.linearization.b);
    let e = (-2.0 * lam * an.hopf.tau).exp();
    let m = [
        [2.0 * lam - a[0][0] - e * b[0][0], -a[0][1] - e * b[0][1]],
        [-a[1][0] - e * b[1][0], 2.0 * lam - a[1][1] - e * b[1][1]],
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let f = nf.f_terms.f20();
    let e1 = [
        (m[1][1] * f[0] - m[0][1] * f[1]) / det,
        (-m[1][0] * f[0] + m[0][0] * f[1]) / det,
    ];
    let diff = linalg::norm(&linalg::sub(&e1, &nf.manifold.e1));
    assert!(diff < 1e-10 * linalg::norm(&e1));
    assert!(nf.residuals.e1 < 1e-10 && nf.residuals.e2 < 1e-10);
}

/// Coefficient of `z^2 conj(z)` in the vector field evaluated along the
/// second-order center-manifold expansion, extracted numerically: the
/// `e^{i phi}` Fourier mode of the nonlinear right-hand side at radius `r`
/// is an odd series in `r` whose cubic coefficient is `F21 / 2`.
#[allow(clippy::needless_range_loop)]
fn f21_by_fourier(an: &Analysis) -> CVec2 {
    let nf = &an.normal_form;
    let ep = &nf.eigenpair;
    let tau = an.hopf.tau;
    let x0 = an.equilibrium.as_array();
    let w20 = [nf.manifold.w20.eval(0.0), nf.manifold.w20.eval(-tau)];
    let w11 = [nf.manifold.w11.eval(0.0), nf.manifold.w11.eval(-tau)];
    let phi = [ep.phi(0.0), ep.phi(-tau)];
    let state = |z: Complex64, at: usize| -> StatePoint {
        let zb = z.conj();
        let x: [f64; 2] = std::array::from_fn(|i| {
            let dev = z * phi[at][i] + zb * phi[at][i].conj()
                + w20[at][i] * z * z / 2.0
                + w11[at][i] * z * zb
                + (w20[at][i] * z * z).conj() / 2.0;
            x0[i] + dev.re
        });
        StatePoint::new(x[0], x[1]).unwrap()
    };

    let angles = 64;
    let radii: Vec<f64> = (1..=10).map(|j| 0.3 * j as f64).collect();
    let modes: Vec<[Complex64; 2]> = radii
        .iter()
        .map(|&r| {
            let mut acc = [c(0.0, 0.0); 2];
            for m in 0..angles {
                let ang = 2.0 * PI * m as f64 / angles as f64;
                let z = Complex64::from_polar(r, ang);
                let (d1, d2) = rhs(state(z, 0), state(z, 1), &an.params).unwrap();
                let weight = Complex64::from_polar(1.0 / angles as f64, -ang);
                acc[0] += d1 * weight;
                acc[1] += d2 * weight;
            }
            acc
        })
        .collect();

    // Least squares in the odd powers r, r^3, r^5, r^7.
    let powers = [1, 3, 5, 7];
    let n = powers.len();
    let mut out = [c(0.0, 0.0); 2];
    for comp in 0..2 {
        let mut ata = vec![vec![0.0; n]; n];
        let mut atb = vec![c(0.0, 0.0); n];
        for (r, mode) in radii.iter().zip(&modes) {
            let row: Vec<f64> = powers.iter().map(|&p| r.powi(p)).collect();
            for i in 0..n {
                for j in 0..n {
                    ata[i][j] += row[i] * row[j];
                }
                atb[i] += row[i] * mode[comp];
            }
        }
        // Gaussian elimination on the small normal equations.
        for col in 0..n {
            for rr in col + 1..n {
                let f = ata[rr][col] / ata[col][col];
                for j in col..n {
                    ata[rr][j] -= f * ata[col][j];
                }
                let t = atb[col] * f;
                atb[rr] -= t;
            }
        }
        let mut sol = vec![c(0.0, 0.0); n];
        for i in (0..n).rev() {
            let mut s = atb[i];
            for j in i + 1..n {
                s -= sol[j] * ata[i][j];
            }
            sol[i] = s / ata[i][i];
        }
        out[comp] = 2.0 * sol[1];
    }
    out
}

#[test]
fn cubic_contraction_matches_fourier_extraction() {
    let an = base(17.5);
    let oracle = f21_by_fourier(&an);
    let f21 = an.normal_form.f_terms.f21();
    for i in 0..2 {
        let err = (oracle[i] - f21[i]).norm() / f21[i].norm();
        assert!(err < 1e-4, "component {i}: oracle {} vs closed form {}", oracle[i], f21[i]);
    }
    let g21 = linalg::dot(&an.normal_form.eigenpair.w_bar(), &oracle);
    assert!((g21 - an.normal_form.g21).norm() < 1e-4 * g21.norm());
}

#[test]
fn supercritical_at_reference_configuration() {
    let nf = base(17.5).normal_form;
    assert!(nf.mu2 > 0.0 && nf.beta2 < 0.0 && nf.t2 > 0.0);
    assert_eq!(
        nf.classification.to_string(),
        "supercritical, orbitally stable, period increasing"
    );
}
