//! Spectral quantities against root continuation and randomized parameter sets.

use hopf_dde::spectral::{newton_root, rightmost_root};
use hopf_dde::{analyze, Analysis, Complex64, Error, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `d lambda / d tau` by following the critical root to `tau0 +- h`.
fn continued_derivative(an: &Analysis) -> Complex64 {
    let (tau0, cc) = (an.hopf.tau, &an.char_coeffs);
    let h = 1e-4 * tau0;
    let seed = an.hopf.lambda1;
    let up = newton_root(seed, tau0 + h, cc).unwrap();
    let down = newton_root(seed, tau0 - h, cc).unwrap();
    (up - down) / (2.0 * h)
}

/// Base parameters scaled by random factors in `[1/2, 2]`, with `k` log-uniform
/// in `[5, 200]`, filtered to sets that admit a Hopf point.
fn random_hopf_sets(count: usize, seed: u64) -> Vec<Analysis> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        assert!(tries < 100 * count, "too few parameter sets admit a Hopf point");
        let mut factor = || 2f64.powf(rng.gen_range(-1.0..1.0));
        let mut p = ModelParams::base(17.5, 60.0);
        p.s *= factor();
        p.a *= factor();
        p.b *= factor();
        p.c *= factor();
        p.d *= factor();
        p.k1 *= factor();
        p.k = (rng.gen_range(5f64.ln()..200f64.ln())).exp();
        match analyze(&p) {
            Ok(an) => out.push(an),
            Err(Error::NoCriticalFrequency) => {}
            Err(e) => panic!("unexpected failure for {p:?}: {e}"),
        }
    }
    out
}

#[test]
fn transversality_matches_continuation() {
    let an = analyze(&ModelParams::base(17.5, 60.0)).unwrap();
    let hp = &an.hopf;
    let cont = continued_derivative(&an);
    assert!(rel(hp.m, cont.re) < 1e-4, "M {} vs continuation {}", hp.m, cont.re);
    assert!(rel(hp.n, cont.im) < 1e-4, "N {} vs continuation {}", hp.n, cont.im);
    assert!(rel(hp.m, hp.dlambda_implicit.re) < 1e-8);
    assert!(rel(hp.n, hp.dlambda_implicit.im) < 1e-8);
}

#[test]
fn stability_switches_at_first_critical_delay() {
    let an = analyze(&ModelParams::base(17.5, 60.0)).unwrap();
    let tau0 = an.hopf.tau;
    for (factor, stable) in [(0.5, true), (0.9, true), (0.99, true), (1.01, false), (1.1, false)] {
        let z = rightmost_root(&an.char_coeffs, factor * tau0).unwrap();
        assert_eq!(z.re < 0.0, stable, "tau = {factor} tau0: rightmost root {z}");
    }
}

#[test]
fn randomized_sets_satisfy_identities() {
    for an in random_hopf_sets(20, 7) {
        let (hp, nf) = (&an.hopf, &an.normal_form);
        assert!(hp.residual < 1e-9);
        assert_eq!(nf.beta2, 2.0 * nf.c1.re);
        assert!((nf.mu2 * hp.m + nf.c1.re).abs() <= 4.0 * f64::EPSILON * nf.c1.re.abs());
        assert!(nf.residuals.eigen < 1e-10);
        assert!(nf.residuals.pairing < 1e-8 && nf.residuals.pairing_conj < 1e-8);
        assert!(nf.residuals.e1 < 1e-10 && nf.residuals.e2 < 1e-10);
        let cont = continued_derivative(&an);
        assert!(rel(hp.m, cont.re) < 1e-3, "{:?}", an.params);
    }
}
