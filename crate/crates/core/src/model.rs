//! The delayed p53–Mdm2 feedback model.
//!
//! `y1` is the total p53 molecule count and `y2` the total Mdm2 protein
//! count. The complex concentration `f(y1, y2)` is the smaller root of the
//! binding quadratic and `g` is the occupancy of the Mdm2 gene promoter.

use serde::Serialize;

use crate::error::{Error, Result};

/// Rate constants and delay of the model. All fields must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// p53 production rate.
    pub s: f64,
    /// Ubiquitin-pathway degradation rate of p53.
    pub a: f64,
    /// Spontaneous p53 decay rate.
    pub b: f64,
    /// Mdm2 production constant.
    pub c: f64,
    /// Mdm2 decay rate.
    pub d: f64,
    /// Dissociation constant of the p53–Mdm2 complex.
    pub k: f64,
    /// Dissociation constant of the complex from the Mdm2 gene.
    pub k1: f64,
    /// Transcription/translation delay.
    pub tau: f64,
}

impl ModelParams {
    pub const BASE_S: f64 = 0.01;
    pub const BASE_A: f64 = 3e-2;
    pub const BASE_B: f64 = 1e-4;
    pub const BASE_C: f64 = 1.0;
    pub const BASE_D: f64 = 1e-2;
    pub const BASE_K1: f64 = 28.0;

    /// The literature rate set with the given dissociation constant and delay.
    pub fn base(k: f64, tau: f64) -> Self {
        Self {
            s: Self::BASE_S,
            a: Self::BASE_A,
            b: Self::BASE_B,
            c: Self::BASE_C,
            d: Self::BASE_D,
            k,
            k1: Self::BASE_K1,
            tau,
        }
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }

    pub fn with_k(self, k: f64) -> Self {
        Self { k, ..self }
    }

    /// Names and values in declaration order.
    pub fn fields(&self) -> [(&'static str, f64); 8] {
        [
            ("s", self.s),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("k", self.k),
            ("k1", self.k1),
            ("tau", self.tau),
        ]
    }

    /// Lists every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .fields()
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(name, v)| format!("{name} must be finite and strictly positive (got {v})"))
            .collect();
        if out.is_empty() {
            let (lo, hi) = self.bracket();
            if !(hi > lo) {
                out.push(format!("bracket (s/(a+b), s/b) = ({lo}, {hi}) is empty"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    /// The open interval `(s/(a+b), s/b)` that contains the equilibrium p53 level.
    pub fn bracket(&self) -> (f64, f64) {
        (self.s / (self.a + self.b), self.s / self.b)
    }
}

/// A point of the (non-negative) state space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatePoint {
    pub y1: f64,
    pub y2: f64,
}

impl StatePoint {
    pub fn new(y1: f64, y2: f64) -> Result<Self> {
        let p = Self { y1, y2 };
        p.check("StatePoint::new")?;
        Ok(p)
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.y1, self.y2]
    }

    fn check(&self, operation: &'static str) -> Result<()> {
        if self.y1.is_finite() && self.y2.is_finite() && self.y1 >= 0.0 && self.y2 >= 0.0 {
            Ok(())
        } else {
            Err(Error::Domain {
                operation,
                detail: format!("state ({}, {}) must be finite and non-negative", self.y1, self.y2),
            })
        }
    }
}

impl From<[f64; 2]> for StatePoint {
    fn from(v: [f64; 2]) -> Self {
        Self { y1: v[0], y2: v[1] }
    }
}

/// Partial derivatives of a scalar function of `(y1, y2)` up to third order.
/// `dij` is the derivative taken `i` times in `y1` and `j` times in `y2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Partials {
    pub d10: f64,
    pub d01: f64,
    pub d20: f64,
    pub d11: f64,
    pub d02: f64,
    pub d30: f64,
    pub d21: f64,
    pub d12: f64,
    pub d03: f64,
}

impl Partials {
    pub fn as_array(&self) -> [f64; 9] {
        [
            self.d10, self.d01, self.d20, self.d11, self.d02, self.d30, self.d21, self.d12,
            self.d03,
        ]
    }

    pub const NAMES: [&'static str; 9] =
        ["10", "01", "20", "11", "02", "30", "21", "12", "03"];
}

/// Partials of `f` (the `rho` family) and `g` (the `gamma` family).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeTensors {
    pub rho: Partials,
    pub gamma: Partials,
}

/// Complex concentration, the smaller root of `c^2 - (y1+y2+k)c + y1 y2 = 0`.
pub fn eval_f(p: StatePoint, params: &ModelParams) -> Result<f64> {
    p.check("eval_f")?;
    Ok(f_unchecked(p.y1, p.y2, params.k))
}

/// Promoter occupancy `(y1 - f) / (k1 + y1 - f)`.
pub fn eval_g(p: StatePoint, params: &ModelParams) -> Result<f64> {
    p.check("eval_g")?;
    let free = p.y1 - f_unchecked(p.y1, p.y2, params.k);
    let den = params.k1 + free;
    if den <= 0.0 {
        return Err(Error::Domain {
            operation: "eval_g",
            detail: format!("denominator k1 + y1 - f = {den} is not positive"),
        });
    }
    Ok(free / den)
}

/// The delayed vector field at the current and the delayed state.
pub fn rhs(current: StatePoint, delayed: StatePoint, params: &ModelParams) -> Result<(f64, f64)> {
    current.check("rhs")?;
    delayed.check("rhs")?;
    let [d1, d2] = rhs_unchecked(current.as_array(), delayed.as_array(), params);
    Ok((d1, d2))
}

// `(y1 - y2)^2 + 2k(y1 + y2) + k^2`, written so it stays accurate when y1 ≈ y2.
#[inline]
fn radicand(y1: f64, y2: f64, k: f64) -> f64 {
    let diff = y1 - y2;
    diff * diff + k * (2.0 * (y1 + y2) + k)
}

#[inline]
pub(crate) fn f_unchecked(y1: f64, y2: f64, k: f64) -> f64 {
    let sum = y1 + y2 + k;
    let root = radicand(y1, y2, k).sqrt();
    // Product form of the smaller root avoids cancellation in sum - root.
    if sum > 0.0 {
        2.0 * y1 * y2 / (sum + root)
    } else {
        0.5 * (sum - root)
    }
}

#[inline]
pub(crate) fn g_unchecked(y1: f64, y2: f64, k: f64, k1: f64) -> f64 {
    let free = y1 - f_unchecked(y1, y2, k);
    free / (k1 + free)
}

#[inline]
pub(crate) fn rhs_unchecked(current: [f64; 2], delayed: [f64; 2], p: &ModelParams) -> [f64; 2] {
    let f = f_unchecked(current[0], current[1], p.k);
    let g = g_unchecked(delayed[0], delayed[1], p.k, p.k1);
    [p.s - p.a * f - p.b * current[0], p.c * g - p.d * current[1]]
}

/// Closed-form partial derivatives of `f` and `g` up to third order.
pub fn eval_derivatives(p: StatePoint, params: &ModelParams) -> Result<DerivativeTensors> {
    if !(p.y1 > 0.0 && p.y2 > 0.0 && p.y1.is_finite() && p.y2.is_finite()) {
        return Err(Error::Domain {
            operation: "eval_derivatives",
            detail: format!("state ({}, {}) must be strictly positive", p.y1, p.y2),
        });
    }
    let (x, y, k, k1) = (p.y1, p.y2, params.k, params.k1);
    let sum = x + y + k;
    let big_r = radicand(x, y, k);
    if big_r < 1e-12 * sum * sum {
        return Err(Error::Singularity { radicand: big_r });
    }

    // r = sqrt(R) with R quadratic, so all third derivatives of R vanish.
    let r = big_r.sqrt();
    let r3 = r * big_r;
    let r5 = r3 * big_r;
    let grad = [2.0 * sum - 4.0 * y, 2.0 * sum - 4.0 * x];
    let hess = [[2.0, -2.0], [-2.0, 2.0]];

    let r1 = |i: usize| 0.5 * grad[i] / r;
    let r2 = |i: usize, j: usize| 0.5 * hess[i][j] / r - 0.25 * grad[i] * grad[j] / r3;
    let r3d = |i: usize, j: usize, l: usize| {
        -0.25 * (hess[i][j] * grad[l] + hess[i][l] * grad[j] + hess[j][l] * grad[i]) / r3
            + 0.375 * grad[i] * grad[j] * grad[l] / r5
    };

    // f = (sum - r) / 2
    let f1 = |i: usize| 0.5 * (1.0 - r1(i));
    let f2 = |i: usize, j: usize| -0.5 * r2(i, j);
    let f3 = |i: usize, j: usize, l: usize| -0.5 * r3d(i, j, l);

    let rho = Partials {
        d10: f1(0),
        d01: f1(1),
        d20: f2(0, 0),
        d11: f2(0, 1),
        d02: f2(1, 1),
        d30: f3(0, 0, 0),
        d21: f3(0, 0, 1),
        d12: f3(0, 1, 1),
        d03: f3(1, 1, 1),
    };

    // g = G(u) with u = y1 - f and G(u) = u / (k1 + u).
    let u = x - f_unchecked(x, y, k);
    let den = k1 + u;
    let g1d = k1 / (den * den);
    let g2d = -2.0 * k1 / (den * den * den);
    let g3d = 6.0 * k1 / (den * den * den * den);
    let u1 = |i: usize| if i == 0 { 1.0 - f1(0) } else { -f1(1) };
    let u2 = |i: usize, j: usize| -f2(i, j);
    let u3 = |i: usize, j: usize, l: usize| -f3(i, j, l);

    let gd1 = |i: usize| g1d * u1(i);
    let gd2 = |i: usize, j: usize| g2d * u1(i) * u1(j) + g1d * u2(i, j);
    let gd3 = |i: usize, j: usize, l: usize| {
        g3d * u1(i) * u1(j) * u1(l)
            + g2d * (u2(i, j) * u1(l) + u2(i, l) * u1(j) + u2(j, l) * u1(i))
            + g1d * u3(i, j, l)
    };

    let gamma = Partials {
        d10: gd1(0),
        d01: gd1(1),
        d20: gd2(0, 0),
        d11: gd2(0, 1),
        d02: gd2(1, 1),
        d30: gd3(0, 0, 0),
        d21: gd3(0, 0, 1),
        d12: gd3(0, 1, 1),
        d03: gd3(1, 1, 1),
    };

    Ok(DerivativeTensors { rho, gamma })
}
