use crate::error::{Error, Result};

/// Cubic Hermite interpolation on `[0, h]` at offset `s`.
pub fn hermite<const D: usize>(
    x0: &[f64; D],
    m0: &[f64; D],
    x1: &[f64; D],
    m1: &[f64; D],
    h: f64,
    s: f64,
) -> [f64; D] {
    let u = s / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    std::array::from_fn(|i| h00 * x0[i] + h10 * h * m0[i] + h01 * x1[i] + h11 * h * m1[i])
}

/// Hermite value at the midpoint of a knot interval of width `h`.
#[inline]
pub fn hermite_midpoint<const D: usize>(
    x0: &[f64; D],
    m0: &[f64; D],
    x1: &[f64; D],
    m1: &[f64; D],
    h: f64,
) -> [f64; D] {
    std::array::from_fn(|i| 0.5 * (x0[i] + x1[i]) + 0.125 * h * (m0[i] - m1[i]))
}

/// Initial function on `[-tau, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum History<const D: usize> {
    Constant([f64; D]),
    /// Values and derivatives on a uniform grid `-tau + j * spacing`,
    /// `j = 0..=n`, with `n * spacing = tau`.
    Sampled {
        tau: f64,
        values: Vec<[f64; D]>,
        slopes: Vec<[f64; D]>,
    },
}

impl<const D: usize> History<D> {
    pub fn constant(x: [f64; D]) -> Self {
        History::Constant(x)
    }

    /// Samples `f` and its derivative `df` at `n + 1` uniform points.
    pub fn from_fn(
        tau: f64,
        n: usize,
        f: impl Fn(f64) -> [f64; D],
        df: impl Fn(f64) -> [f64; D],
    ) -> Result<Self> {
        let times = (0..=n).map(|j| -tau + tau * j as f64 / n as f64);
        let (values, slopes) = times.map(|t| (f(t), df(t))).unzip();
        Self::sampled(tau, values, slopes)
    }

    pub fn sampled(tau: f64, values: Vec<[f64; D]>, slopes: Vec<[f64; D]>) -> Result<Self> {
        if values.len() < 2 || values.len() != slopes.len() {
            return Err(Error::StepConfig {
                detail: format!(
                    "sampled history needs matching value/slope arrays of length >= 2 (got {} and {})",
                    values.len(),
                    slopes.len()
                ),
            });
        }
        if !(tau > 0.0) {
            return Err(Error::StepConfig {
                detail: format!("history span must be positive, got {tau}"),
            });
        }
        Ok(History::Sampled {
            tau,
            values,
            slopes,
        })
    }

    /// Value and derivative at `t`, clamped to `[-tau, 0]` for sampled data.
    pub fn eval(&self, t: f64) -> ([f64; D], [f64; D]) {
        match self {
            History::Constant(x) => (*x, [0.0; D]),
            History::Sampled {
                tau,
                values,
                slopes,
            } => {
                let n = values.len() - 1;
                let spacing = tau / n as f64;
                let pos = ((t + tau) / spacing).clamp(0.0, n as f64);
                let j = (pos.floor() as usize).min(n - 1);
                let s = (pos - j as f64) * spacing;
                let x = hermite(&values[j], &slopes[j], &values[j + 1], &slopes[j + 1], spacing, s);
                let u = s / spacing;
                let (x0, x1, m0, m1) = (&values[j], &values[j + 1], &slopes[j], &slopes[j + 1]);
                let dx = std::array::from_fn(|i| {
                    (6.0 * u * u - 6.0 * u) * (x0[i] - x1[i]) / spacing
                        + (3.0 * u * u - 4.0 * u + 1.0) * m0[i]
                        + (3.0 * u * u - 2.0 * u) * m1[i]
                });
                (x, dx)
            }
        }
    }

    pub fn value(&self, t: f64) -> [f64; D] {
        self.eval(t).0
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            History::Constant(x) => x.iter().all(|v| *v >= 0.0),
            History::Sampled { values, .. } => values.iter().flatten().all(|v| *v >= 0.0),
        }
    }
}
