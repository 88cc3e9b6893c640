use crate::error::{Error, Result};
use crate::model::{self, ModelParams};

use super::history::{hermite, hermite_midpoint, History};

/// Autonomous system `x'(t) = F(x(t), x(t - tau))`.
pub trait DelaySystem<const D: usize> {
    fn delay(&self) -> f64;
    fn rhs(&self, current: &[f64; D], delayed: &[f64; D]) -> [f64; D];
    /// Whether a negative component is a modelling error rather than a
    /// legitimate state.
    fn nonnegative(&self) -> bool {
        false
    }
}

/// The p53-Mdm2 feedback loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSystem {
    pub params: ModelParams,
}

impl DelaySystem<2> for ModelSystem {
    fn delay(&self) -> f64 {
        self.params.tau
    }

    fn rhs(&self, current: &[f64; 2], delayed: &[f64; 2]) -> [f64; 2] {
        model::rhs_unchecked(*current, *delayed, &self.params)
    }

    fn nonnegative(&self) -> bool {
        true
    }
}

const BLOWUP: f64 = 1e12;
const MIN_STEPS_PER_DELAY: usize = 10;

/// Number of steps per delay interval; `tau / h` must be an integer >= 10.
pub fn steps_per_delay(tau: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::StepConfig {
            detail: format!("step h = {h} must be positive"),
        });
    }
    let ratio = tau / h;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::StepConfig {
            detail: format!("tau / h = {ratio} is not an integer (tau = {tau}, h = {h})"),
        });
    }
    if n < MIN_STEPS_PER_DELAY as f64 {
        return Err(Error::StepConfig {
            detail: format!("tau / h = {n} is below the minimum of {MIN_STEPS_PER_DELAY}"),
        });
    }
    Ok(n as usize)
}

/// A solution on the uniform grid `t0 + i h` with knot derivatives for
/// cubic Hermite dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const D: usize> {
    pub t0: f64,
    pub h: f64,
    pub states: Vec<[f64; D]>,
    pub slopes: Vec<[f64; D]>,
}

impl<const D: usize> Trajectory<D> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[c]).collect()
    }

    pub fn last(&self) -> Option<&[f64; D]> {
        self.states.last()
    }

    /// Hermite interpolant on knot interval `j` at offset `s` in `[0, h]`.
    pub fn eval_on_interval(&self, j: usize, s: f64) -> [f64; D] {
        hermite(
            &self.states[j],
            &self.slopes[j],
            &self.states[j + 1],
            &self.slopes[j + 1],
            self.h,
            s,
        )
    }

    /// Dense output at `t`, or `None` outside the grid.
    pub fn eval(&self, t: f64) -> Option<[f64; D]> {
        if self.len() < 2 || t < self.t0 || t > self.t_end() {
            return (self.len() == 1 && t == self.t0).then(|| self.states[0]);
        }
        let pos = (t - self.t0) / self.h;
        let j = (pos.floor() as usize).min(self.len() - 2);
        Some(self.eval_on_interval(j, t - self.time(j)))
    }
}

fn check_state<const D: usize, S: DelaySystem<D>>(
    sys: &S,
    x: &[f64; D],
    t: f64,
    h: f64,
) -> Result<()> {
    if x.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP) {
        return Err(Error::BlowUp { t });
    }
    if sys.nonnegative() && x.iter().any(|v| *v < 0.0) {
        return Err(Error::Negativity { t, h });
    }
    Ok(())
}

/// Runs the method of steps from `t = 0` to the first grid point at or past
/// `t_end`, calling `observer(i, t_i, x_i, x'_i)` for every knot in order.
/// Only one delay interval of knots is kept in memory. Returns the final state.
pub fn integrate_streaming<const D: usize, S, O>(
    sys: &S,
    history: &History<D>,
    t_end: f64,
    h: f64,
    mut observer: O,
) -> Result<[f64; D]>
where
    S: DelaySystem<D>,
    O: FnMut(usize, f64, &[f64; D], &[f64; D]),
{
    let tau = sys.delay();
    let n_delay = steps_per_delay(tau, h)?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::StepConfig {
            detail: format!("t_end = {t_end} must be positive"),
        });
    }
    let steps = {
        let r = t_end / h;
        if (r - r.round()).abs() <= 1e-9 * r {
            r.round() as usize
        } else {
            r.ceil() as usize
        }
    };

    let cap = n_delay + 1;
    let mut values = vec![[0.0; D]; cap];
    let mut slopes = vec![[0.0; D]; cap];
    let mut x = history.value(0.0);
    check_state(sys, &x, 0.0, h)?;
    values[0] = x;

    let delayed_at = |n: usize, values: &[[f64; D]], slopes: &[[f64; D]]| {
        // Delayed arguments for the step starting at knot n.
        if n < n_delay {
            let t = (n as f64 - n_delay as f64) * h;
            (
                history.value(t),
                history.value(t + 0.5 * h),
                history.value(t + h),
            )
        } else {
            let j = n - n_delay;
            let (a, b) = (j % cap, (j + 1) % cap);
            (
                values[a],
                hermite_midpoint(&values[a], &slopes[a], &values[b], &slopes[b], h),
                values[b],
            )
        }
    };

    for n in 0..steps {
        let t = n as f64 * h;
        let (d0, dm, d1) = delayed_at(n, &values, &slopes);
        let k1 = sys.rhs(&x, &d0);
        slopes[n % cap] = k1;
        observer(n, t, &x, &k1);

        let x2 = std::array::from_fn(|i| x[i] + 0.5 * h * k1[i]);
        let k2 = sys.rhs(&x2, &dm);
        let x3 = std::array::from_fn(|i| x[i] + 0.5 * h * k2[i]);
        let k3 = sys.rhs(&x3, &dm);
        let x4 = std::array::from_fn(|i| x[i] + h * k3[i]);
        let k4 = sys.rhs(&x4, &d1);
        x = std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]));
        check_state(sys, &x, (n + 1) as f64 * h, h)?;
        values[(n + 1) % cap] = x;
    }

    // Slope at the final knot closes the dense output.
    let delayed = if steps < n_delay {
        history.value((steps as f64 - n_delay as f64) * h)
    } else {
        values[(steps - n_delay) % cap]
    };
    let slope = sys.rhs(&x, &delayed);
    observer(steps, steps as f64 * h, &x, &slope);
    Ok(x)
}

/// Integrates any delay system and keeps every knot.
pub fn integrate_system<const D: usize, S: DelaySystem<D>>(
    sys: &S,
    history: &History<D>,
    t_end: f64,
    h: f64,
) -> Result<Trajectory<D>> {
    let mut states = Vec::new();
    let mut slopes = Vec::new();
    integrate_streaming(sys, history, t_end, h, |_, _, x, m| {
        states.push(*x);
        slopes.push(*m);
    })?;
    Ok(Trajectory {
        t0: 0.0,
        h,
        states,
        slopes,
    })
}

/// Integrates the model with delay `params.tau`.
pub fn integrate(
    params: &ModelParams,
    history: &History<2>,
    t_end: f64,
    h: f64,
) -> Result<Trajectory<2>> {
    params.validate()?;
    if !history.is_nonnegative() {
        return Err(Error::Domain {
            operation: "integrate",
            detail: "history must be non-negative".into(),
        });
    }
    integrate_system(&ModelSystem { params: *params }, history, t_end, h)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::equilibrium::solve_equilibrium;

    /// `x' = -(pi/2) x(t - 1)`, solved exactly by `cos(pi t / 2)`.
    struct CosineDde;

    impl DelaySystem<1> for CosineDde {
        fn delay(&self) -> f64 {
            1.0
        }
        fn rhs(&self, _x: &[f64; 1], xd: &[f64; 1]) -> [f64; 1] {
            [-FRAC_PI_2 * xd[0]]
        }
    }

    fn cosine_history() -> History<1> {
        History::from_fn(
            1.0,
            1000,
            |t| [(FRAC_PI_2 * t).cos()],
            |t| [-FRAC_PI_2 * (FRAC_PI_2 * t).sin()],
        )
        .unwrap()
    }

    fn max_error(h: f64) -> f64 {
        let traj = integrate_system(&CosineDde, &cosine_history(), 10.0, h).unwrap();
        traj.times()
            .zip(&traj.states)
            .map(|(t, x)| (x[0] - (FRAC_PI_2 * t).cos()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn cosine_problem_is_solved() {
        let traj = integrate_system(&CosineDde, &cosine_history(), 10.0, 1e-2).unwrap();
        let end = traj.last().unwrap()[0];
        assert!((traj.t_end() - 10.0).abs() < 1e-12);
        assert!((end - (FRAC_PI_2 * 10.0).cos()).abs() < 1e-6);
    }

    #[test]
    fn fourth_order_convergence() {
        let ratio = max_error(1e-2) / max_error(5e-3);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn dense_output_is_continuous() {
        let traj = integrate_system(&CosineDde, &cosine_history(), 5.0, 0.05).unwrap();
        for j in 1..traj.len() - 1 {
            let left = traj.eval_on_interval(j - 1, traj.h)[0];
            let right = traj.eval_on_interval(j, 0.0)[0];
            assert!((left - right).abs() <= 1e-12 * left.abs().max(1.0));
        }
        let mid = traj.eval(2.525).unwrap()[0];
        assert!((mid - (FRAC_PI_2 * 2.525).cos()).abs() < 1e-6);
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let p = ModelParams::base(17.5, 60.0);
        let eq = solve_equilibrium(&p).unwrap();
        let traj = integrate(&p, &History::constant(eq.as_array()), 600.0, 0.5).unwrap();
        for x in &traj.states {
            assert!((x[0] - eq.y1).abs() < 1e-8 && (x[1] - eq.y2).abs() < 1e-8);
        }
    }

    #[test]
    fn step_configuration_is_checked() {
        let p = ModelParams::base(17.5, 60.0);
        let hist = History::constant([1.0, 1.0]);
        assert!(matches!(integrate(&p, &hist, 100.0, 7.0), Err(Error::StepConfig { .. })));
        assert!(matches!(integrate(&p, &hist, 100.0, 12.0), Err(Error::StepConfig { .. })));
        assert!(matches!(integrate(&p, &hist, -1.0, 0.5), Err(Error::StepConfig { .. })));
        assert!(steps_per_delay(60.0, 0.5).unwrap() == 120);
    }

    #[test]
    fn blow_up_is_reported() {
        struct Explode;
        impl DelaySystem<1> for Explode {
            fn delay(&self) -> f64 {
                1.0
            }
            fn rhs(&self, x: &[f64; 1], _xd: &[f64; 1]) -> [f64; 1] {
                [x[0] * x[0]]
            }
        }
        let r = integrate_system(&Explode, &History::constant([1.0]), 10.0, 0.01);
        assert!(matches!(r, Err(Error::BlowUp { .. })));
    }

    #[test]
    fn negativity_names_the_step() {
        struct Drain;
        impl DelaySystem<1> for Drain {
            fn delay(&self) -> f64 {
                1.0
            }
            fn rhs(&self, _x: &[f64; 1], _xd: &[f64; 1]) -> [f64; 1] {
                [-1.0]
            }
            fn nonnegative(&self) -> bool {
                true
            }
        }
        let err = integrate_system(&Drain, &History::constant([0.5]), 2.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::Negativity { .. }));
        assert!(err.to_string().contains("h = 0.1"));
    }

    #[test]
    fn streaming_matches_stored() {
        let p = ModelParams::base(17.5, 60.0);
        let eq = solve_equilibrium(&p).unwrap();
        let hist = History::constant([eq.y1 + 0.1, eq.y2]);
        let traj = integrate(&p, &hist, 900.0, 0.5).unwrap();
        let mut seen = Vec::new();
        let last = integrate_streaming(&ModelSystem { params: p }, &hist, 900.0, 0.5, |i, t, x, _| {
            seen.push((i, t, *x))
        })
        .unwrap();
        assert_eq!(seen.len(), traj.len());
        assert_eq!(&last, traj.last().unwrap());
        for (i, t, x) in seen {
            assert_eq!(t, traj.time(i));
            assert_eq!(x, traj.states[i]);
        }
    }
}
