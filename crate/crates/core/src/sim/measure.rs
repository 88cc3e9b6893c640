use serde::Serialize;

use crate::error::{Error, Result};

use super::integrator::Trajectory;

/// Period and amplitude of a sampled oscillation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Oscillation {
    /// Mean spacing of upward mean-crossings.
    pub period: f64,
    /// Half peak-to-trough over the last two periods.
    pub amplitude: f64,
    pub decaying: bool,
    pub mean: f64,
    pub crossings: usize,
    /// Half peak-to-trough of the last period and of the period three before it.
    pub last_amplitude: f64,
    pub earlier_amplitude: f64,
}

const DECAY_RATIO: f64 = 0.9;
const MIN_PERIODS: usize = 4;

/// Measures a uniformly sampled signal `values[i]` at `t0 + i h` after
/// discarding the leading `transient_fraction` of the samples.
pub fn measure_signal(
    t0: f64,
    h: f64,
    values: &[f64],
    transient_fraction: f64,
) -> Result<Oscillation> {
    if !(0.0..1.0).contains(&transient_fraction) {
        return Err(Error::TooShort {
            detail: format!("transient fraction {transient_fraction} outside [0, 1)"),
        });
    }
    let start = (values.len() as f64 * transient_fraction).floor() as usize;
    let window = &values[start.min(values.len())..];
    if window.len() < 3 {
        return Err(Error::TooShort {
            detail: format!("{} samples after the transient", window.len()),
        });
    }
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    let time = |i: usize| t0 + (start + i) as f64 * h;

    let crossings: Vec<f64> = window
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < mean && w[1] >= mean)
        .map(|(i, w)| time(i) + h * (mean - w[0]) / (w[1] - w[0]))
        .collect();
    let n = crossings.len();
    if n < 2 {
        return Err(Error::NoCrossings);
    }
    if n < MIN_PERIODS + 1 {
        return Err(Error::TooShort {
            detail: format!("{} full periods after the transient, need {MIN_PERIODS}", n - 1),
        });
    }

    let half_range = |from: f64, to: f64| {
        let (lo, hi) = window
            .iter()
            .enumerate()
            .filter(|(i, _)| (from..=to).contains(&time(*i)))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| {
                (lo.min(*v), hi.max(*v))
            });
        0.5 * (hi - lo)
    };

    let last_amplitude = half_range(crossings[n - 2], crossings[n - 1]);
    let earlier_amplitude = half_range(crossings[n - 5], crossings[n - 4]);
    Ok(Oscillation {
        period: (crossings[n - 1] - crossings[0]) / (n - 1) as f64,
        amplitude: half_range(crossings[n - 3], crossings[n - 1]),
        decaying: last_amplitude < DECAY_RATIO * earlier_amplitude,
        mean,
        crossings: n,
        last_amplitude,
        earlier_amplitude,
    })
}

/// Measures the first state component of a trajectory.
pub fn measure_oscillation<const D: usize>(
    traj: &Trajectory<D>,
    transient_fraction: f64,
) -> Result<Oscillation> {
    measure_signal(traj.t0, traj.h, &traj.component(0), transient_fraction)
}
