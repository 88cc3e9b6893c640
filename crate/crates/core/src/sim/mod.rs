//! Numerical integration of the delayed system and oscillation diagnostics.
//!
//! [`integrate`] runs the classical four-stage Runge-Kutta scheme with the
//! method of steps: the delay is an integer number of steps, so the delayed
//! argument of every stage is either a stored knot or a Hermite midpoint
//! between two stored knots.

mod history;
mod integrator;
mod measure;
mod waveform;

pub use history::{hermite, hermite_midpoint, History};
pub use integrator::{
    integrate, integrate_streaming, integrate_system, steps_per_delay, DelaySystem, ModelSystem,
    Trajectory,
};
pub use measure::{measure_oscillation, measure_signal, Oscillation};
pub use waveform::{reconstruct_waveform, TimeGrid};
