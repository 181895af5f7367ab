//! Fixed-step simulation of the converter alone and of the integrated
//! drivetrain, plus canned experiments.

pub mod experiments;
pub mod integrated;
pub mod integrator;
pub mod tc_only;
pub mod trace;

pub use integrator::{Integrator, Stepper};
pub use trace::SimTrace;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Step size (s).
    pub dt: f64,
    /// Simulated time (s).
    pub duration: f64,
    pub integrator: Integrator,
    /// Record every k-th step.
    pub record_decimation: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            duration: 10.0,
            integrator: Integrator::Rk4,
            record_decimation: 100,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("sim.dt", "must be > 0"));
        }
        if !(self.duration.is_finite() && self.duration >= self.dt) {
            return Err(Error::invalid("sim.duration", "must be at least one step"));
        }
        if self.record_decimation == 0 {
            return Err(Error::invalid("sim.record_decimation", "must be >= 1"));
        }
        Ok(())
    }

    /// Number of steps covering `duration`.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

/// Time-varying multiplier applied to a steady torque.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TorqueProfile {
    Constant(f64),
    /// `before` until `time`, `after` from then on.
    Step { time: f64, before: f64, after: f64 },
    /// Linear from `from` at `start` to `to` at `end`, held outside.
    Ramp { start: f64, end: f64, from: f64, to: f64 },
    /// `mean + amplitude·sin(2π·freq_hz·t)`.
    Sinusoid { mean: f64, amplitude: f64, freq_hz: f64 },
}

impl Default for TorqueProfile {
    fn default() -> Self {
        TorqueProfile::Constant(1.0)
    }
}

impl TorqueProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TorqueProfile::Constant(c) => c,
            TorqueProfile::Step { time, before, after } => {
                if t < time {
                    before
                } else {
                    after
                }
            }
            TorqueProfile::Ramp { start, end, from, to } => {
                if t <= start {
                    from
                } else if t >= end {
                    to
                } else {
                    from + (to - from) * (t - start) / (end - start)
                }
            }
            TorqueProfile::Sinusoid { mean, amplitude, freq_hz } => {
                mean + amplitude * (2.0 * std::f64::consts::PI * freq_hz * t).sin()
            }
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let finite = match *self {
            TorqueProfile::Constant(c) => c.is_finite(),
            TorqueProfile::Step { time, before, after } => {
                time.is_finite() && before.is_finite() && after.is_finite()
            }
            TorqueProfile::Ramp { start, end, from, to } => {
                if !(end > start) {
                    return Err(Error::invalid(field, "ramp end must follow its start"));
                }
                start.is_finite() && end.is_finite() && from.is_finite() && to.is_finite()
            }
            TorqueProfile::Sinusoid { mean, amplitude, freq_hz } => {
                mean.is_finite() && amplitude.is_finite() && freq_hz.is_finite() && freq_hz >= 0.0
            }
        };
        if finite {
            Ok(())
        } else {
            Err(Error::invalid(field, "profile values must be finite"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles() {
        assert_eq!(TorqueProfile::Constant(1.0).value(3.0), 1.0);
        let s = TorqueProfile::Step { time: 1.0, before: 1.0, after: 1.1 };
        assert_eq!((s.value(0.999), s.value(1.0)), (1.0, 1.1));
        let r = TorqueProfile::Ramp { start: 1.0, end: 3.0, from: 1.0, to: 2.0 };
        assert_eq!((r.value(0.0), r.value(2.0), r.value(9.0)), (1.0, 1.5, 2.0));
        let w = TorqueProfile::Sinusoid { mean: 1.0, amplitude: 0.5, freq_hz: 1.0 };
        assert!((w.value(0.25) - 1.5).abs() < 1e-15);
        assert!(TorqueProfile::Ramp { start: 1.0, end: 1.0, from: 0.0, to: 1.0 }.validate("p").is_err());
    }

    #[test]
    fn sim_config_checks() {
        assert!(SimConfig::default().validate().is_ok());
        assert_eq!(SimConfig::default().steps(), 100_000);
        assert!(SimConfig { dt: 0.0, ..Default::default() }.validate().is_err());
        assert!(SimConfig { record_decimation: 0, ..Default::default() }.validate().is_err());
    }
}
