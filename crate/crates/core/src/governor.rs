//! PID stator-vane speed governor.
//!
//! The speed error is `ω_t − ω_sync`. Over-speed opens the stator exit angle
//! and under-speed closes it. The command is clamped to the stator travel
//! and rate limited; the integrator freezes while the raw output lies
//! outside the travel.

use crate::error::{Error, Result};
use crate::steady::SteadyStateSolution;
use crate::tc::check_angle;

/// Placeholder gains; untuned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    /// rad per rad/s.
    pub kp: f64,
    /// rad per rad.
    pub ki: f64,
    /// rad·s per rad/s.
    pub kd: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 0.5,
            ki: 0.1,
            kd: 0.01,
        }
    }
}

pub const DEFAULT_RATE_LIMIT: f64 = 30.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GovernorConfig {
    pub gains: PidGains,
    pub alpha_s_min: f64,
    pub alpha_s_max: f64,
    /// Largest `|dα_s/dt|` (rad/s).
    pub rate_limit: f64,
    pub alpha_s_init: f64,
    pub integrator_init: f64,
}

impl GovernorConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.gains;
        for (name, v) in [("governor.Kp", g.kp), ("governor.Ki", g.ki), ("governor.Kd", g.kd)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if g.ki < 0.0 {
            return Err(Error::invalid("governor.Ki", "must be >= 0"));
        }
        check_angle("governor.alpha_s_min", self.alpha_s_min)?;
        check_angle("governor.alpha_s_max", self.alpha_s_max)?;
        if self.alpha_s_min >= self.alpha_s_max {
            return Err(Error::invalid("governor.alpha_s_min", "must be below alpha_s_max"));
        }
        if !(self.alpha_s_min..=self.alpha_s_max).contains(&self.alpha_s_init) {
            return Err(Error::invalid("governor.alpha_s_init", "must lie within the stator bounds"));
        }
        if !self.integrator_init.is_finite() {
            return Err(Error::invalid("governor.integrator_init", "must be finite"));
        }
        if !(self.rate_limit.is_finite() && self.rate_limit > 0.0) {
            return Err(Error::invalid("governor.rate_limit", "must be > 0"));
        }
        Ok(())
    }
}

/// Settings combined with a steady solution by [`init_from_steady`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GovernorTemplate {
    pub gains: PidGains,
    pub rate_limit: f64,
    /// Explicit stator travel; when absent the observed steady-angle range
    /// widened by `margin` is used.
    pub bounds: Option<(f64, f64)>,
    pub margin: f64,
}

impl Default for GovernorTemplate {
    fn default() -> Self {
        Self {
            gains: PidGains::default(),
            rate_limit: DEFAULT_RATE_LIMIT,
            bounds: None,
            margin: 0.0,
        }
    }
}

/// Starts the governor at a steady point so that zero error holds the
/// steady stator angle. `observed` is the `(min, max)` steady angle over the
/// feasible sweep.
pub fn init_from_steady(
    solution: &SteadyStateSolution,
    observed: Option<(f64, f64)>,
    template: &GovernorTemplate,
) -> Result<GovernorConfig> {
    if !solution.feasible {
        return Err(Error::InfeasibleSolution { nu: solution.nu });
    }
    let a0 = solution.alpha_s0;
    let (lo, hi) = match (template.bounds, observed) {
        (Some(b), _) => b,
        (None, Some((lo, hi))) => (lo - template.margin, hi + template.margin),
        (None, None) => (a0 - template.margin, a0 + template.margin),
    };
    let cfg = GovernorConfig {
        gains: template.gains,
        alpha_s_min: lo,
        alpha_s_max: hi,
        rate_limit: template.rate_limit,
        alpha_s_init: a0,
        integrator_init: a0,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GovernorState {
    pub integrator: f64,
    /// Last speed error, `None` before the first update.
    pub prev_error: Option<f64>,
    pub filtered_derivative: f64,
    pub alpha_s_cmd: f64,
}

impl GovernorState {
    pub fn new(cfg: &GovernorConfig) -> Self {
        Self {
            integrator: cfg.integrator_init,
            prev_error: None,
            filtered_derivative: 0.0,
            alpha_s_cmd: cfg.alpha_s_init,
        }
    }
}

/// Signals of one update, for tracing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GovernorOutput {
    pub error: f64,
    pub p: f64,
    pub i: f64,
    pub d: f64,
    /// Unclamped PID output.
    pub raw: f64,
    /// Clamped, rate-limited command.
    pub cmd: f64,
}

/// One controller update with sample time `dt`.
pub fn update(
    state: &GovernorState,
    cfg: &GovernorConfig,
    speed_error: f64,
    dt: f64,
) -> (GovernorState, GovernorOutput) {
    debug_assert!(dt > 0.0);
    let g = &cfg.gains;
    let derivative = state.prev_error.map_or(0.0, |prev| (speed_error - prev) / dt);
    // First-order derivative filter with a time constant of ten samples.
    let blend = 1.0 / 11.0;
    let filtered = state.filtered_derivative + blend * (derivative - state.filtered_derivative);

    let p = g.kp * speed_error;
    let d = g.kd * filtered;
    let mut integrator = state.integrator + g.ki * speed_error * dt;
    let mut raw = integrator + p + d;
    if raw > cfg.alpha_s_max || raw < cfg.alpha_s_min {
        integrator = state.integrator;
        raw = integrator + p + d;
    }

    let target = raw.clamp(cfg.alpha_s_min, cfg.alpha_s_max);
    let max_step = cfg.rate_limit * dt;
    let delta = target - state.alpha_s_cmd;
    let cmd = if delta.abs() <= max_step {
        target
    } else {
        (state.alpha_s_cmd + max_step.copysign(delta)).clamp(cfg.alpha_s_min, cfg.alpha_s_max)
    };

    let next = GovernorState {
        integrator,
        prev_error: Some(speed_error),
        filtered_derivative: filtered,
        alpha_s_cmd: cmd,
    };
    let out = GovernorOutput {
        error: speed_error,
        p,
        i: integrator,
        d,
        raw,
        cmd,
    };
    (next, out)
}
