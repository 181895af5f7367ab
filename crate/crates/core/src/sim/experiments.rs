//! Canned converter experiments: impeller-torque frequency response,
//! torque-ratio characteristic and integrator self-convergence.

use rayon::prelude::*;

use super::tc_only::integrate_tc;
use super::Integrator;
use crate::error::{Error, Result};
use crate::steady::{solve_operating_point, unit_flow};
use crate::tc::{TcModel, TcState};

/// Sinusoidal impeller-torque disturbance on top of constant shaft torques.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySweepSpec {
    /// Nominal impeller torque (N·m).
    pub tau_ie: f64,
    /// Disturbance amplitude (N·m).
    pub amplitude: f64,
    /// Constant turbine torque (N·m).
    pub tau_te: f64,
    /// Stator exit angle (rad).
    pub alpha_s: f64,
    pub f_lo: f64,
    pub f_hi: f64,
    pub points_per_decade: usize,
    /// Minimum settle time (s); at least ten forcing periods are discarded.
    pub settle_time: f64,
    /// Minimum measurement window (s).
    pub measure_time: f64,
    pub dt: f64,
    /// Upper end of the speed-ratio search for the starting equilibrium.
    pub nu_max: f64,
}

impl Default for FrequencySweepSpec {
    fn default() -> Self {
        Self {
            tau_ie: 100.0,
            amplitude: 10.0,
            tau_te: -150.0,
            alpha_s: 55.62f64.to_radians(),
            f_lo: 0.5,
            f_hi: 100.0,
            points_per_decade: 20,
            settle_time: 2.0,
            measure_time: 1.0,
            dt: 1e-4,
            nu_max: 1.5,
        }
    }
}

impl FrequencySweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_lo.is_finite() && self.f_lo > 0.0) {
            return Err(Error::invalid("freq_sweep.f_lo", "must be > 0"));
        }
        if !(self.f_hi.is_finite() && self.f_hi > self.f_lo) {
            return Err(Error::invalid("freq_sweep.f_hi", "must exceed f_lo"));
        }
        if self.points_per_decade == 0 {
            return Err(Error::invalid("freq_sweep.points_per_decade", "must be >= 1"));
        }
        if !(self.settle_time.is_finite() && self.settle_time > 0.0) {
            return Err(Error::invalid("freq_sweep.settle_time", "must be > 0"));
        }
        if !(self.measure_time.is_finite() && self.measure_time > 0.0) {
            return Err(Error::invalid("freq_sweep.measure_time", "must be > 0"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("freq_sweep.dt", "must be > 0"));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::invalid("freq_sweep.amplitude", "must be finite"));
        }
        Ok(())
    }

    /// Logarithmic grid from `f_lo` to `f_hi`, both included.
    pub fn frequencies(&self) -> Vec<f64> {
        let decades = (self.f_hi / self.f_lo).log10();
        let n = (decades * self.points_per_decade as f64).ceil().max(1.0) as usize;
        (0..=n)
            .map(|k| match k {
                0 => self.f_lo,
                _ if k == n => self.f_hi,
                _ => self.f_lo * 10f64.powf(decades * k as f64 / n as f64),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPoint {
    pub freq_hz: f64,
    /// Half peak-to-peak of ω_i over the measurement window (rad/s).
    pub amp_omega_i: f64,
    /// Half peak-to-peak of ω_t over the measurement window (rad/s).
    pub amp_omega_t: f64,
}

impl FrequencyPoint {
    /// Turbine over impeller amplitude.
    pub fn ratio(&self) -> f64 {
        self.amp_omega_t / self.amp_omega_i
    }
}

/// Half the peak-to-peak excursion of a sampled signal.
pub fn half_peak_to_peak(samples: &[f64]) -> f64 {
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if samples.is_empty() {
        0.0
    } else {
        0.5 * (hi - lo)
    }
}

/// Response at a single forcing frequency, starting from the equilibrium
/// `s0` of the nominal torques.
pub fn frequency_point(model: &TcModel, spec: &FrequencySweepSpec, s0: TcState, freq_hz: f64) -> Result<FrequencyPoint> {
    let period = 1.0 / freq_hz;
    let settle = spec.settle_time.max(10.0 * period);
    // The measured window is never shorter than a quarter of the run.
    let measure = spec.measure_time.max(settle / 3.0).max(2.0 * period);
    let settle_steps = (settle / spec.dt).ceil() as usize;
    let steps = settle_steps + (measure / spec.dt).ceil() as usize;

    let w = 2.0 * std::f64::consts::PI * freq_hz;
    let mut wi = Vec::with_capacity(steps - settle_steps);
    let mut wt = Vec::with_capacity(steps - settle_steps);
    integrate_tc(
        model,
        s0,
        spec.alpha_s,
        |t| spec.tau_ie + spec.amplitude * (w * t).sin(),
        |_| spec.tau_te,
        spec.dt,
        steps,
        Integrator::Rk4,
        |k, _, s| {
            if k > settle_steps {
                wi.push(s.omega_i);
                wt.push(s.omega_t);
            }
        },
    )
    .map_err(|e| match e {
        Error::NonFiniteState { step, time } => Error::NoConvergence(format!(
            "non-finite state at step {step} (t = {time} s) for f = {freq_hz} Hz"
        )),
        other => other,
    })?;
    Ok(FrequencyPoint {
        freq_hz,
        amp_omega_i: half_peak_to_peak(&wi),
        amp_omega_t: half_peak_to_peak(&wt),
    })
}

/// Equilibrium of the sweep's nominal torques.
pub fn frequency_sweep_start(model: &TcModel, spec: &FrequencySweepSpec) -> Result<TcState> {
    solve_operating_point(model, spec.tau_ie, spec.tau_te, spec.alpha_s, spec.nu_max)
}

/// Runs the given frequencies concurrently, results in input order.
pub fn run_frequencies(model: &TcModel, spec: &FrequencySweepSpec, freqs: &[f64]) -> Result<Vec<FrequencyPoint>> {
    spec.validate()?;
    let s0 = frequency_sweep_start(model, spec)?;
    freqs
        .par_iter()
        .map(|&f| frequency_point(model, spec, s0, f))
        .collect()
}

pub fn run_frequency_sweep(model: &TcModel, spec: &FrequencySweepSpec) -> Result<Vec<FrequencyPoint>> {
    spec.validate()?;
    run_frequencies(model, spec, &spec.frequencies())
}

/// One point of the steady torque-ratio characteristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueRatioPoint {
    pub nu: f64,
    pub omega_i: f64,
    pub omega_t: f64,
    pub v: f64,
    pub tau_i: f64,
    pub tau_t: f64,
    /// `|τ_t0| / τ_i0`, NaN when infeasible.
    pub torque_ratio: f64,
    pub feasible: bool,
}

/// Steady characteristic at fixed impeller speed and stator angle. The flow
/// at each ratio comes from `Φ = 0` (larger root).
pub fn run_torque_ratio_curve(model: &TcModel, omega_i: f64, alpha_s: f64, nus: &[f64]) -> Result<Vec<TorqueRatioPoint>> {
    if !(omega_i.is_finite() && omega_i > 0.0) {
        return Err(Error::invalid("torque_curve.omega_i", "must be > 0"));
    }
    crate::tc::check_angle("torque_curve.alpha_s", alpha_s)?;
    if let Some(nu) = nus.iter().find(|nu| !(**nu > 0.0 && **nu <= 1.0)) {
        return Err(Error::invalid("torque_curve.nu", format!("grid value {nu} outside (0, 1]")));
    }
    Ok(nus
        .iter()
        .map(|&nu| match unit_flow(model, nu, alpha_s) {
            Ok(u) if u.tau_i > 0.0 => TorqueRatioPoint {
                nu,
                omega_i,
                omega_t: nu * omega_i,
                v: u.v * omega_i,
                tau_i: u.tau_i * omega_i * omega_i,
                tau_t: u.tau_t * omega_i * omega_i,
                torque_ratio: u.torque_ratio(),
                feasible: true,
            },
            _ => TorqueRatioPoint {
                nu,
                omega_i,
                omega_t: nu * omega_i,
                v: f64::NAN,
                tau_i: f64::NAN,
                tau_t: f64::NAN,
                torque_ratio: f64::NAN,
                feasible: false,
            },
        })
        .collect())
}

/// Observed order of accuracy: final-state errors at `dt` and `dt/2`
/// against a `dt/8` reference over `[0, t_end]`.
#[allow(clippy::too_many_arguments)]
pub fn self_convergence_order<FI, FT>(
    model: &TcModel,
    s0: TcState,
    alpha_s: f64,
    tau_i: FI,
    tau_t: FT,
    t_end: f64,
    dt: f64,
    method: Integrator,
) -> Result<f64>
where
    FI: Fn(f64) -> f64 + Copy,
    FT: Fn(f64) -> f64 + Copy,
{
    let run = |h: f64| {
        let steps = (t_end / h).round() as usize;
        integrate_tc(model, s0, alpha_s, tau_i, tau_t, h, steps, method, |_, _, _| {})
    };
    let reference = run(dt / 8.0)?;
    let err = |s: TcState| {
        ((s.omega_t - reference.omega_t).powi(2)
            + (s.omega_i - reference.omega_i).powi(2)
            + (s.v - reference.v).powi(2))
        .sqrt()
    };
    let coarse = err(run(dt)?);
    let fine = err(run(dt / 2.0)?);
    Ok((coarse / fine).log2())
}
