//! Steady operating points across the Type-5 speed-ratio range.
//!
//! With the turbine pinned at synchronous speed and its torque given by the
//! rated schedule, the steady relations are solved in sequence: flow
//! velocity from the turbine torque balance, stator angle from `Φ = 0`, then
//! the impeller torque that holds the point.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::roots::{bracketed_root, quadratic_roots, scan_bracket, RootOptions};
use crate::tc::{TcInput, TcModel, TcState};

pub const SCHEDULE_NU_MIN: f64 = 0.87;
pub const SCHEDULE_NU_MAX: f64 = 1.67;

/// Rated electrical power and synchronous generator speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatedSpec {
    /// Rated power (W).
    pub p_rated: f64,
    /// Synchronous speed (rpm).
    pub n_rpm: f64,
}

impl RatedSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_rated.is_finite() && self.p_rated > 0.0) {
            return Err(Error::invalid("P_rated", format!("must be > 0, got {}", self.p_rated)));
        }
        if !(self.n_rpm.is_finite() && self.n_rpm > 0.0) {
            return Err(Error::invalid("N", format!("must be > 0, got {}", self.n_rpm)));
        }
        Ok(())
    }
}

/// Generator shaft speed in rad/s for a synchronous speed in rpm.
pub fn synchronous_speed(n_rpm: f64) -> Result<f64> {
    if !(n_rpm.is_finite() && n_rpm > 0.0) {
        return Err(Error::invalid("N", format!("must be > 0, got {n_rpm}")));
    }
    Ok(n_rpm * 120.0 * std::f64::consts::PI / 3600.0)
}

/// Rated shaft torque `30·P/(π·N)`, equal to `P / ω_sync`.
pub fn rated_torque(spec: &RatedSpec) -> Result<f64> {
    spec.validate()?;
    let tau = 30.0 * spec.p_rated / (std::f64::consts::PI * spec.n_rpm);
    debug_assert!(
        (tau - spec.p_rated / synchronous_speed(spec.n_rpm)?).abs() <= 1e-9 * tau,
        "rated torque inconsistent with synchronous speed"
    );
    Ok(tau)
}

/// Turbine torque demanded at speed ratio `nu` (negative: the generator
/// loads the turbine).
pub fn turbine_torque_schedule(nu: f64, tau_rated: f64) -> Result<f64> {
    if !(SCHEDULE_NU_MIN..=SCHEDULE_NU_MAX).contains(&nu) {
        return Err(Error::OutOfScheduleRange { nu });
    }
    Ok(if nu <= 1.0 {
        -tau_rated
    } else {
        -tau_rated / (nu * nu)
    })
}

/// Stator travel and root-solver settings for the steady solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOptions {
    pub alpha_s_min: f64,
    pub alpha_s_max: f64,
    pub root: RootOptions,
    /// Subintervals scanned when the stator bounds do not bracket `Φ = 0`.
    pub scan_pieces: usize,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            alpha_s_min: 5f64.to_radians(),
            alpha_s_max: 85f64.to_radians(),
            root: RootOptions::default(),
            scan_pieces: 64,
        }
    }
}

impl SteadyOptions {
    pub fn validate(&self) -> Result<()> {
        crate::tc::check_angle("alpha_s_min", self.alpha_s_min)?;
        crate::tc::check_angle("alpha_s_max", self.alpha_s_max)?;
        if self.alpha_s_min >= self.alpha_s_max {
            return Err(Error::invalid("alpha_s_min", "must be below alpha_s_max"));
        }
        Ok(())
    }
}

/// Non-negative flow velocities satisfying `τ_t0(V) = τ_t` at the given
/// speeds, ascending.
pub fn flow_velocity_roots(model: &TcModel, omega_i: f64, omega_t: f64, tau_t: f64) -> Vec<f64> {
    let [a, b] = model.turbine_torque_quadratic_in_v(omega_i, omega_t);
    quadratic_roots(a, b, -tau_t)
        .into_iter()
        .filter(|v| *v >= 0.0)
        .collect()
}

/// Solves the turbine torque balance for the steady flow velocity.
///
/// When two roots qualify, the one nearest `previous` is used, or the
/// smaller one without a neighbour.
pub fn solve_flow_velocity(
    model: &TcModel,
    nu: f64,
    omega_t: f64,
    tau_t: f64,
    previous: Option<f64>,
) -> Result<f64> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::invalid("nu", format!("must be > 0, got {nu}")));
    }
    if !tau_t.is_finite() {
        return Err(Error::invalid("tau_t", "must be finite"));
    }
    let roots = flow_velocity_roots(model, omega_t / nu, omega_t, tau_t);
    pick_root(&roots, previous).ok_or(Error::NoPhysicalRoot)
}

fn pick_root(roots: &[f64], previous: Option<f64>) -> Option<f64> {
    match (roots, previous) {
        ([], _) => None,
        ([only], _) => Some(*only),
        (_, Some(p)) => roots
            .iter()
            .copied()
            .min_by(|x, y| (x - p).abs().total_cmp(&(y - p).abs())),
        (_, None) => Some(roots[0]),
    }
}

/// Stator exit angle at which `Φ` vanishes for the given state.
pub fn solve_stator_angle(model: &TcModel, s: &TcState, opts: &SteadyOptions) -> Result<f64> {
    let phi = |a: f64| model.phi(s, a);
    let (lo, hi) = (opts.alpha_s_min, opts.alpha_s_max);
    if let Some(root) = bracketed_root(phi, lo, hi, opts.root) {
        return Ok(root);
    }
    let no_bracket = Error::NoBracket {
        lo_deg: lo.to_degrees(),
        hi_deg: hi.to_degrees(),
    };
    let (a, b) = scan_bracket(phi, lo, hi, opts.scan_pieces).ok_or(no_bracket.clone())?;
    bracketed_root(phi, a, b, opts.root).ok_or(no_bracket)
}

pub fn impeller_torque_at_steady(model: &TcModel, s: &TcState, alpha_s0: f64) -> f64 {
    model.steady_impeller_torque(s, alpha_s0)
}

/// Hydraulic power loss in percent of the turbine output power.
pub fn power_loss_pct(omega_i: f64, tau_i: f64, omega_t: f64, tau_t: f64) -> Result<f64> {
    let out = omega_t * tau_t.abs();
    if out == 0.0 {
        return Err(Error::ZeroOutputPower);
    }
    Ok(100.0 * (omega_i * tau_i - out) / out)
}

/// Reason a sweep point could not be solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    OutOfScheduleRange,
    NoPhysicalRoot,
    NoBracket,
    ZeroOutputPower,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureKind::OutOfScheduleRange => "out_of_schedule_range",
            FailureKind::NoPhysicalRoot => "no_physical_root",
            FailureKind::NoBracket => "no_bracket",
            FailureKind::ZeroOutputPower => "zero_output_power",
        })
    }
}

impl FailureKind {
    fn from_error(e: &Error) -> Self {
        match e {
            Error::OutOfScheduleRange { .. } => FailureKind::OutOfScheduleRange,
            Error::NoBracket { .. } => FailureKind::NoBracket,
            Error::ZeroOutputPower => FailureKind::ZeroOutputPower,
            _ => FailureKind::NoPhysicalRoot,
        }
    }
}

/// Steady operating point at one speed ratio. Fields that could not be
/// solved are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateSolution {
    pub nu: f64,
    pub omega_t: f64,
    pub omega_i: f64,
    pub v0: f64,
    pub alpha_s0: f64,
    pub tau_t: f64,
    pub tau_i: f64,
    pub p_loss_pct: f64,
    pub feasible: bool,
    pub failure: Option<FailureKind>,
}

impl SteadyStateSolution {
    pub fn state(&self) -> TcState {
        TcState {
            omega_i: self.omega_i,
            omega_t: self.omega_t,
            v: self.v0,
        }
    }

    pub fn input(&self) -> TcInput {
        TcInput {
            tau_i: self.tau_i,
            tau_t: self.tau_t,
            alpha_s: self.alpha_s0,
        }
    }

    fn unsolved(nu: f64, omega_t: f64) -> Self {
        Self {
            nu,
            omega_t,
            omega_i: omega_t / nu,
            v0: f64::NAN,
            alpha_s0: f64::NAN,
            tau_t: f64::NAN,
            tau_i: f64::NAN,
            p_loss_pct: f64::NAN,
            feasible: false,
            failure: None,
        }
    }
}

struct PointOutcome {
    solution: SteadyStateSolution,
    flow_roots: usize,
}

fn solve_point_inner(
    model: &TcModel,
    omega_t: f64,
    tau_rated: f64,
    nu: f64,
    previous_v: Option<f64>,
    opts: &SteadyOptions,
) -> PointOutcome {
    let mut sol = SteadyStateSolution::unsolved(nu, omega_t);
    let mut flow_roots = 0;
    let result = (|| -> Result<()> {
        sol.tau_t = turbine_torque_schedule(nu, tau_rated)?;
        flow_roots = flow_velocity_roots(model, sol.omega_i, omega_t, sol.tau_t).len();
        sol.v0 = solve_flow_velocity(model, nu, omega_t, sol.tau_t, previous_v)?;
        let s = sol.state();
        sol.alpha_s0 = solve_stator_angle(model, &s, opts)?;
        sol.tau_i = impeller_torque_at_steady(model, &s, sol.alpha_s0);
        sol.p_loss_pct = power_loss_pct(sol.omega_i, sol.tau_i, omega_t, sol.tau_t)?;
        Ok(())
    })();
    match result {
        Ok(()) => sol.feasible = true,
        Err(e) => sol.failure = Some(FailureKind::from_error(&e)),
    }
    PointOutcome {
        solution: sol,
        flow_roots,
    }
}

/// Solves the steady point at speed ratio `nu` with the turbine at
/// synchronous speed and the scheduled torque. Failures are recorded in the
/// returned solution rather than raised.
pub fn solve_point(
    model: &TcModel,
    spec: &RatedSpec,
    nu: f64,
    previous_v: Option<f64>,
    opts: &SteadyOptions,
) -> Result<SteadyStateSolution> {
    let omega_t = synchronous_speed(spec.n_rpm)?;
    let tau_rated = rated_torque(spec)?;
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::invalid("nu", format!("must be > 0, got {nu}")));
    }
    Ok(solve_point_inner(model, omega_t, tau_rated, nu, previous_v, opts).solution)
}

/// All points of a speed-ratio sweep plus the longest contiguous feasible run.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadySweep {
    pub points: Vec<SteadyStateSolution>,
    /// `(ν_first, ν_last)` of the longest run of feasible grid points.
    pub feasible_interval: Option<(f64, f64)>,
}

impl SteadySweep {
    /// Index range of the longest feasible run (earliest on ties).
    pub fn feasible_run(&self) -> Option<std::ops::Range<usize>> {
        let mut best: Option<std::ops::Range<usize>> = None;
        let mut start = None;
        for (i, p) in self.points.iter().enumerate() {
            match (p.feasible, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    if best.as_ref().is_none_or(|b| i - s > b.len()) {
                        best = Some(s..i);
                    }
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            let end = self.points.len();
            if best.as_ref().is_none_or(|b| end - s > b.len()) {
                best = Some(s..end);
            }
        }
        best
    }

    pub fn feasible_points(&self) -> impl Iterator<Item = &SteadyStateSolution> {
        self.points.iter().filter(|p| p.feasible)
    }
}

/// Grid `lo, lo + step, …` up to and including `hi` (within 1e-9 of a step).
pub fn nu_grid(nu_lo: f64, nu_hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(nu_lo.is_finite() && nu_hi.is_finite() && nu_lo > 0.0) {
        return Err(Error::invalid("nu_lo", "speed-ratio bounds must be finite and > 0"));
    }
    if nu_lo > nu_hi {
        return Err(Error::invalid("nu_lo", format!("must not exceed nu_hi ({nu_lo} > {nu_hi})")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid("nu_step", format!("must be > 0, got {step}")));
    }
    let n = ((nu_hi - nu_lo) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| {
            let x = nu_lo + k as f64 * step;
            // Strip the representation noise of repeated step addition.
            (x * 1e12).round() / 1e12
        })
        .collect())
}

/// Steady sweep over `[nu_lo, nu_hi]`.
///
/// Points are solved in parallel with the smaller-root rule, then a serial
/// pass re-solves points with two admissible flow roots so the chosen branch
/// is continuous with the previous feasible point.
pub fn sweep(
    model: &TcModel,
    spec: &RatedSpec,
    nu_lo: f64,
    nu_hi: f64,
    step: f64,
    opts: &SteadyOptions,
) -> Result<SteadySweep> {
    opts.validate()?;
    let omega_t = synchronous_speed(spec.n_rpm)?;
    let tau_rated = rated_torque(spec)?;
    let grid = nu_grid(nu_lo, nu_hi, step)?;

    let outcomes: Vec<PointOutcome> = grid
        .par_iter()
        .map(|&nu| solve_point_inner(model, omega_t, tau_rated, nu, None, opts))
        .collect();

    let mut points = Vec::with_capacity(outcomes.len());
    let mut previous_v: Option<f64> = None;
    for out in outcomes {
        let sol = if out.flow_roots > 1 && previous_v.is_some() {
            solve_point_inner(model, omega_t, tau_rated, out.solution.nu, previous_v, opts).solution
        } else {
            out.solution
        };
        if sol.v0.is_finite() {
            previous_v = Some(sol.v0);
        }
        points.push(sol);
    }

    let mut result = SteadySweep {
        points,
        feasible_interval: None,
    };
    result.feasible_interval = result
        .feasible_run()
        .map(|r| (result.points[r.start].nu, result.points[r.end - 1].nu));
    Ok(result)
}

/// Steady flow at unit impeller speed and turbine speed `nu`. All steady
/// quantities scale with impeller speed (V linearly, torques quadratically).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitFlow {
    pub nu: f64,
    /// Flow velocity per unit impeller speed (m/rad).
    pub v: f64,
    /// Impeller torque per unit impeller speed squared.
    pub tau_i: f64,
    /// Turbine torque per unit impeller speed squared.
    pub tau_t: f64,
}

impl UnitFlow {
    /// Torque ratio `|τ_t| / τ_i` with the turbine loaded (`τ_t0 < 0`).
    pub fn torque_ratio(&self) -> f64 {
        -self.tau_t / self.tau_i
    }
}

/// Solves `Φ = 0` for the flow at speed ratio `nu` and stator angle
/// `alpha_s`, taking the larger non-negative root.
pub fn unit_flow(model: &TcModel, nu: f64, alpha_s: f64) -> Result<UnitFlow> {
    let [c0, c1, c2] = model.phi_quadratic_in_v(1.0, nu, alpha_s);
    let v = quadratic_roots(c2, c1, c0)
        .into_iter()
        .rfind(|v| *v > 0.0)
        .ok_or(Error::NoPhysicalRoot)?;
    let s = TcState {
        omega_i: 1.0,
        omega_t: nu,
        v,
    };
    Ok(UnitFlow {
        nu,
        v,
        tau_i: model.steady_impeller_torque(&s, alpha_s),
        tau_t: model.steady_turbine_torque(&s),
    })
}

/// Finds the steady state `(ω_i, ω_t, V)` held by constant shaft torques
/// `tau_i > 0` (driving) and `tau_t < 0` (load) at a fixed stator angle.
///
/// The speed ratio is located on the torque-ratio characteristic within
/// `(0, nu_max]`, the speed level follows from impeller-torque scaling, and a
/// short Newton polish removes the remaining residual.
pub fn solve_operating_point(
    model: &TcModel,
    tau_i: f64,
    tau_t: f64,
    alpha_s: f64,
    nu_max: f64,
) -> Result<TcState> {
    if !(tau_i.is_finite() && tau_i > 0.0) {
        return Err(Error::invalid("tau_i", "must be finite and > 0"));
    }
    if !(tau_t.is_finite() && tau_t < 0.0) {
        return Err(Error::invalid("tau_t", "must be finite and < 0"));
    }
    let target = -tau_t / tau_i;
    let mismatch = |nu: f64| match unit_flow(model, nu, alpha_s) {
        Ok(u) if u.tau_i > 0.0 => u.torque_ratio() - target,
        _ => f64::NAN,
    };
    let lo = 1e-3;
    let (a, b) = scan_bracket(mismatch, lo, nu_max, 400).ok_or_else(|| {
        Error::NoConvergence(format!("torque ratio {target} not reached on ν ∈ [{lo}, {nu_max}]"))
    })?;
    let opts = RootOptions {
        abs_tol: 1e-14,
        max_iter: 200,
    };
    let nu = bracketed_root(mismatch, a, b, opts)
        .or_else(|| bracketed_root(mismatch, a, b, RootOptions { abs_tol: 1e-10, ..opts }))
        .ok_or_else(|| Error::NoConvergence("speed-ratio bisection failed".into()))?;
    let u = unit_flow(model, nu, alpha_s)?;
    let omega_i = (tau_i / u.tau_i).sqrt();
    let mut s = TcState {
        omega_i,
        omega_t: nu * omega_i,
        v: u.v * omega_i,
    };
    newton_polish(model, &mut s, &TcInput { tau_i, tau_t, alpha_s });
    Ok(s)
}

fn residual(model: &TcModel, s: &TcState, u: &TcInput) -> Vector3<f64> {
    Vector3::from(model.rhs(s, u))
}

fn newton_polish(model: &TcModel, s: &mut TcState, u: &TcInput) {
    let to_vec = |s: &TcState| Vector3::new(s.omega_t, s.omega_i, s.v);
    let from_vec = |x: &Vector3<f64>| TcState {
        omega_t: x[0],
        omega_i: x[1],
        v: x[2],
    };
    for _ in 0..5 {
        let x = to_vec(s);
        let r = residual(model, s, u);
        let mut jac = Matrix3::zeros();
        for j in 0..3 {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut xp = x;
            xp[j] += h;
            let mut xm = x;
            xm[j] -= h;
            let col = (residual(model, &from_vec(&xp), u) - residual(model, &from_vec(&xm), u)) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let Some(dx) = jac.lu().solve(&r) else { return };
        let candidate = from_vec(&(x - dx));
        if residual(model, &candidate, u).norm() < r.norm() {
            *s = candidate;
        } else {
            return;
        }
    }
}
