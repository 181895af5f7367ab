//! The converter on its own, driven by prescribed shaft torques.

use super::{Integrator, SimConfig, SimTrace, Stepper};
use crate::error::Result;
use crate::tc::{TcInput, TcModel, TcState};

fn to_state(x: &[f64]) -> TcState {
    TcState {
        omega_t: x[0],
        omega_i: x[1],
        v: x[2],
    }
}

/// Integrates `steps` steps from `s0` with torques `tau_i(t)`, `tau_t(t)`
/// and a fixed stator angle, calling `observe(step, t, state)` after every
/// step. Returns the final state.
#[allow(clippy::too_many_arguments)]
pub fn integrate_tc<FI, FT, O>(
    model: &TcModel,
    s0: TcState,
    alpha_s: f64,
    tau_i: FI,
    tau_t: FT,
    dt: f64,
    steps: usize,
    method: Integrator,
    mut observe: O,
) -> Result<TcState>
where
    FI: Fn(f64) -> f64,
    FT: Fn(f64) -> f64,
    O: FnMut(usize, f64, &TcState),
{
    let rhs = |t: f64, x: &[f64], dx: &mut [f64]| {
        let u = TcInput {
            tau_i: tau_i(t),
            tau_t: tau_t(t),
            alpha_s,
        };
        let d = model.derivatives(&to_state(x), &u);
        dx[0] = d.omega_t;
        dx[1] = d.omega_i;
        dx[2] = d.v;
    };
    let mut x = [s0.omega_t, s0.omega_i, s0.v];
    let mut stepper = Stepper::new(method, 3);
    for k in 0..steps {
        let t = k as f64 * dt;
        stepper.step(&rhs, t, dt, &mut x)?;
        observe(k + 1, (k + 1) as f64 * dt, &to_state(&x));
    }
    Ok(to_state(&x))
}

pub const TC_COLUMNS: [&str; 7] = ["t", "omega_t", "omega_i", "V", "tau_i", "tau_t", "alpha_s"];

/// Runs [`integrate_tc`] and records every `record_decimation`-th step
/// (plus the initial state).
pub fn simulate_tc<FI, FT>(
    model: &TcModel,
    s0: TcState,
    alpha_s: f64,
    tau_i: FI,
    tau_t: FT,
    cfg: &SimConfig,
) -> Result<SimTrace>
where
    FI: Fn(f64) -> f64,
    FT: Fn(f64) -> f64,
{
    cfg.validate()?;
    let mut trace = SimTrace::new(TC_COLUMNS);
    let row = |t: f64, s: &TcState| vec![t, s.omega_t, s.omega_i, s.v, tau_i(t), tau_t(t), alpha_s];
    trace.push(row(0.0, &s0));
    integrate_tc(
        model,
        s0,
        alpha_s,
        &tau_i,
        &tau_t,
        cfg.dt,
        cfg.steps(),
        cfg.integrator,
        |k, t, s| {
            if k % cfg.record_decimation == 0 {
                trace.push(row(t, s));
            }
        },
    )?;
    Ok(trace)
}
