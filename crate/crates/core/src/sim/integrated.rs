//! Rotor, gearbox, converter and generator closed by couplers, with the
//! optional stator-vane governor.
//!
//! ```text
//! rotor ─LSS─ gearbox ─HSS─ impeller ≈ turbine ─(coupler)─ generator
//! ```
//!
//! In ideal-bus mode the turbine is locked to synchronous speed and the
//! generator coupler is not used. In swing mode the generator is a separate
//! inertia with its own electrical torque.

use super::{SimConfig, SimTrace, Stepper, TorqueProfile};
use crate::drivetrain::{
    generator_torque, CouplerParams, GearboxConfig, GeneratorBoundary, GeneratorMode, GeneratorTorque,
};
use crate::error::{Error, Result};
use crate::governor::{init_from_steady, update, GovernorConfig, GovernorOutput, GovernorState, GovernorTemplate};
use crate::steady::{solve_point, sweep, RatedSpec, SteadyOptions, SteadyStateSolution, SCHEDULE_NU_MAX, SCHEDULE_NU_MIN};
use crate::tc::{TcInput, TcModel, TcParameters, TcState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorParams {
    /// Rotor inertia (kg·m²).
    pub inertia: f64,
    /// Aerodynamic torque slope `−∂τ/∂ω` about the starting speed (N·m·s/rad).
    pub aero_damping: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrivetrainConfig {
    pub rotor: RotorParams,
    /// Low-speed shaft between rotor and gearbox.
    pub lss: CouplerParams,
    pub gearbox: GearboxConfig,
    /// High-speed shaft between gearbox and impeller.
    pub hss: CouplerParams,
    pub generator: GeneratorBoundary,
    /// Turbine-to-generator shaft, swing mode only.
    pub generator_coupler: CouplerParams,
    /// `None` holds the stator at its steady angle.
    pub governor: Option<GovernorTemplate>,
    pub rated: RatedSpec,
    pub steady: SteadyOptions,
    /// Speed ratio of the starting steady point.
    pub nu0: f64,
}

impl DrivetrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rotor.inertia.is_finite() && self.rotor.inertia > 0.0) {
            return Err(Error::invalid("rotor.inertia", "must be > 0"));
        }
        if !(self.rotor.aero_damping.is_finite() && self.rotor.aero_damping >= 0.0) {
            return Err(Error::invalid("rotor.aero_damping", "must be >= 0"));
        }
        for (name, c) in [("lss", &self.lss), ("hss", &self.hss), ("generator_coupler", &self.generator_coupler)] {
            c.validate(name)?;
            if c.k_s <= 0.0 {
                return Err(Error::invalid(&format!("{name}.K_s"), "drivetrain shafts need K_s > 0"));
            }
        }
        self.gearbox.validate()?;
        self.generator.validate()?;
        self.rated.validate()?;
        if self.generator.n_rpm != self.rated.n_rpm {
            return Err(Error::invalid("generator.N", "must equal the rated synchronous speed"));
        }
        self.steady.validate()?;
        if !(SCHEDULE_NU_MIN..=SCHEDULE_NU_MAX).contains(&self.nu0) {
            return Err(Error::invalid("nu0", format!("must lie in [{SCHEDULE_NU_MIN}, {SCHEDULE_NU_MAX}]")));
        }
        Ok(())
    }
}

/// Torque inputs of an integrated run, as multipliers of their steady values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Scenario {
    /// Rotor aerodynamic torque.
    pub rotor: TorqueProfile,
    /// Generator electrical load setpoint (swing mode).
    pub load: TorqueProfile,
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    gearbox: usize,
    gearbox_len: usize,
    hss: usize,
    tc: usize,
    generator: Option<usize>,
    len: usize,
}

impl Layout {
    fn new(cfg: &DrivetrainConfig) -> Self {
        let gearbox = 2;
        let gearbox_len = cfg.gearbox.state_len();
        let hss = gearbox + gearbox_len;
        let tc = hss + 1;
        let (generator, len) = match cfg.generator.mode {
            GeneratorMode::IdealBus => (None, tc + 3),
            GeneratorMode::Swing => (Some(tc + 3), tc + 6),
        };
        Self {
            gearbox,
            gearbox_len,
            hss,
            tc,
            generator,
            len,
        }
    }
}

/// Shaft torques alongside the state derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Signals {
    pub tau_rotor: f64,
    pub tau_i: f64,
    pub tau_t: f64,
    pub tau_e: f64,
}

/// Assembled system with its steady starting point.
#[derive(Debug, Clone)]
pub struct IntegratedModel {
    tc: TcModel,
    cfg: DrivetrainConfig,
    layout: Layout,
    initial: SteadyStateSolution,
    x0: Vec<f64>,
    rotor_torque0: f64,
    rotor_speed0: f64,
    load_torque0: f64,
    omega_sync: f64,
}

impl IntegratedModel {
    pub fn new(tc: &TcParameters, cfg: &DrivetrainConfig) -> Result<Self> {
        cfg.validate()?;
        let model = TcModel::new(*tc)?;
        let sol = solve_point(&model, &cfg.rated, cfg.nu0, None, &cfg.steady)?;
        if !sol.feasible {
            return Err(Error::InfeasibleInitialization(format!(
                "steady solve at ν = {} failed ({})",
                cfg.nu0,
                sol.failure.map_or("unknown".to_string(), |f| f.to_string())
            )));
        }
        let layout = Layout::new(cfg);
        let mut x = vec![0.0; layout.len];
        let (gb, rotor_torque) = cfg.gearbox.steady_state(sol.omega_i, sol.tau_i);
        x[0] = gb[0];
        x[1] = rotor_torque / cfg.lss.k_s;
        x[layout.gearbox..layout.gearbox + layout.gearbox_len].copy_from_slice(&gb);
        x[layout.hss] = sol.tau_i / cfg.hss.k_s;
        x[layout.tc] = sol.omega_t;
        x[layout.tc + 1] = sol.omega_i;
        x[layout.tc + 2] = sol.v0;
        let load = -sol.tau_t;
        if let Some(g) = layout.generator {
            x[g] = sol.omega_t;
            x[g + 1] = load / cfg.generator_coupler.k_s;
            x[g + 2] = 0.0;
        }
        Ok(Self {
            tc: model,
            cfg: cfg.clone(),
            layout,
            initial: sol,
            rotor_speed0: x[0],
            x0: x,
            rotor_torque0: rotor_torque,
            load_torque0: load,
            omega_sync: cfg.generator.omega_sync(),
        })
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.x0
    }

    pub fn initial_solution(&self) -> &SteadyStateSolution {
        &self.initial
    }

    pub fn omega_sync(&self) -> f64 {
        self.omega_sync
    }

    /// Index of the turbine speed in the state vector.
    pub fn turbine_index(&self) -> usize {
        self.layout.tc
    }

    /// Evaluates `ẋ` at time `t` with stator angle `alpha_s`.
    pub fn derivatives(&self, t: f64, x: &[f64], alpha_s: f64, scenario: &Scenario, dx: &mut [f64]) -> Signals {
        let cfg = &self.cfg;
        let l = &self.layout;
        let gb = &x[l.gearbox..l.gearbox + l.gearbox_len];
        let n = cfg.gearbox.stages.len();
        let (omega_r, omega_in, omega_out) = (x[0], gb[0], gb[n]);
        let s = TcState {
            omega_t: x[l.tc],
            omega_i: x[l.tc + 1],
            v: x[l.tc + 2],
        };

        let t_lss = cfg.lss.k_s * x[1] + cfg.lss.c_s * (omega_r - omega_in);
        let t_hss = cfg.hss.k_s * x[l.hss] + cfg.hss.c_s * (omega_out - s.omega_i);
        let tau_rotor =
            scenario.rotor.value(t) * self.rotor_torque0 - cfg.rotor.aero_damping * (omega_r - self.rotor_speed0);

        dx[0] = (tau_rotor - t_lss) / cfg.rotor.inertia;
        dx[1] = omega_r - omega_in;
        cfg.gearbox
            .derivatives(gb, t_lss, -t_hss, &mut dx[l.gearbox..l.gearbox + l.gearbox_len])
            .expect("gearbox slice sized by layout");
        dx[l.hss] = omega_out - s.omega_i;

        let mut sig = Signals {
            tau_rotor,
            tau_i: t_hss,
            ..Signals::default()
        };
        match l.generator {
            None => {
                let p = self.tc.pinned_turbine(&s, t_hss, alpha_s);
                dx[l.tc] = 0.0;
                dx[l.tc + 1] = p.omega_i_dot;
                dx[l.tc + 2] = p.v_dot;
                sig.tau_t = p.tau_t;
                sig.tau_e = -p.tau_t;
            }
            Some(g) => {
                let (omega_g, twist, delta) = (x[g], x[g + 1], x[g + 2]);
                let c = &cfg.generator_coupler;
                let t_gen = c.k_s * twist + c.c_s * (s.omega_t - omega_g);
                let load = scenario.load.value(t) * self.load_torque0;
                let GeneratorTorque::Electrical(tau_e) = generator_torque(&cfg.generator, omega_g, delta, load) else {
                    unreachable!("swing mode yields an electrical torque")
                };
                let d = self.tc.derivatives(
                    &s,
                    &TcInput {
                        tau_i: t_hss,
                        tau_t: -t_gen,
                        alpha_s,
                    },
                );
                dx[l.tc] = d.omega_t;
                dx[l.tc + 1] = d.omega_i;
                dx[l.tc + 2] = d.v;
                dx[g] = (t_gen - tau_e) / cfg.generator.inertia;
                dx[g + 1] = s.omega_t - omega_g;
                dx[g + 2] = omega_g - self.omega_sync;
                sig.tau_t = -t_gen;
                sig.tau_e = tau_e;
            }
        }
        sig
    }

    fn columns(&self, governor: bool) -> Vec<String> {
        let mut c: Vec<String> = ["t", "omega_rotor", "omega_i", "omega_t", "V", "tau_rotor", "tau_i", "tau_t", "alpha_s", "twist_lss", "twist_hss"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let gb = &self.cfg.gearbox;
        for b in 0..gb.body_count() {
            c.push(format!("gb_omega_{b}"));
        }
        for k in 0..gb.stages.len() {
            c.push(format!("gb_twist_{k}"));
        }
        for (k, s) in gb.stages.iter().enumerate() {
            if s.translational.is_some() {
                c.push(format!("gb_y_{k}"));
                c.push(format!("gb_ydot_{k}"));
            }
        }
        if self.layout.generator.is_some() {
            c.extend(["omega_g", "twist_gen", "delta"].map(String::from));
        }
        c.push("tau_e".into());
        if governor {
            c.extend(["gov_error", "gov_p", "gov_i", "gov_d", "gov_raw", "gov_cmd"].map(String::from));
        }
        c
    }

    fn row(&self, t: f64, x: &[f64], alpha_s: f64, sig: &Signals, gov: Option<&GovernorOutput>) -> Vec<f64> {
        let l = &self.layout;
        let mut r = vec![
            t,
            x[0],
            x[l.tc + 1],
            x[l.tc],
            x[l.tc + 2],
            sig.tau_rotor,
            sig.tau_i,
            sig.tau_t,
            alpha_s,
            x[1],
            x[l.hss],
        ];
        r.extend_from_slice(&x[l.gearbox..l.gearbox + l.gearbox_len]);
        if let Some(g) = l.generator {
            r.extend_from_slice(&x[g..g + 3]);
        }
        r.push(sig.tau_e);
        if let Some(o) = gov {
            r.extend([o.error, o.p, o.i, o.d, o.raw, o.cmd]);
        }
        r
    }
}

/// Result of [`run_integrated`].
#[derive(Debug, Clone)]
pub struct IntegratedRun {
    pub trace: SimTrace,
    pub initial: SteadyStateSolution,
    pub governor: Option<GovernorConfig>,
    pub final_state: Vec<f64>,
}

/// Governor settings for a model, taking the stator travel from the steady
/// sweep when the template leaves it open.
pub fn governor_config(model: &IntegratedModel, tc: &TcParameters, template: &GovernorTemplate) -> Result<GovernorConfig> {
    let observed = if template.bounds.is_none() {
        let m = TcModel::new(*tc)?;
        let sw = sweep(&m, &model.cfg.rated, SCHEDULE_NU_MIN, SCHEDULE_NU_MAX, 0.001, &model.cfg.steady)?;
        let angles: Vec<f64> = sw.feasible_points().map(|p| p.alpha_s0).collect();
        let lo = angles.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = angles.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo < hi).then_some((lo, hi))
    } else {
        None
    };
    init_from_steady(&model.initial, observed, template)
}

/// Closed-loop run from the steady point at `cfg.nu0`. The governor samples
/// the turbine speed once per step and holds its command over the step.
pub fn run_integrated(tc: &TcParameters, cfg: &DrivetrainConfig, scenario: &Scenario, sim: &SimConfig) -> Result<IntegratedRun> {
    sim.validate()?;
    scenario.rotor.validate("scenario.rotor")?;
    scenario.load.validate("scenario.load")?;
    let model = IntegratedModel::new(tc, cfg)?;
    let gov_cfg = cfg.governor.as_ref().map(|t| governor_config(&model, tc, t)).transpose()?;

    let mut x = model.x0.clone();
    let mut dx = vec![0.0; x.len()];
    let mut alpha_s = model.initial.alpha_s0;
    let mut gov_state = gov_cfg.as_ref().map(GovernorState::new);
    let mut gov_out = gov_cfg.as_ref().map(|c| GovernorOutput {
        i: c.integrator_init,
        raw: c.alpha_s_init,
        cmd: c.alpha_s_init,
        ..GovernorOutput::default()
    });

    let mut trace = SimTrace::new(model.columns(gov_cfg.is_some()));
    let sig = model.derivatives(0.0, &x, alpha_s, scenario, &mut dx);
    trace.push(model.row(0.0, &x, alpha_s, &sig, gov_out.as_ref()));

    let mut stepper = Stepper::new(sim.integrator, x.len());
    let wt = model.turbine_index();
    for k in 0..sim.steps() {
        let t = k as f64 * sim.dt;
        if let (Some(c), Some(s)) = (gov_cfg.as_ref(), gov_state.as_mut()) {
            let (next, out) = update(s, c, x[wt] - model.omega_sync, sim.dt);
            *s = next;
            gov_out = Some(out);
            alpha_s = next.alpha_s_cmd;
        }
        let held = alpha_s;
        let rhs = |t: f64, x: &[f64], dx: &mut [f64]| {
            model.derivatives(t, x, held, scenario, dx);
        };
        stepper.step(&rhs, t, sim.dt, &mut x)?;
        if (k + 1) % sim.record_decimation == 0 {
            let t1 = (k + 1) as f64 * sim.dt;
            let sig = model.derivatives(t1, &x, alpha_s, scenario, &mut dx);
            trace.push(model.row(t1, &x, alpha_s, &sig, gov_out.as_ref()));
        }
    }

    Ok(IntegratedRun {
        trace,
        initial: model.initial,
        governor: gov_cfg,
        final_state: x,
    })
}
