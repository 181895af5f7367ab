//! Torsional couplers, a lumped-parameter gearbox chain and the generator
//! boundary.
//!
//! Sign conventions: a link between an upstream body `a` and a downstream
//! body `b` carries a positive torque when it drives `b` forward and brakes
//! `a`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::steady::synchronous_speed;

/// Spring-damper shaft.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerParams {
    /// Torsional stiffness (N·m/rad).
    pub k_s: f64,
    /// Torsional damping (N·m·s/rad).
    pub c_s: f64,
}

impl CouplerParams {
    pub fn validate(&self, section: &str) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.k_s) {
            return Err(Error::invalid(&format!("{section}.K_s"), "must be finite and >= 0"));
        }
        if !ok(self.c_s) {
            return Err(Error::invalid(&format!("{section}.C_s"), "must be finite and >= 0"));
        }
        if self.k_s == 0.0 && self.c_s == 0.0 {
            return Err(Error::invalid(&format!("{section}.K_s"), "stiffness and damping cannot both be zero"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CouplerState {
    /// Relative twist (rad), growing while the upstream body runs ahead.
    pub theta_rel: f64,
}

/// Shaft torque transmitted from the upstream body (speed `omega_2`) to the
/// downstream body (speed `omega_1`). The twist rate is `omega_2 − omega_1`.
/// The downstream body receives `+T_r`, the upstream body `−T_r`.
pub fn coupler_torque(p: &CouplerParams, st: &CouplerState, omega_1: f64, omega_2: f64) -> f64 {
    p.k_s * st.theta_rel + p.c_s * (omega_2 - omega_1)
}

/// Bearing translation of a gear driven by its mesh force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationalDof {
    /// Mass (kg).
    pub mass: f64,
    /// Bearing stiffness (N/m).
    pub stiffness: f64,
    /// Bearing damping (N·s/m).
    pub damping: f64,
    /// Radius converting mesh torque into force (m).
    pub pitch_radius: f64,
}

/// One gear mesh and the inertia on its input side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GearStage {
    /// Inertia of the input-side body (kg·m²).
    pub inertia: f64,
    /// Speed ratio input/output; below one for a speed-increasing stage.
    pub ratio: f64,
    /// Mesh stiffness referred to the output side (N·m/rad).
    pub mesh_stiffness: f64,
    /// Mesh damping referred to the output side (N·m·s/rad).
    pub mesh_damping: f64,
    pub translational: Option<TranslationalDof>,
}

/// Chain of stages ending in an output body.
///
/// State layout: body speeds `ω_0 … ω_n`, mesh twists `e_0 … e_{n−1}`, then
/// `(y, ẏ)` for each stage with a translational DOF, in stage order.
#[derive(Debug, Clone, PartialEq)]
pub struct GearboxConfig {
    pub stages: Vec<GearStage>,
    /// Inertia of the output body (kg·m²).
    pub output_inertia: f64,
}

impl GearboxConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::invalid("gearbox.stages", "at least one stage is required"));
        }
        let pos = |x: f64| x.is_finite() && x > 0.0;
        for (i, s) in self.stages.iter().enumerate() {
            let f = |name: &str| format!("gearbox.stages[{i}].{name}");
            if !pos(s.inertia) {
                return Err(Error::invalid(&f("inertia"), "must be > 0"));
            }
            if !pos(s.ratio) {
                return Err(Error::invalid(&f("ratio"), "must be > 0"));
            }
            if !pos(s.mesh_stiffness) {
                return Err(Error::invalid(&f("mesh_stiffness"), "must be > 0"));
            }
            if !(s.mesh_damping.is_finite() && s.mesh_damping >= 0.0) {
                return Err(Error::invalid(&f("mesh_damping"), "must be >= 0"));
            }
            if let Some(t) = &s.translational {
                if !pos(t.mass) {
                    return Err(Error::invalid(&f("translational.mass"), "must be > 0"));
                }
                if !pos(t.stiffness) {
                    return Err(Error::invalid(&f("translational.stiffness"), "must be > 0"));
                }
                if !(t.damping.is_finite() && t.damping >= 0.0) {
                    return Err(Error::invalid(&f("translational.damping"), "must be >= 0"));
                }
                if !pos(t.pitch_radius) {
                    return Err(Error::invalid(&f("translational.pitch_radius"), "must be > 0"));
                }
            }
        }
        if !pos(self.output_inertia) {
            return Err(Error::invalid("gearbox.output_inertia", "must be > 0"));
        }
        Ok(())
    }

    pub fn body_count(&self) -> usize {
        self.stages.len() + 1
    }

    pub fn translational_count(&self) -> usize {
        self.stages.iter().filter(|s| s.translational.is_some()).count()
    }

    pub fn state_len(&self) -> usize {
        2 * self.stages.len() + 1 + 2 * self.translational_count()
    }

    pub fn inertia(&self, body: usize) -> f64 {
        self.stages.get(body).map_or(self.output_inertia, |s| s.inertia)
    }

    /// Overall input/output speed ratio.
    pub fn total_ratio(&self) -> f64 {
        self.stages.iter().map(|s| s.ratio).product()
    }

    fn check_len(&self, got: usize) -> Result<()> {
        let expected = self.state_len();
        if got != expected {
            return Err(Error::DimensionMismatch { expected, got });
        }
        Ok(())
    }

    /// Mesh torques, each referred to its output side.
    pub fn mesh_torques(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.check_len(state.len())?;
        let n = self.stages.len();
        Ok(self
            .stages
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let twist_rate = state[k] / s.ratio - state[k + 1];
                s.mesh_stiffness * state[n + 1 + k] + s.mesh_damping * twist_rate
            })
            .collect())
    }

    /// Writes the state derivative into `out` given the external torque on
    /// the input body and on the output body.
    pub fn derivatives(&self, state: &[f64], torque_in: f64, torque_out: f64, out: &mut [f64]) -> Result<()> {
        self.check_len(state.len())?;
        self.check_len(out.len())?;
        let n = self.stages.len();
        let mesh = self.mesh_torques(state)?;

        let mut net = vec![0.0; n + 1];
        net[0] += torque_in;
        net[n] += torque_out;
        for (k, (s, t)) in self.stages.iter().zip(&mesh).enumerate() {
            net[k] -= t / s.ratio;
            net[k + 1] += t;
        }
        for (b, torque) in net.iter().enumerate() {
            out[b] = torque / self.inertia(b);
        }
        for (k, s) in self.stages.iter().enumerate() {
            out[n + 1 + k] = state[k] / s.ratio - state[k + 1];
        }
        let mut slot = 2 * n + 1;
        for (s, t) in self.stages.iter().zip(&mesh) {
            if let Some(tr) = &s.translational {
                let (y, ydot) = (state[slot], state[slot + 1]);
                out[slot] = ydot;
                out[slot + 1] = (-tr.stiffness * y - tr.damping * ydot + t / tr.pitch_radius) / tr.mass;
                slot += 2;
            }
        }
        Ok(())
    }

    /// Steady state turning at `output_speed` while delivering
    /// `output_torque` through the output body (torque_out = −output_torque).
    /// Returns the state and the torque the input body must receive.
    pub fn steady_state(&self, output_speed: f64, output_torque: f64) -> (Vec<f64>, f64) {
        let n = self.stages.len();
        let mut x = vec![0.0; self.state_len()];
        x[n] = output_speed;
        let mut torque = output_torque;
        for k in (0..n).rev() {
            let s = &self.stages[k];
            x[k] = x[k + 1] * s.ratio;
            x[n + 1 + k] = torque / s.mesh_stiffness;
            torque /= s.ratio;
        }
        let mut slot = 2 * n + 1;
        let mut mesh = output_torque;
        let mut meshes = vec![0.0; n];
        for k in (0..n).rev() {
            meshes[k] = mesh;
            mesh /= self.stages[k].ratio;
        }
        for (s, t) in self.stages.iter().zip(&meshes) {
            if let Some(tr) = &s.translational {
                x[slot] = t / tr.pitch_radius / tr.stiffness;
                slot += 2;
            }
        }
        (x, torque)
    }

    /// Kinetic plus mesh-spring energy of the torsional part (J).
    pub fn torsional_energy(&self, state: &[f64]) -> Result<f64> {
        self.check_len(state.len())?;
        let n = self.stages.len();
        let kinetic: f64 = (0..=n).map(|b| 0.5 * self.inertia(b) * state[b] * state[b]).sum();
        let spring: f64 = self
            .stages
            .iter()
            .enumerate()
            .map(|(k, s)| 0.5 * s.mesh_stiffness * state[n + 1 + k].powi(2))
            .sum();
        Ok(kinetic + spring)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorMode {
    /// Generator and turbine locked to the grid at synchronous speed.
    IdealBus,
    /// Rotor-angle dynamics against the bus.
    Swing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorBoundary {
    pub mode: GeneratorMode,
    /// Synchronous speed (rpm).
    pub n_rpm: f64,
    /// Generator inertia (kg·m²), swing mode.
    pub inertia: f64,
    /// Speed damping (N·m·s/rad), swing mode.
    pub damping: f64,
    /// Synchronising torque coefficient (N·m/rad), swing mode. Zero gives an
    /// islanded machine without angle restoring torque.
    pub k_sync: f64,
}

impl GeneratorBoundary {
    pub fn validate(&self) -> Result<()> {
        synchronous_speed(self.n_rpm)?;
        if self.mode == GeneratorMode::Swing {
            if !(self.inertia.is_finite() && self.inertia > 0.0) {
                return Err(Error::invalid("generator.J", "must be > 0 in swing mode"));
            }
            if !(self.damping.is_finite() && self.damping >= 0.0) {
                return Err(Error::invalid("generator.D", "must be >= 0"));
            }
            if !(self.k_sync.is_finite() && self.k_sync >= 0.0) {
                return Err(Error::invalid("generator.K_sync", "must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn omega_sync(&self) -> f64 {
        self.n_rpm * 120.0 * std::f64::consts::PI / 3600.0
    }
}

/// What the generator imposes on the shaft it terminates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorTorque {
    /// Shaft speed held at this value; the reaction torque follows from the
    /// connected dynamics.
    SpeedConstraint(f64),
    /// Electrical torque opposing rotation (N·m).
    Electrical(f64),
}

/// Electrical torque `τ_load + K_sync·δ + D·(ω − ω_sync)` in swing mode, or
/// the speed constraint in ideal-bus mode. `delta` integrates `ω − ω_sync`.
pub fn generator_torque(g: &GeneratorBoundary, omega: f64, delta: f64, tau_load: f64) -> GeneratorTorque {
    let w_sync = g.omega_sync();
    match g.mode {
        GeneratorMode::IdealBus => GeneratorTorque::SpeedConstraint(w_sync),
        GeneratorMode::Swing => {
            GeneratorTorque::Electrical(tau_load + g.k_sync * delta + g.damping * (omega - w_sync))
        }
    }
}

/// Linear torsional network used for modal analysis. Each link ties an
/// upstream body `a` to a downstream body `b` with twist `θ_a/ratio − θ_b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TorsionalChain {
    pub inertias: Vec<f64>,
    pub links: Vec<(usize, usize, f64, f64)>,
}

impl TorsionalChain {
    pub fn add_body(&mut self, inertia: f64) -> usize {
        self.inertias.push(inertia);
        self.inertias.len() - 1
    }

    pub fn link(&mut self, a: usize, b: usize, ratio: f64, stiffness: f64) {
        self.links.push((a, b, ratio, stiffness));
    }

    /// Appends the gearbox bodies after `upstream` (joined through
    /// `coupler_stiffness`), returning the output body index.
    pub fn add_gearbox(&mut self, gb: &GearboxConfig, upstream: usize, coupler_stiffness: f64) -> usize {
        let first = self.add_body(gb.inertia(0));
        self.link(upstream, first, 1.0, coupler_stiffness);
        let mut prev = first;
        for (k, s) in gb.stages.iter().enumerate() {
            let next = self.add_body(gb.inertia(k + 1));
            self.link(prev, next, s.ratio, s.mesh_stiffness);
            prev = next;
        }
        prev
    }

    /// Undamped natural frequencies (Hz), ascending, rigid-body modes
    /// included as zeros.
    pub fn natural_frequencies_hz(&self) -> Vec<f64> {
        let n = self.inertias.len();
        let mut k = DMatrix::<f64>::zeros(n, n);
        for &(a, b, r, s) in &self.links {
            // Twist gradient: ∂/∂θ_a = 1/r, ∂/∂θ_b = −1.
            let g = [(a, 1.0 / r), (b, -1.0)];
            for &(i, gi) in &g {
                for &(j, gj) in &g {
                    k[(i, j)] += s * gi * gj;
                }
            }
        }
        let inv_sqrt: Vec<f64> = self.inertias.iter().map(|j| 1.0 / j.sqrt()).collect();
        let scaled = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
        let mut f: Vec<f64> = SymmetricEigen::new(scaled)
            .eigenvalues
            .iter()
            .map(|l| l.max(0.0).sqrt() / (2.0 * std::f64::consts::PI))
            .collect();
        f.sort_by(f64::total_cmp);
        f
    }
}
