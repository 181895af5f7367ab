//! Torque converter closures and three-state dynamics.
//!
//! The converter is described by impeller speed `ω_i`, turbine speed `ω_t`
//! and torus fluid velocity `V`. Its dynamics are written in mass-matrix
//! form with the state ordered `(ω_t, ω_i, V)`:
//!
//! ```text
//! | I_t   0    ρ·A·S_t | | ω̇_t |   | τ_t − τ_t0(V, ω_i, ω_t)   |
//! | 0     I_i  ρ·A·S_i | | ω̇_i | = | τ_i − τ_i0(V, ω_i, α_s)   |
//! | S_t   S_i  L_f     | | V̇   |   | Φ(V, ω_i, ω_t, α_s)       |
//! ```
//!
//! `τ_i0` and `τ_t0` are the torques the fluid absorbs from the impeller and
//! turbine shafts at steady flow. A turbine delivering power to a load runs
//! with `τ_t0 < 0`. All angles are radians.

use nalgebra::{linalg::LU, Matrix3, Vector3, U3};

use crate::error::{Error, Result};

/// Smallest accepted `|det M|` (SI units).
pub const MASS_DET_FLOOR: f64 = 1e-12;

/// Blade-row geometry. Radii and lengths in metres, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcGeometry {
    /// Impeller exit radius.
    pub r_i: f64,
    /// Turbine exit radius.
    pub r_t: f64,
    /// Stator exit radius.
    pub r_s: f64,
    /// Flow cross-sectional area (m²).
    pub area: f64,
    /// Equivalent fluid inertia length.
    pub l_f: f64,
    /// Impeller exit angle.
    pub alpha_i: f64,
    /// Turbine exit angle.
    pub alpha_t: f64,
    /// Impeller inlet angle.
    pub alpha_i_in: f64,
    /// Turbine inlet angle.
    pub alpha_t_in: f64,
    /// Stator inlet angle.
    pub alpha_s_in: f64,
    /// Impeller design area constant (m²).
    pub s_i: f64,
    /// Turbine design area constant (m²).
    pub s_t: f64,
    /// Stator design area constant (m²). Carried for table fidelity; the
    /// stator is fixed so no equation uses it.
    pub s_s: f64,
}

/// Fluid density and loss coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcFluidLoss {
    /// Fluid density (kg/m³).
    pub rho: f64,
    /// Frictional loss coefficient.
    pub f: f64,
    pub c_sh_i: f64,
    pub c_sh_t: f64,
    pub c_sh_s: f64,
}

/// Moments of inertia (kg·m²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcInertias {
    pub i_i: f64,
    pub i_t: f64,
    /// Stator inertia, unused while the stator is held fixed.
    pub i_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcParameters {
    pub geometry: TcGeometry,
    pub fluid: TcFluidLoss,
    pub inertias: TcInertias,
}

/// Dynamic state of the converter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcState {
    /// Impeller angular speed (rad/s).
    pub omega_i: f64,
    /// Turbine angular speed (rad/s).
    pub omega_t: f64,
    /// Torus fluid velocity (m/s).
    pub v: f64,
}

/// Shaft torques and stator exit angle applied to the converter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcInput {
    /// Impeller shaft torque (N·m).
    pub tau_i: f64,
    /// Turbine shaft torque (N·m), negative for a load.
    pub tau_t: f64,
    /// Stator exit angle (rad).
    pub alpha_s: f64,
}

/// Shock velocities at the impeller, turbine and stator inlets (m/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockVelocities {
    pub impeller: f64,
    pub turbine: f64,
    pub stator: f64,
}

/// Time derivatives in state order `(ω_t, ω_i, V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcDerivatives {
    pub omega_t: f64,
    pub omega_i: f64,
    pub v: f64,
}

impl TcDerivatives {
    pub fn as_array(&self) -> [f64; 3] {
        [self.omega_t, self.omega_i, self.v]
    }

    pub fn norm(&self) -> f64 {
        (self.omega_t * self.omega_t + self.omega_i * self.omega_i + self.v * self.v).sqrt()
    }
}

/// Result of advancing the converter with the turbine speed held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinnedTurbine {
    pub omega_i_dot: f64,
    pub v_dot: f64,
    /// Turbine shaft torque required to keep `ω̇_t = 0`.
    pub tau_t: f64,
}

fn check_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0, got {value}")))
    }
}

fn check_non_negative(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite and >= 0, got {value}")))
    }
}

pub(crate) fn check_angle(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value.abs() < std::f64::consts::FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("angle {:.4}° must lie strictly inside (-90°, 90°)", value.to_degrees()),
        ))
    }
}

fn check_finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, "must be finite"))
    }
}

impl TcParameters {
    /// Checks the componentwise invariants and the mass-matrix floor.
    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        check_positive("R_i", g.r_i)?;
        check_positive("R_t", g.r_t)?;
        check_positive("R_s", g.r_s)?;
        check_positive("A", g.area)?;
        check_positive("L_f", g.l_f)?;
        check_angle("alpha_i", g.alpha_i)?;
        check_angle("alpha_t", g.alpha_t)?;
        check_angle("alpha_i_in", g.alpha_i_in)?;
        check_angle("alpha_t_in", g.alpha_t_in)?;
        check_angle("alpha_s_in", g.alpha_s_in)?;
        check_finite("S_i", g.s_i)?;
        check_finite("S_t", g.s_t)?;
        check_finite("S_s", g.s_s)?;

        let fl = &self.fluid;
        check_positive("rho", fl.rho)?;
        check_non_negative("f", fl.f)?;
        check_non_negative("C_sh_i", fl.c_sh_i)?;
        check_non_negative("C_sh_t", fl.c_sh_t)?;
        check_non_negative("C_sh_s", fl.c_sh_s)?;

        let inr = &self.inertias;
        check_positive("I_i", inr.i_i)?;
        check_positive("I_t", inr.i_t)?;
        check_non_negative("I_s", inr.i_s)?;

        mass_matrix(self).map(|_| ())
    }
}

/// Axial torus volume flow `Q = V·A` (m³/s).
pub fn volume_flow(v: f64, area: f64) -> f64 {
    v * area
}

fn raw_mass_matrix(p: &TcParameters) -> Matrix3<f64> {
    let g = &p.geometry;
    let rho_a = p.fluid.rho * g.area;
    Matrix3::new(
        p.inertias.i_t, 0.0, rho_a * g.s_t,
        0.0, p.inertias.i_i, rho_a * g.s_i,
        g.s_t, g.s_i, g.l_f,
    )
}

/// Coefficient matrix of the dynamics, state order `(ω_t, ω_i, V)`.
pub fn mass_matrix(p: &TcParameters) -> Result<Matrix3<f64>> {
    let m = raw_mass_matrix(p);
    let det = m.determinant();
    if !(det.abs() > MASS_DET_FLOOR) {
        return Err(Error::SingularMassMatrix {
            det,
            floor: MASS_DET_FLOOR,
        });
    }
    Ok(m)
}

/// Validated converter with cached blade-angle trigonometry and the
/// factorised mass matrix. Every closure is a pure function of its inputs.
#[derive(Debug, Clone)]
pub struct TcModel {
    params: TcParameters,
    tan_i: f64,
    tan_t: f64,
    tan_i_in: f64,
    tan_t_in: f64,
    tan_s_in: f64,
    sec2_i: f64,
    sec2_t: f64,
    mass: Matrix3<f64>,
    mass_lu: LU<f64, U3, U3>,
}

impl TcModel {
    pub fn new(params: TcParameters) -> Result<Self> {
        params.validate()?;
        let g = &params.geometry;
        let mass = mass_matrix(&params)?;
        let cos_i = g.alpha_i.cos();
        let cos_t = g.alpha_t.cos();
        Ok(Self {
            tan_i: g.alpha_i.tan(),
            tan_t: g.alpha_t.tan(),
            tan_i_in: g.alpha_i_in.tan(),
            tan_t_in: g.alpha_t_in.tan(),
            tan_s_in: g.alpha_s_in.tan(),
            sec2_i: 1.0 / (cos_i * cos_i),
            sec2_t: 1.0 / (cos_t * cos_t),
            mass,
            mass_lu: mass.lu(),
            params,
        })
    }

    pub fn params(&self) -> &TcParameters {
        &self.params
    }

    pub fn mass_matrix(&self) -> Matrix3<f64> {
        self.mass
    }

    fn rho_q(&self, v: f64) -> f64 {
        self.params.fluid.rho * volume_flow(v, self.params.geometry.area)
    }

    /// `τ_i0 = ρQ[ω_i R_i² + V(R_i tan α_i − R_s tan α_s)]`.
    pub fn steady_impeller_torque(&self, s: &TcState, alpha_s: f64) -> f64 {
        let g = &self.params.geometry;
        self.rho_q(s.v)
            * (s.omega_i * g.r_i * g.r_i + s.v * (g.r_i * self.tan_i - g.r_s * alpha_s.tan()))
    }

    /// `τ_t0 = ρQ[ω_t R_t² − ω_i R_i² + V(R_t tan α_t − R_i tan α_i)]`.
    pub fn steady_turbine_torque(&self, s: &TcState) -> f64 {
        let g = &self.params.geometry;
        self.rho_q(s.v)
            * (s.omega_t * g.r_t * g.r_t - s.omega_i * g.r_i * g.r_i
                + s.v * (g.r_t * self.tan_t - g.r_i * self.tan_i))
    }

    pub fn shock_velocities(&self, s: &TcState, alpha_s: f64) -> ShockVelocities {
        let g = &self.params.geometry;
        ShockVelocities {
            impeller: -g.r_s * s.omega_i + s.v * (alpha_s.tan() - self.tan_i_in),
            turbine: g.r_i * (s.omega_i - s.omega_t) + s.v * (self.tan_i - self.tan_t_in),
            stator: g.r_t * s.omega_t + s.v * (self.tan_t - self.tan_s_in),
        }
    }

    /// Squared fluid velocities relative to the impeller, turbine and stator
    /// blades, `V² sec² α`.
    pub fn relative_velocities(&self, alpha_s: f64, v: f64) -> [f64; 3] {
        let v2 = v * v;
        let cos_s = alpha_s.cos();
        [v2 * self.sec2_i, v2 * self.sec2_t, v2 / (cos_s * cos_s)]
    }

    /// Shock plus friction loss `ψ` (m²/s²); never negative.
    pub fn loss_term(&self, s: &TcState, alpha_s: f64) -> f64 {
        let fl = &self.params.fluid;
        let sh = self.shock_velocities(s, alpha_s);
        let [vi, vt, vs] = self.relative_velocities(alpha_s, s.v);
        0.5 * (fl.c_sh_i * sh.impeller * sh.impeller
            + fl.c_sh_t * sh.turbine * sh.turbine
            + fl.c_sh_s * sh.stator * sh.stator
            + fl.f * (vi + vt + vs))
    }

    /// Torus momentum balance `Φ` (m²/s²); zero at steady flow.
    pub fn phi(&self, s: &TcState, alpha_s: f64) -> f64 {
        let g = &self.params.geometry;
        let (wi, wt, v) = (s.omega_i, s.omega_t, s.v);
        let ri2 = g.r_i * g.r_i;
        ri2 * wi * wi + g.r_t * g.r_t * wt * wt - ri2 * wt * wi
            + wi * v * (g.r_i * self.tan_i - g.r_s * alpha_s.tan())
            + wt * v * (g.r_t * self.tan_t - g.r_i * self.tan_i)
            - self.loss_term(s, alpha_s)
    }

    /// Coefficients `[c0, c1, c2]` with `Φ = c0 + c1·V + c2·V²` at fixed speeds.
    pub fn phi_quadratic_in_v(&self, omega_i: f64, omega_t: f64, alpha_s: f64) -> [f64; 3] {
        let g = &self.params.geometry;
        let fl = &self.params.fluid;
        let tan_s = alpha_s.tan();
        let cos_s = alpha_s.cos();

        // Shock velocities are affine in V: a + b·V.
        let (a_i, b_i) = (-g.r_s * omega_i, tan_s - self.tan_i_in);
        let (a_t, b_t) = (g.r_i * (omega_i - omega_t), self.tan_i - self.tan_t_in);
        let (a_s, b_s) = (g.r_t * omega_t, self.tan_t - self.tan_s_in);

        let ri2 = g.r_i * g.r_i;
        let c0 = ri2 * omega_i * omega_i + g.r_t * g.r_t * omega_t * omega_t
            - ri2 * omega_t * omega_i
            - 0.5 * (fl.c_sh_i * a_i * a_i + fl.c_sh_t * a_t * a_t + fl.c_sh_s * a_s * a_s);
        let c1 = omega_i * (g.r_i * self.tan_i - g.r_s * tan_s)
            + omega_t * (g.r_t * self.tan_t - g.r_i * self.tan_i)
            - (fl.c_sh_i * a_i * b_i + fl.c_sh_t * a_t * b_t + fl.c_sh_s * a_s * b_s);
        let c2 = -0.5
            * (fl.c_sh_i * b_i * b_i
                + fl.c_sh_t * b_t * b_t
                + fl.c_sh_s * b_s * b_s
                + fl.f * (self.sec2_i + self.sec2_t + 1.0 / (cos_s * cos_s)));
        [c0, c1, c2]
    }

    /// Coefficients `[a, b]` with `τ_t0 = a·V² + b·V` at fixed speeds.
    pub fn turbine_torque_quadratic_in_v(&self, omega_i: f64, omega_t: f64) -> [f64; 2] {
        let g = &self.params.geometry;
        let rho_a = self.params.fluid.rho * g.area;
        [
            rho_a * (g.r_t * self.tan_t - g.r_i * self.tan_i),
            rho_a * (omega_t * g.r_t * g.r_t - omega_i * g.r_i * g.r_i),
        ]
    }

    /// Right-hand side `b = (τ_t − τ_t0, τ_i − τ_i0, Φ)`.
    pub fn rhs(&self, s: &TcState, u: &TcInput) -> [f64; 3] {
        [
            u.tau_t - self.steady_turbine_torque(s),
            u.tau_i - self.steady_impeller_torque(s, u.alpha_s),
            self.phi(s, u.alpha_s),
        ]
    }

    /// Solves `M·ẋ = b`. The mass matrix was checked at construction, so
    /// this cannot fail.
    pub fn derivatives(&self, s: &TcState, u: &TcInput) -> TcDerivatives {
        let b = Vector3::from(self.rhs(s, u));
        let x = self
            .mass_lu
            .solve(&b)
            .expect("mass matrix verified nonsingular at construction");
        TcDerivatives {
            omega_t: x[0],
            omega_i: x[1],
            v: x[2],
        }
    }

    /// Dynamics with `ω̇_t = 0` imposed; the turbine shaft torque becomes the
    /// unknown reaction.
    pub fn pinned_turbine(&self, s: &TcState, tau_i: f64, alpha_s: f64) -> PinnedTurbine {
        let g = &self.params.geometry;
        let rho_a = self.params.fluid.rho * g.area;
        let i_i = self.params.inertias.i_i;
        let b2 = tau_i - self.steady_impeller_torque(s, alpha_s);
        let b3 = self.phi(s, alpha_s);
        // | I_i  ρA·S_i | |ω̇_i|   |b2|
        // | S_i  L_f    | |V̇  | = |b3|
        let det = i_i * g.l_f - rho_a * g.s_i * g.s_i;
        let omega_i_dot = (b2 * g.l_f - rho_a * g.s_i * b3) / det;
        let v_dot = (i_i * b3 - g.s_i * b2) / det;
        PinnedTurbine {
            omega_i_dot,
            v_dot,
            tau_t: self.steady_turbine_torque(s) + rho_a * g.s_t * v_dot,
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const PROBE: TcState = TcState {
        omega_i: 100.0,
        omega_t: 90.0,
        v: 2.0,
    };

    fn honda_model() -> TcModel {
        TcModel::new(honda()).unwrap()
    }

    #[test]
    fn volume_flow_examples() {
        assert_eq!(volume_flow(0.0, 0.0107), 0.0);
        assert_eq!(volume_flow(1.0, 0.0107), 0.0107);
        assert_relative_eq!(volume_flow(2.5, 0.0797), 0.19925, max_relative = 1e-14);
        assert!(volume_flow(-1.0, 0.0107) < 0.0);
    }

    // Reference values below come from a standalone term-by-term evaluation.
    #[test]
    fn steady_torques_match_reference() {
        let m = honda_model();
        assert_relative_eq!(
            m.steady_impeller_torque(&PROBE, deg(55.62)),
            15.195361088393435,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            m.steady_turbine_torque(&PROBE),
            -13.474252192009287,
            max_relative = 1e-12
        );
    }

    #[test]
    fn steady_torques_vanish_without_flow() {
        let m = honda_model();
        let s = TcState { omega_i: 0.0, omega_t: 37.0, v: 0.0 };
        assert_eq!(m.steady_impeller_torque(&s, deg(30.0)), 0.0);
        let s = TcState { omega_i: 120.0, omega_t: 80.0, v: 0.0 };
        assert_eq!(m.steady_turbine_torque(&s), 0.0);
        assert_eq!(m.steady_turbine_torque(&TcState { omega_i: 0.0, omega_t: 0.0, v: 0.0 }), 0.0);
    }

    #[test]
    fn impeller_torque_is_pure_v_squared_at_rest() {
        let m = honda_model();
        let a = m.steady_impeller_torque(&TcState { omega_i: 0.0, omega_t: 5.0, v: 1.5 }, deg(40.0));
        let b = m.steady_impeller_torque(&TcState { omega_i: 0.0, omega_t: 5.0, v: 3.0 }, deg(40.0));
        assert_relative_eq!(b, 4.0 * a, max_relative = 1e-14);
    }

    #[test]
    fn shock_velocities_examples() {
        let m = honda_model();
        let sh = m.shock_velocities(&TcState { omega_i: 10.0, omega_t: 3.0, v: 0.0 }, deg(55.62));
        assert_relative_eq!(sh.impeller, -10.0 * 0.0665, max_relative = 1e-15);
        let sh = m.shock_velocities(&TcState { omega_i: 42.0, omega_t: 42.0, v: 0.0 }, deg(55.62));
        assert_eq!(sh.turbine, 0.0);

        let sh = m.shock_velocities(&PROBE, deg(55.62));
        assert_relative_eq!(sh.impeller, -2.0066139504419622, max_relative = 1e-12);
        assert_relative_eq!(sh.turbine, -1.7812679830046478, max_relative = 1e-12);
        assert_relative_eq!(sh.stator, 0.4324525879874619, max_relative = 1e-12);
    }

    #[test]
    fn relative_velocities_examples() {
        let m = honda_model();
        assert_eq!(m.relative_velocities(deg(55.62), 0.0), [0.0, 0.0, 0.0]);

        let mut p = honda();
        p.geometry.alpha_i = 0.0;
        p.geometry.alpha_t = 0.0;
        let flat = TcModel::new(p).unwrap();
        assert_eq!(flat.relative_velocities(0.0, 3.0), [9.0, 9.0, 9.0]);

        let [vi, vt, vs] = m.relative_velocities(deg(55.62), 2.0);
        assert_relative_eq!(vi, 4.3380634749622144, max_relative = 1e-12);
        assert_relative_eq!(vt, 11.116231626862398, max_relative = 1e-12);
        assert_relative_eq!(vs, 12.544599318141197, max_relative = 1e-12);
    }

    #[test]
    fn loss_term_examples() {
        let m = honda_model();
        let rest = TcState { omega_i: 0.0, omega_t: 0.0, v: 0.0 };
        assert_eq!(m.loss_term(&rest, deg(55.62)), 0.0);

        let mut p = honda();
        p.fluid.c_sh_i = 0.0;
        p.fluid.c_sh_t = 0.0;
        p.fluid.c_sh_s = 0.0;
        p.fluid.f = 0.0;
        let lossless = TcModel::new(p).unwrap();
        assert_eq!(lossless.loss_term(&PROBE, deg(20.0)), 0.0);

        assert_relative_eq!(m.loss_term(&PROBE, deg(55.62)), 7.72119207606533, max_relative = 1e-12);
    }

    #[test]
    fn phi_examples() {
        let m = honda_model();
        assert_eq!(m.phi(&TcState { omega_i: 0.0, omega_t: 0.0, v: 0.0 }, deg(55.62)), 0.0);
        assert_relative_eq!(m.phi(&PROBE, deg(55.62)), 9.348979906495176, max_relative = 1e-12);
    }

    #[test]
    fn phi_quadratic_matches_direct_evaluation() {
        let m = TcModel::new(type5()).unwrap();
        let (wi, wt, a) = (170.0, 188.0, deg(61.0));
        let [c0, c1, c2] = m.phi_quadratic_in_v(wi, wt, a);
        for v in [-3.0, 0.0, 1.0, 7.5, 12.0] {
            let direct = m.phi(&TcState { omega_i: wi, omega_t: wt, v }, a);
            let poly = c0 + c1 * v + c2 * v * v;
            assert_relative_eq!(poly, direct, epsilon = 1e-9, max_relative = 1e-12);
        }
        let [a2, b1] = m.turbine_torque_quadratic_in_v(wi, wt);
        let v = 9.0;
        assert_relative_eq!(
            a2 * v * v + b1 * v,
            m.steady_turbine_torque(&TcState { omega_i: wi, omega_t: wt, v }),
            max_relative = 1e-12
        );
    }

    #[test]
    fn mass_matrix_layout_and_determinant() {
        let mut p = honda();
        p.geometry.s_i = 0.0;
        p.geometry.s_t = 0.0;
        let m = mass_matrix(&p).unwrap();
        assert_relative_eq!(m.determinant(), 0.026 * 0.092 * 0.2594, max_relative = 1e-14);

        let m = mass_matrix(&honda()).unwrap();
        assert_eq!(m[(0, 0)], 0.026);
        assert_eq!(m[(1, 1)], 0.092);
        assert_eq!(m[(2, 2)], 0.2594);
        assert_eq!(m[(2, 0)], -0.00002);
        assert_eq!(m[(2, 1)], -0.001);
        assert_relative_eq!(m.determinant(), 0.0006202507812416, max_relative = 1e-12);
    }

    #[test]
    fn invalid_parameters_rejected_before_mass_matrix() {
        let mut p = honda();
        p.inertias.i_t = 0.0;
        assert!(matches!(
            TcModel::new(p),
            Err(Error::InvalidParameter { ref field, .. }) if field == "I_t"
        ));

        let mut p = honda();
        p.geometry.area = -0.01;
        assert!(matches!(
            p.validate(),
            Err(Error::InvalidParameter { ref field, .. }) if field == "A"
        ));

        let mut p = honda();
        p.geometry.alpha_t_in = deg(90.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn singular_mass_matrix_rejected() {
        let mut p = honda();
        // Makes the first row a multiple of the third.
        p.inertias.i_t = 1e-9;
        p.geometry.s_t = 0.0;
        p.inertias.i_i = 1e-3;
        p.geometry.l_f = 1e-3;
        assert!(matches!(mass_matrix(&p), Err(Error::SingularMassMatrix { .. })));
    }

    #[test]
    fn decoupled_derivatives_when_design_constants_vanish() {
        let mut p = honda();
        p.geometry.s_i = 0.0;
        p.geometry.s_t = 0.0;
        let m = TcModel::new(p).unwrap();
        let u = TcInput { tau_i: 100.0, tau_t: -150.0, alpha_s: deg(55.62) };
        let d = m.derivatives(&PROBE, &u);
        assert_relative_eq!(d.omega_t, (u.tau_t - m.steady_turbine_torque(&PROBE)) / 0.026, max_relative = 1e-13);
        assert_relative_eq!(
            d.omega_i,
            (u.tau_i - m.steady_impeller_torque(&PROBE, u.alpha_s)) / 0.092,
            max_relative = 1e-13
        );
        assert_relative_eq!(d.v, m.phi(&PROBE, u.alpha_s) / 0.2594, max_relative = 1e-13);
    }

    #[test]
    fn derivatives_match_reference_solve() {
        let m = honda_model();
        let u = TcInput { tau_i: 100.0, tau_t: -150.0, alpha_s: deg(55.62) };
        let d = m.derivatives(&PROBE, &u);
        assert_relative_eq!(d.omega_t, -5250.7192480820095, max_relative = 1e-11);
        assert_relative_eq!(d.omega_i, 925.6196391796805, max_relative = 1e-11);
        assert_relative_eq!(d.v, 39.2042604499353, max_relative = 1e-11);
    }

    #[test]
    fn derivatives_vanish_at_constructed_steady_state() {
        let m = honda_model();
        let a = deg(55.62);
        // Choose V so that Φ = 0 at the given speeds, then match the torques.
        let (wi, wt) = (213.0, 95.0);
        let [c0, c1, c2] = m.phi_quadratic_in_v(wi, wt, a);
        let v = (-c1 - (c1 * c1 - 4.0 * c2 * c0).sqrt()) / (2.0 * c2);
        let s = TcState { omega_i: wi, omega_t: wt, v };
        let u = TcInput {
            tau_i: m.steady_impeller_torque(&s, a),
            tau_t: m.steady_turbine_torque(&s),
            alpha_s: a,
        };
        let d = m.derivatives(&s, &u);
        assert!(d.norm() < 1e-9 * (1.0 + v), "{d:?}");
    }

    #[test]
    fn pinned_turbine_consistent_with_full_solve() {
        let m = honda_model();
        let a = deg(55.62);
        let p = m.pinned_turbine(&PROBE, 100.0, a);
        let full = m.derivatives(&PROBE, &TcInput { tau_i: 100.0, tau_t: p.tau_t, alpha_s: a });
        assert!(full.omega_t.abs() < 1e-9);
        assert_relative_eq!(full.omega_i, p.omega_i_dot, max_relative = 1e-10);
        assert_relative_eq!(full.v, p.v_dot, max_relative = 1e-10);
    }

    fn arb_state() -> impl Strategy<Value = TcState> {
        (-400.0..400.0f64, -400.0..400.0f64, -30.0..30.0f64)
            .prop_map(|(omega_i, omega_t, v)| TcState { omega_i, omega_t, v })
    }

    proptest! {
        #[test]
        fn loss_term_is_non_negative(s in arb_state(), a in -1.5..1.5f64) {
            let m = TcModel::new(type5()).unwrap();
            prop_assert!(m.loss_term(&s, a) >= 0.0);
        }

        #[test]
        fn closures_are_even_under_joint_sign_flip(s in arb_state(), a in -1.5..1.5f64) {
            let m = TcModel::new(honda()).unwrap();
            let flipped = TcState { omega_i: -s.omega_i, omega_t: -s.omega_t, v: -s.v };
            let scale = 1.0 + s.omega_i.abs() + s.omega_t.abs() + s.v.abs();
            let tol = 1e-12 * scale * scale;
            prop_assert!((m.phi(&s, a) - m.phi(&flipped, a)).abs() <= tol * (1.0 + a.tan().powi(2)));
            prop_assert!((m.steady_turbine_torque(&s) - m.steady_turbine_torque(&flipped)).abs() <= tol * 1e3);
            prop_assert!((m.steady_impeller_torque(&s, a) - m.steady_impeller_torque(&flipped, a)).abs()
                <= tol * 1e3 * (1.0 + a.tan().abs()));
        }

        #[test]
        fn linear_solve_residual_is_tiny(s in arb_state(), ti in -500.0..500.0f64, tt in -500.0..500.0f64, a in -1.3..1.3f64) {
            let m = TcModel::new(honda()).unwrap();
            let u = TcInput { tau_i: ti, tau_t: tt, alpha_s: a };
            let b = m.rhs(&s, &u);
            let x = Vector3::from(m.derivatives(&s, &u).as_array());
            let r = m.mass_matrix() * x - Vector3::from(b);
            let bn = Vector3::from(b).norm().max(1e-300);
            prop_assert!(r.norm() <= 1e-12 * bn.max(m.mass_matrix().norm() * x.norm()));
        }
    }

    #[test]
    fn closures_are_bitwise_deterministic() {
        let m = honda_model();
        let a = deg(55.62);
        assert_eq!(m.phi(&PROBE, a).to_bits(), m.phi(&PROBE, a).to_bits());
        let u = TcInput { tau_i: 1.0, tau_t: 2.0, alpha_s: a };
        assert_eq!(m.derivatives(&PROBE, &u), m.derivatives(&PROBE, &u));
    }
}
