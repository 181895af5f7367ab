//! Hierarchical TOML configuration.
//!
//! [`ConfigFile`] mirrors the file one to one (angles in degrees under
//! `*_deg` keys) and is what gets written back, so an emitted file re-parses
//! to an identical value. The `*()` accessors convert sections into the
//! validated domain types in radians.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drivetrain::{CouplerParams, GearStage, GearboxConfig, GeneratorBoundary, GeneratorMode, TranslationalDof};
use crate::error::{Error, Result};
use crate::governor::{GovernorTemplate, PidGains, DEFAULT_RATE_LIMIT};
use crate::scaling::{ParamGrid, ScalingAdjustment, SearchSpace};
use crate::sim::experiments::FrequencySweepSpec;
use crate::sim::integrated::{DrivetrainConfig, RotorParams, Scenario};
use crate::sim::{Integrator, SimConfig, TorqueProfile};
use crate::steady::{nu_grid, RatedSpec, SteadyOptions, SCHEDULE_NU_MAX, SCHEDULE_NU_MIN};
use crate::tc::{TcFluidLoss, TcGeometry, TcInertias, TcParameters};

/// Whole configuration file. Only `[tc]` is mandatory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub tc: TcSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rated: Option<RatedSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady: Option<SteadySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drivetrain: Option<DrivetrainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub governor: Option<GovernorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_sweep: Option<FreqSweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torque_curve: Option<TorqueCurveSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TcSection {
    pub geometry: GeometrySection,
    pub fluid: FluidSection,
    pub inertias: InertiaSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct GeometrySection {
    pub R_i: f64,
    pub R_t: f64,
    pub R_s: f64,
    pub A: f64,
    pub L_f: f64,
    pub alpha_i_deg: f64,
    pub alpha_t_deg: f64,
    pub alpha_i_in_deg: f64,
    pub alpha_t_in_deg: f64,
    pub alpha_s_in_deg: f64,
    pub S_i: f64,
    pub S_t: f64,
    pub S_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct FluidSection {
    pub rho: f64,
    pub f: f64,
    pub C_sh_i: f64,
    pub C_sh_t: f64,
    pub C_sh_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct InertiaSection {
    pub I_i: f64,
    pub I_t: f64,
    pub I_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct RatedSection {
    /// Rated power (W).
    pub P_rated: f64,
    /// Synchronous speed (rpm).
    pub N: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySection {
    #[serde(default = "default_alpha_s_min_deg")]
    pub alpha_s_min_deg: f64,
    #[serde(default = "default_alpha_s_max_deg")]
    pub alpha_s_max_deg: f64,
    #[serde(default = "default_nu_lo")]
    pub nu_lo: f64,
    #[serde(default = "default_nu_hi")]
    pub nu_hi: f64,
    #[serde(default = "default_nu_step")]
    pub nu_step: f64,
}

fn default_alpha_s_min_deg() -> f64 {
    5.0
}
fn default_alpha_s_max_deg() -> f64 {
    85.0
}
fn default_nu_lo() -> f64 {
    SCHEDULE_NU_MIN
}
fn default_nu_hi() -> f64 {
    SCHEDULE_NU_MAX
}
fn default_nu_step() -> f64 {
    0.001
}

impl Default for SteadySection {
    fn default() -> Self {
        Self {
            alpha_s_min_deg: default_alpha_s_min_deg(),
            alpha_s_max_deg: default_alpha_s_max_deg(),
            nu_lo: default_nu_lo(),
            nu_hi: default_nu_hi(),
            nu_step: default_nu_step(),
        }
    }
}

/// `{ lo, hi, count }` grid in file units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct ScalingSection {
    pub K: GridSection,
    pub b_i_deg: GridSection,
    pub b_t_deg: GridSection,
    pub b_i_in_deg: GridSection,
    pub b_t_in_deg: GridSection,
    pub b_s_in_deg: GridSection,
}

impl Default for ScalingSection {
    fn default() -> Self {
        let angle = GridSection { lo: 0.0, hi: 60.0, count: 613 };
        Self {
            K: GridSection { lo: 1.0, hi: 5.0, count: 401 },
            b_i_deg: angle,
            b_t_deg: angle,
            b_i_in_deg: angle,
            b_t_in_deg: angle,
            b_s_in_deg: angle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct CouplerSection {
    pub K_s: f64,
    pub C_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct RotorSection {
    pub J: f64,
    pub B_aero: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationalSection {
    pub mass: f64,
    pub stiffness: f64,
    pub damping: f64,
    pub pitch_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSection {
    pub inertia: f64,
    pub ratio: f64,
    pub mesh_stiffness: f64,
    pub mesh_damping: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translational: Option<TranslationalSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GearboxSection {
    pub output_inertia: f64,
    pub stages: Vec<StageSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivetrainSection {
    /// Speed ratio of the starting steady point.
    #[serde(default = "one")]
    pub nu0: f64,
    pub rotor: RotorSection,
    pub lss: CouplerSection,
    pub hss: CouplerSection,
    pub generator_coupler: CouplerSection,
    pub gearbox: GearboxSection,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorModeName {
    IdealBus,
    Swing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct GeneratorSection {
    pub mode: GeneratorModeName,
    /// Defaults to `[rated].N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub N: Option<f64>,
    #[serde(default)]
    pub J: f64,
    #[serde(default)]
    pub D: f64,
    #[serde(default)]
    pub K_sync: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct GovernorSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_kp")]
    pub Kp: f64,
    #[serde(default = "default_ki")]
    pub Ki: f64,
    #[serde(default = "default_kd")]
    pub Kd: f64,
    #[serde(default = "default_rate_limit_deg_s")]
    pub rate_limit_deg_s: f64,
    /// Explicit stator travel; both or neither. Without them the travel is
    /// the range of steady angles over the feasible sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_s_min_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_s_max_deg: Option<f64>,
    #[serde(default)]
    pub margin_deg: f64,
}

fn yes() -> bool {
    true
}
fn default_kp() -> f64 {
    PidGains::default().kp
}
fn default_ki() -> f64 {
    PidGains::default().ki
}
fn default_kd() -> f64 {
    PidGains::default().kd
}
fn default_rate_limit_deg_s() -> f64 {
    DEFAULT_RATE_LIMIT.to_degrees()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorName {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_integrator")]
    pub integrator: IntegratorName,
    #[serde(default = "default_decimation")]
    pub record_decimation: usize,
}

fn default_dt() -> f64 {
    SimConfig::default().dt
}
fn default_duration() -> f64 {
    SimConfig::default().duration
}
fn default_integrator() -> IntegratorName {
    IntegratorName::Rk4
}
fn default_decimation() -> usize {
    SimConfig::default().record_decimation
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            duration: default_duration(),
            integrator: default_integrator(),
            record_decimation: default_decimation(),
        }
    }
}

/// Torque multiplier over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSection {
    Constant { value: f64 },
    Step { time: f64, before: f64, after: f64 },
    Ramp { start: f64, end: f64, from: f64, to: f64 },
    Sinusoid { mean: f64, amplitude: f64, freq_hz: f64 },
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection::Constant { value: 1.0 }
    }
}

impl From<ProfileSection> for TorqueProfile {
    fn from(p: ProfileSection) -> Self {
        match p {
            ProfileSection::Constant { value } => TorqueProfile::Constant(value),
            ProfileSection::Step { time, before, after } => TorqueProfile::Step { time, before, after },
            ProfileSection::Ramp { start, end, from, to } => TorqueProfile::Ramp { start, end, from, to },
            ProfileSection::Sinusoid { mean, amplitude, freq_hz } => TorqueProfile::Sinusoid { mean, amplitude, freq_hz },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default)]
    pub rotor: ProfileSection,
    #[serde(default)]
    pub load: ProfileSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqSweepSection {
    pub tau_ie: f64,
    pub amplitude: f64,
    pub tau_te: f64,
    pub alpha_s_deg: f64,
    pub f_lo: f64,
    pub f_hi: f64,
    pub points_per_decade: usize,
    pub settle_time: f64,
    pub measure_time: f64,
    pub dt: f64,
    pub nu_max: f64,
}

impl Default for FreqSweepSection {
    fn default() -> Self {
        let d = FrequencySweepSpec::default();
        Self {
            tau_ie: d.tau_ie,
            amplitude: d.amplitude,
            tau_te: d.tau_te,
            alpha_s_deg: 55.62,
            f_lo: d.f_lo,
            f_hi: d.f_hi,
            points_per_decade: d.points_per_decade,
            settle_time: d.settle_time,
            measure_time: d.measure_time,
            dt: d.dt,
            nu_max: d.nu_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorqueCurveSection {
    pub omega_i: f64,
    pub alpha_s_deg: f64,
    pub nu_lo: f64,
    pub nu_hi: f64,
    pub nu_step: f64,
}

impl Default for TorqueCurveSection {
    fn default() -> Self {
        Self {
            omega_i: 200.0,
            alpha_s_deg: 55.62,
            nu_lo: 0.05,
            nu_hi: 1.0,
            nu_step: 0.05,
        }
    }
}

/// Converts a `_deg` field, rejecting values outside the open quarter turn.
fn angle(field: &str, deg: f64) -> Result<f64> {
    if !(deg.is_finite() && deg.abs() < 90.0) {
        return Err(Error::invalid(field, format!("{deg}° is outside (-90°, 90°)")));
    }
    Ok(deg.to_radians())
}

fn grid(field: &str, g: &GridSection, to_internal: fn(f64) -> f64) -> Result<ParamGrid> {
    let out = ParamGrid::new(to_internal(g.lo), to_internal(g.hi), g.count);
    out.validate(field)?;
    Ok(out)
}

impl TcSection {
    pub fn from_params(p: &TcParameters) -> Self {
        let g = &p.geometry;
        let fl = &p.fluid;
        let i = &p.inertias;
        Self {
            geometry: GeometrySection {
                R_i: g.r_i,
                R_t: g.r_t,
                R_s: g.r_s,
                A: g.area,
                L_f: g.l_f,
                alpha_i_deg: g.alpha_i.to_degrees(),
                alpha_t_deg: g.alpha_t.to_degrees(),
                alpha_i_in_deg: g.alpha_i_in.to_degrees(),
                alpha_t_in_deg: g.alpha_t_in.to_degrees(),
                alpha_s_in_deg: g.alpha_s_in.to_degrees(),
                S_i: g.s_i,
                S_t: g.s_t,
                S_s: g.s_s,
            },
            fluid: FluidSection {
                rho: fl.rho,
                f: fl.f,
                C_sh_i: fl.c_sh_i,
                C_sh_t: fl.c_sh_t,
                C_sh_s: fl.c_sh_s,
            },
            inertias: InertiaSection {
                I_i: i.i_i,
                I_t: i.i_t,
                I_s: i.i_s,
            },
        }
    }

    pub fn params(&self) -> Result<TcParameters> {
        let g = &self.geometry;
        let fl = &self.fluid;
        let i = &self.inertias;
        let p = TcParameters {
            geometry: TcGeometry {
                r_i: g.R_i,
                r_t: g.R_t,
                r_s: g.R_s,
                area: g.A,
                l_f: g.L_f,
                alpha_i: angle("alpha_i_deg", g.alpha_i_deg)?,
                alpha_t: angle("alpha_t_deg", g.alpha_t_deg)?,
                alpha_i_in: angle("alpha_i_in_deg", g.alpha_i_in_deg)?,
                alpha_t_in: angle("alpha_t_in_deg", g.alpha_t_in_deg)?,
                alpha_s_in: angle("alpha_s_in_deg", g.alpha_s_in_deg)?,
                s_i: g.S_i,
                s_t: g.S_t,
                s_s: g.S_s,
            },
            fluid: TcFluidLoss {
                rho: fl.rho,
                f: fl.f,
                c_sh_i: fl.C_sh_i,
                c_sh_t: fl.C_sh_t,
                c_sh_s: fl.C_sh_s,
            },
            inertias: TcInertias {
                i_i: i.I_i,
                i_t: i.I_t,
                i_s: i.I_s,
            },
        };
        p.validate()?;
        Ok(p)
    }
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Validates every present section.
    pub fn validate(&self) -> Result<()> {
        self.tc_params()?;
        if self.rated.is_some() {
            self.rated_spec()?;
        }
        self.steady_options()?;
        self.sweep_grid()?;
        if self.scaling.is_some() {
            self.search_space()?;
        }
        if self.drivetrain.is_some() || self.generator.is_some() {
            self.drivetrain_config()?;
        }
        self.governor_template()?;
        self.sim_config()?;
        self.scenario()?;
        self.freq_sweep_spec()?;
        self.torque_curve()?;
        Ok(())
    }

    pub fn tc_params(&self) -> Result<TcParameters> {
        self.tc.params()
    }

    fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T> {
        section
            .as_ref()
            .ok_or_else(|| Error::invalid(name, "section is required for this operation"))
    }

    pub fn rated_spec(&self) -> Result<RatedSpec> {
        let r = Self::require(&self.rated, "rated")?;
        let spec = RatedSpec {
            p_rated: r.P_rated,
            n_rpm: r.N,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn steady_section(&self) -> SteadySection {
        self.steady.clone().unwrap_or_default()
    }

    pub fn steady_options(&self) -> Result<SteadyOptions> {
        let s = self.steady_section();
        let opts = SteadyOptions {
            alpha_s_min: angle("steady.alpha_s_min_deg", s.alpha_s_min_deg)?,
            alpha_s_max: angle("steady.alpha_s_max_deg", s.alpha_s_max_deg)?,
            ..SteadyOptions::default()
        };
        opts.validate()?;
        Ok(opts)
    }

    /// `(nu_lo, nu_hi, nu_step)` of the steady sweep.
    pub fn sweep_grid(&self) -> Result<(f64, f64, f64)> {
        let s = self.steady_section();
        nu_grid(s.nu_lo, s.nu_hi, s.nu_step)?;
        Ok((s.nu_lo, s.nu_hi, s.nu_step))
    }

    pub fn search_space(&self) -> Result<SearchSpace> {
        let s = self.scaling.clone().unwrap_or_default();
        let r = f64::to_radians;
        let space = SearchSpace {
            k: grid("scaling.K", &s.K, |x| x)?,
            b_i: grid("scaling.b_i_deg", &s.b_i_deg, r)?,
            b_t: grid("scaling.b_t_deg", &s.b_t_deg, r)?,
            b_i_in: grid("scaling.b_i_in_deg", &s.b_i_in_deg, r)?,
            b_t_in: grid("scaling.b_t_in_deg", &s.b_t_in_deg, r)?,
            b_s_in: grid("scaling.b_s_in_deg", &s.b_s_in_deg, r)?,
        };
        space.validate()?;
        Ok(space)
    }

    pub fn generator_boundary(&self) -> Result<GeneratorBoundary> {
        let g = Self::require(&self.generator, "generator")?;
        let n_rpm = match g.N {
            Some(n) => n,
            None => self.rated_spec()?.n_rpm,
        };
        let b = GeneratorBoundary {
            mode: match g.mode {
                GeneratorModeName::IdealBus => GeneratorMode::IdealBus,
                GeneratorModeName::Swing => GeneratorMode::Swing,
            },
            n_rpm,
            inertia: g.J,
            damping: g.D,
            k_sync: g.K_sync,
        };
        b.validate()?;
        Ok(b)
    }

    /// `None` when the section is absent or disabled.
    pub fn governor_template(&self) -> Result<Option<GovernorTemplate>> {
        let Some(g) = self.governor.as_ref().filter(|g| g.enabled) else {
            return Ok(None);
        };
        for (name, v) in [("governor.Kp", g.Kp), ("governor.Ki", g.Ki), ("governor.Kd", g.Kd)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if g.Ki < 0.0 {
            return Err(Error::invalid("governor.Ki", "must be >= 0"));
        }
        if !(g.rate_limit_deg_s.is_finite() && g.rate_limit_deg_s > 0.0) {
            return Err(Error::invalid("governor.rate_limit_deg_s", "must be > 0"));
        }
        if !(g.margin_deg.is_finite() && g.margin_deg >= 0.0) {
            return Err(Error::invalid("governor.margin_deg", "must be >= 0"));
        }
        let bounds = match (g.alpha_s_min_deg, g.alpha_s_max_deg) {
            (None, None) => None,
            (Some(lo), Some(hi)) => {
                let lo = angle("governor.alpha_s_min_deg", lo)?;
                let hi = angle("governor.alpha_s_max_deg", hi)?;
                if lo >= hi {
                    return Err(Error::invalid("governor.alpha_s_min_deg", "must be below alpha_s_max_deg"));
                }
                Some((lo, hi))
            }
            (None, Some(_)) => return Err(Error::invalid("governor.alpha_s_min_deg", "missing while alpha_s_max_deg is set")),
            (Some(_), None) => return Err(Error::invalid("governor.alpha_s_max_deg", "missing while alpha_s_min_deg is set")),
        };
        Ok(Some(GovernorTemplate {
            gains: PidGains {
                kp: g.Kp,
                ki: g.Ki,
                kd: g.Kd,
            },
            rate_limit: g.rate_limit_deg_s.to_radians(),
            bounds,
            margin: g.margin_deg.to_radians(),
        }))
    }

    pub fn drivetrain_config(&self) -> Result<DrivetrainConfig> {
        let d = Self::require(&self.drivetrain, "drivetrain")?;
        let coupler = |c: &CouplerSection| CouplerParams { k_s: c.K_s, c_s: c.C_s };
        let cfg = DrivetrainConfig {
            rotor: RotorParams {
                inertia: d.rotor.J,
                aero_damping: d.rotor.B_aero,
            },
            lss: coupler(&d.lss),
            gearbox: GearboxConfig {
                stages: d
                    .gearbox
                    .stages
                    .iter()
                    .map(|s| GearStage {
                        inertia: s.inertia,
                        ratio: s.ratio,
                        mesh_stiffness: s.mesh_stiffness,
                        mesh_damping: s.mesh_damping,
                        translational: s.translational.map(|t| TranslationalDof {
                            mass: t.mass,
                            stiffness: t.stiffness,
                            damping: t.damping,
                            pitch_radius: t.pitch_radius,
                        }),
                    })
                    .collect(),
                output_inertia: d.gearbox.output_inertia,
            },
            hss: coupler(&d.hss),
            generator: self.generator_boundary()?,
            generator_coupler: coupler(&d.generator_coupler),
            governor: self.governor_template()?,
            rated: self.rated_spec()?,
            steady: self.steady_options()?,
            nu0: d.nu0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let s = self.sim.clone().unwrap_or_default();
        let cfg = SimConfig {
            dt: s.dt,
            duration: s.duration,
            integrator: match s.integrator {
                IntegratorName::Rk4 => Integrator::Rk4,
                IntegratorName::Euler => Integrator::Euler,
            },
            record_decimation: s.record_decimation,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let s = self.scenario.clone().unwrap_or_default();
        let out = Scenario {
            rotor: s.rotor.into(),
            load: s.load.into(),
        };
        out.rotor.validate("scenario.rotor")?;
        out.load.validate("scenario.load")?;
        Ok(out)
    }

    pub fn freq_sweep_spec(&self) -> Result<FrequencySweepSpec> {
        let f = self.freq_sweep.clone().unwrap_or_default();
        if !(f.nu_max.is_finite() && f.nu_max > 0.0) {
            return Err(Error::invalid("freq_sweep.nu_max", "must be > 0"));
        }
        let spec = FrequencySweepSpec {
            tau_ie: f.tau_ie,
            amplitude: f.amplitude,
            tau_te: f.tau_te,
            alpha_s: angle("freq_sweep.alpha_s_deg", f.alpha_s_deg)?,
            f_lo: f.f_lo,
            f_hi: f.f_hi,
            points_per_decade: f.points_per_decade,
            settle_time: f.settle_time,
            measure_time: f.measure_time,
            dt: f.dt,
            nu_max: f.nu_max,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `(omega_i, alpha_s, nu grid)` of the torque-ratio curve.
    pub fn torque_curve(&self) -> Result<(f64, f64, Vec<f64>)> {
        let t = self.torque_curve.clone().unwrap_or_default();
        if !(t.omega_i.is_finite() && t.omega_i > 0.0) {
            return Err(Error::invalid("torque_curve.omega_i", "must be > 0"));
        }
        let alpha_s = angle("torque_curve.alpha_s_deg", t.alpha_s_deg)?;
        if !(t.nu_lo > 0.0 && t.nu_hi <= 1.0) {
            return Err(Error::invalid("torque_curve.nu_lo", "grid must lie within (0, 1]"));
        }
        let nus = nu_grid(t.nu_lo, t.nu_hi, t.nu_step)?;
        Ok((t.omega_i, alpha_s, nus))
    }
}

/// Writes a scaling adjustment as `(K, b_*_deg)` values.
pub fn adjustment_degrees(adj: &ScalingAdjustment) -> [(&'static str, f64); 6] {
    [
        ("K", adj.k),
        ("b_i_deg", adj.b_i.to_degrees()),
        ("b_t_deg", adj.b_t.to_degrees()),
        ("b_i_in_deg", adj.b_i_in.to_degrees()),
        ("b_t_in_deg", adj.b_t_in.to_degrees()),
        ("b_s_in_deg", adj.b_s_in.to_degrees()),
    ]
}
