//! One function per subcommand. Each returns a JSON summary of its
//! parameters for the manifest.

use serde_json::json;
use t5drive::config::{ConfigFile, SimSection, SteadySection, TcSection};
use t5drive::scaling::{apply_scaling, greedy_search};
use t5drive::sim::experiments::{run_frequency_sweep, run_torque_ratio_curve, FrequencyPoint, TorqueRatioPoint};
use t5drive::sim::integrated::run_integrated;
use t5drive::steady::sweep;
use t5drive::tc::TcModel;

use crate::error::CliError;
use crate::output::{fmt_f64, OutputDir};

/// Command-line overrides folded into the configuration before it is
/// digested, so the manifest describes what actually ran.
#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub nu_lo: Option<f64>,
    pub nu_hi: Option<f64>,
    pub nu_step: Option<f64>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ConfigFile) -> Result<(), CliError> {
        if self.nu_lo.is_some() || self.nu_hi.is_some() || self.nu_step.is_some() {
            let s = cfg.steady.get_or_insert_with(SteadySection::default);
            s.nu_lo = self.nu_lo.unwrap_or(s.nu_lo);
            s.nu_hi = self.nu_hi.unwrap_or(s.nu_hi);
            s.nu_step = self.nu_step.unwrap_or(s.nu_step);
        }
        if self.dt.is_some() || self.duration.is_some() {
            let s = cfg.sim.get_or_insert_with(SimSection::default);
            s.dt = self.dt.unwrap_or(s.dt);
            s.duration = self.duration.unwrap_or(s.duration);
        }
        cfg.validate()?;
        Ok(())
    }
}

fn bool_cell(b: bool) -> String {
    b.to_string()
}

const FREQ_HEADER: [&str; 4] = ["freq_hz", "amp_omega_i", "amp_omega_t", "ratio"];
const CURVE_HEADER: [&str; 8] = ["nu", "omega_i", "omega_t", "V", "tau_i", "tau_t", "torque_ratio", "feasible"];
pub const SWEEP_HEADER: [&str; 9] = [
    "nu",
    "omega_i",
    "omega_t",
    "V0",
    "alpha_s0_deg",
    "tau_i",
    "tau_t",
    "p_loss_pct",
    "feasible",
];

fn freq_rows(pts: &[FrequencyPoint]) -> Vec<Vec<String>> {
    pts.iter()
        .map(|p| vec![fmt_f64(p.freq_hz), fmt_f64(p.amp_omega_i), fmt_f64(p.amp_omega_t), fmt_f64(p.ratio())])
        .collect()
}

fn curve_rows(pts: &[TorqueRatioPoint]) -> Vec<Vec<String>> {
    pts.iter()
        .map(|p| {
            vec![
                fmt_f64(p.nu),
                fmt_f64(p.omega_i),
                fmt_f64(p.omega_t),
                fmt_f64(p.v),
                fmt_f64(p.tau_i),
                fmt_f64(p.tau_t),
                fmt_f64(p.torque_ratio),
                bool_cell(p.feasible),
            ]
        })
        .collect()
}

pub fn freq_sweep(cfg: &ConfigFile, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    Ok(write_freq_sweep(cfg, out)?.1)
}

fn write_freq_sweep(cfg: &ConfigFile, out: &mut OutputDir) -> Result<(Vec<FrequencyPoint>, serde_json::Value), CliError> {
    let model = TcModel::new(cfg.tc_params()?)?;
    let spec = cfg.freq_sweep_spec()?;
    let pts = run_frequency_sweep(&model, &spec)?;
    out.write_csv("freq_sweep.csv", &FREQ_HEADER, &freq_rows(&pts))?;
    out.write_plot("freq_sweep.csv", &FREQ_HEADER, "freq_hz", &["amp_omega_i", "amp_omega_t"], true)?;
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    println!(
        "frequency sweep: {} points, ω_t amplitude {:.4e} rad/s at {} Hz, {:.4e} rad/s at {} Hz",
        pts.len(),
        first.amp_omega_t,
        first.freq_hz,
        last.amp_omega_t,
        last.freq_hz
    );
    let summary = json!({ "frequencies": pts.len(), "f_lo": spec.f_lo, "f_hi": spec.f_hi });
    Ok((pts, summary))
}

pub fn torque_curve(cfg: &ConfigFile, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    Ok(write_torque_curve(cfg, out)?.1)
}

fn write_torque_curve(
    cfg: &ConfigFile,
    out: &mut OutputDir,
) -> Result<(Vec<TorqueRatioPoint>, serde_json::Value), CliError> {
    let model = TcModel::new(cfg.tc_params()?)?;
    let (omega_i, alpha_s, nus) = cfg.torque_curve()?;
    let pts = run_torque_ratio_curve(&model, omega_i, alpha_s, &nus)?;
    out.write_csv("torque_curve.csv", &CURVE_HEADER, &curve_rows(&pts))?;
    out.write_plot("torque_curve.csv", &CURVE_HEADER, "nu", &["torque_ratio"], false)?;
    let feasible = pts.iter().filter(|p| p.feasible).count();
    println!("torque-ratio curve: {feasible} of {} points feasible", pts.len());
    let summary = json!({ "omega_i": omega_i, "points": pts.len(), "feasible": feasible });
    Ok((pts, summary))
}

/// Runs the converter validation studies: frequency response and the
/// torque-ratio characteristic, and reports the expected qualitative shape.
pub fn validate_honda(cfg: &ConfigFile, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let (pts, mut summary) = write_freq_sweep(cfg, out)?;
    let (curve_pts, curve) = write_torque_curve(cfg, out)?;
    let attenuation = pts[0].amp_omega_t / pts[pts.len() - 1].amp_omega_t;
    let ratio: Vec<f64> = curve_pts.iter().filter(|p| p.feasible).map(|p| p.torque_ratio).collect();
    let multiplies = ratio.first().is_some_and(|r| *r > 1.0);
    let monotone = ratio.windows(2).all(|w| w[1] <= w[0]);
    println!("low-pass attenuation f_lo→f_hi: {attenuation:.1}x");
    println!("torque multiplication at low ν: {multiplies}; ratio non-increasing: {monotone}");
    summary["torque_curve"] = curve;
    summary["attenuation"] = json!(attenuation);
    summary["torque_multiplication"] = json!(multiplies);
    summary["ratio_non_increasing"] = json!(monotone);
    Ok(summary)
}

pub fn init_sweep(cfg: &ConfigFile, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let model = TcModel::new(cfg.tc_params()?)?;
    let spec = cfg.rated_spec()?;
    let opts = cfg.steady_options()?;
    let (lo, hi, step) = cfg.sweep_grid()?;
    let sw = sweep(&model, &spec, lo, hi, step, &opts)?;
    let rows: Vec<Vec<String>> = sw
        .points
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.nu),
                fmt_f64(p.omega_i),
                fmt_f64(p.omega_t),
                fmt_f64(p.v0),
                fmt_f64(p.alpha_s0.to_degrees()),
                fmt_f64(p.tau_i),
                fmt_f64(p.tau_t),
                fmt_f64(p.p_loss_pct),
                bool_cell(p.feasible),
            ]
        })
        .collect();
    out.write_csv("init_sweep.csv", &SWEEP_HEADER, &rows)?;
    out.write_plot("init_sweep.csv", &SWEEP_HEADER, "nu", &["alpha_s0_deg", "p_loss_pct"], false)?;
    let Some((a, b)) = sw.feasible_interval else {
        return Err(CliError::Numerical(format!("no feasible steady point on [{lo}, {hi}]")));
    };
    println!("feasible speed-ratio interval: [{a}, {b}] ({} grid points)", sw.points.len());
    Ok(json!({ "nu_lo": lo, "nu_hi": hi, "nu_step": step, "feasible_interval": [a, b] }))
}

pub fn scale(cfg: &ConfigFile, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let base = cfg.tc_params()?;
    let spec = cfg.rated_spec()?;
    let space = cfg.search_space()?;
    let outcome = greedy_search(&base, &spec, &space)?;
    let scaled = apply_scaling(&base, &outcome.best)?;

    let rows: Vec<Vec<String>> = outcome
        .history
        .iter()
        .map(|r| {
            let value = if r.param.is_angle() { r.value.to_degrees() } else { r.value };
            vec![r.cycle.to_string(), r.param.name().to_string(), fmt_f64(value), fmt_f64(r.objective)]
        })
        .collect();
    out.write_csv("scale_search.csv", &["cycle", "param", "value", "objective"], &rows)?;

    let mut emitted = cfg.clone();
    emitted.tc = TcSection::from_params(&scaled);
    emitted.scaling = None;
    out.write_text("scaled_params.toml", &emitted.to_toml_string()?)?;

    let adjustment: serde_json::Map<String, serde_json::Value> = t5drive::config::adjustment_degrees(&outcome.best)
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    println!(
        "objective |Φ| = {} m²/s² after {} cycles (start {})",
        outcome.objective, outcome.cycles, outcome.start_objective
    );
    for (k, v) in &adjustment {
        println!("  {k} = {v}");
    }
    Ok(json!({ "adjustment": adjustment, "objective": outcome.objective, "cycles": outcome.cycles }))
}

pub fn simulate(cfg: &ConfigFile, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let tc = cfg.tc_params()?;
    let drivetrain = cfg.drivetrain_config()?;
    let scenario = cfg.scenario()?;
    let sim = cfg.sim_config()?;
    let run = run_integrated(&tc, &drivetrain, &scenario, &sim)?;
    let header: Vec<&str> = run.trace.columns.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = run.trace.rows.iter().map(|r| r.iter().map(|x| fmt_f64(*x)).collect()).collect();
    out.write_csv("trace.csv", &header, &rows)?;
    out.write_plot("trace.csv", &header, "t", &["omega_t", "omega_i"], false)?;
    let final_value = |name: &str| run.trace.last(name).unwrap_or(f64::NAN);
    println!(
        "simulated {} s from ν = {}: final ω_t = {} rad/s, α_s = {}°",
        sim.duration,
        drivetrain.nu0,
        final_value("omega_t"),
        final_value("alpha_s").to_degrees()
    );
    Ok(json!({
        "dt": sim.dt,
        "duration": sim.duration,
        "rows": run.trace.len(),
        "governor": run.governor.is_some(),
    }))
}
