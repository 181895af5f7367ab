//! Scaling an automotive converter up to wind-turbine size, and the
//! coordinate-descent search that picks the scale factor and blade-angle
//! adjustments.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::steady::{rated_torque, solve_flow_velocity, synchronous_speed, RatedSpec};
use crate::tc::{TcModel, TcParameters, TcState};

/// Objective value reported when the unity-point solves fail (m²/s²).
pub const OBJECTIVE_PENALTY: f64 = 1e12;

/// Geometric amplification factor and blade-angle adjustments (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingAdjustment {
    pub k: f64,
    pub b_i: f64,
    pub b_t: f64,
    pub b_i_in: f64,
    pub b_t_in: f64,
    pub b_s_in: f64,
}

impl ScalingAdjustment {
    pub const IDENTITY: Self = Self {
        k: 1.0,
        b_i: 0.0,
        b_t: 0.0,
        b_i_in: 0.0,
        b_t_in: 0.0,
        b_s_in: 0.0,
    };

    pub fn get(&self, param: ScalingParam) -> f64 {
        match param {
            ScalingParam::K => self.k,
            ScalingParam::BI => self.b_i,
            ScalingParam::BT => self.b_t,
            ScalingParam::BIIn => self.b_i_in,
            ScalingParam::BTIn => self.b_t_in,
            ScalingParam::BSIn => self.b_s_in,
        }
    }

    pub fn set(&mut self, param: ScalingParam, value: f64) {
        let slot = match param {
            ScalingParam::K => &mut self.k,
            ScalingParam::BI => &mut self.b_i,
            ScalingParam::BT => &mut self.b_t,
            ScalingParam::BIIn => &mut self.b_i_in,
            ScalingParam::BTIn => &mut self.b_t_in,
            ScalingParam::BSIn => &mut self.b_s_in,
        };
        *slot = value;
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::invalid("K", format!("must be > 0, got {}", self.k)));
        }
        for p in ScalingParam::ANGLES {
            if !self.get(p).is_finite() {
                return Err(Error::invalid(p.name(), "must be finite"));
            }
        }
        Ok(())
    }
}

/// The six searched quantities, in search order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalingParam {
    K,
    BI,
    BT,
    BIIn,
    BTIn,
    BSIn,
}

impl ScalingParam {
    pub const ALL: [ScalingParam; 6] = [
        ScalingParam::K,
        ScalingParam::BI,
        ScalingParam::BT,
        ScalingParam::BIIn,
        ScalingParam::BTIn,
        ScalingParam::BSIn,
    ];
    pub const ANGLES: [ScalingParam; 5] = [
        ScalingParam::BI,
        ScalingParam::BT,
        ScalingParam::BIIn,
        ScalingParam::BTIn,
        ScalingParam::BSIn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScalingParam::K => "K",
            ScalingParam::BI => "b_i",
            ScalingParam::BT => "b_t",
            ScalingParam::BIIn => "b_i_in",
            ScalingParam::BTIn => "b_t_in",
            ScalingParam::BSIn => "b_s_in",
        }
    }

    pub fn is_angle(self) -> bool {
        self != ScalingParam::K
    }
}

impl fmt::Display for ScalingParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lengths and radii grow by `K`, the flow area by `K²`, and the blade angles
/// shift by the adjustments. Inertias, fluid properties, loss coefficients
/// and design constants are carried over unchanged.
pub fn apply_scaling(base: &TcParameters, adj: &ScalingAdjustment) -> Result<TcParameters> {
    base.validate()?;
    adj.validate()?;
    let mut p = *base;
    let g = &mut p.geometry;
    g.r_i *= adj.k;
    g.r_t *= adj.k;
    g.r_s *= adj.k;
    g.l_f *= adj.k;
    g.area *= adj.k * adj.k;
    g.alpha_i += adj.b_i;
    g.alpha_t -= adj.b_t;
    g.alpha_i_in -= adj.b_i_in;
    g.alpha_t_in += adj.b_t_in;
    g.alpha_s_in += adj.b_s_in;
    p.validate().map_err(|e| Error::InvalidResult(e.to_string()))?;
    Ok(p)
}

/// Unity speed- and torque-ratio point used by the scaling objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnityPoint {
    pub omega: f64,
    pub v: f64,
    pub alpha_s: f64,
    pub phi: f64,
}

/// Solves the rated point with `ω_i = ω_t = ω_sync` and `τ_i = |τ_t| =
/// τ_rated`: flow velocity from the turbine balance, stator angle in closed
/// form from the impeller balance, and the left-over `Φ`.
pub fn unity_point(p: &TcParameters, spec: &RatedSpec) -> Result<UnityPoint> {
    let model = TcModel::new(*p)?;
    let omega = synchronous_speed(spec.n_rpm)?;
    let tau = rated_torque(spec)?;
    let v = solve_flow_velocity(&model, 1.0, omega, -tau, None)?;
    if v <= 0.0 {
        return Err(Error::NoPhysicalRoot);
    }
    let g = &p.geometry;
    let rho_a = p.fluid.rho * g.area;
    let tan_s = (g.r_i * g.alpha_i.tan() + omega * g.r_i * g.r_i / v - tau / (rho_a * v * v)) / g.r_s;
    let alpha_s = tan_s.atan();
    let s = TcState {
        omega_i: omega,
        omega_t: omega,
        v,
    };
    Ok(UnityPoint {
        omega,
        v,
        alpha_s,
        phi: model.phi(&s, alpha_s),
    })
}

/// `|Φ|` at the unity point, or [`OBJECTIVE_PENALTY`] when it cannot be solved.
pub fn unity_point_objective(p: &TcParameters, spec: &RatedSpec) -> f64 {
    match unity_point(p, spec) {
        Ok(u) if u.phi.is_finite() => u.phi.abs(),
        _ => OBJECTIVE_PENALTY,
    }
}

/// Uniform grid over `[lo, hi]` with `count` points (one point needs `lo == hi`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl ParamGrid {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        Self { lo, hi, count }
    }

    pub fn single(value: f64) -> Self {
        Self::new(value, value, 1)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::invalid(field, "grid bounds must be finite"));
        }
        match self.count {
            0 => Err(Error::invalid(field, "grid needs at least one point")),
            1 if self.lo != self.hi => Err(Error::invalid(field, "a one-point grid needs lo == hi")),
            1 => Ok(()),
            _ if self.lo >= self.hi => Err(Error::invalid(field, "grid needs lo < hi")),
            _ => Ok(()),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.hi } else { self.lo + k as f64 * h })
            .collect()
    }

    /// Grid value closest to `x` (the lower one on ties).
    pub fn nearest(&self, x: f64) -> f64 {
        self.values()
            .into_iter()
            .fold((f64::NAN, f64::INFINITY), |(best, d), v| {
                let dv = (v - x).abs();
                if dv < d {
                    (v, dv)
                } else {
                    (best, d)
                }
            })
            .0
    }
}

/// Per-parameter grids for the search (angles in radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpace {
    pub k: ParamGrid,
    pub b_i: ParamGrid,
    pub b_t: ParamGrid,
    pub b_i_in: ParamGrid,
    pub b_t_in: ParamGrid,
    pub b_s_in: ParamGrid,
}

impl Default for SearchSpace {
    fn default() -> Self {
        let angle = ParamGrid::new(0.0, 60f64.to_radians(), 613);
        Self {
            k: ParamGrid::new(1.0, 5.0, 401),
            b_i: angle,
            b_t: angle,
            b_i_in: angle,
            b_t_in: angle,
            b_s_in: angle,
        }
    }
}

impl SearchSpace {
    /// Collapses every grid onto the given adjustment.
    pub fn single_point(adj: &ScalingAdjustment) -> Self {
        Self {
            k: ParamGrid::single(adj.k),
            b_i: ParamGrid::single(adj.b_i),
            b_t: ParamGrid::single(adj.b_t),
            b_i_in: ParamGrid::single(adj.b_i_in),
            b_t_in: ParamGrid::single(adj.b_t_in),
            b_s_in: ParamGrid::single(adj.b_s_in),
        }
    }

    pub fn grid(&self, param: ScalingParam) -> &ParamGrid {
        match param {
            ScalingParam::K => &self.k,
            ScalingParam::BI => &self.b_i,
            ScalingParam::BT => &self.b_t,
            ScalingParam::BIIn => &self.b_i_in,
            ScalingParam::BTIn => &self.b_t_in,
            ScalingParam::BSIn => &self.b_s_in,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in ScalingParam::ALL {
            self.grid(p).validate(p.name())?;
        }
        if self.k.lo <= 0.0 {
            return Err(Error::invalid("K", "grid must stay above zero"));
        }
        Ok(())
    }
}

/// One entry of the search audit trail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRecord {
    /// 1-based cycle.
    pub cycle: usize,
    pub param: ScalingParam,
    pub value: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Grid point nearest the identity adjustment, where the search began.
    pub start: ScalingAdjustment,
    pub start_objective: f64,
    pub best: ScalingAdjustment,
    pub objective: f64,
    pub cycles: usize,
    pub history: Vec<SearchRecord>,
}

const MAX_CYCLES: usize = 10_000;

/// Cyclic coordinate descent over `(K, b_i, b_t, b_i_in, b_t_in, b_s_in)`.
///
/// Starts at the grid point nearest the identity adjustment. Each coordinate
/// is scanned over its whole grid with the others held fixed; the minimiser
/// (lowest grid value on ties) replaces the current value only on strict
/// improvement. Stops after a full cycle without improvement.
pub fn greedy_search(
    base: &TcParameters,
    spec: &RatedSpec,
    space: &SearchSpace,
) -> Result<SearchOutcome> {
    base.validate()?;
    spec.validate()?;
    space.validate()?;

    let eval = |adj: &ScalingAdjustment| match apply_scaling(base, adj) {
        Ok(p) => unity_point_objective(&p, spec),
        Err(_) => OBJECTIVE_PENALTY,
    };

    let mut current = ScalingAdjustment::IDENTITY;
    for p in ScalingParam::ALL {
        current.set(p, space.grid(p).nearest(ScalingAdjustment::IDENTITY.get(p)));
    }
    let start = current;
    let start_objective = eval(&current);
    let mut objective = start_objective;
    let mut history = Vec::new();

    let grids: Vec<(ScalingParam, Vec<f64>)> = ScalingParam::ALL
        .iter()
        .map(|&p| (p, space.grid(p).values()))
        .collect();

    let mut cycles = 0;
    loop {
        cycles += 1;
        let mut improved = false;
        for (param, values) in &grids {
            let scores: Vec<f64> = values
                .par_iter()
                .map(|&v| {
                    let mut trial = current;
                    trial.set(*param, v);
                    eval(&trial)
                })
                .collect();
            let (idx, best) = scores
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
            if best < objective {
                current.set(*param, values[idx]);
                objective = best;
                improved = true;
            }
            history.push(SearchRecord {
                cycle: cycles,
                param: *param,
                value: current.get(*param),
                objective,
            });
        }
        if !improved || cycles >= MAX_CYCLES {
            break;
        }
    }

    Ok(SearchOutcome {
        start,
        start_objective,
        best: current,
        objective,
        cycles,
        history,
    })
}
