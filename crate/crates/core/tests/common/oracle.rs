//! Brute-force converter evaluator written straight from the governing
//! relations. Shares no code with the library: plain floats in, plain
//! floats out, every term spelled out.

#[derive(Debug, Clone, Copy)]
pub struct Raw {
    pub r_i: f64,
    pub r_t: f64,
    pub r_s: f64,
    pub area: f64,
    pub l_f: f64,
    pub a_i: f64,
    pub a_t: f64,
    pub a_i_in: f64,
    pub a_t_in: f64,
    pub a_s_in: f64,
    pub s_i: f64,
    pub s_t: f64,
    pub rho: f64,
    pub f: f64,
    pub c_i: f64,
    pub c_t: f64,
    pub c_s: f64,
    pub inertia_i: f64,
    pub inertia_t: f64,
}

pub fn impeller_torque(p: &Raw, w_i: f64, v: f64, a_s: f64) -> f64 {
    let q = v * p.area;
    let momentum = w_i * p.r_i * p.r_i + v * (p.r_i * p.a_i.tan() - p.r_s * a_s.tan());
    p.rho * q * momentum
}

pub fn turbine_torque(p: &Raw, w_i: f64, w_t: f64, v: f64) -> f64 {
    let q = v * p.area;
    let momentum = w_t * p.r_t * p.r_t - w_i * p.r_i * p.r_i + v * (p.r_t * p.a_t.tan() - p.r_i * p.a_i.tan());
    p.rho * q * momentum
}

pub fn psi(p: &Raw, w_i: f64, w_t: f64, v: f64, a_s: f64) -> f64 {
    let shock_i = -p.r_s * w_i + v * (a_s.tan() - p.a_i_in.tan());
    let shock_t = p.r_i * (w_i - w_t) + v * (p.a_i.tan() - p.a_t_in.tan());
    let shock_s = p.r_t * w_t + v * (p.a_t.tan() - p.a_s_in.tan());
    let sec2 = |a: f64| 1.0 / (a.cos() * a.cos());
    let rel_i = v * v * sec2(p.a_i);
    let rel_t = v * v * sec2(p.a_t);
    let rel_s = v * v * sec2(a_s);
    0.5 * (p.c_i * shock_i * shock_i
        + p.c_t * shock_t * shock_t
        + p.c_s * shock_s * shock_s
        + p.f * (rel_i + rel_t + rel_s))
}

pub fn phi(p: &Raw, w_i: f64, w_t: f64, v: f64, a_s: f64) -> f64 {
    let t1 = p.r_i * p.r_i * w_i * w_i;
    let t2 = p.r_t * p.r_t * w_t * w_t;
    let t3 = -p.r_i * p.r_i * w_t * w_i;
    let t4 = w_i * v * (p.r_i * p.a_i.tan() - p.r_s * a_s.tan());
    let t5 = w_t * v * (p.r_t * p.a_t.tan() - p.r_i * p.a_i.tan());
    t1 + t2 + t3 + t4 + t5 - psi(p, w_i, w_t, v, a_s)
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `(ω̇_t, ω̇_i, V̇)` by Cramer's rule.
pub fn derivatives(p: &Raw, w_i: f64, w_t: f64, v: f64, tau_i: f64, tau_t: f64, a_s: f64) -> [f64; 3] {
    let ra = p.rho * p.area;
    let m = [
        [p.inertia_t, 0.0, ra * p.s_t],
        [0.0, p.inertia_i, ra * p.s_i],
        [p.s_t, p.s_i, p.l_f],
    ];
    let b = [
        tau_t - turbine_torque(p, w_i, w_t, v),
        tau_i - impeller_torque(p, w_i, v, a_s),
        phi(p, w_i, w_t, v, a_s),
    ];
    let d = det3(m);
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = b[row];
        }
        *slot = det3(mc) / d;
    }
    out
}
