//! Fixed-step explicit integrators over flat state slices.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

/// Integrator with preallocated stage buffers. The right-hand side writes
/// `ẋ = f(t, x)` into its output slice.
#[derive(Debug, Clone)]
pub struct Stepper {
    method: Integrator,
    steps: usize,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    next: Vec<f64>,
}

impl Stepper {
    pub fn new(method: Integrator, dim: usize) -> Self {
        Self {
            method,
            steps: 0,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            next: vec![0.0; dim],
        }
    }

    pub fn method(&self) -> Integrator {
        self.method
    }

    /// Steps taken so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advances `x` from `t` to `t + dt`. On a non-finite result `x` is left
    /// untouched and the failing step index is reported.
    pub fn step<F>(&mut self, f: &F, t: f64, dt: f64, x: &mut [f64]) -> Result<()>
    where
        F: Fn(f64, &[f64], &mut [f64]),
    {
        let n = x.len();
        if n != self.tmp.len() {
            return Err(Error::DimensionMismatch {
                expected: self.tmp.len(),
                got: n,
            });
        }
        let [k1, k2, k3, k4] = &mut self.k;
        match self.method {
            Integrator::Euler => {
                f(t, x, k1);
                for i in 0..n {
                    self.next[i] = x[i] + dt * k1[i];
                }
            }
            Integrator::Rk4 => {
                f(t, x, k1);
                for i in 0..n {
                    self.tmp[i] = x[i] + 0.5 * dt * k1[i];
                }
                f(t + 0.5 * dt, &self.tmp, k2);
                for i in 0..n {
                    self.tmp[i] = x[i] + 0.5 * dt * k2[i];
                }
                f(t + 0.5 * dt, &self.tmp, k3);
                for i in 0..n {
                    self.tmp[i] = x[i] + dt * k3[i];
                }
                f(t + dt, &self.tmp, k4);
                for i in 0..n {
                    self.next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        if self.next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                step: self.steps,
                time: t,
            });
        }
        x.copy_from_slice(&self.next);
        self.steps += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, x: &[f64], dx: &mut [f64]) {
        dx[0] = -x[0];
    }

    #[test]
    fn rk4_local_error_is_fifth_order() {
        let mut errs = Vec::new();
        for dt in [0.1, 0.05] {
            let mut x = [1.0];
            Stepper::new(Integrator::Rk4, 1).step(&decay, 0.0, dt, &mut x).unwrap();
            errs.push((x[0] - (-dt).exp()).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 5.0).abs() < 0.1, "{order}");
        assert!(errs[0] < 1e-7);
    }

    #[test]
    fn euler_matches_formula() {
        let mut x = [2.0];
        Stepper::new(Integrator::Euler, 1).step(&decay, 0.0, 0.1, &mut x).unwrap();
        assert_eq!(x[0], 1.8);
    }

    #[test]
    fn zero_derivative_leaves_state() {
        let mut x = [1.5, -2.0];
        let f = |_t: f64, _x: &[f64], dx: &mut [f64]| dx.fill(0.0);
        Stepper::new(Integrator::Rk4, 2).step(&f, 0.0, 1e-3, &mut x).unwrap();
        assert_eq!(x, [1.5, -2.0]);
    }

    #[test]
    fn non_finite_step_leaves_state_and_reports_index() {
        let blow = |_t: f64, x: &[f64], dx: &mut [f64]| dx[0] = 1.0 / (1.0 - x[0]);
        let mut st = Stepper::new(Integrator::Euler, 1);
        let mut x = [0.0];
        st.step(&blow, 0.0, 1.0, &mut x).unwrap();
        assert_eq!(x, [1.0]);
        let err = st.step(&blow, 1.0, 1.0, &mut x).unwrap_err();
        assert_eq!(err, Error::NonFiniteState { step: 1, time: 1.0 });
        assert_eq!(x, [1.0]);
    }
}
