//! Scalar root finding: bracketed bisection with secant refinement, and
//! cancellation-free quadratic roots.

/// Stopping rules for [`bracketed_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Absolute tolerance on `|f(x)|`.
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_iter: 200,
        }
    }
}

/// Finds a root of `f` in `[lo, hi]`.
///
/// An endpoint already within tolerance is returned as is. Otherwise the
/// endpoints must bracket a sign change, or `None` is returned. Each
/// iteration tries a secant step from the bracket ends and falls back to
/// bisection whenever the step leaves the bracket or the bracket shrank by
/// less than half on the previous iteration.
pub fn bracketed_root<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    opts: RootOptions,
) -> Option<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) {
        return None;
    }
    if fa.abs() <= opts.abs_tol {
        return Some(a);
    }
    if fb.abs() <= opts.abs_tol {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }

    let mut last_width = f64::INFINITY;
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..opts.max_iter {
        let width = (b - a).abs();
        let mid = 0.5 * (a + b);
        let secant = b - fb * (b - a) / (fb - fa);
        let inside = secant.is_finite() && (secant - a) * (secant - b) < 0.0;
        let x = if inside && width <= 0.5 * last_width { secant } else { mid };
        last_width = width;

        let fx = f(x);
        if !fx.is_finite() {
            return None;
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= opts.abs_tol {
            return Some(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if (b - a).abs() <= f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    (best.1.abs() <= opts.abs_tol).then_some(best.0)
}

/// Splits `[lo, hi]` into `pieces` equal subintervals and returns the first
/// (scanning upward) whose endpoints differ in sign or touch zero.
pub fn scan_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    pieces: usize,
) -> Option<(f64, f64)> {
    let pieces = pieces.max(1);
    let h = (hi - lo) / pieces as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for k in 1..=pieces {
        let x1 = if k == pieces { hi } else { lo + k as f64 * h };
        let f1 = f(x1);
        if f0.is_finite() && f1.is_finite() && (f0 == 0.0 || f0.signum() != f1.signum()) {
            return Some((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    None
}

/// Real roots of `a·x² + b·x + c = 0`, ascending, with repeated roots listed
/// twice. A vanishing leading coefficient falls back to the linear case; the
/// all-zero polynomial reports the single root 0.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return if c == 0.0 { vec![0.0] } else { Vec::new() };
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 || !disc.is_finite() {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        // b = 0 and c = 0.
        return vec![0.0, 0.0];
    }
    let (r1, r2) = (q / a, c / q);
    if r1 <= r2 {
        vec![r1, r2]
    } else {
        vec![r2, r1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn finds_cubic_root() {
        let r = bracketed_root(|x| x * x * x - 2.0, 0.0, 5.0, RootOptions::default()).unwrap();
        assert!((r * r * r - 2.0).abs() <= 1e-10);
    }

    #[test]
    fn endpoint_root_is_returned_directly() {
        assert_eq!(bracketed_root(|x| x - 1.0, 1.0, 3.0, RootOptions::default()), Some(1.0));
        assert_eq!(bracketed_root(|x| x - 3.0, 1.0, 3.0, RootOptions::default()), Some(3.0));
    }

    #[test]
    fn no_sign_change_gives_none() {
        assert_eq!(bracketed_root(|x| x * x + 1.0, -1.0, 1.0, RootOptions::default()), None);
    }

    #[test]
    fn scan_finds_interior_bracket() {
        // Same sign at both ends, two interior roots at ±0.5.
        let f = |x: f64| x * x - 0.25;
        let (a, b) = scan_bracket(f, -1.0, 1.0, 16).unwrap();
        assert!(a <= -0.5 && -0.5 <= b);
        assert!(scan_bracket(|x: f64| x * x + 1.0, -1.0, 1.0, 16).is_none());
    }

    #[test]
    fn quadratic_cases() {
        assert_eq!(quadratic_roots(1.0, -3.0, 2.0), vec![1.0, 2.0]);
        assert_eq!(quadratic_roots(0.0, 2.0, -4.0), vec![2.0]);
        assert!(quadratic_roots(1.0, 0.0, 1.0).is_empty());
        assert_eq!(quadratic_roots(3.0, 0.0, 0.0), vec![0.0, 0.0]);
        assert_eq!(quadratic_roots(0.0, 0.0, 0.0), vec![0.0]);
        // Cancellation-prone case: roots 1e-8 and 1e8.
        let r = quadratic_roots(1.0, -(1e8 + 1e-8), 1.0);
        assert!((r[0] - 1e-8).abs() < 1e-20);
        assert!((r[1] - 1e8).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn quadratic_roots_satisfy_equation(r1 in -1e3..1e3f64, r2 in -1e3..1e3f64, a in 0.1..10.0f64) {
            let (b, c) = (-a * (r1 + r2), a * r1 * r2);
            let roots = quadratic_roots(a, b, c);
            prop_assert_eq!(roots.len(), 2);
            let scale = a * (r1.abs() + r2.abs() + 1.0).powi(2);
            for x in roots {
                prop_assert!((a * x * x + b * x + c).abs() <= 1e-9 * scale);
            }
        }

        #[test]
        fn bracketed_root_meets_tolerance(shift in -4.0..4.0f64, k in 0.5..50.0f64) {
            let f = |x: f64| k * (x - shift) + (x - shift).powi(3);
            let r = bracketed_root(f, -5.0, 5.0, RootOptions::default()).unwrap();
            prop_assert!(f(r).abs() <= 1e-10);
            prop_assert!((-5.0..=5.0).contains(&r));
        }
    }
}
