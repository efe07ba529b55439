//! Scalar root bracketing and refinement.

use crate::error::{Error, Result};

/// Bisection on `[a, b]` with `f(a)` and `f(b)` of opposite sign.
/// Refines until the bracket width drops below `tol * max(1, |x|)`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootSolve(format!(
            "no sign change on [{a:e}, {b:e}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol * mid.abs().max(1.0) || mid <= a.min(b) || mid >= a.max(b) {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Find `x > 0` with `f(x) = target` for `f` increasing from `f(0+) < target`.
/// Expands the bracket geometrically, then bisects.
pub fn solve_increasing<F: Fn(f64) -> f64>(f: F, target: f64, x_guess: f64, tol: f64) -> Result<f64> {
    let g = |x: f64| f(x) - target;
    let mut hi = x_guess.max(1e-12);
    let mut lo = 0.0;
    let mut expansions = 0;
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 600 || !hi.is_finite() {
            return Err(Error::RootSolve(format!(
                "bracket expansion failed: f({hi:e}) still below target {target:e}"
            )));
        }
    }
    bisect(g, lo, hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_cubic() {
        let r = bisect(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2.0f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn increasing_quadratic() {
        let r = solve_increasing(|x| x * x, 9.0, 0.5, 1e-14).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
    }

    #[test]
    fn missing_sign_change_is_an_error() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }
}
