//! Phase-plane integrators: adaptive Dormand–Prince 5(4) and fixed-step leapfrog.
//!
//! The adaptive integrator provides dense accepted-step output for return-time
//! event location; leapfrog is the symplectic cross-check for separable systems.

use crate::error::{Error, Result};

/// Right-hand side of the canonical equations: `(dq/dt, dp/dt)` at `(q, p)`.
pub trait PhaseRhs {
    fn rhs(&self, q: f64, p: f64) -> (f64, f64);
}

impl<F: Fn(f64, f64) -> (f64, f64)> PhaseRhs for F {
    fn rhs(&self, q: f64, p: f64) -> (f64, f64) {
        self(q, p)
    }
}

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One accepted integration step.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub t: f64,
    pub q: f64,
    pub p: f64,
}

fn dopri5_step<R: PhaseRhs>(rhs: &R, q: f64, p: f64, h: f64) -> ((f64, f64), f64) {
    let k1 = rhs.rhs(q, p);
    let k2 = rhs.rhs(q + h * A2[0] * k1.0, p + h * A2[0] * k1.1);
    let k3 = rhs.rhs(
        q + h * (A3[0] * k1.0 + A3[1] * k2.0),
        p + h * (A3[0] * k1.1 + A3[1] * k2.1),
    );
    let k4 = rhs.rhs(
        q + h * (A4[0] * k1.0 + A4[1] * k2.0 + A4[2] * k3.0),
        p + h * (A4[0] * k1.1 + A4[1] * k2.1 + A4[2] * k3.1),
    );
    let k5 = rhs.rhs(
        q + h * (A5[0] * k1.0 + A5[1] * k2.0 + A5[2] * k3.0 + A5[3] * k4.0),
        p + h * (A5[0] * k1.1 + A5[1] * k2.1 + A5[2] * k3.1 + A5[3] * k4.1),
    );
    let k6 = rhs.rhs(
        q + h * (A6[0] * k1.0 + A6[1] * k2.0 + A6[2] * k3.0 + A6[3] * k4.0 + A6[4] * k5.0),
        p + h * (A6[0] * k1.1 + A6[1] * k2.1 + A6[2] * k3.1 + A6[3] * k4.1 + A6[4] * k5.1),
    );

    let q5 = q + h * (B5[0] * k1.0 + B5[2] * k3.0 + B5[3] * k4.0 + B5[4] * k5.0 + B5[5] * k6.0);
    let p5 = p + h * (B5[0] * k1.1 + B5[2] * k3.1 + B5[3] * k4.1 + B5[4] * k5.1 + B5[5] * k6.1);

    // FSAL stage evaluated at the 5th-order solution.
    let k7 = rhs.rhs(q5, p5);
    let q4 = q + h
        * (B4[0] * k1.0 + B4[2] * k3.0 + B4[3] * k4.0 + B4[4] * k5.0 + B4[5] * k6.0 + B4[6] * k7.0);
    let p4 = p + h
        * (B4[0] * k1.1 + B4[2] * k3.1 + B4[3] * k4.1 + B4[4] * k5.1 + B4[5] * k6.1 + B4[6] * k7.1);

    let err = ((q5 - q4).powi(2) + (p5 - p4).powi(2)).sqrt();
    ((q5, p5), err)
}

/// Integrate from `(q0, p0)` over `[0, duration]`, storing every accepted step.
///
/// `tol` is a per-unit-time error budget; the controller targets a local error
/// of `tol * h / (1 + duration)` per step so the accumulated error stays near
/// `tol` over the whole interval.
pub fn integrate_adaptive<R: PhaseRhs>(
    rhs: &R,
    q0: f64,
    p0: f64,
    duration: f64,
    tol: f64,
) -> Result<Vec<Step>> {
    integrate_adaptive_capped(rhs, q0, p0, duration, tol, duration)
}

/// [`integrate_adaptive`] with an explicit cap on the step size, so callers
/// scanning for sign changes cannot jump across a feature of the orbit.
pub fn integrate_adaptive_capped<R: PhaseRhs>(
    rhs: &R,
    q0: f64,
    p0: f64,
    duration: f64,
    tol: f64,
    h_max: f64,
) -> Result<Vec<Step>> {
    if duration <= 0.0 {
        return Err(Error::InvalidParam("duration must be positive".into()));
    }
    if h_max <= 0.0 {
        return Err(Error::InvalidParam("h_max must be positive".into()));
    }
    let scale = (q0 * q0 + p0 * p0).sqrt().max(1.0);
    let local_tol = tol * scale / (1.0 + duration);

    let mut steps = Vec::new();
    steps.push(Step {
        t: 0.0,
        q: q0,
        p: p0,
    });
    let (mut q, mut p) = (q0, p0);
    let mut t = 0.0;
    let mut h = (duration / 100.0).min(0.1).min(h_max);

    let h_min = duration * 1e-14;
    while t < duration {
        if h < h_min {
            return Err(Error::Stiffness { t });
        }
        if t + h > duration {
            h = duration - t;
        }
        let ((qn, pn), err) = dopri5_step(rhs, q, p, h);
        let tol_here = local_tol * h.max(h_min);
        if err <= tol_here || h <= h_min * 4.0 {
            t += h;
            q = qn;
            p = pn;
            steps.push(Step { t, q, p });
            let grow = if err > 0.0 {
                0.9 * (tol_here / err).powf(0.2)
            } else {
                5.0
            };
            h = (h * grow.clamp(0.2, 5.0)).min(h_max);
        } else {
            h *= (0.9 * (tol_here / err).powf(0.2)).clamp(0.1, 0.9);
        }
    }
    Ok(steps)
}

/// Integrate exactly `dt` forward from `(q, p)` (no history), reusing the
/// adaptive controller. Used for event refinement inside one accepted step.
pub fn advance<R: PhaseRhs>(rhs: &R, q: f64, p: f64, dt: f64, tol: f64) -> Result<(f64, f64)> {
    if dt == 0.0 {
        return Ok((q, p));
    }
    let steps = integrate_adaptive(rhs, q, p, dt, tol)?;
    let last = steps.last().expect("at least the initial step");
    Ok((last.q, last.p))
}

/// One kick-drift-kick leapfrog step for `H = p^2 / 2m + V(q)`.
pub fn leapfrog_step<Vp: Fn(f64) -> f64>(
    v_prime: &Vp,
    mass: f64,
    q: f64,
    p: f64,
    dt: f64,
) -> (f64, f64) {
    let p_half = p - 0.5 * dt * v_prime(q);
    let q_new = q + dt * p_half / mass;
    let p_new = p_half - 0.5 * dt * v_prime(q_new);
    (q_new, p_new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn ho_rhs() -> impl PhaseRhs {
        |q: f64, p: f64| (p, -q)
    }

    #[test]
    fn oscillator_full_revolution() {
        let steps = integrate_adaptive(&ho_rhs(), 1.0, 0.0, TAU, 1e-10).unwrap();
        let last = steps.last().unwrap();
        assert!((last.q - 1.0).abs() < 1e-8, "q error {}", (last.q - 1.0).abs());
        assert!(last.p.abs() < 1e-8);
    }

    #[test]
    fn energy_drift_over_ten_periods() {
        let steps = integrate_adaptive(&ho_rhs(), 1.0, 0.0, 10.0 * TAU, 1e-10).unwrap();
        let h0 = 0.5;
        let drift = steps
            .iter()
            .map(|s| (0.5 * (s.q * s.q + s.p * s.p) - h0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-8, "drift {drift}");
    }

    #[test]
    fn leapfrog_area_preservation() {
        // Finite-difference Jacobian of the one-step map has determinant 1.
        let vp = |q: f64| q + q * q * q;
        let dt = 0.01;
        let (q0, p0) = (0.7, -0.3);
        let h = 1e-5;
        let step = |q: f64, p: f64| leapfrog_step(&vp, 1.0, q, p, dt);
        let (aq, ap) = step(q0 + h, p0);
        let (bq, bp) = step(q0 - h, p0);
        let (cq, cp) = step(q0, p0 + h);
        let (dq, dp) = step(q0, p0 - h);
        let j11 = (aq - bq) / (2.0 * h);
        let j21 = (ap - bp) / (2.0 * h);
        let j12 = (cq - dq) / (2.0 * h);
        let j22 = (cp - dp) / (2.0 * h);
        let det = j11 * j22 - j12 * j21;
        assert_relative_eq!(det, 1.0, epsilon = 1e-10);
    }
}
