//! Period function τ(E), enclosed phase-space area A(E), and the local time
//! function, by independent methods.
//!
//! `period_return_time` integrates the flow and locates the first return to
//! the section through the turning point; `period_quadrature` evaluates
//! τ(E) = 2 ∫ √(m / 2(E - V)) dq with the endpoint singularity removed by the
//! substitution q = q± ∓ s²; `enclosed_area` integrates slice widths found by
//! root solves on H(q, p) = E, so τ = dA/dE is a genuinely independent route.

use crate::error::{Error, Result};
use crate::ode;
use crate::phase_flow::HamiltonianSystem1D;
use crate::quad;
use crate::roots;

/// How a period profile was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodMethod {
    ReturnTime,
    TurningPointQuadrature,
    AreaDerivative,
}

impl PeriodMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            PeriodMethod::ReturnTime => "return_time",
            PeriodMethod::TurningPointQuadrature => "turning_point_quadrature",
            PeriodMethod::AreaDerivative => "area_derivative",
        }
    }
}

/// Sampled period function with method provenance.
#[derive(Debug, Clone)]
pub struct PeriodProfile {
    energies: Vec<f64>,
    periods: Vec<f64>,
    method: PeriodMethod,
}

/// One sample of the local time function.
#[derive(Debug, Clone, Copy)]
pub struct TimeFormSample {
    pub point: (f64, f64),
    pub t_value: f64,
}

/// Turning points `q- < q+` of the level set `{H = E}` on the `p = 0` axis.
pub fn turning_points(system: &HamiltonianSystem1D, e: f64) -> Result<(f64, f64)> {
    if e <= 0.0 {
        return Err(Error::NonCompactLevelSet(format!(
            "energy {e:e} is at or below the minimum"
        )));
    }
    let v_right = |q: f64| system.energy(q, 0.0);
    let v_left = |q: f64| system.energy(-q, 0.0);
    let guess = e.sqrt().max(1e-6);
    let q_plus = roots::solve_increasing(v_right, e, guess, 1e-14).map_err(|_| {
        Error::NonCompactLevelSet(format!("no right turning point at E = {e:e}"))
    })?;
    let q_minus = roots::solve_increasing(v_left, e, guess, 1e-14).map_err(|_| {
        Error::NonCompactLevelSet(format!("no left turning point at E = {e:e}"))
    })?;
    Ok((-q_minus, q_plus))
}

/// Rough angular-frequency scale from the curvature at the right turning point,
/// used only to pick step caps for the return-time search.
fn frequency_estimate(system: &HamiltonianSystem1D, q_plus: f64) -> f64 {
    let h = 1e-4 * (1.0 + q_plus.abs());
    let v = |q: f64| system.energy(q, 0.0);
    let v2 = (v(q_plus + h) - 2.0 * v(q_plus) + v(q_plus - h)) / (h * h);
    if v2 > 0.0 {
        (v2 / system.mass()).sqrt()
    } else {
        1.0
    }
}

/// First return time to the section through `(q+(E), 0)`.
///
/// The start lies on the turning point, where `p = 0` and `dp/dt < 0`; the
/// return is therefore the first crossing of `p` through zero from above
/// (the crossing at half period runs upward). Located by bisection on the
/// flow restarted from the last accepted step before the crossing.
pub fn period_return_time(system: &HamiltonianSystem1D, e: f64, tol: f64) -> Result<f64> {
    let (_, q_plus) = turning_points(system, e)?;
    let omega_est = frequency_estimate(system, q_plus);
    let tau_est = std::f64::consts::TAU / omega_est;

    let grad = {
        let sys = system.clone();
        move |q: f64, p: f64| {
            let (hq, hp) = sys.gradient(q, p);
            (hp, -hq)
        }
    };

    let mut chunk = 4.0 * tau_est;
    let (mut q, mut p) = (q_plus, 0.0);
    let mut t_base = 0.0;
    let mut total = 0.0;
    while total < 1e5 * tau_est {
        let steps = ode::integrate_adaptive_capped(&grad, q, p, chunk, tol, tau_est / 16.0)?;
        for w in steps.windows(2) {
            let (prev, cur) = (w[0], w[1]);
            if prev.p > 0.0 && cur.p <= 0.0 {
                // Bracketed the downward crossing; bisect on restarted flow.
                let f = |dt: f64| -> f64 {
                    if dt == 0.0 {
                        return prev.p;
                    }
                    ode::advance(&grad, prev.q, prev.p, dt, tol * 0.1)
                        .map(|(_, pp)| pp)
                        .unwrap_or(f64::NAN)
                    };
                let dt = roots::bisect(f, 0.0, cur.t - prev.t, 1e-13)?;
                return Ok(t_base + prev.t + dt);
            }
        }
        let last = steps.last().expect("nonempty");
        q = last.q;
        p = last.p;
        t_base += last.t;
        total += chunk;
        chunk *= 2.0;
    }
    Err(Error::NonCompactLevelSet(format!(
        "no return detected at E = {e:e} within {total:.1} time units"
    )))
}

/// τ(E) = 2 ∫_{q-}^{q+} √(m / 2(E - V(q))) dq for separable systems, with the
/// inverse-square-root endpoints removed by `q = q± ∓ s²`.
pub fn period_quadrature(system: &HamiltonianSystem1D, e: f64, tol: f64) -> Result<f64> {
    let pot = system.potential().ok_or_else(|| {
        Error::MethodUnavailable("turning-point quadrature needs a separable system".into())
    })?;
    let (q_minus, q_plus) = turning_points(system, e)?;
    let m = system.mass();
    let v = pot.v.clone();
    let vp = pot.v_prime.clone();
    let q_mid = 0.5 * (q_minus + q_plus);

    // One half-integral with the singular endpoint mapped to s = 0.
    let half = |q_end: f64, sign: f64| -> Result<f64> {
        let s_max = (sign * (q_end - q_mid)).sqrt();
        let slope = (vp(q_end) * sign).abs().max(f64::MIN_POSITIVE);
        let limit = 2.0 * (m / (2.0 * slope)).sqrt();
        let v = v.clone();
        let integrand = move |s: f64| {
            let q = q_end - sign * s * s;
            let w = e - v(q);
            if w <= 0.0 || w < 1e-13 * e {
                // Cancellation at the turning point: use the analytic limit.
                limit
            } else {
                2.0 * s * (m / (2.0 * w)).sqrt()
            }
        };
        Ok(quad::integrate(integrand, 0.0, s_max, tol / 4.0, 0.0)?.value)
    };

    let right = half(q_plus, 1.0)?;
    let left = half(q_minus, -1.0)?;
    Ok(2.0 * (right + left))
}

/// Width of the slice `{p : H(q, p) <= E}` at fixed `q`, by a root solve in `p`.
fn slice_width(system: &HamiltonianSystem1D, q: f64, e: f64) -> f64 {
    if system.energy(q, 0.0) >= e {
        return 0.0;
    }
    let f = |p: f64| system.energy(q, p);
    match roots::solve_increasing(f, e, (2.0 * system.mass() * e).sqrt(), 1e-14) {
        Ok(p_plus) => 2.0 * p_plus,
        Err(_) => 0.0,
    }
}

/// Area of `{H <= E}` by iterated quadrature: slice widths in `p` integrated
/// over `q`, with the `√(q± ∓ q)` endpoint behavior removed by substitution.
pub fn enclosed_area(system: &HamiltonianSystem1D, e: f64, tol: f64) -> Result<f64> {
    let (q_minus, q_plus) = turning_points(system, e)?;
    let q_mid = 0.5 * (q_minus + q_plus);
    let half = |q_end: f64, sign: f64| -> Result<f64> {
        let s_max = (sign * (q_end - q_mid)).sqrt();
        let integrand =
            move |s: f64| 2.0 * s * slice_width(system, q_end - sign * s * s, e);
        Ok(quad::integrate(integrand, 0.0, s_max, tol / 4.0, 0.0)?.value)
    };
    Ok(half(q_plus, 1.0)? + half(q_minus, -1.0)?)
}

/// Local time function of the harmonic oscillator,
/// `t = (1/ω) atan2(mωq, p)`, branch `[0, 2π/ω)` with the cut on `p > 0`.
pub fn time_function_ho(m: f64, omega: f64, point: (f64, f64)) -> Result<f64> {
    let (q, p) = point;
    if q == 0.0 && p == 0.0 {
        return Err(Error::CriticalPoint(
            "time function is undefined at the origin".into(),
        ));
    }
    let mut angle = (m * omega * q).atan2(p);
    if angle < 0.0 {
        angle += std::f64::consts::TAU;
    }
    Ok(angle / omega)
}

/// A [`TimeFormSample`] at `point` for the harmonic oscillator.
pub fn sample_time_form_ho(m: f64, omega: f64, point: (f64, f64)) -> Result<TimeFormSample> {
    Ok(TimeFormSample {
        point,
        t_value: time_function_ho(m, omega, point)?,
    })
}

impl PeriodProfile {
    /// Sample τ(E) on a logarithmic grid (33 points per decade by default via
    /// [`PeriodProfile::build_default`]). Quadrature falls back to return-time
    /// integration when the system is not separable.
    pub fn build(
        system: &HamiltonianSystem1D,
        e_min: f64,
        e_max: f64,
        per_decade: usize,
        method: PeriodMethod,
        tol: f64,
    ) -> Result<Self> {
        if !(e_min > 0.0 && e_max > e_min) {
            return Err(Error::InvalidParam(
                "need 0 < e_min < e_max for a period profile".into(),
            ));
        }
        if per_decade == 0 {
            return Err(Error::InvalidParam("per_decade must be positive".into()));
        }
        let decades = (e_max / e_min).log10();
        let n = (decades * per_decade as f64).ceil() as usize + 1;
        let mut energies = Vec::with_capacity(n);
        let mut periods = Vec::with_capacity(n);
        for i in 0..n {
            let frac = i as f64 / (n - 1).max(1) as f64;
            let e = e_min * (e_max / e_min).powf(frac);
            let tau = match method {
                PeriodMethod::ReturnTime => period_return_time(system, e, tol)?,
                PeriodMethod::TurningPointQuadrature => match period_quadrature(system, e, tol) {
                    Ok(t) => t,
                    Err(Error::MethodUnavailable(_)) => period_return_time(system, e, tol)?,
                    Err(other) => return Err(other),
                },
                PeriodMethod::AreaDerivative => {
                    let de = 1e-4 * e;
                    let a_plus = enclosed_area(system, e + de, tol * 1e-2)?;
                    let a_minus = enclosed_area(system, e - de, tol * 1e-2)?;
                    (a_plus - a_minus) / (2.0 * de)
                }
            };
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::InvalidParam(format!(
                    "period at E = {e:e} is not finite and positive"
                )));
            }
            energies.push(e);
            periods.push(tau);
        }
        Ok(Self {
            energies,
            periods,
            method,
        })
    }

    /// Profile on `[e_min, e_max]` at the default 33 points per decade,
    /// quadrature method, tolerance 1e-10.
    pub fn build_default(system: &HamiltonianSystem1D, e_min: f64, e_max: f64) -> Result<Self> {
        Self::build(
            system,
            e_min,
            e_max,
            33,
            PeriodMethod::TurningPointQuadrature,
            1e-10,
        )
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn method(&self) -> PeriodMethod {
        self.method
    }

    pub fn e_min(&self) -> f64 {
        self.energies[0]
    }

    pub fn e_max(&self) -> f64 {
        *self.energies.last().expect("nonempty profile")
    }

    /// τ(E) by log-log interpolation, extrapolating with the boundary
    /// power-law slope outside the sampled range. Exact for pure power laws.
    pub fn interpolate(&self, e: f64) -> f64 {
        let es = &self.energies;
        let ts = &self.periods;
        let n = es.len();
        if n == 1 {
            return ts[0];
        }
        let x = e.max(f64::MIN_POSITIVE).ln();
        let seg = if e <= es[0] {
            0
        } else if e >= es[n - 1] {
            n - 2
        } else {
            match es.binary_search_by(|a| a.partial_cmp(&e).expect("finite energies")) {
                Ok(i) => i.min(n - 2),
                Err(i) => i - 1,
            }
        };
        let (x0, x1) = (es[seg].ln(), es[seg + 1].ln());
        let (y0, y1) = (ts[seg].ln(), ts[seg + 1].ln());
        let y = y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        y.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_flow;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI, TAU};

    #[test]
    fn ho_period_is_isochronous() {
        // τ = 2π/ω independent of E.
        let sys = HamiltonianSystem1D::ho(1.0, 2.0).unwrap();
        for &e in &[0.3, 1.0, 100.0] {
            let tau = period_return_time(&sys, e, 1e-10).unwrap();
            assert_relative_eq!(tau, PI, epsilon = 1e-8);
        }
        let sys1 = HamiltonianSystem1D::ho(1.0, 1.0).unwrap();
        for &e in &[1.0, 100.0] {
            let tau = period_return_time(&sys1, e, 1e-10).unwrap();
            assert_relative_eq!(tau, TAU, epsilon = 1e-8);
        }
    }

    #[test]
    fn ho_quadrature_period() {
        let sys = HamiltonianSystem1D::ho(1.0, 1.0).unwrap();
        let tau = period_quadrature(&sys, 3.0, 1e-11).unwrap();
        assert_relative_eq!(tau, TAU, epsilon = 1e-9);
    }

    #[test]
    fn quartic_methods_agree_and_scale() {
        let sys = HamiltonianSystem1D::quartic(1.0, 1.0).unwrap();
        let t_quad = period_quadrature(&sys, 1.0, 1e-11).unwrap();
        let t_ret = period_return_time(&sys, 1.0, 1e-10).unwrap();
        assert_relative_eq!(t_ret, t_quad, max_relative = 1e-6);
        // Pure quartic scaling: τ(16) / τ(1) = 16^{-1/4} = 1/2.
        let t16 = period_quadrature(&sys, 16.0, 1e-11).unwrap();
        assert_relative_eq!(t16 / t_quad, 0.5, max_relative = 1e-6);
        // τ(E) E^{1/4} constant over several decades.
        for &e in &[1e-3, 1e-1, 1e2] {
            let t = period_quadrature(&sys, e, 1e-11).unwrap();
            assert_relative_eq!(t * e.powf(0.25), t_quad, max_relative = 1e-6);
        }
    }

    #[test]
    fn anharmonic_small_oscillation_limit() {
        // V = q²/2 + q⁴/4 approaches the HO period as E -> 0+.
        let sys = HamiltonianSystem1D::ho_plus_quartic(1.0, 1.0, 1.0).unwrap();
        let tau = period_quadrature(&sys, 1e-6, 1e-10).unwrap();
        assert_relative_eq!(tau, TAU, max_relative = 1e-3);
        let tau_ret = period_return_time(&sys, 1e-6, 1e-10).unwrap();
        assert_relative_eq!(tau_ret, tau, max_relative = 1e-6);
    }

    #[test]
    fn quartic_return_time_deep_and_high() {
        let sys = HamiltonianSystem1D::quartic(1.0, 1.0).unwrap();
        for &e in &[1e-3, 1e3] {
            let t_ret = period_return_time(&sys, e, 1e-10).unwrap();
            let t_quad = period_quadrature(&sys, e, 1e-12).unwrap();
            assert_relative_eq!(t_ret, t_quad, max_relative = 1e-6);
        }
    }

    #[test]
    fn ho_area_is_ellipse_area() {
        // {H <= E} is an ellipse of area 2πE/ω.
        let sys = HamiltonianSystem1D::ho(1.0, 1.0).unwrap();
        let a = enclosed_area(&sys, 1.0, 1e-10).unwrap();
        assert_relative_eq!(a, TAU, max_relative = 1e-8);
    }

    #[test]
    fn area_shrinks_to_zero() {
        let sys = HamiltonianSystem1D::quartic(1.0, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for &e in &[1e-1, 1e-2, 1e-3, 1e-4] {
            let a = enclosed_area(&sys, e, 1e-9).unwrap();
            assert!(a > 0.0 && a < last);
            last = a;
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn area_derivative_matches_period() {
        // τ = dA/dE from Ω = dH ∧ dt; central difference step 1e-4.
        let sys = HamiltonianSystem1D::quartic(1.0, 1.0).unwrap();
        let de = 1e-4;
        let a_plus = enclosed_area(&sys, 1.0 + de, 1e-12).unwrap();
        let a_minus = enclosed_area(&sys, 1.0 - de, 1e-12).unwrap();
        let tau_fd = (a_plus - a_minus) / (2.0 * de);
        let tau = period_quadrature(&sys, 1.0, 1e-12).unwrap();
        assert_relative_eq!(tau_fd, tau, max_relative = 1e-5);
    }

    #[test]
    fn time_function_values() {
        // Paper form t = (1/ω) tan^{-1}(mωq/p).
        assert_relative_eq!(
            time_function_ho(1.0, 1.0, (1.0, 1.0)).unwrap(),
            FRAC_PI_4,
            epsilon = 1e-15
        );
        assert_relative_eq!(time_function_ho(1.0, 1.0, (0.0, 1.0)).unwrap(), 0.0);
        assert!(matches!(
            time_function_ho(1.0, 1.0, (0.0, 0.0)),
            Err(Error::CriticalPoint(_))
        ));
    }

    #[test]
    fn time_function_tracks_the_flow() {
        // i_Γ ξ = 1: elapsed flow time equals the time-function increment.
        let sys = HamiltonianSystem1D::ho(1.0, 1.0).unwrap();
        let traj = phase_flow::integrate(&sys, (0.0, 1.0), 0.7, 1e-12).unwrap();
        let end = traj.final_state();
        let t = time_function_ho(1.0, 1.0, end).unwrap();
        assert_relative_eq!(t, 0.7, epsilon = 1e-8);
    }

    #[test]
    fn profile_interpolation_is_exact_on_power_laws() {
        let sys = HamiltonianSystem1D::quartic(1.0, 1.0).unwrap();
        let profile = PeriodProfile::build(
            &sys,
            1e-2,
            1e2,
            9,
            PeriodMethod::TurningPointQuadrature,
            1e-11,
        )
        .unwrap();
        let tau = period_quadrature(&sys, 0.37, 1e-12).unwrap();
        assert_relative_eq!(profile.interpolate(0.37), tau, max_relative = 1e-8);
        // Extrapolation keeps the power law.
        let tau_hi = period_quadrature(&sys, 1e3, 1e-12).unwrap();
        assert_relative_eq!(profile.interpolate(1e3), tau_hi, max_relative = 1e-7);
    }

    #[test]
    fn below_minimum_energy_is_an_error() {
        let sys = HamiltonianSystem1D::ho(1.0, 1.0).unwrap();
        assert!(matches!(
            period_return_time(&sys, -1.0, 1e-10),
            Err(Error::NonCompactLevelSet(_))
        ));
    }
}
