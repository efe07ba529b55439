//! Scalar deformations of the energy and the induced alternative descriptions.
//!
//! A deformation `f` turns `(H, Ω)` into `(H_φ, Ω_φ)` with
//! `H_φ = β₀⁻¹ f(β₀ H)` and `Ω_φ = dH_φ ∧ dt`, leaving the dynamics fixed.
//! Registration screens enforce `f(0) = 0`, `f' > 0`, a consistent inverse,
//! and unboundedness: a bounded `f` would leave `e^{-β H_φ}` non-decaying and
//! the deformed partition integral divergent.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::roots;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A screened deformation `f` with derivative, inverse, and fiducial `β₀`.
#[derive(Clone)]
pub struct Deformation {
    label: String,
    f: ScalarFn,
    f_prime: ScalarFn,
    f_inverse: ScalarFn,
    beta0: f64,
}

impl Deformation {
    /// Register a deformation, running the catalog screens.
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_inverse: impl Fn(f64) -> f64 + Send + Sync + 'static,
        beta0: f64,
    ) -> Result<Self> {
        let d = Self {
            label: label.into(),
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
            f_inverse: Arc::new(f_inverse),
            beta0,
        };
        d.screen()?;
        Ok(d)
    }

    /// Register a deformation without an analytic inverse; the inverse is a
    /// bracketing root solve refined to 1e-12.
    pub fn new_auto_inverse(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        beta0: f64,
    ) -> Result<Self> {
        let f = Arc::new(f);
        let f_for_inverse = f.clone();
        let f_inverse = move |y: f64| {
            let g = f_for_inverse.clone();
            roots::solve_increasing(move |x| g(x), y, y.max(1e-6), 1e-12).unwrap_or(f64::NAN)
        };
        let d = Self {
            label: label.into(),
            f,
            f_prime: Arc::new(f_prime),
            f_inverse: Arc::new(f_inverse),
            beta0,
        };
        d.screen()?;
        Ok(d)
    }

    fn reject(&self, reason: impl Into<String>) -> Error {
        Error::InvalidDeformation {
            label: self.label.clone(),
            reason: reason.into(),
        }
    }

    fn screen(&self) -> Result<()> {
        if !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return Err(self.reject("beta0 must be positive and finite"));
        }
        let f = &self.f;
        if f(0.0).abs() > 1e-12 {
            return Err(self.reject(format!("f(0) = {:e}, must be 0", f(0.0))));
        }
        // Monotonicity on [0, 1e3]: derivative positive and secants increasing.
        let mut prev_x = 0.0;
        let mut prev_f = 0.0;
        for i in 1..=60 {
            let x = 1e-3 * (1e6f64).powf(i as f64 / 60.0);
            if (self.f_prime)(x) <= 0.0 {
                return Err(self.reject(format!("f'({x:e}) is not positive")));
            }
            if f(x) <= prev_f {
                return Err(self.reject(format!(
                    "f not increasing between {prev_x:e} and {x:e}"
                )));
            }
            prev_x = x;
            prev_f = f(x);
        }
        // Inverse consistency within 1e-10 on the sample grid.
        for i in 0..=20 {
            let x = 1e-2 * (1e4f64).powf(i as f64 / 20.0);
            let y = f(x);
            if !y.is_finite() {
                continue;
            }
            let back = (self.f_inverse)(y);
            if (back - x).abs() > 1e-10 * x.max(1.0) {
                return Err(self.reject(format!(
                    "f_inverse(f({x:e})) = {back:e} deviates beyond 1e-10"
                )));
            }
        }
        // Unboundedness: e^{-β f(E)} must keep decaying for β down to 0.01,
        // which is exactly "f grows without bound". A bounded f goes flat:
        // its growth from 1e6 to 1e12 vanishes.
        let mid = f(1e6);
        let far = f(1e12);
        if far.is_infinite() || mid.is_infinite() {
            return Ok(()); // overflow means very unbounded
        }
        if !(far > mid + 1e-9 * mid.abs().max(1.0)) {
            return Err(self.reject(
                "f is bounded above (no growth between 1e6 and 1e12); \
                 e^{-beta H_phi} would not decay and Z_phi would diverge",
            ));
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn f_prime(&self, x: f64) -> f64 {
        (self.f_prime)(x)
    }

    pub fn f_inverse(&self, y: f64) -> f64 {
        (self.f_inverse)(y)
    }

    /// Dimensionless deformation factor `φ(H) = f(β₀ H)` of the coordinate change.
    pub fn phi(&self, h_value: f64) -> f64 {
        (self.f)(self.beta0 * h_value)
    }

    /// `dφ/dH = β₀ f'(β₀ H)`.
    pub fn phi_prime(&self, h_value: f64) -> f64 {
        self.beta0 * (self.f_prime)(self.beta0 * h_value)
    }
}

/// `H_φ(H) = β₀⁻¹ f(β₀ H)`.
pub fn deform_energy(d: &Deformation, h_value: f64) -> Result<f64> {
    if h_value < 0.0 {
        return Err(Error::InvalidParam(format!(
            "deform_energy needs H >= 0, got {h_value:e}"
        )));
    }
    Ok(d.f(d.beta0() * h_value) / d.beta0())
}

/// `dH_φ/dH = f'(β₀ H)`: the density of `Ω_φ` relative to `Ω`, since both
/// factor through the same time form (`Ω_φ = dH_φ ∧ dt`, `Ω = dH ∧ dt`).
pub fn deformed_volume_density(d: &Deformation, h_value: f64) -> Result<f64> {
    if h_value < 0.0 {
        return Err(Error::InvalidParam(format!(
            "deformed_volume_density needs H >= 0, got {h_value:e}"
        )));
    }
    Ok(d.f_prime(d.beta0() * h_value))
}

/// The noncanonical change `(q, p) -> (Q, P) = (q(1+φ), p(1+φ))` for the
/// `m = ω = 1` oscillator, with `H' = (1+φ)² H` and Jacobian
/// `F(H) = (1+φ)(1+φ+2Hφ') = dH'/dH`.
#[derive(Clone)]
pub struct CoordinateChange {
    label: String,
    phi: ScalarFn,
    phi_prime: ScalarFn,
}

impl CoordinateChange {
    pub fn from_deformation(d: &Deformation) -> Self {
        let d1 = d.clone();
        let d2 = d.clone();
        Self {
            label: d.label().to_string(),
            phi: Arc::new(move |h| d1.phi(h)),
            phi_prime: Arc::new(move |h| d2.phi_prime(h)),
        }
    }

    /// The trivial change `φ ≡ 0` (identity map).
    pub fn trivial() -> Self {
        Self {
            label: "trivial".into(),
            phi: Arc::new(|_| 0.0),
            phi_prime: Arc::new(|_| 0.0),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Base-oscillator energy in the units of the construction.
    pub fn base_energy(q: f64, p: f64) -> f64 {
        0.5 * (q * q + p * p)
    }

    /// Apply the forward map at `(q, p)`.
    pub fn apply(&self, point: (f64, f64)) -> (f64, f64) {
        let (q, p) = point;
        let s = 1.0 + (self.phi)(Self::base_energy(q, p));
        (q * s, p * s)
    }

    /// `H'(H) = (1+φ(H))² H`.
    pub fn h_prime(&self, h_value: f64) -> f64 {
        let s = 1.0 + (self.phi)(h_value);
        s * s * h_value
    }

    /// `F(H) = (1+φ)(1+φ+2Hφ') ≡ dH'/dH`, the density of `dP ∧ dQ` over `dp ∧ dq`.
    pub fn jacobian_f(&self, h_value: f64) -> f64 {
        let s = 1.0 + (self.phi)(h_value);
        s * (s + 2.0 * h_value * (self.phi_prime)(h_value))
    }
}

/// The five catalog deformations; mixes convex/concave and bounded/unbounded
/// derivative cases, all with `f(0) = 0`, `f' > 0`, `f` unbounded.
pub fn catalog(beta0: f64) -> Result<Vec<Deformation>> {
    Ok(vec![
        Deformation::new("identity", |x| x, |_| 1.0, |y| y, beta0)?,
        Deformation::new(
            "quad",
            |x| x + x * x,
            |x| 1.0 + 2.0 * x,
            |y| 0.5 * (-1.0 + (1.0 + 4.0 * y).sqrt()),
            beta0,
        )?,
        Deformation::new("expm1", |x| x.exp_m1(), |x| x.exp(), |y| y.ln_1p(), beta0)?,
        Deformation::new("log1p", |x| x.ln_1p(), |x| 1.0 / (1.0 + x), |y| y.exp_m1(), beta0)?,
        Deformation::new("double", |x| 2.0 * x, |_| 2.0, |y| 0.5 * y, beta0)?,
    ])
}

/// Catalog labels, for diagnostics and config validation.
pub fn catalog_labels() -> Vec<&'static str> {
    vec!["identity", "quad", "expm1", "log1p", "double"]
}

/// Look up a deformation by label. `tanh` is a known candidate that fails the
/// unboundedness screen, so requesting it reports the screen failure rather
/// than an unknown label.
pub fn lookup(label: &str, beta0: f64) -> Result<Deformation> {
    match label {
        "identity" | "quad" | "expm1" | "log1p" | "double" => Ok(catalog(beta0)?
            .into_iter()
            .find(|d| d.label() == label)
            .expect("catalog contains the label")),
        "tanh" => Deformation::new(
            "tanh",
            |x| x.tanh(),
            |x| 1.0 / x.cosh().powi(2),
            |y| y.atanh(),
            beta0,
        ),
        other => Err(Error::UnknownLabel {
            kind: "deformation",
            label: other.to_string(),
            available: catalog_labels().join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_leaves_energy_alone() {
        let d = lookup("identity", 1.0).unwrap();
        for &h in &[0.0, 0.3, 7.0] {
            assert_relative_eq!(deform_energy(&d, h).unwrap(), h);
            assert_relative_eq!(deformed_volume_density(&d, h).unwrap(), 1.0);
        }
    }

    #[test]
    fn quad_deformation_arithmetic() {
        // f(x) = x + x², β₀ = 1: H_φ(2) = 6, density f'(2) = 5.
        let d = lookup("quad", 1.0).unwrap();
        assert_relative_eq!(deform_energy(&d, 2.0).unwrap(), 6.0);
        assert_relative_eq!(deformed_volume_density(&d, 2.0).unwrap(), 5.0);
        // Finite-difference oracle for the density.
        let h = 1e-6;
        let fd = (deform_energy(&d, 2.0 + h).unwrap() - deform_energy(&d, 2.0 - h).unwrap())
            / (2.0 * h);
        assert_relative_eq!(fd, 5.0, epsilon = 1e-5);
    }

    #[test]
    fn negative_energy_rejected() {
        let d = lookup("identity", 1.0).unwrap();
        assert!(deform_energy(&d, -0.1).is_err());
    }

    #[test]
    fn bounded_tanh_fails_the_screen_but_log_passes() {
        match lookup("tanh", 1.0) {
            Err(Error::InvalidDeformation { reason, .. }) => {
                assert!(reason.contains("bounded"), "reason: {reason}")
            }
            other => panic!("expected screen rejection, got {other:?}", other = other.is_ok()),
        }
        assert!(lookup("log1p", 1.0).is_ok());
    }

    #[test]
    fn unknown_label_lists_catalog() {
        match lookup("cosh", 1.0) {
            Err(Error::UnknownLabel { available, .. }) => {
                assert!(available.contains("identity") && available.contains("log1p"))
            }
            _ => panic!("expected unknown-label error"),
        }
    }

    #[test]
    fn screens_reject_shifted_and_decreasing_f() {
        assert!(Deformation::new("shifted", |x| x + 1.0, |_| 1.0, |y| y - 1.0, 1.0).is_err());
        assert!(Deformation::new("decreasing", |x| -x, |_| -1.0, |y| -y, 1.0).is_err());
    }

    #[test]
    fn inverse_consistency_on_grid() {
        for d in catalog(1.0).unwrap() {
            for i in 0..=30 {
                let x = 0.01 * (1e4f64).powf(i as f64 / 30.0);
                let y = d.f(x);
                if y.is_finite() {
                    assert_relative_eq!(d.f_inverse(y), x, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn auto_inverse_matches_analytic() {
        let d = Deformation::new_auto_inverse("cubic+", |x| x + x.powi(3), |x| 1.0 + 3.0 * x * x, 1.0)
            .unwrap();
        assert_relative_eq!(d.f_inverse(d.f(1.7)), 1.7, max_relative = 1e-10);
    }

    #[test]
    fn coordinate_change_examples() {
        // Trivial map is the identity.
        let triv = CoordinateChange::trivial();
        assert_eq!(triv.apply((0.4, -1.2)), (0.4, -1.2));

        // f(x) = x, β₀ = 1 at (1, 0): H = 1/2, φ = 1/2, (Q, P) = (1.5, 0),
        // H' = 2.25 * 0.5 = 1.125 = (P² + Q²)/2.
        let d = lookup("identity", 1.0).unwrap();
        let c = CoordinateChange::from_deformation(&d);
        let (qq, pp) = c.apply((1.0, 0.0));
        assert_relative_eq!(qq, 1.5);
        assert_relative_eq!(pp, 0.0);
        let h = CoordinateChange::base_energy(1.0, 0.0);
        assert_relative_eq!(c.h_prime(h), 1.125);
        assert_relative_eq!(c.h_prime(h), CoordinateChange::base_energy(qq, pp));

        // F(1/2) = (1 + 1/2)(1 + 1/2 + 2·(1/2)·1) = 3.75, and F ≡ dH'/dH.
        assert_relative_eq!(c.jacobian_f(0.5), 3.75);
        let dh = 1e-6;
        let fd = (c.h_prime(0.5 + dh) - c.h_prime(0.5 - dh)) / (2.0 * dh);
        assert_relative_eq!(fd, 3.75, epsilon = 1e-6);
    }

    #[test]
    fn jacobian_matches_map_determinant() {
        // det(∂(Q,P)/∂(q,p)) = F(H) at random points (Ω' = F(H) dp ∧ dq).
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for d in catalog(1.0).unwrap() {
            let c = CoordinateChange::from_deformation(&d);
            for _ in 0..200 {
                let q: f64 = rng.gen_range(-1.5..1.5);
                let p: f64 = rng.gen_range(-1.5..1.5);
                if q * q + p * p < 1e-4 {
                    continue;
                }
                let h = 1e-6 * (1.0 + q.abs().max(p.abs()));
                let (aq, ap) = c.apply((q + h, p));
                let (bq, bp) = c.apply((q - h, p));
                let (cq, cp) = c.apply((q, p + h));
                let (dq2, dp2) = c.apply((q, p - h));
                let j11 = (aq - bq) / (2.0 * h);
                let j21 = (ap - bp) / (2.0 * h);
                let j12 = (cq - dq2) / (2.0 * h);
                let j22 = (cp - dp2) / (2.0 * h);
                let det = j11 * j22 - j12 * j21;
                let f = c.jacobian_f(CoordinateChange::base_energy(q, p));
                assert_relative_eq!(det, f, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn pushed_flow_conserves_h_prime() {
        use crate::phase_flow::{self, HamiltonianSystem1D};
        let sys = HamiltonianSystem1D::ho(1.0, 1.0).unwrap();
        let d = lookup("quad", 1.0).unwrap();
        let c = CoordinateChange::from_deformation(&d);
        let traj = phase_flow::integrate(&sys, (0.9, 0.2), 12.0, 1e-11).unwrap();
        let (q0, p0) = traj.states[0];
        let h0 = c.h_prime(CoordinateChange::base_energy(q0, p0));
        for &(q, p) in &traj.states {
            let (qq, pp) = c.apply((q, p));
            let hp = CoordinateChange::base_energy(qq, pp);
            assert!((hp - h0).abs() <= 1e-8, "H' drift {}", (hp - h0).abs());
        }
    }
}
