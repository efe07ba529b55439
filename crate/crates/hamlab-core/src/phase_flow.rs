//! Classical Hamiltonian systems on the phase plane and their flows.
//!
//! A one-degree-of-freedom system pairs an energy function with the standard
//! symplectic form `dp ∧ dq`; the dynamics is the vector field Γ satisfying
//! `i_Γ Ω = -dH`. The n-dimensional oscillator family pairs `H_B` with
//! `Ω_B = B_ij dp_i ∧ dq_j`, so the isotropic-oscillator field is Hamiltonian
//! for every symmetric positive-definite B.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ode;

/// Gradient norm below which a point is declared critical.
pub const CRITICAL_GRAD_TOL: f64 = 1e-10;

type EnergyFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;
type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Potential part of a separable Hamiltonian `H = p^2/2m + V(q)`.
#[derive(Clone)]
pub struct Potential {
    pub v: ScalarFn,
    pub v_prime: ScalarFn,
}

/// A one-degree-of-freedom Hamiltonian system with the standard form `dp ∧ dq`.
///
/// Invariants checked at construction: the gradient vanishes only at the
/// declared critical point (sampled), the minimum there is zero, and sampled
/// level sets are compact (turning points exist in all four axis directions).
#[derive(Clone)]
pub struct HamiltonianSystem1D {
    label: String,
    mass: f64,
    energy: EnergyFn,
    gradient: GradientFn,
    potential: Option<Potential>,
}

impl HamiltonianSystem1D {
    /// Build a separable system `H = p^2/2m + V(q)` and validate its invariants.
    pub fn new_separable(
        label: impl Into<String>,
        mass: f64,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        v_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if mass <= 0.0 {
            return Err(Error::InvalidParam("mass must be positive".into()));
        }
        let v: ScalarFn = Arc::new(v);
        let vp: ScalarFn = Arc::new(v_prime);
        let (vv, vvp) = (v.clone(), vp.clone());
        let energy: EnergyFn = Arc::new(move |q, p| p * p / (2.0 * mass) + vv(q));
        let gradient: GradientFn = Arc::new(move |q, p| (vvp(q), p / mass));
        let sys = Self {
            label: label.into(),
            mass,
            energy,
            gradient,
            potential: Some(Potential { v, v_prime: vp }),
        };
        sys.validate()?;
        Ok(sys)
    }

    /// Build a general (not necessarily separable) system from closures.
    pub fn new_general(
        label: impl Into<String>,
        mass: f64,
        energy: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Result<Self> {
        let sys = Self {
            label: label.into(),
            mass,
            energy: Arc::new(energy),
            gradient: Arc::new(gradient),
            potential: None,
        };
        sys.validate()?;
        Ok(sys)
    }

    fn validate(&self) -> Result<()> {
        // Minimum zero at the origin (all catalog systems place it there).
        let h0 = self.energy(0.0, 0.0);
        if h0.abs() > 1e-12 {
            return Err(Error::InvalidParam(format!(
                "energy minimum at the critical point is {h0:e}, expected 0"
            )));
        }
        let (gq, gp) = self.gradient(0.0, 0.0);
        if (gq * gq + gp * gp).sqrt() > CRITICAL_GRAD_TOL {
            return Err(Error::InvalidParam(
                "gradient does not vanish at the declared critical point".into(),
            ));
        }
        // The gradient must not vanish elsewhere on a sample grid.
        for i in -6..=6i32 {
            for j in -6..=6i32 {
                let (q, p) = (i as f64 * 0.7, j as f64 * 0.7);
                if i == 0 && j == 0 {
                    continue;
                }
                let (gq, gp) = self.gradient(q, p);
                if (gq * gq + gp * gp).sqrt() < CRITICAL_GRAD_TOL {
                    return Err(Error::InvalidParam(format!(
                        "spurious critical point near ({q}, {p})"
                    )));
                }
            }
        }
        // Compact level sets: H exceeds each sampled E along all four axes.
        for &e in &[0.1, 1.0, 10.0, 100.0] {
            for (dq, dp) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                let mut r = 1e-3;
                let mut ok = false;
                while r < 1e8 {
                    if self.energy(dq * r, dp * r) > e {
                        ok = true;
                        break;
                    }
                    r *= 2.0;
                }
                if !ok {
                    return Err(Error::NonCompactLevelSet(format!(
                        "H stays below E = {e} along direction ({dq}, {dp})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn energy(&self, q: f64, p: f64) -> f64 {
        (self.energy)(q, p)
    }

    pub fn gradient(&self, q: f64, p: f64) -> (f64, f64) {
        (self.gradient)(q, p)
    }

    /// Potential data when the system is separable.
    pub fn potential(&self) -> Option<&Potential> {
        self.potential.as_ref()
    }

    pub fn is_critical(&self, q: f64, p: f64) -> bool {
        let (gq, gp) = self.gradient(q, p);
        (gq * gq + gp * gp).sqrt() < CRITICAL_GRAD_TOL
    }

    /// Harmonic oscillator `H = p^2/2m + m ω^2 q^2 / 2`.
    pub fn ho(mass: f64, omega: f64) -> Result<Self> {
        if omega <= 0.0 {
            return Err(Error::InvalidParam("omega must be positive".into()));
        }
        Self::new_separable(
            format!("ho(m={mass},omega={omega})"),
            mass,
            move |q| 0.5 * mass * omega * omega * q * q,
            move |q| mass * omega * omega * q,
        )
    }

    /// Pure quartic well `H = p^2/2m + k4 q^4 / 4`.
    pub fn quartic(mass: f64, k4: f64) -> Result<Self> {
        if k4 <= 0.0 {
            return Err(Error::InvalidParam("k4 must be positive".into()));
        }
        Self::new_separable(
            format!("quartic(m={mass},k4={k4})"),
            mass,
            move |q| 0.25 * k4 * q.powi(4),
            move |q| k4 * q.powi(3),
        )
    }

    /// Anharmonic well `H = p^2/2m + m ω^2 q^2/2 + k4 q^4/4`.
    pub fn ho_plus_quartic(mass: f64, omega: f64, k4: f64) -> Result<Self> {
        if omega <= 0.0 || k4 <= 0.0 {
            return Err(Error::InvalidParam("omega and k4 must be positive".into()));
        }
        Self::new_separable(
            format!("ho_plus_quartic(m={mass},omega={omega},k4={k4})"),
            mass,
            move |q| 0.5 * mass * omega * omega * q * q + 0.25 * k4 * q.powi(4),
            move |q| mass * omega * omega * q + k4 * q.powi(3),
        )
    }

    /// Look up a built-in system by catalog name.
    pub fn from_catalog(name: &str, mass: f64, omega: f64, k4: f64) -> Result<Self> {
        match name {
            "ho" => Self::ho(mass, omega),
            "quartic" => Self::quartic(mass, k4),
            "ho_plus_quartic" => Self::ho_plus_quartic(mass, omega, k4),
            other => Err(Error::UnknownLabel {
                kind: "system",
                label: other.to_string(),
                available: system_catalog().join(", "),
            }),
        }
    }
}

/// Names of the built-in classical systems.
pub fn system_catalog() -> Vec<&'static str> {
    vec!["ho", "quartic", "ho_plus_quartic"]
}

/// A vector field on the phase plane.
#[derive(Clone)]
pub struct VectorField2D {
    components: Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>,
}

impl VectorField2D {
    pub fn new(components: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        Self {
            components: Arc::new(components),
        }
    }

    pub fn at(&self, q: f64, p: f64) -> (f64, f64) {
        (self.components)(q, p)
    }
}

/// The field Γ with `i_Γ (dp ∧ dq) = -dH`, i.e. `(∂H/∂p, -∂H/∂q)`.
pub fn hamiltonian_vector_field(system: &HamiltonianSystem1D) -> VectorField2D {
    let grad = system.gradient.clone();
    VectorField2D::new(move |q, p| {
        let (hq, hp) = grad(q, p);
        (hp, -hq)
    })
}

/// Five-point central-difference derivative; exact through quartics up to roundoff.
fn stencil5<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = 1e-2 * (1.0 + x.abs());
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Residual of the Hamiltonian condition `i_Γ Ω + dH = 0` for
/// `Ω = ρ(q, p) dp ∧ dq`, maximized over the sample points.
///
/// `dH` is taken by finite differences of the supplied energy map, so the
/// check is independent of any analytic gradient. Zero (≤ 1e-9) certifies
/// the pair at those samples.
pub fn verify_hamiltonian_pair<FOmega, FH>(
    field: &VectorField2D,
    omega_density: FOmega,
    h: FH,
    sample_points: &[(f64, f64)],
) -> Result<f64>
where
    FOmega: Fn(f64, f64) -> f64,
    FH: Fn(f64, f64) -> f64,
{
    if sample_points.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut worst = 0.0f64;
    for &(q, p) in sample_points {
        let (gq, gp) = field.at(q, p);
        let rho = omega_density(q, p);
        let dh_dq = stencil5(|x| h(x, p), q);
        let dh_dp = stencil5(|y| h(q, y), p);
        // i_Γ (ρ dp ∧ dq) = ρ (Γ_p dq - Γ_q dp).
        let res_q = rho * gp + dh_dq;
        let res_p = -rho * gq + dh_dp;
        worst = worst.max((res_q * res_q + res_p * res_p).sqrt());
    }
    Ok(worst)
}

/// Oscillator family `H_B = (p^T B p + q^T B q) / 2` with `Ω_B = B_ij dp_i ∧ dq_j`.
#[derive(Debug, Clone)]
pub struct OscillatorFamilyND {
    b: DMatrix<f64>,
}

impl OscillatorFamilyND {
    pub fn new(b: DMatrix<f64>) -> Result<Self> {
        if !b.is_square() || b.nrows() == 0 {
            return Err(Error::InvalidParam("B must be square and nonempty".into()));
        }
        let asym = (&b - b.transpose()).abs().max();
        if asym > 1e-12 {
            return Err(Error::InvalidParam(format!(
                "B asymmetry {asym:e} exceeds 1e-12"
            )));
        }
        let eig = b.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::NotPositiveDefinite(
                "B has a non-positive eigenvalue".into(),
            ));
        }
        Ok(Self { b })
    }

    pub fn dimension(&self) -> usize {
        self.b.nrows()
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn energy(&self, q: &DVector<f64>, p: &DVector<f64>) -> f64 {
        0.5 * ((p.transpose() * &self.b * p)[(0, 0)] + (q.transpose() * &self.b * q)[(0, 0)])
    }

    /// `(∂H_B/∂q, ∂H_B/∂p) = (B q, B p)`.
    pub fn gradient(&self, q: &DVector<f64>, p: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (&self.b * q, &self.b * p)
    }

    /// Random member with eigenvalues log-uniform in `[0.3, 3]`; deterministic per seed.
    pub fn random_spd(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gauss = DMatrix::from_fn(n, n, |_, _| {
            // Box-Muller keeps us independent of distribution crates.
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        });
        let qr = gauss.qr();
        let q = qr.q();
        let lambdas = DVector::from_fn(n, |_, _| {
            let t: f64 = rng.gen_range(0.0..1.0);
            0.3 * (3.0f64 / 0.3).powf(t)
        });
        let b = &q * DMatrix::from_diagonal(&lambdas) * q.transpose();
        // Symmetrize away the last bits of roundoff.
        let b = 0.5 * (&b + b.transpose());
        Self::new(b)
    }
}

/// n-dimensional residual of `i_Γ Ω_B + dH = 0` for the isotropic-oscillator
/// field `Γ = (p, -q)`, maximized over sample points `(q, p)`.
pub fn verify_hamiltonian_pair_nd<FH>(
    b: &DMatrix<f64>,
    h: FH,
    sample_points: &[(DVector<f64>, DVector<f64>)],
) -> Result<f64>
where
    FH: Fn(&DVector<f64>, &DVector<f64>) -> f64,
{
    if sample_points.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = b.nrows();
    let mut worst = 0.0f64;
    for (q, p) in sample_points {
        // Γ = (q̇, ṗ) = (p, -q).
        let gamma_q = p.clone();
        let gamma_p = -q.clone();
        // i_Γ (B_ij dp_i ∧ dq_j): dq_j coefficient Σ_i B_ij Γp_i, dp_i coefficient -Σ_j B_ij Γq_j.
        let coeff_dq = b.transpose() * &gamma_p;
        let coeff_dp = -(b * &gamma_q);
        let mut res = 0.0f64;
        for k in 0..n {
            let dh_dqk = stencil5(
                |x| {
                    let mut qq = q.clone();
                    qq[k] = x;
                    h(&qq, p)
                },
                q[k],
            );
            let dh_dpk = stencil5(
                |x| {
                    let mut pp = p.clone();
                    pp[k] = x;
                    h(q, &pp)
                },
                p[k],
            );
            res += (coeff_dq[k] + dh_dqk).powi(2) + (coeff_dp[k] + dh_dpk).powi(2);
        }
        worst = worst.max(res.sqrt());
    }
    Ok(worst)
}

/// An integrated orbit with its recorded energy drift.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<(f64, f64)>,
    pub energy_drift: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> (f64, f64) {
        *self.states.last().expect("trajectory nonempty")
    }
}

/// Integrate the flow of `system` from `start` for `duration` with adaptive
/// error control. The recorded energy drift stays below
/// `10 · tol · max(1, H(start))`.
pub fn integrate(
    system: &HamiltonianSystem1D,
    start: (f64, f64),
    duration: f64,
    tol: f64,
) -> Result<Trajectory> {
    if duration <= 0.0 {
        return Err(Error::InvalidParam("duration must be positive".into()));
    }
    if tol <= 1e-14 || tol >= 1e-2 {
        return Err(Error::InvalidParam(format!(
            "tol {tol:e} outside (1e-14, 1e-2)"
        )));
    }
    let (q0, p0) = start;
    if system.is_critical(q0, p0) {
        // Fixed point: the zero-motion trajectory is valid.
        return Ok(Trajectory {
            times: vec![0.0, duration],
            states: vec![start, start],
            energy_drift: 0.0,
        });
    }
    let grad = system.gradient.clone();
    let rhs = move |q: f64, p: f64| {
        let (hq, hp) = grad(q, p);
        (hp, -hq)
    };
    let steps = ode::integrate_adaptive(&rhs, q0, p0, duration, tol)?;
    let h0 = system.energy(q0, p0);
    let mut drift = 0.0f64;
    let mut times = Vec::with_capacity(steps.len());
    let mut states = Vec::with_capacity(steps.len());
    for s in &steps {
        drift = drift.max((system.energy(s.q, s.p) - h0).abs());
        times.push(s.t);
        states.push((s.q, s.p));
    }
    Ok(Trajectory {
        times,
        states,
        energy_drift: drift,
    })
}

/// Deterministic sample points with `e_lo < H < e_hi`, for pairing checks.
pub fn sample_energy_band(
    system: &HamiltonianSystem1D,
    e_lo: f64,
    e_hi: f64,
    count: usize,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(count);
    // Rejection sample from a box that surely covers the band.
    let mut r = 1.0;
    while system.energy(r, 0.0) < e_hi || system.energy(0.0, r) < e_hi {
        r *= 2.0;
    }
    let mut guard = 0;
    while pts.len() < count && guard < 1_000_000 {
        guard += 1;
        let q = rng.gen_range(-r..r);
        let p = rng.gen_range(-r..r);
        let e = system.energy(q, p);
        if e > e_lo && e < e_hi {
            pts.push((q, p));
        }
    }
    pts
}
