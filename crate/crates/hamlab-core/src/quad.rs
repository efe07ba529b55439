//! Adaptive Gauss–Kronrod quadrature.
//!
//! One panel is a 7-point Gauss / 15-point Kronrod pair; the error estimate is
//! the rescaled difference between the two rules. Panels are kept in a
//! worst-first heap and split until the summed error estimate satisfies a
//! mixed absolute/relative tolerance. Two-dimensional integrals are iterated
//! one-dimensional integrals with the inner tolerance tightened by a factor 4.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod-15 abscissae on [-1, 1] (positive half; odd indices are the Gauss-7 nodes).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Gauss–Kronrod 7/15 pair on `[a, b]`: returns `(kronrod, error_estimate)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut res_g = WG[3] * fc;
    let mut res_k = WGK[7] * fc;
    let mut res_abs = WGK[7] * fc.abs();

    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let result = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * 1.0f64.min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Adaptively integrate `f` over `[a, b]` until the summed panel error drops
/// below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParam("non-finite integration bounds".into()));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }

    const MAX_PANELS: usize = 4000;
    let mut heap = BinaryHeap::new();
    let (v, e) = gk15(&f, a, b);
    heap.push(Panel {
        a,
        b,
        value: v,
        err: e,
    });
    let mut total_v = v;
    let mut total_e = e;

    while total_e > abs_tol.max(rel_tol * total_v.abs()) {
        if heap.len() >= MAX_PANELS {
            // Roundoff-limited; report what we have with the honest error bound.
            break;
        }
        let worst = heap.pop().expect("heap nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; cannot be split further.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total_v += v1 + v2 - worst.value;
        total_e += e1 + e2 - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }

    Ok(Quadrature {
        value: total_v,
        error: total_e,
    })
}

/// Integrate `g(E)` over `(0, e_max]` via the substitution `E = exp(s)`.
///
/// Suitable for integrands behaving like a power law `E^alpha`, `alpha > -1`,
/// near zero: in `s = ln E` the integrand `g(e^s) e^s` decays exponentially as
/// `s -> -inf`, so a finite lower cut captures the head. `alpha_floor` is a
/// lower bound on the exponent used to place that cut.
pub fn integrate_log_domain<F: Fn(f64) -> f64>(
    g: F,
    e_max: f64,
    alpha_floor: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    if e_max <= 0.0 {
        return Err(Error::InvalidParam("e_max must be positive".into()));
    }
    let decay = (alpha_floor + 1.0).max(0.25);
    // e^{s_lo * decay} < 1e-18 relative to the s ~ 0 scale.
    let s_lo = (-18.0 * std::f64::consts::LN_10 / decay).min(e_max.ln() - 5.0);
    let s_hi = e_max.ln();
    integrate(|s: f64| {
        let e = s.exp();
        g(e) * e
    }, s_lo, s_hi, rel_tol, abs_tol)
}

/// Iterated two-dimensional integral of `f(x, y)` over
/// `[x0, x1] x [y0(x), y1(x)]`. The inner integrals run at `rel_tol / 4`.
pub fn integrate_2d<F, G0, G1>(
    f: F,
    x0: f64,
    x1: f64,
    y_lo: G0,
    y_hi: G1,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature>
where
    F: Fn(f64, f64) -> f64,
    G0: Fn(f64) -> f64,
    G1: Fn(f64) -> f64,
{
    let inner_rel = rel_tol / 4.0;
    let inner_abs = abs_tol / 4.0;
    integrate(
        |x| {
            let inner = integrate(|y| f(x, y), y_lo(x), y_hi(x), inner_rel, inner_abs)
                .map(|q| q.value)
                .unwrap_or(f64::NAN);
            inner
        },
        x0,
        x1,
        rel_tol,
        abs_tol,
    )
}
