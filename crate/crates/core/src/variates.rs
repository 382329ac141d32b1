//! Gamma and beta variates.
//!
//! Gamma draws use the Marsaglia–Tsang squeeze/rejection method; shapes below
//! one are boosted to `shape + 1` and scaled by `u^(1/shape)`. Everything is
//! carried in log space so a beta draw can return both `v` and `1 - v`
//! without cancellation, which matters for sticks with a tiny shape.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// `ln g` for `g ~ Gamma(shape, 1)`, `shape > 0`.
pub fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        // u in (0, 1]
        let u = 1.0 - rng.random::<f64>();
        return ln_gamma_variate(shape + 1.0, rng) + u.ln() / shape;
    }
    let dd = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * dd).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.random::<f64>();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return dd.ln() + v.ln();
        }
        if u.ln() < 0.5 * x2 + dd * (1.0 - v + v.ln()) {
            return dd.ln() + v.ln();
        }
    }
}

/// A `Beta(a, b)` draw as the pair `(v, 1 - v)`, each computed directly.
pub fn beta_pair<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> (f64, f64) {
    let lg_a = ln_gamma_variate(a, rng);
    let lg_b = ln_gamma_variate(b, rng);
    // v = g_a / (g_a + g_b) = 1 / (1 + exp(lg_b - lg_a))
    let diff = lg_b - lg_a;
    (logistic(-diff), logistic(diff))
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// One `Beta(a, b)` variate.
pub fn beta_sample<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "beta shapes must be positive, got ({a}, {b})"
        )));
    }
    Ok(beta_pair(a, b, rng).0)
}
