use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Below this length the rising factorial is summed factor by factor.
const DIRECT_SUM_MAX: u64 = 64;

/// A probability held as its natural logarithm.
///
/// The value is `<= 0`, or `-inf` for an impossible event.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(f64);

impl LogProb {
    pub const ONE: LogProb = LogProb(0.0);
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);

    /// Wraps a log probability. Round-off can push a sum of logs a hair above
    /// zero; such values are clamped.
    pub fn from_ln(value: f64) -> Self {
        debug_assert!(!value.is_nan(), "log probability is NaN");
        debug_assert!(value <= 1e-9, "log probability {value} > 0");
        LogProb(value.min(0.0))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }
}

/// `ln (x)_(n)` where `(x)_(n) = x (x + 1) ... (x + n - 1)`.
///
/// Every factor must be strictly positive.
pub fn log_rising_factorial(x: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "rising factorial ({x})_({n}) has a non-positive factor"
        )));
    }
    Ok(log_rising_factorial_unchecked(x, n))
}

/// As [`log_rising_factorial`] without the domain check; callers guarantee
/// `x > 0` whenever `n > 0`.
pub(crate) fn log_rising_factorial_unchecked(x: f64, n: u64) -> f64 {
    if n <= DIRECT_SUM_MAX {
        (0..n).map(|j| (x + j as f64).ln()).sum()
    } else {
        ln_gamma(x + n as f64) - ln_gamma(x)
    }
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
