use serde::Serialize;

use crate::error::{Error, Result};

/// Concentration `alpha` and discount `d` of a Pitman–Yor process.
///
/// Valid pairs satisfy `0 <= d < 1` and `alpha > -d`. The discount `d = 0`
/// is the Dirichlet process, for which `alpha > 0` follows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PYParams {
    alpha: f64,
    d: f64,
}

impl PYParams {
    pub fn new(alpha: f64, d: f64) -> Result<Self> {
        let invalid = |reason| Err(Error::InvalidParams { alpha, d, reason });
        if !alpha.is_finite() || !d.is_finite() {
            return invalid("parameters must be finite");
        }
        if !(0.0..1.0).contains(&d) {
            return invalid("discount must satisfy 0 <= d < 1");
        }
        if alpha <= -d {
            return invalid("concentration must satisfy alpha > -d");
        }
        Ok(PYParams { alpha, d })
    }

    /// Dirichlet process with concentration `alpha`.
    pub fn dirichlet(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn is_dirichlet(&self) -> bool {
        self.d == 0.0
    }

    /// Shapes `(1 - d, alpha + i d)` of the `i`-th stick, `i >= 1`.
    pub fn stick_shapes(&self, i: usize) -> (f64, f64) {
        (1.0 - self.d, self.alpha + i as f64 * self.d)
    }
}
