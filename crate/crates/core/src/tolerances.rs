//! Every numerical tolerance and threshold used by tests, the `verify`
//! command and the documentation lives here.

/// Exhaustive sums over all partitions (normalization, sequential identity).
pub const EXHAUSTIVE_TOL: f64 = 1e-10;

/// Probability-space gap between the discount `d = 1e-8` law and the
/// Dirichlet-process law.
pub const DP_LIMIT_TOL: f64 = 1e-6;

/// Discount used to probe the Dirichlet-process limit.
pub const DP_LIMIT_DISCOUNT: f64 = 1e-8;

/// Predictive probabilities must sum to one within this bound.
pub const PREDICTIVE_SUM_TOL: f64 = 1e-15;

/// `sum(pi) + residual = 1` for a realized stick prefix.
pub const STICK_MASS_TOL: f64 = 1e-12;

/// Upper bound on total-variation distance between 10^6 sampled partitions
/// and the exact law.
pub const TV_THRESHOLD: f64 = 0.005;

/// Monte Carlo draws behind every TV comparison.
pub const TV_TRIALS: u64 = 1_000_000;

/// Width, in standard errors, of every binomial / mean acceptance band.
pub const SIGMA_BAND: f64 = 3.5;

/// Allocation marginal vs. nested beta-moment oracle.
pub const ALLOCATION_ORACLE_TOL: f64 = 1e-10;

/// Label cutoff and required mass for the truncated allocation normalization.
pub const ALLOCATION_LABEL_CUTOFF: u32 = 60;
pub const ALLOCATION_MIN_MASS: f64 = 0.99;

/// Relative error of the permutation-sum identity.
pub const PERMUTATION_REL_TOL: f64 = 1e-12;

/// Reconstructed partition probability from the truncated label sum.
pub const LABEL_SUM_TOL: f64 = 1e-4;
pub const LABEL_SUM_MAX_LABEL: u32 = 60;

/// Truncated nested rising-factorial sums.
pub const NESTED_SUM_TOL: f64 = 1e-4;
pub const NESTED_SUM_TRUNCATION: u32 = 500;

/// Growth experiment: fitted log-log slope band and the relative band for
/// `mean k_n / ln n` in the Dirichlet case.
pub const GROWTH_SLOPE_MIN: f64 = 0.4;
pub const GROWTH_SLOPE_MAX: f64 = 0.6;
pub const GROWTH_LOG_RATIO_REL: f64 = 0.3;

/// Hard cap on realized sticks within one allocation draw.
pub const MAX_STICKS: usize = 1_000_000;
