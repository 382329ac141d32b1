//! Stick-breaking construction.
//!
//! Sticks `v_i ~ Beta(1 - d, alpha + i d)` give weights
//! `pi_j = v_j prod_{i<j} (1 - v_i)`. Observations pick sticks i.i.d. from
//! `pi`. Sticks are realized lazily: a uniform draw that lands in the
//! unbroken remainder extends the prefix until it is covered, so finite
//! samples are exact and no truncation level is involved.

use rand::Rng;

use crate::error::{Error, Result};
use crate::params::PYParams;
use crate::partition::{partition_from_allocations, AllocationVector, Partition};
use crate::tolerances::MAX_STICKS;
use crate::variates::beta_pair;

pub use crate::variates::beta_sample;

/// A realized prefix of one stick-breaking draw.
#[derive(Debug, Clone, PartialEq)]
pub struct StickState {
    v: Vec<f64>,
    // 1 - v_i, drawn alongside v_i
    complement: Vec<f64>,
    pi: Vec<f64>,
    // running sums of pi
    covered: Vec<f64>,
    residual: f64,
}

impl Default for StickState {
    fn default() -> Self {
        StickState {
            v: Vec::new(),
            complement: Vec::new(),
            pi: Vec::new(),
            covered: Vec::new(),
            residual: 1.0,
        }
    }
}

impl StickState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// `1 - v_i` for each realized stick.
    pub fn complements(&self) -> &[f64] {
        &self.complement
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Unbroken mass `prod (1 - v_i)`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Total weight of the realized sticks.
    pub fn coverage(&self) -> f64 {
        self.covered.last().copied().unwrap_or(0.0)
    }

    fn push(&mut self, v: f64, complement: f64) {
        let pi = v * self.residual;
        self.residual *= complement;
        self.v.push(v);
        self.complement.push(complement);
        self.pi.push(pi);
        self.covered.push(self.coverage() + pi);
    }

    /// 1-based label of the stick whose interval contains `u`, if realized.
    fn locate(&self, u: f64) -> Option<usize> {
        let j = self.covered.partition_point(|&c| c <= u);
        (j < self.covered.len()).then_some(j + 1)
    }
}

/// Draws the next stick, `v_i ~ Beta(1 - d, alpha + i d)` with `i` 1-based.
pub fn extend_sticks<R: Rng + ?Sized>(params: &PYParams, state: &mut StickState, rng: &mut R) {
    let (a, b) = params.stick_shapes(state.len() + 1);
    let (v, complement) = beta_pair(a, b, rng);
    state.push(v, complement);
}

/// `n` labels drawn i.i.d. from the weights of a single stick realization.
pub fn sample_allocations<R: Rng + ?Sized>(
    params: &PYParams,
    n: usize,
    rng: &mut R,
) -> Result<AllocationVector> {
    let mut state = StickState::new();
    sample_allocations_with(params, n, &mut state, rng)
}

/// As [`sample_allocations`], drawing against (and extending) `state`.
pub fn sample_allocations_with<R: Rng + ?Sized>(
    params: &PYParams,
    n: usize,
    state: &mut StickState,
    rng: &mut R,
) -> Result<AllocationVector> {
    assert!(n >= 1, "n must be positive");
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.random::<f64>();
        let label = loop {
            if let Some(j) = state.locate(u) {
                break j;
            }
            if state.len() >= MAX_STICKS {
                return Err(Error::StickCap(MAX_STICKS));
            }
            extend_sticks(params, state, rng);
        };
        z.push(label);
    }
    AllocationVector::new(z)
}

pub fn stickbreak_sample_partition<R: Rng + ?Sized>(
    params: &PYParams,
    n: usize,
    rng: &mut R,
) -> Result<Partition> {
    Ok(partition_from_allocations(&sample_allocations(
        params, n, rng,
    )?))
}

/// Steps taken one at a time before the capture search switches to closed
/// forms.
const DIRECT_STEPS: usize = 64;

/// Stick indices above this are treated as unreachable.
const MAX_STICK_INDEX: f64 = 1e300;

/// Partition of `n` observations drawn from one stick-breaking realization,
/// with the sticks integrated out one at a time.
///
/// Walking the sticks in order, each still-unassigned observation lands on
/// stick `i` independently with probability `v_i`, so the number caught by
/// stick `i` is beta-binomial and the observations caught are a uniform
/// subset. The run of sticks that catch nothing has survival function
///
/// ```text
/// prod_{i=j}^{J} E[(1 - v_i)^m] = prod_{t<m} prod_{i=j}^{J} (alpha + t + i d) / (1 - d + alpha + t + i d)
/// ```
///
/// which is a ratio of gamma functions, so the next catching stick is found
/// by inversion without drawing the sticks in between. The result has the
/// same law as [`stickbreak_sample_partition`] at a cost that does not grow
/// with the stick index reached.
pub fn stickbreak_sample_partition_marginalized<R: Rng + ?Sized>(
    params: &PYParams,
    n: usize,
    rng: &mut R,
) -> Result<Partition> {
    assert!(n >= 1, "n must be positive");
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut block_of = vec![0u32; n];
    let mut blocks = 0u32;
    let mut next_stick = 1.0_f64;
    while !remaining.is_empty() {
        let m = remaining.len();
        // a lone observation is a block wherever it lands
        let caught = if m == 1 {
            1
        } else {
            let stick = next_catching_stick(params, m, next_stick, rng)?;
            next_stick = stick + 1.0;
            catch_count(params, m, stick, rng)
        };
        for _ in 0..caught {
            let pick = rng.random_range(0..remaining.len());
            block_of[remaining.swap_remove(pick)] = blocks;
        }
        blocks += 1;
    }
    Partition::from_labels(&block_of)
}

/// `E[(1 - v_i)^m]` for the `i`-th stick.
fn miss_probability(params: &PYParams, m: usize, i: f64) -> f64 {
    let a = 1.0 - params.d();
    let b = params.alpha() + i * params.d();
    (0..m)
        .map(|t| (b + t as f64) / (a + b + t as f64))
        .product()
}

/// `ln Gamma(z + delta) - ln Gamma(z)`.
pub(crate) fn ln_gamma_shift(z: f64, delta: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    if z >= 100.0 * (1.0 + delta) * (1.0 + delta) {
        // asymptotic series in 1/z with Bernoulli polynomials B_2..B_6
        let x = delta;
        let b = [
            x * x - x,
            x * x * x - 1.5 * x * x + 0.5 * x,
            x.powi(4) - 2.0 * x.powi(3) + x * x,
            x.powi(5) - 2.5 * x.powi(4) + 5.0 / 3.0 * x.powi(3) - x / 6.0,
            x.powi(6) - 3.0 * x.powi(5) + 2.5 * x.powi(4) - 0.5 * x * x,
        ];
        let mut value = delta * z.ln();
        let mut zpow = z;
        for (k, bk) in b.iter().enumerate() {
            let order = (k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            value += sign * bk / (order * (order + 1.0) * zpow);
            zpow *= z;
        }
        value
    } else {
        ln_gamma(z + delta) - ln_gamma(z)
    }
}

/// `ln prod_{i=first}^{last} E[(1 - v_i)^m]`, `d > 0`.
fn ln_miss_run(params: &PYParams, m: usize, first: f64, last: f64) -> f64 {
    let d = params.d();
    let delta = (1.0 - d) / d;
    (0..m)
        .map(|t| {
            let x = (params.alpha() + t as f64) / d;
            ln_gamma_shift(x + first, delta) - ln_gamma_shift(x + last + 1.0, delta)
        })
        .sum()
}

/// Index of the next stick, at or after `first`, that catches at least one
/// of `m` unassigned observations.
fn next_catching_stick<R: Rng + ?Sized>(
    params: &PYParams,
    m: usize,
    first: f64,
    rng: &mut R,
) -> Result<f64> {
    // the catching stick is the first J with survival(J) < u
    let u = 1.0 - rng.random::<f64>();
    if params.is_dirichlet() {
        // identical sticks: geometric run length
        let miss = miss_probability(params, m, first);
        return Ok(first + (u.ln() / miss.ln()).floor());
    }
    let mut survival = 1.0;
    for step in 0..DIRECT_STEPS {
        let i = first + step as f64;
        survival *= miss_probability(params, m, i);
        if survival < u {
            return Ok(i);
        }
    }
    let target = u.ln();
    let mut lo = first + (DIRECT_STEPS - 1) as f64;
    let mut width = DIRECT_STEPS as f64;
    let mut hi = lo + width;
    while ln_miss_run(params, m, first, hi) >= target {
        lo = hi;
        width *= 2.0;
        hi = lo + width;
        if hi > MAX_STICK_INDEX {
            return Err(Error::StickIndexOverflow(MAX_STICK_INDEX));
        }
    }
    // survival(lo) >= u > survival(hi)
    while hi - lo > 1.0 {
        let mid = (lo + (hi - lo) / 2.0).floor();
        if mid <= lo || mid >= hi {
            break;
        }
        if ln_miss_run(params, m, first, mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Number of the `m` observations caught by stick `i`, given at least one.
fn catch_count<R: Rng + ?Sized>(params: &PYParams, m: usize, i: f64, rng: &mut R) -> usize {
    let a = 1.0 - params.d();
    let b = params.alpha() + i * params.d();
    // w_c = C(m, c) B(a + c, b + m - c), relative to w_1
    let mut weights = Vec::with_capacity(m);
    let mut w = 1.0;
    weights.push(w);
    for c in 1..m {
        let cf = c as f64;
        w *= (m - c) as f64 / (cf + 1.0) * (a + cf) / (b + (m - c) as f64 - 1.0);
        weights.push(w);
    }
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (c, w) in weights.iter().enumerate() {
        x -= w;
        if x < 0.0 {
            return c + 1;
        }
    }
    m
}
