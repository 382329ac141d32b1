//! Verification suites run by `pyp verify`.
//!
//! Every check compares a computed value against a threshold from
//! [`crate::tolerances`]; a suite passes when all of its checks do.

use rand::Rng;
use serde::Serialize;

use crate::crp::sequential_log_prob;
use crate::eppf::{dp_log_prob, eppf_log_prob, normalization_check};
use crate::error::Result;
use crate::marginal::{
    allocation_log_prob, allocation_mass_up_to, allocation_stats, beta_moment,
    label_sum_reconstructed_prob, lemma_c_check, lemma_d_check,
};
use crate::params::PYParams;
use crate::partition::{enumerate_partitions, AllocationVector, Partition};
use crate::special::ln_beta;
use crate::tolerances::*;
use crate::variates::beta_sample;

use super::montecarlo::{run_monte_carlo, stream_rng, tv_distance, SamplerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
pub enum Suite {
    #[value(name = "normalization")]
    #[serde(rename = "normalization")]
    Normalization,
    #[value(name = "equivalence")]
    #[serde(rename = "equivalence")]
    Equivalence,
    #[value(name = "lemmaB")]
    #[serde(rename = "lemmaB")]
    LabelSum,
    #[value(name = "lemmaC")]
    #[serde(rename = "lemmaC")]
    PermutationSum,
    #[value(name = "lemmaD")]
    #[serde(rename = "lemmaD")]
    NestedSum,
    #[value(name = "lemmaE")]
    #[serde(rename = "lemmaE")]
    BetaMoment,
    #[value(name = "propA")]
    #[serde(rename = "propA")]
    AllocationMarginal,
    #[value(name = "all")]
    #[serde(rename = "all")]
    All,
}

impl Suite {
    const EACH: [Suite; 7] = [
        Suite::Normalization,
        Suite::Equivalence,
        Suite::AllocationMarginal,
        Suite::LabelSum,
        Suite::PermutationSum,
        Suite::NestedSum,
        Suite::BetaMoment,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// Upper bound on `value`, or lower bound when `at_least` is set.
    pub threshold: f64,
    pub at_least: bool,
    pub detail: String,
}

impl CheckResult {
    fn at_most(
        name: impl Into<String>,
        value: f64,
        threshold: f64,
        detail: impl Into<String>,
    ) -> Self {
        CheckResult {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
            at_least: false,
            detail: detail.into(),
        }
    }

    fn at_least(
        name: impl Into<String>,
        value: f64,
        threshold: f64,
        detail: impl Into<String>,
    ) -> Self {
        CheckResult {
            name: name.into(),
            passed: value >= threshold,
            value,
            threshold,
            at_least: true,
            detail: detail.into(),
        }
    }

    fn holds(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed: ok,
            value: f64::from(u8::from(ok)),
            threshold: 1.0,
            at_least: true,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub params: Option<PYParams>,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// Every valid pair of `{-0.3, 0, 0.5, 1, 5} x {0, 0.1, 0.5, 0.9}`.
pub fn parameter_grid() -> Vec<PYParams> {
    let mut grid = Vec::new();
    for &alpha in &[-0.3, 0.0, 0.5, 1.0, 5.0] {
        for &d in &[0.0, 0.1, 0.5, 0.9] {
            if let Ok(p) = PYParams::new(alpha, d) {
                grid.push(p);
            }
        }
    }
    grid
}

/// Parameter pairs of the sampler comparison.
pub fn sampler_grid() -> Vec<PYParams> {
    [(1.0, 0.5), (0.3, 0.7), (5.0, 0.1), (1.0, 0.0)]
        .iter()
        .map(|&(a, d)| PYParams::new(a, d).expect("valid"))
        .collect()
}

fn label(p: &PYParams) -> String {
    format!("alpha={},d={}", p.alpha(), p.d())
}

/// Runs `suite`, reporting each finished check to `progress`.
pub fn run_suite(
    suite: Suite,
    params: Option<PYParams>,
    seed: u64,
    progress: &mut dyn FnMut(&CheckResult),
) -> Result<VerifyReport> {
    let suites: Vec<Suite> = if suite == Suite::All {
        Suite::EACH.to_vec()
    } else {
        vec![suite]
    };
    let mut checks = Vec::new();
    for s in suites {
        let found = match s {
            Suite::Normalization => normalization_checks(params)?,
            Suite::Equivalence => equivalence_checks(params, seed)?,
            Suite::AllocationMarginal => allocation_checks(params)?,
            Suite::LabelSum => label_sum_checks(params)?,
            Suite::PermutationSum => permutation_checks(params, seed)?,
            Suite::NestedSum => nested_sum_checks(params)?,
            Suite::BetaMoment => beta_moment_checks(seed)?,
            Suite::All => unreachable!(),
        };
        for c in found {
            progress(&c);
            checks.push(c);
        }
    }
    Ok(VerifyReport {
        suite,
        seed,
        params,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn normalization_checks(params: Option<PYParams>) -> Result<Vec<CheckResult>> {
    let grid = params.map_or_else(parameter_grid, |p| vec![p]);
    let mut out = Vec::new();
    for p in &grid {
        let mut worst: f64 = 0.0;
        for n in 1..=8 {
            worst = worst.max((normalization_check(p, n)? - 1.0).abs());
        }
        out.push(CheckResult::at_most(
            format!("normalization[{}]", label(p)),
            worst,
            EXHAUSTIVE_TOL,
            "max over n=1..8 of |sum_C Pr(C) - 1|",
        ));
    }
    let alphas: Vec<f64> = match params {
        Some(p) if p.alpha() > 0.0 => vec![p.alpha()],
        Some(_) => Vec::new(),
        None => vec![0.5, 1.0, 5.0],
    };
    for alpha in alphas {
        let near = PYParams::new(alpha, DP_LIMIT_DISCOUNT)?;
        let mut worst: f64 = 0.0;
        for n in 1..=6 {
            for c in enumerate_partitions(n)? {
                let gap = eppf_log_prob(&near, &c).prob() - dp_log_prob(alpha, &c)?.prob();
                worst = worst.max(gap.abs());
            }
        }
        out.push(CheckResult::at_most(
            format!("dp_limit[alpha={alpha}]"),
            worst,
            DP_LIMIT_TOL,
            "max over partitions of n<=6 of |Pr_d=1e-8(C) - Pr_DP(C)|",
        ));
    }
    Ok(out)
}

fn equivalence_checks(params: Option<PYParams>, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for p in params.map_or_else(parameter_grid, |p| vec![p]) {
        let mut worst: f64 = 0.0;
        for n in 1..=8 {
            for c in enumerate_partitions(n)? {
                worst = worst
                    .max((sequential_log_prob(&p, &c).ln() - eppf_log_prob(&p, &c).ln()).abs());
            }
        }
        out.push(CheckResult::at_most(
            format!("sequential_product[{}]", label(&p)),
            worst,
            EXHAUSTIVE_TOL,
            "max over partitions of n<=8 of |log sequential - log Pr(C)|",
        ));
    }
    for p in params.map_or_else(sampler_grid, |p| vec![p]) {
        let emp = run_monte_carlo(&p, 4, TV_TRIALS, SamplerKind::Stick, seed)?;
        out.push(CheckResult::at_most(
            format!("stick_tv_n4[{}]", label(&p)),
            tv_distance(&emp, &p)?,
            TV_THRESHOLD,
            format!("{TV_TRIALS} stick-breaking draws vs exact law over 15 partitions"),
        ));
        let pair: Partition = "1,2".parse()?;
        let want = eppf_log_prob(&p, &pair).prob();
        let emp2 = run_monte_carlo(&p, 2, TV_TRIALS, SamplerKind::Stick, seed.wrapping_add(1))?;
        let band = SIGMA_BAND * (want * (1.0 - want) / TV_TRIALS as f64).sqrt();
        out.push(CheckResult::at_most(
            format!("stick_pair_frequency[{}]", label(&p)),
            (emp2.frequency(&pair) - want).abs(),
            band,
            format!("|freq(1,2) - {want}| within {SIGMA_BAND} binomial standard errors"),
        ));
    }
    Ok(out)
}

fn allocation_checks(params: Option<PYParams>) -> Result<Vec<CheckResult>> {
    let grid: Vec<PYParams> = match params {
        Some(p) if p.is_dirichlet() => Vec::new(),
        Some(p) => vec![p],
        None => sampler_grid()
            .into_iter()
            .filter(|p| !p.is_dirichlet())
            .collect(),
    };
    let mut out = Vec::new();
    for p in &grid {
        let mut worst: f64 = 0.0;
        for n in 1..=3u32 {
            for code in 0..4usize.pow(n) {
                let z: Vec<usize> = (0..n).map(|i| code / 4usize.pow(i) % 4 + 1).collect();
                let z = AllocationVector::new(z)?;
                let ours = allocation_log_prob(p, &z)?.prob();
                worst = worst.max((ours - beta_moment_product(p, &z)).abs());
            }
        }
        out.push(CheckResult::at_most(
            format!("allocation_marginal[{}]", label(p)),
            worst,
            ALLOCATION_ORACLE_TOL,
            "max over z in {1..4}^n, n<=3, against products of beta moments",
        ));
    }
    let p = match params {
        Some(p) if !p.is_dirichlet() => p,
        _ => PYParams::new(1.0, 0.5)?,
    };
    let cutoff = ALLOCATION_LABEL_CUTOFF as usize;
    let mut masses = Vec::new();
    for l in (10..=cutoff).step_by(10) {
        masses.push(allocation_mass_up_to(&p, 2, l)?);
    }
    let monotone = masses.windows(2).all(|w| w[0] < w[1]);
    out.push(CheckResult::holds(
        format!("allocation_mass_monotone[{}]", label(&p)),
        monotone,
        "mass of {1..L}^2 increases with L = 10, 20, ..., 60",
    ));
    out.push(CheckResult::at_least(
        format!("allocation_mass_n2_L{cutoff}[{}]", label(&p)),
        *masses.last().unwrap(),
        ALLOCATION_MIN_MASS,
        "total marginal mass of z in {1..L}^2",
    ));
    Ok(out)
}

/// `prod_j E[v_j^e_j (1 - v_j)^f_j]`.
fn beta_moment_product(p: &PYParams, z: &AllocationVector) -> f64 {
    let s = allocation_stats(z);
    (1..=s.m)
        .map(|j| {
            let (a, b) = p.stick_shapes(j);
            let (e, f) = (s.e[j - 1] as f64, s.f[j - 1] as f64);
            (ln_beta(a + e, b + f) - ln_beta(a, b)).exp()
        })
        .product()
}

fn label_sum_checks(params: Option<PYParams>) -> Result<Vec<CheckResult>> {
    let p = params.unwrap_or(PYParams::new(1.0, 0.5)?);
    let max_label = LABEL_SUM_MAX_LABEL as usize;
    let mut out = Vec::new();
    for n in 1..=4 {
        let mut worst: f64 = 0.0;
        let mut worst_at = String::new();
        for c in enumerate_partitions(n)? {
            let gap = (label_sum_reconstructed_prob(&p, &c, max_label)?
                - eppf_log_prob(&p, &c).prob())
            .abs();
            if gap > worst {
                worst = gap;
                worst_at = c.to_string();
            }
        }
        out.push(CheckResult::at_most(
            format!("label_sum_bridge_n{n}[{}]", label(&p)),
            worst,
            LABEL_SUM_TOL,
            format!("max |rebuilt Pr(C) - Pr(C)| at max_label={max_label}, worst at {worst_at}"),
        ));
    }
    Ok(out)
}

fn permutation_checks(params: Option<PYParams>, seed: u64) -> Result<Vec<CheckResult>> {
    let discounts = params.map_or_else(|| vec![0.0, 0.3, 0.9], |p| vec![p.d()]);
    let mut rng = stream_rng(seed, 0xC);
    let vectors: Vec<Vec<usize>> = (0..100)
        .map(|_| {
            let k = rng.random_range(1..=7);
            (0..k).map(|_| rng.random_range(1..=10)).collect()
        })
        .collect();
    let mut out = Vec::new();
    for d in discounts {
        let mut worst: f64 = 0.0;
        for sizes in &vectors {
            let (lhs, rhs) = lemma_c_check(sizes, d)?;
            worst = worst.max(((lhs - rhs) / rhs).abs());
        }
        out.push(CheckResult::at_most(
            format!("permutation_sum[d={d}]"),
            worst,
            PERMUTATION_REL_TOL,
            "max relative error over 100 random size vectors, k<=7, sizes<=10",
        ));
    }
    Ok(out)
}

/// Level vectors for the nested-sum checks, as `a_i / d - (k + 1 - i)`.
const NESTED_SUM_EXCESS: [&[f64]; 6] = [
    &[3.0],
    &[4.0],
    &[6.0, 3.0],
    &[7.0, 4.0],
    &[8.0, 5.0, 3.0],
    &[9.0, 6.0, 4.0],
];

/// Truncation levels at which monotone convergence is checked.
const NESTED_SUM_STEPS: [usize; 4] = [50, 100, 200, NESTED_SUM_TRUNCATION as usize];

pub fn nested_sum_grid(d: f64) -> Vec<Vec<f64>> {
    NESTED_SUM_EXCESS
        .iter()
        .map(|excess| {
            let k = excess.len();
            excess
                .iter()
                .enumerate()
                .map(|(i, e)| d * (e + (k - i) as f64))
                .collect()
        })
        .collect()
}

fn nested_sum_checks(params: Option<PYParams>) -> Result<Vec<CheckResult>> {
    let grid: Vec<PYParams> = match params {
        Some(p) if !p.is_dirichlet() && p.alpha() > 0.0 => vec![p],
        Some(_) => Vec::new(),
        None => [(1.0, 0.5), (0.7, 0.2), (5.0, 0.9)]
            .iter()
            .map(|&(a, d)| PYParams::new(a, d))
            .collect::<Result<_>>()?,
    };
    let mut out = Vec::new();
    for p in &grid {
        for a in nested_sum_grid(p.d()) {
            let mut partials = Vec::new();
            let mut closed = 0.0;
            for &t in &NESTED_SUM_STEPS {
                let (lhs, rhs) = lemma_d_check(p, &a, t)?;
                partials.push(lhs);
                closed = rhs;
            }
            let monotone =
                partials.windows(2).all(|w| w[0] <= w[1]) && partials.iter().all(|&x| x <= closed);
            let name = format!("nested_sum[{},a={a:?}]", label(p));
            out.push(CheckResult::holds(
                format!("{name}.monotone"),
                monotone,
                format!("partial sums at truncation {NESTED_SUM_STEPS:?} increase and stay below the closed form"),
            ));
            out.push(CheckResult::at_most(
                name,
                closed - partials.last().unwrap(),
                NESTED_SUM_TOL,
                format!("closed form minus partial sum at truncation {NESTED_SUM_TRUNCATION}"),
            ));
        }
    }
    Ok(out)
}

/// `(a, b, c, e)` cases for the beta-moment check.
const BETA_MOMENT_CASES: [(f64, f64, f64, f64); 4] = [
    (1.0, 1.0, 1.0, 0.0),
    (0.5, 1.5, 1.0, 0.0),
    (2.0, 3.0, 1.0, 1.0),
    (0.3, 2.1, 2.0, 3.0),
];

fn beta_moment_checks(seed: u64) -> Result<Vec<CheckResult>> {
    let draws = 1_000_000;
    let mut out = Vec::new();
    for (idx, &(a, b, c, e)) in BETA_MOMENT_CASES.iter().enumerate() {
        let mut rng = stream_rng(seed, 0xE0 + idx as u64);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..draws {
            let y = beta_sample(a, b, &mut rng)?;
            let x = y.powf(c) * (1.0 - y).powf(e);
            sum += x;
            sum_sq += x * x;
        }
        let n = draws as f64;
        let mean = sum / n;
        let se = ((sum_sq / n - mean * mean).max(0.0) / (n - 1.0)).sqrt();
        let exact = beta_moment(a, b, c, e)?;
        out.push(CheckResult::at_most(
            format!("beta_moment[a={a},b={b},c={c},e={e}]"),
            (mean - exact).abs(),
            SIGMA_BAND * se,
            format!("{draws} draws, exact {exact}, empirical {mean}"),
        ));
    }
    Ok(out)
}
