use rayon::prelude::*;
use serde::Serialize;

use crate::crp::crp_block_count_path;
use crate::error::{Error, Result};
use crate::params::PYParams;

use super::montecarlo::stream_rng;

/// Largest sample size in a growth grid.
pub const MAX_GROWTH_N: usize = 100_000;

/// Trials per random stream.
const CHUNK: usize = 8;

/// Monte Carlo mean number of blocks at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRecord {
    pub n: usize,
    pub mean_kn: f64,
    pub se: f64,
    pub trials: usize,
    /// `mean_kn / ln n`; absent at `n = 1`.
    pub log_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub records: Vec<GrowthRecord>,
    /// Least-squares slope of `ln mean_kn` against `ln n` over the upper
    /// half of the grid; absent for a single-point grid.
    pub exponent: Option<f64>,
    pub fit_ns: Vec<usize>,
}

/// Number of blocks `k_n` of sequentially seated partitions, tracked along
/// `n_grid` (one seating run per trial covers the whole grid).
pub fn growth_experiment(
    params: &PYParams,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<GrowthReport> {
    if n_grid.is_empty()
        || n_grid[0] == 0
        || !n_grid.windows(2).all(|w| w[0] < w[1])
        || *n_grid.last().unwrap() > MAX_GROWTH_N
    {
        return Err(Error::Domain(format!(
            "grid must be strictly increasing within 1..={MAX_GROWTH_N}, got {n_grid:?}"
        )));
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let mut sum = vec![0.0; n_grid.len()];
            let mut sum_sq = vec![0.0; n_grid.len()];
            for _ in 0..CHUNK.min(trials - c * CHUNK) {
                for (i, k) in crp_block_count_path(params, n_grid, &mut rng)
                    .into_iter()
                    .enumerate()
                {
                    let k = k as f64;
                    sum[i] += k;
                    sum_sq[i] += k * k;
                }
            }
            (sum, sum_sq)
        })
        .collect();
    let mut sum = vec![0.0; n_grid.len()];
    let mut sum_sq = vec![0.0; n_grid.len()];
    for (s, q) in partial {
        for i in 0..n_grid.len() {
            sum[i] += s[i];
            sum_sq[i] += q[i];
        }
    }
    let t = trials as f64;
    let records: Vec<GrowthRecord> = n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mean = sum[i] / t;
            let var = if trials > 1 {
                ((sum_sq[i] - t * mean * mean) / (t - 1.0)).max(0.0)
            } else {
                0.0
            };
            GrowthRecord {
                n,
                mean_kn: mean,
                se: (var / t).sqrt(),
                trials,
                log_ratio: (n > 1).then(|| mean / (n as f64).ln()),
            }
        })
        .collect();

    let (exponent, fit_ns) = if records.len() < 2 {
        (None, Vec::new())
    } else {
        let start = (records.len() / 2).min(records.len() - 2);
        let fit = &records[start..];
        let xs: Vec<f64> = fit.iter().map(|r| (r.n as f64).ln()).collect();
        let ys: Vec<f64> = fit.iter().map(|r| r.mean_kn.ln()).collect();
        (Some(slope(&xs, &ys)), fit.iter().map(|r| r.n).collect())
    };
    Ok(GrowthReport {
        records,
        exponent,
        fit_ns,
    })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
