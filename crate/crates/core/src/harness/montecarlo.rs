use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::crp::crp_sample_partition;
use crate::eppf::eppf_log_prob;
use crate::error::{Error, Result};
use crate::params::PYParams;
use crate::partition::{enumerate_partitions, Partition};
use crate::stickbreak::{stickbreak_sample_partition, stickbreak_sample_partition_marginalized};

/// Largest `n` whose partitions are tabulated against the exact law.
pub const MAX_TABULATED_N: usize = 10;

/// Trials per random stream. Fixed, so results do not depend on the number
/// of worker threads.
const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    /// Stick-breaking with sticks integrated out one at a time.
    Stick,
    /// Stick-breaking with explicitly realized sticks.
    StickLazy,
    /// Sequential seating.
    Crp,
}

impl SamplerKind {
    fn draw(self, params: &PYParams, n: usize, rng: &mut ChaCha8Rng) -> Result<Partition> {
        match self {
            SamplerKind::Stick => stickbreak_sample_partition_marginalized(params, n, rng),
            SamplerKind::StickLazy => stickbreak_sample_partition(params, n, rng),
            SamplerKind::Crp => Ok(crp_sample_partition(params, n, rng)),
        }
    }
}

/// Independent stream `stream` derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `trials` draws split into fixed-size chunks, one stream per chunk,
/// and returns the per-chunk results in chunk order.
fn chunked<T, F>(trials: u64, seed: u64, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> Result<T> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(trials - c * CHUNK);
            work(&mut stream_rng(seed, c), len)
        })
        .collect()
}

/// Partition frequencies from repeated sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPartitionDist {
    pub counts: BTreeMap<Partition, u64>,
    pub trials: u64,
    pub seed: u64,
    pub n: usize,
    pub params: PYParams,
    pub sampler: SamplerKind,
}

impl EmpiricalPartitionDist {
    pub fn count(&self, partition: &Partition) -> u64 {
        self.counts.get(partition).copied().unwrap_or(0)
    }

    pub fn frequency(&self, partition: &Partition) -> f64 {
        self.count(partition) as f64 / self.trials as f64
    }
}

pub fn run_monte_carlo(
    params: &PYParams,
    n: usize,
    trials: u64,
    sampler: SamplerKind,
    seed: u64,
) -> Result<EmpiricalPartitionDist> {
    if !(1..=MAX_TABULATED_N).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            min: 1,
            max: MAX_TABULATED_N,
        });
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let partial = chunked(trials, seed, |rng, len| {
        let mut counts: HashMap<Partition, u64> = HashMap::new();
        for _ in 0..len {
            *counts.entry(sampler.draw(params, n, rng)?).or_insert(0) += 1;
        }
        Ok(counts)
    })?;
    let mut counts = BTreeMap::new();
    for chunk in partial {
        for (c, k) in chunk {
            *counts.entry(c).or_insert(0) += k;
        }
    }
    Ok(EmpiricalPartitionDist {
        counts,
        trials,
        seed,
        n,
        params: *params,
        sampler,
    })
}

/// Individual draws, in a reproducible order.
pub fn sample_partitions(
    params: &PYParams,
    n: usize,
    trials: u64,
    sampler: SamplerKind,
    seed: u64,
) -> Result<Vec<Partition>> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let chunks = chunked(trials, seed, |rng, len| {
        (0..len)
            .map(|_| sampler.draw(params, n, rng))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Half the L1 distance between the empirical frequencies and the exact
/// partition law, over every partition of `[n]`.
pub fn tv_distance(emp: &EmpiricalPartitionDist, params: &PYParams) -> Result<f64> {
    if emp.params != *params {
        return Err(Error::Mismatch(format!(
            "sample drawn with {:?}, compared against {:?}",
            emp.params, params
        )));
    }
    if emp.counts.keys().any(|c| c.n() != emp.n) {
        return Err(Error::Mismatch(
            "sample holds partitions of different sizes".into(),
        ));
    }
    let total: f64 = enumerate_partitions(emp.n)?
        .map(|c| (emp.frequency(&c) - eppf_log_prob(params, &c).prob()).abs())
        .sum();
    Ok(0.5 * total)
}
