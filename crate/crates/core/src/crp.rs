//! Sequential (Chinese restaurant) sampling.
//!
//! Customer `n + 1` joins table `j` with probability `(|c_j| - d) / (alpha + n)`
//! and opens a new table with probability `(alpha + k d) / (alpha + n)`. These
//! are ratios of the partition law at `n + 1` and `n` elements; see
//! [`sequential_log_prob`] for the product identity that ties them together.

use rand::Rng;

use crate::params::PYParams;
use crate::partition::Partition;
use crate::special::LogProb;

/// Occupied tables, in the order they were opened.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeatingState {
    block_sizes: Vec<usize>,
    n_seated: usize,
}

impl SeatingState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `None` if any size is zero.
    pub fn from_sizes(block_sizes: Vec<usize>) -> Option<Self> {
        if block_sizes.contains(&0) {
            return None;
        }
        let n_seated = block_sizes.iter().sum();
        Some(SeatingState {
            block_sizes,
            n_seated,
        })
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn n_seated(&self) -> usize {
        self.n_seated
    }

    pub fn num_blocks(&self) -> usize {
        self.block_sizes.len()
    }

    /// Seats one customer at `table`; `table == num_blocks()` opens a new one.
    pub fn seat(&mut self, table: usize) {
        if table == self.block_sizes.len() {
            self.block_sizes.push(1);
        } else {
            self.block_sizes[table] += 1;
        }
        self.n_seated += 1;
    }
}

/// Probabilities of each existing table followed by a new table.
pub fn crp_predictive(params: &PYParams, state: &SeatingState) -> Vec<f64> {
    if state.n_seated == 0 {
        return vec![1.0];
    }
    let (alpha, d) = (params.alpha(), params.d());
    let total = alpha + state.n_seated as f64;
    let mut out: Vec<f64> = state
        .block_sizes
        .iter()
        .map(|&s| (s as f64 - d) / total)
        .collect();
    out.push((alpha + state.num_blocks() as f64 * d) / total);
    out
}

/// Picks a table for the next customer by walking the unnormalized weights.
fn choose_table<R: Rng + ?Sized>(params: &PYParams, state: &SeatingState, rng: &mut R) -> usize {
    if state.n_seated == 0 {
        return 0;
    }
    let d = params.d();
    let mut u = rng.random::<f64>() * (params.alpha() + state.n_seated as f64);
    for (j, &s) in state.block_sizes.iter().enumerate() {
        u -= s as f64 - d;
        if u < 0.0 {
            return j;
        }
    }
    state.num_blocks()
}

pub fn crp_sample_partition<R: Rng + ?Sized>(
    params: &PYParams,
    n: usize,
    rng: &mut R,
) -> Partition {
    assert!(n >= 1, "n must be positive");
    let mut state = SeatingState::new();
    let mut rgs = Vec::with_capacity(n);
    for _ in 0..n {
        let table = choose_table(params, &state, rng);
        state.seat(table);
        rgs.push(table as u32);
    }
    // tables are opened in order of their first customer: already canonical
    Partition::from_rgs(rgs)
}

/// Number of occupied tables after each customer count in `checkpoints`
/// (ascending). Only the table count is tracked: the chance of opening a
/// table depends on nothing else.
pub fn crp_block_count_path<R: Rng + ?Sized>(
    params: &PYParams,
    checkpoints: &[usize],
    rng: &mut R,
) -> Vec<usize> {
    debug_assert!(checkpoints.windows(2).all(|w| w[0] < w[1]));
    let (alpha, d) = (params.alpha(), params.d());
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut k = 0usize;
    let mut seated = 0usize;
    for &target in checkpoints {
        while seated < target {
            if seated == 0 || rng.random::<f64>() * (alpha + seated as f64) < alpha + k as f64 * d {
                k += 1;
            }
            seated += 1;
        }
        out.push(k);
    }
    out
}

/// Log of the product of predictive probabilities along customers `1..=n`.
pub fn sequential_log_prob(params: &PYParams, partition: &Partition) -> LogProb {
    let (alpha, d) = (params.alpha(), params.d());
    let mut sizes: Vec<usize> = Vec::with_capacity(partition.num_blocks());
    let mut value = 0.0;
    for (i, &label) in partition.labels().iter().enumerate() {
        let label = label as usize;
        if i > 0 {
            let numerator = if label == sizes.len() {
                alpha + sizes.len() as f64 * d
            } else {
                sizes[label] as f64 - d
            };
            value += numerator.ln() - (alpha + i as f64).ln();
        }
        if label == sizes.len() {
            sizes.push(1);
        } else {
            sizes[label] += 1;
        }
    }
    LogProb::from_ln(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eppf::eppf_log_prob;
    use crate::partition::enumerate_partitions;
    use crate::special::compensated_sum;
    use crate::tolerances::{EXHAUSTIVE_TOL, PREDICTIVE_SUM_TOL};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(alpha: f64, d: f64) -> PYParams {
        PYParams::new(alpha, d).unwrap()
    }

    #[test]
    fn predictive_examples() {
        assert_eq!(
            crp_predictive(&params(-0.3, 0.5), &SeatingState::new()),
            vec![1.0]
        );
        let p = crp_predictive(
            &params(1.0, 0.5),
            &SeatingState::from_sizes(vec![1]).unwrap(),
        );
        assert_eq!(p, vec![0.25, 0.75]);
        let p = crp_predictive(
            &params(2.0, 0.0),
            &SeatingState::from_sizes(vec![3, 1]).unwrap(),
        );
        let want = [3.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn seating_state() {
        assert!(SeatingState::from_sizes(vec![2, 0]).is_none());
        let mut s = SeatingState::new();
        s.seat(0);
        s.seat(0);
        s.seat(1);
        assert_eq!(s.block_sizes(), &[2, 1]);
        assert_eq!(s.n_seated(), 3);
    }

    #[test]
    fn sequential_examples() {
        let pp = params(1.0, 0.5);
        let p = |s: &str| s.parse::<Partition>().unwrap();
        assert!((sequential_log_prob(&pp, &p("1,2")).prob() - 0.25).abs() < 1e-15);
        assert!((sequential_log_prob(&pp, &p("1|2")).prob() - 0.75).abs() < 1e-15);
        assert_eq!(sequential_log_prob(&pp, &p("1")).ln(), 0.0);
    }

    #[test]
    fn sequential_product_equals_partition_law() {
        for &alpha in &[-0.3, 0.0, 0.5, 1.0, 5.0] {
            for &d in &[0.0, 0.1, 0.5, 0.9] {
                let Ok(pp) = PYParams::new(alpha, d) else {
                    continue;
                };
                for n in 1..=7 {
                    for c in enumerate_partitions(n).unwrap() {
                        let gap =
                            (sequential_log_prob(&pp, &c).ln() - eppf_log_prob(&pp, &c).ln()).abs();
                        assert!(gap <= EXHAUSTIVE_TOL, "{pp:?} {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn single_customer_always_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(
                crp_sample_partition(&params(0.5, 0.5), 1, &mut rng).to_string(),
                "1"
            );
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let pp = params(1.0, 0.5);
        let a = crp_sample_partition(&pp, 50, &mut ChaCha8Rng::seed_from_u64(9));
        let b = crp_sample_partition(&pp, 50, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn pair_frequency() {
        let pp = params(1.0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trials = 200_000;
        let together = (0..trials)
            .filter(|_| crp_sample_partition(&pp, 2, &mut rng).num_blocks() == 1)
            .count() as f64;
        let se = (0.25f64 * 0.75 / trials as f64).sqrt();
        assert!((together / trials as f64 - 0.25).abs() < 3.5 * se);
    }

    #[test]
    fn block_count_path_matches_full_sampler_in_mean() {
        // E[k_n] = (alpha/d) ((alpha + d)_(n) / (alpha)_(n) - 1)
        let pp = params(1.0, 0.5);
        let n = 30;
        let rf = |x: f64| (0..n).map(|j| x + j as f64).product::<f64>();
        let exact = 2.0 * (rf(1.5) / rf(1.0) - 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let trials = 20_000;
        let path: Vec<f64> = (0..trials)
            .map(|_| crp_block_count_path(&pp, &[n], &mut rng)[0] as f64)
            .collect();
        let full: Vec<f64> = (0..trials)
            .map(|_| crp_sample_partition(&pp, n, &mut rng).num_blocks() as f64)
            .collect();
        for draws in [path, full] {
            let mean = draws.iter().sum::<f64>() / trials as f64;
            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            assert!(
                (mean - exact).abs() < 3.5 * (var / trials as f64).sqrt(),
                "{mean} vs {exact}"
            );
        }
    }

    proptest! {
        #[test]
        fn predictive_sums_to_one(
            sizes in prop::collection::vec(1usize..500, 0..60),
            alpha in -0.9f64..20.0,
            d in 0.0f64..0.99,
        ) {
            prop_assume!(alpha > -d && (d > 0.0 || alpha > 0.0));
            let pp = params(alpha, d);
            let state = SeatingState::from_sizes(sizes).unwrap();
            let probs = crp_predictive(&pp, &state);
            prop_assert_eq!(probs.len(), state.num_blocks() + 1);
            prop_assert!(probs.iter().all(|&p| p >= 0.0));
            prop_assert!((compensated_sum(probs) - 1.0).abs() <= PREDICTIVE_SUM_TOL);
        }
    }
}
