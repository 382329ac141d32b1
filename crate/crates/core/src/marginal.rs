//! The allocation-vector marginal and the identities that turn it into the
//! partition law.
//!
//! For `z in N^n` with `m = max z` and `g_j = #{i : z_i >= j}`,
//!
//! ```text
//! Pr(z) = 1/(alpha)_(n) * prod_{c in C_z} (1 - d)_(|c|) * prod_{j=1}^{m} (alpha + (j-1) d) / (g_j + alpha + (j-1) d)
//! ```
//!
//! Summing the last product over all `z` inducing a fixed partition `C`
//! gives `prod_{i<k} (alpha + i d) / prod_c (|c| - d)`. The checks below
//! evaluate both sides of that sum and of the two identities used to
//! collapse it: a permutation sum (sampling blocks without replacement with
//! weights `|c| - d`) and a nested sum of rising-factorial ratios.

use crate::error::{Error, Result};
use crate::params::PYParams;
use crate::partition::{partition_from_allocations, AllocationVector, Partition};
use crate::special::{ln_beta, log_rising_factorial_unchecked, LogProb};

/// Counts derived from an allocation vector. Vectors are indexed from
/// `j = 1` at position 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationStats {
    /// `max z`
    pub m: usize,
    /// `e_j = #{i : z_i = j}`
    pub e: Vec<usize>,
    /// `f_j = #{i : z_i > j}`
    pub f: Vec<usize>,
    /// `g_j = #{i : z_i >= j}`
    pub g: Vec<usize>,
}

impl AllocationStats {
    /// `g_j` for any `j >= 1`; zero beyond `m`.
    pub fn g_at(&self, j: usize) -> usize {
        debug_assert!(j >= 1);
        self.g.get(j - 1).copied().unwrap_or(0)
    }
}

pub fn allocation_stats(z: &AllocationVector) -> AllocationStats {
    let m = z.max_label();
    let mut e = vec![0; m];
    for &l in z.as_slice() {
        e[l - 1] += 1;
    }
    let mut g = vec![0; m];
    let mut above = 0;
    for j in (0..m).rev() {
        above += e[j];
        g[j] = above;
    }
    let f = (0..m).map(|j| g.get(j + 1).copied().unwrap_or(0)).collect();
    AllocationStats { m, e, f, g }
}

fn require_positive_discount(params: &PYParams) -> Result<()> {
    if params.is_dirichlet() {
        return Err(Error::InvalidParams {
            alpha: params.alpha(),
            d: params.d(),
            reason: "the allocation marginal is defined here for d > 0 only",
        });
    }
    Ok(())
}

/// Log marginal probability of an allocation vector, `d > 0`.
///
/// The `j = 1` factor `alpha / (n + alpha)` is merged with `1 / (alpha)_(n)`
/// into `1 / (alpha + 1)_(n)`, which keeps every log argument positive for
/// `alpha in (-d, 0]`.
pub fn allocation_log_prob(params: &PYParams, z: &AllocationVector) -> Result<LogProb> {
    require_positive_discount(params)?;
    let (alpha, d) = (params.alpha(), params.d());
    let n = z.len();
    let stats = allocation_stats(z);
    let partition = partition_from_allocations(z);
    let mut value = -log_rising_factorial_unchecked(alpha + 1.0, n as u64);
    for s in partition.block_sizes() {
        value += log_rising_factorial_unchecked(1.0 - d, s as u64);
    }
    for j in 2..=stats.m {
        let base = alpha + (j - 1) as f64 * d;
        value += base.ln() - (stats.g_at(j) as f64 + base).ln();
    }
    Ok(LogProb::from_ln(value))
}

/// Total marginal mass of all `z in {1..max_label}^n`. Increases to one as
/// `max_label` grows.
pub fn allocation_mass_up_to(params: &PYParams, n: usize, max_label: usize) -> Result<f64> {
    require_positive_discount(params)?;
    let count = (max_label as f64).powi(n as i32);
    if n == 0 || max_label == 0 || count > 1e8 {
        return Err(Error::Domain(format!(
            "cannot enumerate {{1..{max_label}}}^{n}"
        )));
    }
    let mut z = vec![1usize; n];
    let mut total = 0.0;
    loop {
        total += allocation_log_prob(params, &AllocationVector::new(z.clone())?)?.prob();
        // odometer
        let mut i = 0;
        loop {
            if i == n {
                return Ok(total);
            }
            if z[i] < max_label {
                z[i] += 1;
                break;
            }
            z[i] = 1;
            i += 1;
        }
    }
}

/// `E[y^c (1 - y)^e] = B(a + c, b + e) / B(a, b)` for `y ~ Beta(a, b)`.
pub fn beta_moment(a: f64, b: f64, c: f64, e: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a + c > 0.0 && b + e > 0.0) {
        return Err(Error::Domain(format!(
            "beta moment needs a, b, a + c, b + e > 0; got a={a}, b={b}, c={c}, e={e}"
        )));
    }
    Ok((ln_beta(a + c, b + e) - ln_beta(a, b)).exp())
}

/// Both sides of the label-sum identity for a partition `C` with `k` blocks:
///
/// * the sum, over every `z` with labels `<= max_label` inducing `C`, of
///   `prod_{j=1}^{m(z)} (alpha + (j-1) d) / (g_j + alpha + (j-1) d)`;
/// * the closed form `prod_{i=0}^{k-1} (alpha + i d) / prod_c (|c| - d)`.
///
/// Each such `z` is enumerated as an order `sigma` in which blocks receive
/// increasing labels plus the label gaps `b_i >= 1`. The partial sum is
/// returned as is.
pub fn lemma_b_truncated_sum(
    params: &PYParams,
    partition: &Partition,
    max_label: usize,
) -> Result<(f64, f64)> {
    let sizes = partition.block_sizes();
    let n = partition.n() as f64;
    let alpha = params.alpha();
    let partial = alpha / (n + alpha) * label_sum_after_first(params, &sizes, max_label)?;
    Ok((partial, label_sum_closed_form(params, &sizes)))
}

/// The partition probability rebuilt from the truncated label sum:
/// `1/(alpha)_(n) * prod_c (1 - d)_(|c|) * partial`.
pub fn label_sum_reconstructed_prob(
    params: &PYParams,
    partition: &Partition,
    max_label: usize,
) -> Result<f64> {
    let sizes = partition.block_sizes();
    let n = partition.n() as u64;
    let d = params.d();
    let partial = label_sum_after_first(params, &sizes, max_label)?;
    let mut log_prefactor = -log_rising_factorial_unchecked(params.alpha() + 1.0, n);
    for &s in &sizes {
        log_prefactor += log_rising_factorial_unchecked(1.0 - d, s as u64);
    }
    Ok(log_prefactor.exp() * partial)
}

fn label_sum_closed_form(params: &PYParams, sizes: &[usize]) -> f64 {
    let (alpha, d) = (params.alpha(), params.d());
    let numerator: f64 = (0..sizes.len()).map(|i| alpha + i as f64 * d).product();
    let denominator: f64 = sizes.iter().map(|&s| s as f64 - d).product();
    numerator / denominator
}

/// Largest block count for the permutation enumerations.
pub const MAX_PERMUTED_BLOCKS: usize = 8;

fn check_block_count(k: usize) -> Result<()> {
    if !(1..=MAX_PERMUTED_BLOCKS).contains(&k) {
        return Err(Error::OutOfRange {
            what: "number of blocks",
            value: k,
            min: 1,
            max: MAX_PERMUTED_BLOCKS,
        });
    }
    Ok(())
}

/// The label sum with the `j = 1` factor `alpha / (n + alpha)` left out.
fn label_sum_after_first(params: &PYParams, sizes: &[usize], max_label: usize) -> Result<f64> {
    let k = sizes.len();
    check_block_count(k)?;
    if max_label < k {
        return Err(Error::Domain(format!(
            "max_label {max_label} is below the number of blocks {k}"
        )));
    }
    let mut walk = LabelWalk {
        alpha: params.alpha(),
        d: params.d(),
        sizes,
        used: vec![false; k],
        max_label,
    };
    let n: usize = sizes.iter().sum();
    Ok(walk.level(k, n, 0, 1.0))
}

struct LabelWalk<'a> {
    alpha: f64,
    d: f64,
    sizes: &'a [usize],
    used: Vec<bool>,
    max_label: usize,
}

impl LabelWalk<'_> {
    /// `remaining` blocks still to be labelled, holding `mass` elements, the
    /// last label used is `last`. Labels `last + 1 ..= last + b` all have
    /// `g_j = mass`.
    fn level(&mut self, remaining: usize, mass: usize, last: usize, acc: f64) -> f64 {
        if remaining == 0 {
            return acc;
        }
        // leave room for the blocks after this one
        let top = self.max_label - (remaining - 1);
        let mut total = 0.0;
        for idx in 0..self.sizes.len() {
            if self.used[idx] {
                continue;
            }
            self.used[idx] = true;
            let rest = mass - self.sizes[idx];
            let mut prod = acc;
            for j in last + 1..=top {
                if j > 1 {
                    let base = self.alpha + (j - 1) as f64 * self.d;
                    prod *= base / (mass as f64 + base);
                }
                total += self.level(remaining - 1, rest, j, prod);
            }
            self.used[idx] = false;
        }
        total
    }
}

/// Both sides of the permutation identity
/// `sum_sigma prod_i 1 / (a_i(sigma) - (k - i + 1) d) = 1 / prod_i (n_i - d)`
/// with `a_i(sigma) = n_{sigma_i} + ... + n_{sigma_k}`.
pub fn lemma_c_check(sizes: &[usize], d: f64) -> Result<(f64, f64)> {
    check_block_count(sizes.len())?;
    if sizes.contains(&0) {
        return Err(Error::Domain("block sizes must be positive".into()));
    }
    if !(0.0..1.0).contains(&d) {
        return Err(Error::Domain(format!("discount {d} is outside [0, 1)")));
    }
    let total: usize = sizes.iter().sum();
    let mut used = vec![false; sizes.len()];
    let lhs = permutation_sum(sizes, d, &mut used, sizes.len(), total);
    let rhs = 1.0 / sizes.iter().map(|&s| s as f64 - d).product::<f64>();
    Ok((lhs, rhs))
}

fn permutation_sum(
    sizes: &[usize],
    d: f64,
    used: &mut [bool],
    remaining: usize,
    mass: usize,
) -> f64 {
    if remaining == 0 {
        return 1.0;
    }
    // a_i is the mass not yet drawn, whichever block is drawn now
    let factor = 1.0 / (mass as f64 - remaining as f64 * d);
    let mut total = 0.0;
    for idx in 0..sizes.len() {
        if used[idx] {
            continue;
        }
        used[idx] = true;
        total += permutation_sum(sizes, d, used, remaining - 1, mass - sizes[idx]);
        used[idx] = false;
    }
    factor * total
}

/// Truncated nested sums `A_j(s)` for every level, where `s` is the sum of
/// the earlier gaps. `tables[j - 1][s]` holds `A_j(s)`.
struct NestedSums {
    tables: Vec<Vec<f64>>,
}

fn validate_nested_sum(params: &PYParams, a: &[f64], truncation: usize) -> Result<()> {
    if params.is_dirichlet() {
        return Err(Error::InvalidParams {
            alpha: params.alpha(),
            d: params.d(),
            reason: "the nested rising-factorial sums need d > 0",
        });
    }
    if a.is_empty() || truncation == 0 {
        return Err(Error::Domain(
            "need at least one level and truncation >= 1".into(),
        ));
    }
    let k = a.len();
    let d = params.d();
    for (i, &ai) in a.iter().enumerate() {
        // convergence at level i + 1 needs a_i / d - (k - i) > 0
        if !ai.is_finite() || ai / d - (k - i) as f64 <= 0.0 {
            return Err(Error::Domain(format!(
                "divergent sum: a_{} / d - {} = {} <= 0",
                i + 1,
                k - i,
                ai / d - (k - i) as f64
            )));
        }
    }
    Ok(())
}

fn nested_sums(params: &PYParams, a: &[f64], truncation: usize) -> NestedSums {
    let k = a.len();
    let (alpha, d) = (params.alpha(), params.d());
    let x0 = alpha / d;
    // A_{k+1} = 1 for every prefix sum up to k * truncation
    let mut next = vec![1.0; k * truncation + 1];
    let mut tables = vec![Vec::new(); k];
    for level in (1..=k).rev() {
        let y0 = (a[level - 1] + alpha) / d;
        // prefixes at this level are sums of level - 1 gaps
        let max_prefix = (level - 1) * truncation;
        let mut current = vec![0.0; max_prefix + 1];
        for (s, slot) in current.iter_mut().enumerate().skip(level - 1) {
            let mut ratio = 1.0;
            let mut sum = 0.0;
            for b in 1..=truncation {
                let t = (b - 1) as f64;
                ratio *= (x0 + s as f64 + t) / (y0 + s as f64 + t);
                sum += ratio * next[s + b];
            }
            *slot = sum;
        }
        tables[level - 1] = current.clone();
        next = current;
    }
    NestedSums { tables }
}

/// Both sides of the nested identity
///
/// ```text
/// sum_{b_1..b_k >= 1} prod_i (alpha/d + bbar_{i-1})_(b_i) / ((a_i + alpha)/d + bbar_{i-1})_(b_i)
///     = (alpha/d)_(k) / prod_i (a_i/d - (k + 1 - i))
/// ```
///
/// with every gap `b_i` truncated at `truncation`. For `alpha > 0` the
/// partial sum increases towards the closed form.
pub fn lemma_d_check(params: &PYParams, a: &[f64], truncation: usize) -> Result<(f64, f64)> {
    nested_sum_intermediate(params, a, 1, 0, truncation)
}

/// Both sides of the intermediate identity
/// `A_j(s) = (alpha/d + s)_(k - j + 1) / prod_{i=j}^{k} (a_i/d - (k + 1 - i))`
/// at prefix sum `s = bbar_{j-1}` (which must be reachable: `j - 1 <= s <=
/// (j - 1) * truncation`).
pub fn nested_sum_intermediate(
    params: &PYParams,
    a: &[f64],
    level: usize,
    prefix: usize,
    truncation: usize,
) -> Result<(f64, f64)> {
    validate_nested_sum(params, a, truncation)?;
    let k = a.len();
    if !(1..=k).contains(&level) || prefix < level - 1 || prefix > (level - 1) * truncation {
        return Err(Error::Domain(format!(
            "level {level} with prefix sum {prefix} is not reachable"
        )));
    }
    let d = params.d();
    let x = params.alpha() / d + prefix as f64;
    let numerator: f64 = (0..=k - level).map(|t| x + t as f64).product();
    let denominator: f64 = (level..=k)
        .map(|i| a[i - 1] / d - (k + 1 - i) as f64)
        .product();
    let sums = nested_sums(params, a, truncation);
    Ok((sums.tables[level - 1][prefix], numerator / denominator))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eppf::eppf_log_prob;
    use crate::partition::enumerate_partitions;
    use proptest::prelude::*;

    fn params(alpha: f64, d: f64) -> PYParams {
        PYParams::new(alpha, d).unwrap()
    }

    fn z(v: &[usize]) -> AllocationVector {
        AllocationVector::new(v.to_vec()).unwrap()
    }

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    /// Product over sticks of `E[v^e_j (1 - v)^f_j]`, from log-gamma directly.
    fn beta_moment_oracle(pp: &PYParams, v: &[usize]) -> f64 {
        use statrs::function::beta::ln_beta;
        let s = allocation_stats(&z(v));
        (1..=s.m)
            .map(|j| {
                let (a, b) = pp.stick_shapes(j);
                let (e, f) = (s.e[j - 1] as f64, s.f[j - 1] as f64);
                (ln_beta(a + e, b + f) - ln_beta(a, b)).exp()
            })
            .product()
    }

    #[test]
    fn stats_examples() {
        let s = allocation_stats(&z(&[1, 1]));
        assert_eq!((s.m, s.e.clone(), s.g.clone()), (1, vec![2], vec![2]));
        let s = allocation_stats(&z(&[2, 1, 2]));
        assert_eq!(s.m, 2);
        assert_eq!(s.e, vec![1, 2]);
        assert_eq!(s.f, vec![2, 0]);
        assert_eq!(s.g, vec![3, 2]);
        let s = allocation_stats(&z(&[3]));
        assert_eq!((s.e.clone(), s.g.clone()), (vec![0, 0, 1], vec![1, 1, 1]));
        assert_eq!(s.g_at(4), 0);
    }

    #[test]
    fn marginal_examples() {
        let pp = params(1.0, 0.5);
        let prob = |v: &[usize]| allocation_log_prob(&pp, &z(v)).unwrap().prob();
        assert!((prob(&[1]) - 0.25).abs() < 1e-15);
        assert!((prob(&[2]) - 0.15).abs() < 1e-15);
        assert!((prob(&[1, 1]) - 0.125).abs() < 1e-15);
        assert!((beta_moment_oracle(&pp, &[1, 1]) - 0.125).abs() < 1e-14);
        assert!(allocation_log_prob(&params(1.0, 0.0), &z(&[1])).is_err());
    }

    #[test]
    fn marginal_matches_beta_moment_oracle() {
        for &(alpha, d) in &[(1.0, 0.5), (0.3, 0.7), (5.0, 0.1), (-0.3, 0.5), (0.0, 0.9)] {
            let pp = params(alpha, d);
            for n in 1..=3u32 {
                for code in 0..4usize.pow(n) {
                    let v: Vec<usize> = (0..n).map(|i| code / 4usize.pow(i) % 4 + 1).collect();
                    let ours = allocation_log_prob(&pp, &z(&v)).unwrap().prob();
                    let oracle = beta_moment_oracle(&pp, &v);
                    assert!(
                        (ours - oracle).abs() <= 1e-10,
                        "{pp:?} {v:?}: {ours} vs {oracle}"
                    );
                }
            }
        }
    }

    #[test]
    fn truncated_mass_is_monotone_and_bounded_by_the_first_label_tail() {
        let pp = params(1.0, 0.5);
        let mut previous = 0.0;
        for l in [1, 2, 5, 10, 20, 40, 60] {
            let mass = allocation_mass_up_to(&pp, 2, l).unwrap();
            assert!(mass > previous);
            // Pr(z_1 > l) = prod_{i<=l} E[1 - v_i] = 3 / (l + 3)
            assert!(mass <= 1.0 - 3.0 / (l as f64 + 3.0) + 1e-12);
            previous = mass;
        }
        // one observation: the bound is attained exactly
        let single = allocation_mass_up_to(&pp, 1, 60).unwrap();
        assert!((single - (1.0 - 3.0 / 63.0)).abs() < 1e-13);
    }

    #[test]
    fn beta_moment_examples() {
        assert!((beta_moment(1.0, 1.0, 1.0, 0.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((beta_moment(2.0, 3.0, 1.0, 1.0).unwrap() - 0.2).abs() < 1e-14);
        assert!((beta_moment(0.5, 1.5, 1.0, 0.0).unwrap() - 0.25).abs() < 1e-14);
        assert!(beta_moment(1.0, 1.0, -1.0, 0.0).is_err());
        assert!(beta_moment(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn label_sum_single_block_partial_sum_is_exact() {
        // alpha = 1, d = 1/2, C = {{1}}: term m is 6 / ((m + 2)(m + 3)),
        // partial sum up to L is 2 - 6 / (L + 3)
        let pp = params(1.0, 0.5);
        for l in [1, 2, 10, 50, 60] {
            let (partial, closed) = lemma_b_truncated_sum(&pp, &p("1"), l).unwrap();
            assert!((partial - (2.0 - 6.0 / (l as f64 + 3.0))).abs() < 1e-13);
            assert!((closed - 2.0).abs() < 1e-15);
        }
        let (_, closed) = lemma_b_truncated_sum(&pp, &p("1,2"), 50).unwrap();
        assert!((closed - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn label_sum_matches_brute_force_label_scan() {
        // scan {1..L}^n directly for small cases
        for &(alpha, d) in &[(1.0, 0.5), (0.4, 0.2)] {
            let pp = params(alpha, d);
            let l = 7usize;
            for n in 1..=3u32 {
                for c in enumerate_partitions(n as usize).unwrap() {
                    let mut brute = 0.0;
                    for code in 0..l.pow(n) {
                        let v: Vec<usize> = (0..n).map(|i| code / l.pow(i) % l + 1).collect();
                        let zz = z(&v);
                        if partition_from_allocations(&zz) != c {
                            continue;
                        }
                        let s = allocation_stats(&zz);
                        brute += (1..=s.m)
                            .map(|j| {
                                let base = alpha + (j - 1) as f64 * d;
                                base / (s.g_at(j) as f64 + base)
                            })
                            .product::<f64>();
                    }
                    let (partial, _) = lemma_b_truncated_sum(&pp, &c, l).unwrap();
                    assert!((partial - brute).abs() < 1e-13, "{c}: {partial} vs {brute}");
                }
            }
        }
    }

    #[test]
    fn label_sum_partial_sums_increase_below_the_closed_form() {
        let pp = params(1.0, 0.5);
        for c in enumerate_partitions(3).unwrap() {
            let k = c.num_blocks();
            let mut previous = 0.0;
            for l in [k, k + 1, 10, 30] {
                let (partial, closed) = lemma_b_truncated_sum(&pp, &c, l).unwrap();
                assert!(partial > previous && partial < closed);
                previous = partial;
            }
            assert!(lemma_b_truncated_sum(&pp, &c, k - 1).is_err());
        }
    }

    #[test]
    fn label_sum_reconstruction_approaches_partition_law() {
        let pp = params(1.0, 0.5);
        for c in enumerate_partitions(3).unwrap() {
            let exact = eppf_log_prob(&pp, &c).prob();
            let coarse = label_sum_reconstructed_prob(&pp, &c, 20).unwrap();
            let fine = label_sum_reconstructed_prob(&pp, &c, 80).unwrap();
            assert!(coarse < fine && fine < exact);
            assert!(exact - fine < (exact - coarse) / 2.0, "{c}");
        }
    }

    #[test]
    fn permutation_sum_examples() {
        let (l, r) = lemma_c_check(&[3], 0.5).unwrap();
        assert!((l - 0.4).abs() < 1e-15 && (r - 0.4).abs() < 1e-15);
        let (l, r) = lemma_c_check(&[2, 3], 0.5).unwrap();
        let hand = 1.0 / (4.0 * 2.5) + 1.0 / (4.0 * 1.5);
        assert!((l - hand).abs() < 1e-15 && (r - 1.0 / 3.75).abs() < 1e-15);
        let (l, r) = lemma_c_check(&[1, 1, 1], 0.0).unwrap();
        assert!((l - 1.0).abs() < 1e-15 && r == 1.0);
        assert!(lemma_c_check(&[1; 9], 0.3).is_err());
        assert!(lemma_c_check(&[], 0.3).is_err());
        assert!(lemma_c_check(&[1, 0], 0.3).is_err());
    }

    #[test]
    fn nested_sum_examples() {
        let pp = params(1.0, 0.5);
        // the terms are 120 / ((b+2)(b+3)(b+4)(b+5)); the tail past 200 telescopes
        // to 40 / (203 * 204 * 205)
        let (l, r) = lemma_d_check(&pp, &[2.0], 200).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-15);
        assert!((r - l - 40.0 / (203.0 * 204.0 * 205.0)).abs() < 1e-13);
        let (l, r) = lemma_d_check(&pp, &[4.0, 2.0], 300).unwrap();
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
        assert!(l < r && r - l < 1e-5);
        assert!(lemma_d_check(&pp, &[1.0, 0.5], 10).is_err());
        assert!(lemma_d_check(&params(1.0, 0.0), &[2.0], 10).is_err());
    }

    #[test]
    fn nested_sum_single_level_is_the_beta_series() {
        // sum_b (x)_(b) / (y)_(b) = sum_b E[X^b] for X ~ Beta(x, y - x)
        let pp = params(0.8, 0.4);
        let a = [1.3];
        let (x, y) = (0.8 / 0.4, (1.3 + 0.8) / 0.4);
        let t = 2000;
        let series: f64 = (1..=t)
            .map(|b| beta_moment(x, y - x, b as f64, 0.0).unwrap())
            .sum();
        let (l, _) = lemma_d_check(&pp, &a, t).unwrap();
        assert!((l - series).abs() < 1e-12 * series);
    }

    #[test]
    fn nested_sum_matches_explicit_nesting() {
        let pp = params(0.6, 0.3);
        let a = [3.0, 2.0, 1.5];
        let t = 25;
        let (x0, d) = (0.6 / 0.3, 0.3);
        let rf_ratio = |s: f64, ai: f64, b: usize| {
            (0..b)
                .map(|q| (x0 + s + q as f64) / ((ai + 0.6) / d + s + q as f64))
                .product::<f64>()
        };
        let mut brute = 0.0;
        for b1 in 1..=t {
            for b2 in 1..=t {
                for b3 in 1..=t {
                    brute += rf_ratio(0.0, a[0], b1)
                        * rf_ratio(b1 as f64, a[1], b2)
                        * rf_ratio((b1 + b2) as f64, a[2], b3);
                }
            }
        }
        let (l, _) = lemma_d_check(&pp, &a, t).unwrap();
        assert!((l - brute).abs() < 1e-12 * brute);
    }

    #[test]
    fn nested_sum_intermediate_levels() {
        let pp = params(1.0, 0.5);
        let a = [5.0, 3.0, 2.5];
        for level in 1..=3 {
            let reachable = (level - 1)..=(level - 1) * 600;
            for prefix in [level - 1, level + 3, 4 * level]
                .into_iter()
                .filter(|s| reachable.contains(s))
            {
                let (l, r) = nested_sum_intermediate(&pp, &a, level, prefix, 600).unwrap();
                assert!(
                    l < r && (r - l) / r < 1e-4,
                    "level {level}, prefix {prefix}"
                );
            }
        }
        assert!(nested_sum_intermediate(&pp, &a, 4, 3, 10).is_err());
        assert!(nested_sum_intermediate(&pp, &a, 2, 0, 10).is_err());
    }

    proptest! {
        #[test]
        fn stats_identities(v in prop::collection::vec(1usize..=12, 1..=12)) {
            let s = allocation_stats(&z(&v));
            prop_assert_eq!(s.g_at(1), v.len());
            prop_assert_eq!(s.g_at(s.m + 1), 0);
            for j in 1..=s.m {
                prop_assert_eq!(s.g[j - 1], s.e[j - 1] + s.f[j - 1]);
                prop_assert_eq!(s.f[j - 1], s.g_at(j + 1));
            }
            prop_assert!(s.g.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn permutation_identity(sizes in prop::collection::vec(1usize..=10, 1..=6), d in 0.0f64..0.95) {
            let (l, r) = lemma_c_check(&sizes, d).unwrap();
            prop_assert!(((l - r) / r).abs() <= 1e-12);
        }
    }
}
