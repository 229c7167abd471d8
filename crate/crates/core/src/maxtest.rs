//! Maximum-type tests of mutual independence.
//!
//! The pairwise statistics `U_jk` over all column pairs are reduced to their
//! maximum, standardized, and compared either with the Gumbel quantile or
//! with an empirical quantile of simulated null maxima.

use std::fmt;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{rank_transform, DataMatrix, RankMatrix};
use crate::dombits::DominanceSets;
use crate::error::{Error, Result};
use crate::null_dist::{gumbel_sf, q_alpha, standardize_max, NullSpec};
use crate::rng::stream_rng;
use crate::stats::{ExactPair, KernelKind, Needs, PairStats, Scratch};

/// Symmetric `p x p` matrix of one pairwise statistic, unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStatMatrix {
    pub kind: KernelKind,
    pub n: usize,
    pub p: usize,
    values: Vec<f64>,
}

impl PairStatMatrix {
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.p + k]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.p..(j + 1) * self.p]
    }

    /// `max_{j < k} U_jk`.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for j in 0..self.p {
            for k in j + 1..self.p {
                max = max.max(self.get(j, k));
            }
        }
        max
    }
}

// Column orderings shared by every pair that uses a column as the sort key.
struct PairEngine<'a> {
    ranks: &'a RankMatrix,
    orders: Vec<Vec<u32>>,
    dominance: Option<DominanceSets>,
}

impl<'a> PairEngine<'a> {
    fn new(ranks: &'a RankMatrix) -> Self {
        let n = ranks.n();
        let orders = (0..ranks.p())
            .map(|j| {
                let mut order = vec![0u32; n];
                for (row, &r) in ranks.column(j).iter().enumerate() {
                    order[r as usize - 1] = row as u32;
                }
                order
            })
            .collect::<Vec<_>>();
        Self {
            ranks,
            dominance: DominanceSets::build(ranks, &orders),
            orders,
        }
    }

    /// Statistics for pairs `(j, k)`, `k > j`, in increasing `k`.
    fn row_stats(&self, j: usize, needs: Needs) -> Vec<PairStats> {
        let n = self.ranks.n();
        let p = self.ranks.p();
        let mut scratch = Scratch::new(n);
        let mut s_by_r = vec![0u32; n];
        let order = &self.orders[j];
        (j + 1..p)
            .map(|k| {
                let Some(dom) = &self.dominance else {
                    self.gather(k, order, &mut s_by_r);
                    return scratch.exact(&s_by_r, needs).to_stats();
                };
                let d_raw = if needs.d {
                    dom.d_numerator(j, k) as i128
                } else {
                    0
                };
                let x = if needs.tau {
                    self.gather(k, order, &mut s_by_r);
                    scratch.tau_excess(&s_by_r)
                } else {
                    0
                };
                ExactPair::new(n, d_raw, x).to_stats()
            })
            .collect()
    }

    fn gather(&self, k: usize, order: &[u32], s_by_r: &mut [u32]) {
        let col = self.ranks.column(k);
        for (dst, &row) in s_by_r.iter_mut().zip(order) {
            *dst = col[row as usize];
        }
    }

    fn max_stats(&self, needs: Needs) -> PairStats {
        let init = PairStats {
            d: f64::NEG_INFINITY,
            r: f64::NEG_INFINITY,
            tau_star: f64::NEG_INFINITY,
        };
        (0..self.ranks.p())
            .into_par_iter()
            .map(|j| self.row_stats(j, needs).into_iter().fold(init, merge_max))
            .reduce(|| init, merge_max)
    }
}

fn merge_max(a: PairStats, b: PairStats) -> PairStats {
    PairStats {
        d: a.d.max(b.d),
        r: a.r.max(b.r),
        tau_star: a.tau_star.max(b.tau_star),
    }
}

fn check_sample(n: usize, kinds: &[KernelKind]) -> Result<()> {
    // the shared-denominator engine needs n >= 5 even for tau* alone
    let min = kinds.iter().map(|k| k.min_n()).max().unwrap_or(0).max(5);
    if n < min {
        Err(Error::SampleTooSmall { n, min })
    } else {
        Ok(())
    }
}

/// All pairwise statistics of one kind.
pub fn pairwise_matrix(ranks: &RankMatrix, kind: KernelKind) -> Result<PairStatMatrix> {
    Ok(pairwise_matrices(ranks, &[kind])?.remove(0))
}

/// Pairwise matrices for several kinds, sharing the counting work.
pub fn pairwise_matrices(ranks: &RankMatrix, kinds: &[KernelKind]) -> Result<Vec<PairStatMatrix>> {
    let (n, p) = (ranks.n(), ranks.p());
    check_sample(n, kinds)?;
    let engine = PairEngine::new(ranks);
    let needs = Needs::for_kinds(kinds);
    let rows: Vec<Vec<PairStats>> = (0..p)
        .into_par_iter()
        .map(|j| engine.row_stats(j, needs))
        .collect();
    Ok(kinds
        .iter()
        .map(|&kind| {
            let mut values = vec![1.0; p * p];
            for (j, row) in rows.iter().enumerate() {
                for (offset, stats) in row.iter().enumerate() {
                    let k = j + 1 + offset;
                    let v = stats.get(kind);
                    values[j * p + k] = v;
                    values[k * p + j] = v;
                }
            }
            PairStatMatrix { kind, n, p, values }
        })
        .collect())
}

/// `max_{j < k} U_jk` for each requested kind, in the order given.
pub fn max_statistics(ranks: &RankMatrix, kinds: &[KernelKind]) -> Result<Vec<f64>> {
    check_sample(ranks.n(), kinds)?;
    let maxima = PairEngine::new(ranks).max_stats(Needs::for_kinds(kinds));
    Ok(kinds.iter().map(|&k| maxima.get(k)).collect())
}

/// How the rejection threshold was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestMode {
    Asymptotic,
    MonteCarlo { reps: usize, seed: u64 },
}

impl fmt::Display for TestMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestMode::Asymptotic => f.write_str("asymptotic"),
            TestMode::MonteCarlo { .. } => f.write_str("mc"),
        }
    }
}

/// Result of one maximum-type test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub kind: KernelKind,
    pub n: usize,
    pub p: usize,
    /// Largest off-diagonal statistic before standardization.
    pub max_u: f64,
    /// Standardized maximum `S`.
    pub statistic: f64,
    pub threshold: f64,
    pub p_value: f64,
    pub reject: bool,
    pub mode: TestMode,
}

/// Flat serialization of a [`TestOutcome`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub kind: String,
    pub n: usize,
    pub p: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub p_value: f64,
    pub reject: bool,
    pub mode: String,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
}

impl TestOutcome {
    pub fn to_record(&self) -> OutcomeRecord {
        let (reps, seed) = match self.mode {
            TestMode::Asymptotic => (None, None),
            TestMode::MonteCarlo { reps, seed } => (Some(reps), Some(seed)),
        };
        OutcomeRecord {
            kind: self.kind.short_name().to_string(),
            n: self.n,
            p: self.p,
            statistic: self.statistic,
            threshold: self.threshold,
            p_value: self.p_value,
            reject: self.reject,
            mode: self.mode.to_string(),
            reps,
            seed,
        }
    }
}

/// Gumbel-calibrated test from an already computed maximum.
pub fn asymptotic_outcome(
    kind: KernelKind,
    n: usize,
    p: usize,
    max_u: f64,
    alpha: f64,
) -> Result<TestOutcome> {
    let spec = NullSpec::for_kernel(kind);
    let threshold = q_alpha(alpha, &spec)?;
    let statistic = standardize_max(max_u, n, p, &spec)?;
    Ok(TestOutcome {
        kind,
        n,
        p,
        max_u,
        statistic,
        threshold,
        p_value: gumbel_sf(statistic, &spec),
        reject: statistic > threshold,
        mode: TestMode::Asymptotic,
    })
}

/// The test with the asymptotic Gumbel critical value `Q_alpha`.
pub fn asymptotic_test(data: &DataMatrix, kind: KernelKind, alpha: f64) -> Result<TestOutcome> {
    asymptotic_test_ranks(&rank_transform(data)?, kind, alpha)
}

pub fn asymptotic_test_ranks(
    ranks: &RankMatrix,
    kind: KernelKind,
    alpha: f64,
) -> Result<TestOutcome> {
    validate_inputs(ranks, kind, alpha)?;
    if ranks.p() < 10 {
        log::warn!(
            "p = {} is small; the Gumbel critical value is an asymptotic approximation in p",
            ranks.p()
        );
    }
    let max_u = max_statistics(ranks, &[kind])?[0];
    asymptotic_outcome(kind, ranks.n(), ranks.p(), max_u, alpha)
}

fn validate_inputs(ranks: &RankMatrix, kind: KernelKind, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if ranks.n() <= kind.order() {
        return Err(Error::SampleTooSmall {
            n: ranks.n(),
            min: kind.order() + 1,
        });
    }
    Ok(())
}

/// Simulated null distribution of the standardized maximum `S` for one
/// kernel at fixed `(n, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullCalibration {
    pub kind: KernelKind,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    sorted: Vec<f64>,
}

impl NullCalibration {
    pub fn reps(&self) -> usize {
        self.sorted.len()
    }

    /// Simulated values of `S`, ascending.
    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// `inf{y : F_M(y) >= 1 - alpha}` for the empirical distribution `F_M`.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        let m = self.sorted.len() as f64;
        // smallest k with k / M >= 1 - alpha, guarding against 4750.0000001
        let k = ((m * (1.0 - alpha)) - 1e-9).ceil().max(1.0) as usize;
        Ok(self.sorted[k.min(self.sorted.len()) - 1])
    }

    /// `(1 + #{S_t >= s}) / (M + 1)`.
    pub fn p_value(&self, s: f64) -> f64 {
        let below = self.sorted.partition_point(|&v| v < s);
        let at_or_above = self.sorted.len() - below;
        (1 + at_or_above) as f64 / (self.sorted.len() + 1) as f64
    }

    pub fn outcome(&self, max_u: f64, alpha: f64) -> Result<TestOutcome> {
        let spec = NullSpec::for_kernel(self.kind);
        let statistic = standardize_max(max_u, self.n, self.p, &spec)?;
        let threshold = self.quantile(alpha)?;
        Ok(TestOutcome {
            kind: self.kind,
            n: self.n,
            p: self.p,
            max_u,
            statistic,
            threshold,
            p_value: self.p_value(statistic),
            reject: statistic > threshold,
            mode: TestMode::MonteCarlo {
                reps: self.reps(),
                seed: self.seed,
            },
        })
    }
}

/// Draws `reps` null datasets as independent uniform column permutations
/// and records the standardized maximum for each kind.
///
/// Replicate `t` uses its own random stream, so the result is a pure
/// function of the arguments.
pub fn simulate_null(
    n: usize,
    p: usize,
    kinds: &[KernelKind],
    reps: usize,
    seed: u64,
) -> Result<Vec<NullCalibration>> {
    if p < 2 {
        return Err(Error::DimensionTooSmall { p });
    }
    if reps == 0 {
        return Err(Error::Shape("need at least one null replicate".into()));
    }
    check_sample(n, kinds)?;
    for &kind in kinds {
        if n <= kind.order() {
            return Err(Error::SampleTooSmall {
                n,
                min: kind.order() + 1,
            });
        }
    }
    let specs: Vec<NullSpec> = kinds.iter().map(|&k| NullSpec::for_kernel(k)).collect();
    let needs = Needs::for_kinds(kinds);
    let draws: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|t| {
            let ranks = random_rank_matrix(n, p, seed, t as u64);
            let maxima = PairEngine::new(&ranks).max_stats(needs);
            kinds
                .iter()
                .zip(&specs)
                .map(|(&k, spec)| {
                    standardize_max(maxima.get(k), n, p, spec).expect("validated above")
                })
                .collect()
        })
        .collect();
    Ok(kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let mut sorted: Vec<f64> = draws.iter().map(|d| d[i]).collect();
            sorted.sort_by(f64::total_cmp);
            NullCalibration {
                kind,
                n,
                p,
                seed,
                sorted,
            }
        })
        .collect())
}

/// A rank matrix with independent uniformly random columns.
pub fn random_rank_matrix(n: usize, p: usize, seed: u64, stream: u64) -> RankMatrix {
    let mut rng = stream_rng(seed, stream);
    let mut ranks = Vec::with_capacity(n * p);
    let base: Vec<u32> = (1..=n as u32).collect();
    for _ in 0..p {
        let mut col = base.clone();
        col.shuffle(&mut rng);
        ranks.extend(col);
    }
    RankMatrix::from_parts_unchecked(n, p, ranks)
}

/// The test with a simulated critical value from `reps` null datasets.
pub fn mc_exact_test(
    data: &DataMatrix,
    kind: KernelKind,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<TestOutcome> {
    let ranks = rank_transform(data)?;
    validate_inputs(&ranks, kind, alpha)?;
    let calibration = simulate_null(ranks.n(), ranks.p(), &[kind], reps, seed)?.remove(0);
    mc_exact_test_with(&ranks, alpha, &calibration)
}

/// As [`mc_exact_test`], reusing a previously simulated null distribution.
pub fn mc_exact_test_with(
    ranks: &RankMatrix,
    alpha: f64,
    calibration: &NullCalibration,
) -> Result<TestOutcome> {
    if (ranks.n(), ranks.p()) != (calibration.n, calibration.p) {
        return Err(Error::Shape(format!(
            "calibration is for n = {}, p = {} but data is {} x {}",
            calibration.n,
            calibration.p,
            ranks.n(),
            ranks.p()
        )));
    }
    validate_inputs(ranks, calibration.kind, alpha)?;
    let max_u = max_statistics(ranks, &[calibration.kind])?[0];
    calibration.outcome(max_u, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::pair_stats;

    fn ranks_from(cols: Vec<Vec<u32>>) -> RankMatrix {
        let n = cols[0].len();
        let p = cols.len();
        RankMatrix::from_column_major(n, p, cols.into_iter().flatten().collect()).unwrap()
    }

    #[test]
    fn two_columns_match_pair_stats() {
        let ranks = random_rank_matrix(15, 2, 1, 0);
        let direct = pair_stats(&ranks.pair(0, 1)).unwrap();
        for kind in KernelKind::ALL {
            let m = pairwise_matrix(&ranks, kind).unwrap();
            assert_eq!(m.get(0, 1), direct.get(kind));
            assert_eq!(m.get(1, 0), direct.get(kind));
            assert_eq!(m.get(0, 0), 1.0);
        }
    }

    #[test]
    fn duplicated_column_gives_one() {
        let a: Vec<u32> = vec![3, 1, 4, 7, 5, 9, 2, 6, 8];
        let b: Vec<u32> = vec![9, 8, 7, 6, 5, 4, 3, 2, 1];
        let ranks = ranks_from(vec![a.clone(), b, a]);
        for kind in KernelKind::ALL {
            let m = pairwise_matrix(&ranks, kind).unwrap();
            assert_eq!(m.get(0, 2), 1.0, "{kind}");
            assert_eq!(m.max_off_diagonal(), 1.0);
        }
    }

    #[test]
    fn column_permutation_permutes_matrix() {
        let ranks = random_rank_matrix(12, 5, 9, 3);
        let perm = [3usize, 0, 4, 1, 2];
        let permuted = ranks_from(perm.iter().map(|&j| ranks.column(j).to_vec()).collect());
        let a = pairwise_matrix(&ranks, KernelKind::TauStar).unwrap();
        let b = pairwise_matrix(&permuted, KernelKind::TauStar).unwrap();
        for j in 0..5 {
            for k in 0..5 {
                assert_eq!(b.get(j, k), a.get(perm[j], perm[k]));
            }
        }
    }

    #[test]
    fn max_statistics_match_matrix() {
        let ranks = random_rank_matrix(20, 6, 4, 0);
        let maxima = max_statistics(&ranks, &KernelKind::ALL).unwrap();
        for (kind, max) in KernelKind::ALL.iter().zip(maxima) {
            assert_eq!(
                pairwise_matrix(&ranks, *kind).unwrap().max_off_diagonal(),
                max
            );
        }
    }

    #[test]
    fn single_replicate_calibration() {
        let cal = simulate_null(10, 4, &[KernelKind::HoeffdingD], 1, 2)
            .unwrap()
            .remove(0);
        assert_eq!(cal.reps(), 1);
        for alpha in [0.01, 0.5, 0.99] {
            assert_eq!(cal.quantile(alpha).unwrap(), cal.values()[0]);
        }
    }

    #[test]
    fn empirical_quantile_convention() {
        let cal = NullCalibration {
            kind: KernelKind::HoeffdingD,
            n: 10,
            p: 3,
            seed: 0,
            sorted: (1..=20).map(f64::from).collect(),
        };
        // F(y) >= 0.95 first at the 19th order statistic
        assert_eq!(cal.quantile(0.05).unwrap(), 19.0);
        assert_eq!(cal.quantile(0.5).unwrap(), 10.0);
        assert_eq!(cal.quantile(0.051).unwrap(), 19.0);
        assert_eq!(cal.p_value(19.0), 3.0 / 21.0);
        assert_eq!(cal.p_value(100.0), 1.0 / 21.0);
        assert_eq!(cal.p_value(-5.0), 1.0);
    }

    #[test]
    fn boundary_is_not_rejected() {
        let cal = NullCalibration {
            kind: KernelKind::HoeffdingD,
            n: 10,
            p: 3,
            seed: 0,
            sorted: vec![0.0; 5],
        };
        // S == threshold when max_u standardizes to exactly the threshold
        let spec = NullSpec::for_kernel(KernelKind::HoeffdingD);
        let shift = standardize_max(0.0, 10, 3, &spec).unwrap();
        let max_u = -shift / spec.scale(10);
        let out = cal.outcome(max_u, 0.05).unwrap();
        if out.statistic == out.threshold {
            assert!(!out.reject);
        }
        assert_eq!(out.reject, out.statistic > out.threshold);
    }

    #[test]
    fn input_errors() {
        let ranks = random_rank_matrix(5, 3, 0, 0);
        assert!(matches!(
            asymptotic_test_ranks(&ranks, KernelKind::HoeffdingD, 0.05),
            Err(Error::SampleTooSmall { .. })
        ));
        let ranks = random_rank_matrix(10, 3, 0, 0);
        assert!(matches!(
            asymptotic_test_ranks(&ranks, KernelKind::HoeffdingD, 1.5),
            Err(Error::InvalidAlpha(_))
        ));
        let tied =
            DataMatrix::from_columns(vec![vec![1.0; 8], (0..8).map(f64::from).collect()]).unwrap();
        assert!(matches!(
            asymptotic_test(&tied, KernelKind::TauStar, 0.05),
            Err(Error::TiesPresent { column: 0, .. })
        ));
    }

    #[test]
    fn record_is_flat() {
        let ranks = random_rank_matrix(30, 4, 0, 0);
        let out = asymptotic_test_ranks(&ranks, KernelKind::BkrR, 0.05).unwrap();
        let rec = out.to_record();
        assert_eq!(rec.kind, "r");
        assert_eq!(rec.mode, "asymptotic");
        assert_eq!(rec.seed, None);
        assert_eq!(out.reject, out.p_value < 0.05);
    }
}
