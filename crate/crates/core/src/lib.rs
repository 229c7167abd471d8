//! Consistent rank correlations and maximum-type tests of mutual independence.
//!
//! Hoeffding's D, Blum-Kiefer-Rosenblatt's R and Bergsma-Dassios-Yanagimoto's
//! tau* are degenerate rank-based U-statistics that vanish exactly under
//! independence. This crate computes them with fast counting algorithms,
//! aggregates the pairwise values of a `p`-variate sample into a maximum,
//! and calibrates that maximum either with its Gumbel limit or with a
//! simulated exact null distribution.
//!
//! ```
//! use rankindep::{asymptotic_test, DataMatrix, KernelKind};
//!
//! let cols: Vec<Vec<f64>> = (0..4)
//!     .map(|j| (0..40).map(|i| ((i * (7 + 2 * j) + j) % 41) as f64).collect())
//!     .collect();
//! let data = DataMatrix::from_columns(cols).unwrap();
//! let outcome = asymptotic_test(&data, KernelKind::TauStar, 0.05).unwrap();
//! assert!(outcome.p_value >= 0.0 && outcome.p_value <= 1.0);
//! ```

pub mod data;
mod dombits;
pub mod error;
mod fenwick;
pub mod kernel;
pub mod maxtest;
pub mod null_dist;
pub mod rng;
pub mod stats;

pub use data::{rank_transform, DataMatrix, PairedRanks, RankMatrix};
pub use error::{Error, Result};
pub use kernel::{kernel_eval, u_statistic_brute};
pub use maxtest::{
    asymptotic_outcome, asymptotic_test, asymptotic_test_ranks, max_statistics, mc_exact_test,
    mc_exact_test_with, pairwise_matrices, pairwise_matrix, random_rank_matrix, simulate_null,
    NullCalibration, OutcomeRecord, PairStatMatrix, TestMode, TestOutcome,
};
pub use null_dist::{
    eigen_series_d, gumbel_cdf, gumbel_sf, kappa_d, ks_distance, q_alpha, standardize_max,
    zeta_tail_mc, EigenSeries, NullSpec,
};
pub use stats::{
    bkr_r, concordance_counts, hoeffding_d, pair_stats, tau_star, CountTriple, KernelKind,
    PairStats,
};
