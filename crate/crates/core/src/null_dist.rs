//! Limiting null distribution of the maximum-type statistics.
//!
//! Under independence `(n - 1) U / C(m, 2)` converges to the weighted
//! chi-square series `zeta = sum_v lambda_v (xi_v^2 - 1)`, and the
//! standardized maximum of `p(p - 1)/2` such variables is Gumbel with
//! distribution function `exp{-c exp(-y/2)}`, where
//! `c = 2^(mu1/2 - 2) kappa / Gamma(mu1/2)`.
//!
//! For the three built-in kernels the second-order projections are
//! multiples `c_h = 1, 2, 3` of Hoeffding's: eigenvalues
//! `c_h * 3 / (pi^4 i^2 j^2)`, sum `c_h / 12`, simple top eigenvalue, and a
//! common `kappa`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::stats::{binomial, KernelKind};

/// Constants of the Gumbel limit for one kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullSpec {
    /// Kernel order `m`.
    pub order: usize,
    /// Largest eigenvalue.
    pub lambda1: f64,
    /// Sum of all eigenvalues.
    pub lambda_sum: f64,
    /// Multiplicity of the largest eigenvalue.
    pub mu1: u32,
    /// `prod_{v > mu1} (1 - lambda_v / lambda1)^(-1/2)`.
    pub kappa: f64,
}

impl NullSpec {
    pub fn for_kernel(kind: KernelKind) -> Self {
        let c_h = match kind {
            KernelKind::HoeffdingD => 1.0,
            KernelKind::BkrR => 2.0,
            KernelKind::TauStar => 3.0,
        };
        Self {
            order: kind.order(),
            lambda1: c_h * 3.0 / PI.powi(4),
            lambda_sum: c_h / 12.0,
            mu1: 1,
            kappa: kappa_d(),
        }
    }

    /// Builds the constants from a (possibly truncated) nonincreasing
    /// eigenvalue sequence. `lambda_sum` overrides the sum of the listed
    /// values when the full series is known in closed form.
    pub fn from_eigenvalues(
        order: usize,
        eigenvalues: &[f64],
        lambda_sum: Option<f64>,
    ) -> Result<Self> {
        let lambda1 = *eigenvalues
            .first()
            .ok_or_else(|| Error::InvalidNullSpec("no eigenvalues".into()))?;
        if lambda1.is_nan() || lambda1 <= 0.0 {
            return Err(Error::InvalidNullSpec(
                "largest eigenvalue must be positive".into(),
            ));
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) || eigenvalues.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidNullSpec(
                "eigenvalues must be nonnegative and nonincreasing".into(),
            ));
        }
        let mu1 = eigenvalues
            .iter()
            .take_while(|&&v| (lambda1 - v).abs() <= 1e-12 * lambda1)
            .count();
        let log_kappa: f64 = eigenvalues[mu1..]
            .iter()
            .map(|&v| -0.5 * (1.0 - v / lambda1).ln())
            .sum();
        let lambda_sum = lambda_sum.unwrap_or_else(|| eigenvalues.iter().sum());
        let spec = Self {
            order,
            lambda1,
            lambda_sum,
            mu1: mu1 as u32,
            kappa: log_kappa.exp(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda1 > 0.0
            && self.lambda_sum >= self.lambda1 * (1.0 - 1e-12)
            && self.mu1 >= 1
            && self.kappa >= 1.0
            && self.order >= 2;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidNullSpec(format!("{self:?}")))
        }
    }

    /// `Gamma(mu1 / 2)`.
    pub fn gamma_half_mu1(&self) -> f64 {
        if self.mu1 == 1 {
            PI.sqrt()
        } else {
            statrs::function::gamma::gamma(self.mu1 as f64 / 2.0)
        }
    }

    /// The constant `c` in `exp{-c exp(-y/2)}`.
    pub fn gumbel_constant(&self) -> f64 {
        2f64.powf(self.mu1 as f64 / 2.0 - 2.0) * self.kappa / self.gamma_half_mu1()
    }

    /// Coefficient of `max U` in the standardized statistic:
    /// `(n - 1) / (lambda1 * C(m, 2))`.
    pub fn scale(&self, n: usize) -> f64 {
        (n as f64 - 1.0) / (self.lambda1 * binomial(self.order as u128, 2) as f64)
    }
}

/// One eigenvalue of Hoeffding's second-order kernel, with its index pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub value: f64,
    pub i: u32,
    pub j: u32,
}

/// Leading eigenvalues, sorted nonincreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSeries {
    pub entries: Vec<Eigenvalue>,
}

impl EigenSeries {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of the listed eigenvalues, accumulated smallest first.
    pub fn partial_sum(&self) -> f64 {
        self.entries.iter().rev().map(|e| e.value).sum()
    }

    /// `1/12` minus the partial sum: the mass of the eigenvalues not listed.
    pub fn tail_sum(&self) -> f64 {
        // 1/12 - sum = (3/pi^4) * (zeta(2)^2 - sum 1/(ij)^2), summed in the
        // unscaled units to keep the cancellation small
        let unscaled: f64 = self
            .entries
            .iter()
            .rev()
            .map(|e| {
                let k = e.i as f64 * e.j as f64;
                1.0 / (k * k)
            })
            .sum();
        3.0 / PI.powi(4) * (PI.powi(4) / 36.0 - unscaled)
    }
}

/// The `k` largest eigenvalues `3 / (pi^4 i^2 j^2)`, `i, j >= 1`.
pub fn eigen_series_d(k: usize) -> EigenSeries {
    if k == 0 {
        return EigenSeries {
            entries: Vec::new(),
        };
    }
    // smallest bound T with #{(i, j): i j <= T} >= k
    let count_upto = |t: u64| -> u64 { (1..=t).map(|i| t / i).sum() };
    let mut t = 1u64;
    while count_upto(t) < k as u64 {
        t *= 2;
    }
    let mut pairs: Vec<(u64, u32, u32)> = Vec::with_capacity(count_upto(t) as usize);
    for i in 1..=t {
        for j in 1..=t / i {
            pairs.push((i * j, i as u32, j as u32));
        }
    }
    pairs.sort_unstable();
    pairs.truncate(k);
    let c = 3.0 / PI.powi(4);
    EigenSeries {
        entries: pairs
            .into_iter()
            .map(|(prod, i, j)| {
                let prod = prod as f64;
                Eigenvalue {
                    value: c / (prod * prod),
                    i,
                    j,
                }
            })
            .collect(),
    }
}

// ln(x / sin x) for 0 < x < pi
fn log_x_over_sin(x: f64) -> f64 {
    if x < 0.1 {
        let x2 = x * x;
        x2 * (1.0 / 6.0 + x2 * (1.0 / 180.0 + x2 * (1.0 / 2835.0 + x2 / 37800.0)))
    } else {
        (x / x.sin()).ln()
    }
}

/// `kappa_D` truncated after the factor `n = terms`, with no tail correction.
pub fn kappa_d_partial(terms: usize) -> f64 {
    let log_prod: f64 = (2..=terms).map(|n| log_x_over_sin(PI / n as f64)).sum();
    (2.0 * log_prod.exp()).sqrt()
}

const KAPPA_TERMS: usize = 100_000;

/// `kappa_D = {2 prod_{n >= 2} (pi/n) / sin(pi/n)}^(1/2)`, about 2.4667.
pub fn kappa_d() -> f64 {
    static KAPPA: OnceLock<f64> = OnceLock::new();
    *KAPPA.get_or_init(compute_kappa_d)
}

fn compute_kappa_d() -> f64 {
    let n = KAPPA_TERMS as f64;
    let log_prod: f64 = (2..=KAPPA_TERMS)
        .rev()
        .map(|k| log_x_over_sin(PI / k as f64))
        .sum();
    // sum_{k > n} of pi^2/(6k^2) + pi^4/(180k^4) by Euler-Maclaurin
    let inv_sq_tail = 1.0 / n - 0.5 / (n * n) + 1.0 / (6.0 * n * n * n);
    let inv_quartic_tail = 1.0 / (3.0 * n * n * n);
    let tail = PI * PI / 6.0 * inv_sq_tail + PI.powi(4) / 180.0 * inv_quartic_tail;
    (2.0 * (log_prod + tail).exp()).sqrt()
}

/// Distribution function of the Gumbel limit.
pub fn gumbel_cdf(y: f64, spec: &NullSpec) -> f64 {
    (-spec.gumbel_constant() * (-y / 2.0).exp()).exp()
}

/// `1 - gumbel_cdf(y)`, without cancellation in the upper tail.
pub fn gumbel_sf(y: f64, spec: &NullSpec) -> f64 {
    -(-spec.gumbel_constant() * (-y / 2.0).exp()).exp_m1()
}

/// The `1 - alpha` quantile of the Gumbel limit.
pub fn q_alpha(alpha: f64, spec: &NullSpec) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let mu1 = spec.mu1 as f64;
    let gamma = spec.gamma_half_mu1();
    let level = (2f64.powf(mu1 - 4.0) * spec.kappa * spec.kappa / (gamma * gamma)).ln();
    // log(1/(1 - alpha)) = -ln_1p(-alpha)
    Ok(level - 2.0 * (-(-alpha).ln_1p()).ln())
}

/// Standardizes the largest off-diagonal statistic:
/// `scale * max_u - 4 log p - (mu1 - 2) log log p + Lambda / lambda1`.
pub fn standardize_max(max_u: f64, n: usize, p: usize, spec: &NullSpec) -> Result<f64> {
    if p < 2 {
        return Err(Error::DimensionTooSmall { p });
    }
    if n <= spec.order {
        return Err(Error::SampleTooSmall {
            n,
            min: spec.order + 1,
        });
    }
    let log_p = (p as f64).ln();
    Ok(
        spec.scale(n) * max_u - 4.0 * log_p - (spec.mu1 as f64 - 2.0) * log_p.ln()
            + spec.lambda_sum / spec.lambda1,
    )
}

const MC_BLOCK: usize = 4096;

/// Monte Carlo estimate of `P(sum_{v <= k} lambda_v (xi_v^2 - 1) > x)` over
/// the `k` leading eigenvalues of Hoeffding's kernel.
pub fn zeta_tail_mc(x: f64, k: usize, reps: usize, seed: u64) -> f64 {
    zeta_tail_mc_with(&eigen_series_d(k.max(1)).values(), x, reps, seed)
}

/// As [`zeta_tail_mc`], for an arbitrary finite eigenvalue list.
pub fn zeta_tail_mc_with(eigenvalues: &[f64], x: f64, reps: usize, seed: u64) -> f64 {
    if reps == 0 {
        return f64::NAN;
    }
    let blocks = reps.div_ceil(MC_BLOCK);
    let hits: usize = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let len = MC_BLOCK.min(reps - b * MC_BLOCK);
            (0..len)
                .filter(|_| draw_zeta(eigenvalues, &mut rng) > x)
                .count()
        })
        .sum();
    hits as f64 / reps as f64
}

fn draw_zeta<R: Rng>(eigenvalues: &[f64], rng: &mut R) -> f64 {
    eigenvalues
        .iter()
        .map(|&l| {
            let xi: f64 = rng.sample(StandardNormal);
            l * (xi * xi - 1.0)
        })
        .sum()
}

/// Draws `reps` copies of the standardized maximum
/// `max_j Y_j / lambda1 - 4 log p - (mu1 - 2) log log p + Lambda / lambda1`
/// over `p(p-1)/2` i.i.d. truncated weighted chi-square variables `Y_j`.
///
/// `eigenvalues` is the truncated series used for sampling; the centring
/// constants come from `spec`.
pub fn zeta_max_sample(
    spec: &NullSpec,
    eigenvalues: &[f64],
    p: usize,
    reps: usize,
    seed: u64,
) -> Vec<f64> {
    let d = p * (p - 1) / 2;
    let log_p = (p as f64).ln();
    let shift =
        -4.0 * log_p - (spec.mu1 as f64 - 2.0) * log_p.ln() + spec.lambda_sum / spec.lambda1;
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(seed, rep as u64);
            let max = (0..d)
                .map(|_| draw_zeta(eigenvalues, &mut rng))
                .fold(f64::NEG_INFINITY, f64::max);
            max / spec.lambda1 + shift
        })
        .collect()
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
