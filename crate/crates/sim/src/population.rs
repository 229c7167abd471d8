//! Monte Carlo estimates of population values of tau*.

use rankindep::rng::derive_seed;
use rankindep::{rank_transform, tau_star};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::generators::{generate, GeneratorFamily, GeneratorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub se: f64,
    pub reps: usize,
}

/// Averages the unbiased sample tau* over `reps` independent bivariate
/// datasets of size `n`.
pub fn estimate_population_taustar(
    family: GeneratorFamily,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<Estimate> {
    family.validate(n, 2)?;
    if reps < 2 {
        return Err(SimError::SpecInvalid("need at least two replicates".into()));
    }
    let values = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let spec = GeneratorSpec {
                family,
                n,
                p: 2,
                seed: derive_seed(seed, rep as u64),
            };
            let ranks = rank_transform(&generate(&spec)?)?;
            Ok(tau_star(&ranks.pair(0, 1))?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let r = reps as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Ok(Estimate {
        mean,
        se: (var / r).sqrt(),
        reps,
    })
}
