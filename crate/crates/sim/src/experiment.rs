//! Size and power experiments: repeated datasets, each tested by the
//! requested maximum-type tests, with rejections tallied per kernel.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rankindep::rng::derive_seed;
use rankindep::{
    asymptotic_outcome, max_statistics, rank_transform, simulate_null, KernelKind, NullCalibration,
    TestOutcome,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::generators::{generate, GeneratorFamily, GeneratorSpec};

// Seed-space tags, so datasets and null draws never share streams.
const DATA_TAG: u64 = 1;
const NULL_TAG: u64 = 2;

/// How each replicate's test is calibrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentMode {
    Asymptotic,
    /// Simulated critical values from `reps` null datasets, drawn once per
    /// experiment and shared by all replicates.
    MonteCarlo {
        reps: usize,
    },
}

impl ExperimentMode {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentMode::Asymptotic => "asymptotic",
            ExperimentMode::MonteCarlo { .. } => "mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: GeneratorFamily,
    pub n: usize,
    pub p: usize,
    pub kinds: Vec<KernelKind>,
    pub alpha: f64,
    pub reps: usize,
    pub mode: ExperimentMode,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.family.validate(self.n, self.p)?;
        if self.reps == 0 {
            return Err(SimError::SpecInvalid("reps must be at least 1".into()));
        }
        if self.kinds.is_empty() {
            return Err(SimError::SpecInvalid("no statistics requested".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(rankindep::Error::InvalidAlpha(self.alpha).into());
        }
        if let ExperimentMode::MonteCarlo { reps: 0 } = self.mode {
            return Err(SimError::SpecInvalid(
                "Monte Carlo mode needs at least one null draw".into(),
            ));
        }
        Ok(())
    }

    /// Generator request for replicate `rep`.
    pub fn dataset(&self, rep: usize) -> GeneratorSpec {
        GeneratorSpec {
            family: self.family,
            n: self.n,
            p: self.p,
            seed: derive_seed(derive_seed(self.master_seed, DATA_TAG), rep as u64),
        }
    }

    pub fn null_seed(&self) -> u64 {
        derive_seed(self.master_seed, NULL_TAG)
    }
}

/// One cell of a size or power table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub kind: String,
    pub n: usize,
    pub p: usize,
    pub rejection_rate: f64,
    pub rejections: usize,
    pub reps: usize,
    pub mode: String,
    /// Seconds for the whole experiment.
    pub wall_time: f64,
}

/// Per-replicate outcomes, `outcomes[rep][i]` for `kinds[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicates {
    pub kinds: Vec<KernelKind>,
    pub outcomes: Vec<Vec<TestOutcome>>,
}

impl Replicates {
    pub fn rejections(&self, i: usize) -> usize {
        self.outcomes.iter().filter(|o| o[i].reject).count()
    }

    pub fn decisions(&self, i: usize) -> Vec<bool> {
        self.outcomes.iter().map(|o| o[i].reject).collect()
    }
}

/// Null calibrations for a Monte Carlo experiment, in the order of `kinds`.
pub fn calibrate(config: &ExperimentConfig) -> Result<Vec<NullCalibration>> {
    match config.mode {
        ExperimentMode::Asymptotic => Ok(Vec::new()),
        ExperimentMode::MonteCarlo { reps } => Ok(simulate_null(
            config.n,
            config.p,
            &config.kinds,
            reps,
            config.null_seed(),
        )?),
    }
}

/// Runs every replicate and keeps the individual outcomes.
pub fn run_replicates(config: &ExperimentConfig) -> Result<Replicates> {
    config.validate()?;
    let calibrations = calibrate(config)?;
    run_replicates_with(config, &calibrations)
}

/// As [`run_replicates`], with calibrations supplied by the caller.
pub fn run_replicates_with(
    config: &ExperimentConfig,
    calibrations: &[NullCalibration],
) -> Result<Replicates> {
    config.validate()?;
    let outcomes = (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let data = generate(&config.dataset(rep))?;
            let ranks = rank_transform(&data)?;
            let maxima = max_statistics(&ranks, &config.kinds)?;
            config
                .kinds
                .iter()
                .zip(maxima)
                .enumerate()
                .map(|(i, (&kind, max_u))| match config.mode {
                    ExperimentMode::Asymptotic => Ok(asymptotic_outcome(
                        kind,
                        config.n,
                        config.p,
                        max_u,
                        config.alpha,
                    )?),
                    ExperimentMode::MonteCarlo { .. } => {
                        Ok(calibrations[i].outcome(max_u, config.alpha)?)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Replicates {
        kinds: config.kinds.clone(),
        outcomes,
    })
}

/// Runs the experiment and returns one row per kernel, sorted by kernel.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let start = Instant::now();
    let replicates = run_replicates(config)?;
    let wall_time = start.elapsed().as_secs_f64();
    let mut rows: Vec<(KernelKind, ExperimentRow)> = config
        .kinds
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let rejections = replicates.rejections(i);
            let row = ExperimentRow {
                kind: kind.short_name().to_string(),
                n: config.n,
                p: config.p,
                rejection_rate: rejections as f64 / config.reps as f64,
                rejections,
                reps: config.reps,
                mode: config.mode.name().to_string(),
                wall_time,
            };
            (kind, row)
        })
        .collect();
    rows.sort_by_key(|(kind, _)| *kind);
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a ExperimentConfig,
    rows: &'a [ExperimentRow],
}

/// Writes the rows as CSV and the config plus rows as JSON next to it
/// (same path, `.json` extension).
pub fn write_rows(path: &Path, config: &ExperimentConfig, rows: &[ExperimentRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    let mut sidecar = File::create(path.with_extension("json"))?;
    serde_json::to_writer_pretty(&mut sidecar, &Sidecar { config, rows })?;
    writeln!(sidecar)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(reps: usize) -> ExperimentConfig {
        ExperimentConfig {
            family: GeneratorFamily::GaussIid,
            n: 20,
            p: 5,
            kinds: vec![KernelKind::TauStar, KernelKind::HoeffdingD],
            alpha: 0.05,
            reps,
            mode: ExperimentMode::Asymptotic,
            master_seed: 3,
        }
    }

    #[test]
    fn single_replicate_rate_is_zero_or_one() {
        let rows = run_experiment(&config(1)).unwrap();
        for row in rows {
            assert!(row.rejection_rate == 0.0 || row.rejection_rate == 1.0);
        }
    }

    #[test]
    fn rows_are_sorted_by_kind() {
        let rows = run_experiment(&config(3)).unwrap();
        let kinds: Vec<_> = rows.iter().map(|r| r.kind.as_str()).collect();
        assert_eq!(kinds, ["d", "taustar"]);
    }

    #[test]
    fn invalid_configs() {
        let mut c = config(0);
        assert!(matches!(c.validate(), Err(SimError::SpecInvalid(_))));
        c.reps = 2;
        c.alpha = 1.5;
        assert!(c.validate().is_err());
        c.alpha = 0.05;
        c.mode = ExperimentMode::MonteCarlo { reps: 0 };
        assert!(c.validate().is_err());
    }
}
