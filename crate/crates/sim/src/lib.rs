//! Simulation designs, size and power experiments, and the command-line
//! front end for `rankindep`.

pub mod error;
pub mod experiment;
pub mod generators;
pub mod input;
pub mod population;

pub use error::{Result, SimError};
pub use experiment::{
    run_experiment, run_replicates, run_replicates_with, write_rows, ExperimentConfig,
    ExperimentMode, ExperimentRow, Replicates,
};
pub use generators::{generate, GeneratorFamily, GeneratorSpec};
pub use population::{estimate_population_taustar, Estimate};
