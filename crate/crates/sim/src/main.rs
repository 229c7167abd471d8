use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rankindep::null_dist::NullSpec;
use rankindep::{
    asymptotic_test, mc_exact_test, pairwise_matrix, q_alpha, rank_transform, KernelKind,
};
use rankindep_sim::input::{read_csv, write_matrix};
use rankindep_sim::{
    run_experiment, write_rows, ExperimentConfig, ExperimentMode, GeneratorFamily, Result, SimError,
};

#[derive(Parser)]
#[command(
    name = "rankindep",
    version,
    about = "Rank-based tests of mutual independence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Asymptotic,
    Mc,
}

#[derive(Subcommand)]
enum Command {
    /// Test mutual independence of the columns of a CSV file.
    Test {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        stat: KernelKind,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "asymptotic")]
        mode: Mode,
        /// Null datasets for the Monte Carlo critical value.
        #[arg(long, default_value_t = 5000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the outcome as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write the matrix of pairwise statistics.
    Stat {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        stat: KernelKind,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run a size or power experiment on a simulation design.
    Simulate {
        /// 5a-5d, 6a, 6b, 7a, 7b, 8a-8c, circle or gauss2:<rho>.
        #[arg(long)]
        example: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', value_parser = parse_kind, default_value = "d,r,taustar")]
        stats: Vec<KernelKind>,
        #[arg(long, value_enum, default_value = "asymptotic")]
        mode: Mode,
        /// Null datasets per experiment in Monte Carlo mode.
        #[arg(long, default_value_t = 5000)]
        null_reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV of result rows; a JSON sidecar is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the null-distribution constants of a statistic.
    Constants {
        #[arg(long, value_parser = parse_kind)]
        stat: KernelKind,
    },
}

fn parse_kind(s: &str) -> std::result::Result<KernelKind, String> {
    s.parse::<KernelKind>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Test {
            input,
            stat,
            alpha,
            mode,
            reps,
            seed,
            json,
        } => {
            let data = read_csv(&input)?;
            let outcome = match mode {
                Mode::Asymptotic => asymptotic_test(&data, stat, alpha)?,
                Mode::Mc => mc_exact_test(&data, stat, alpha, reps, seed)?,
            };
            let record = outcome.to_record();
            if json {
                println!("{}", serde_json::to_string_pretty(&record)?);
            } else {
                println!("statistic  {}", record.kind);
                println!("n          {}", record.n);
                println!("p          {}", record.p);
                println!("S          {:.6}", record.statistic);
                println!("threshold  {:.6}", record.threshold);
                println!("p-value    {:.6}", record.p_value);
                println!("reject     {}", record.reject);
                println!("mode       {}", record.mode);
                if let (Some(reps), Some(seed)) = (record.reps, record.seed) {
                    println!("reps       {reps}");
                    println!("seed       {seed}");
                }
            }
        }
        Command::Stat {
            input,
            stat,
            output,
        } => {
            let ranks = rank_transform(&read_csv(&input)?)?;
            write_matrix(&output, &pairwise_matrix(&ranks, stat)?)?;
        }
        Command::Simulate {
            example,
            n,
            p,
            reps,
            alpha,
            stats,
            mode,
            null_reps,
            seed,
            out,
        } => {
            let config = ExperimentConfig {
                family: example.parse::<GeneratorFamily>()?,
                n,
                p,
                kinds: stats,
                alpha,
                reps,
                mode: match mode {
                    Mode::Asymptotic => ExperimentMode::Asymptotic,
                    Mode::Mc => ExperimentMode::MonteCarlo { reps: null_reps },
                },
                master_seed: seed,
            };
            let rows = run_experiment(&config)?;
            println!(
                "{:<8} {:>5} {:>5} {:>8} {:>6} {:<10} {:>8}",
                "stat", "n", "p", "rate", "reps", "mode", "secs"
            );
            for row in &rows {
                println!(
                    "{:<8} {:>5} {:>5} {:>8.4} {:>6} {:<10} {:>8.2}",
                    row.kind, row.n, row.p, row.rejection_rate, row.reps, row.mode, row.wall_time
                );
            }
            if let Some(path) = out {
                write_rows(&path, &config, &rows)?;
            }
        }
        Command::Constants { stat } => {
            let spec = NullSpec::for_kernel(stat);
            println!("statistic  {stat}");
            println!("m          {}", spec.order);
            println!("lambda1    {:.12}", spec.lambda1);
            println!("Lambda     {:.12}", spec.lambda_sum);
            println!("mu1        {}", spec.mu1);
            println!("kappa      {:.12}", spec.kappa);
            for alpha in [0.01, 0.05, 0.10] {
                println!(
                    "Q_{alpha:<8} {:.12}",
                    q_alpha(alpha, &spec).map_err(SimError::from)?
                );
            }
        }
    }
    Ok(())
}
