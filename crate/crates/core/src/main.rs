use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mifunnel::experiment::{
    env_seed, load_config, parse_seed_list, run_experiment, ExperimentId, ExperimentSpec,
};
use mifunnel::mine::{estimate_mi, MineConfig};
use mifunnel::oracle::{gaussian_mi, GaussianPairSpec};

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "mifunnel", version, about = "Neural mutual information estimation and privacy-utility trade-off experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write runs.csv, summary.json and an SVG chart.
    Run {
        /// fig4_convergence, fig5_budget_traces, fig6_budget_curve,
        /// fig7_noise_traces, fig8_noise_bars or fig9_gauss_params
        #[arg(value_parser = parse_id)]
        experiment: ExperimentId,
        /// Configuration file overriding the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (default: results/<experiment>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated seeds, e.g. 0,1,2.
        #[arg(long, value_parser = parse_seeds)]
        seeds: Option<SeedList>,
    },
    /// Estimate the mutual information of a standard Gaussian pair with MINE.
    Estimate {
        /// Correlation of the pair.
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 20_000)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.0005)]
        learning_rate: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Closed-form mutual information of a Gaussian pair.
    Oracle {
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
    },
}

fn parse_id(s: &str) -> Result<ExperimentId, String> {
    s.parse().map_err(|e: mifunnel::Error| e.to_string())
}

#[derive(Debug, Clone)]
struct SeedList(Vec<u64>);

fn parse_seeds(s: &str) -> Result<SeedList, String> {
    parse_seed_list(s).map(SeedList).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn execute(command: Command) -> mifunnel::Result<()> {
    match command {
        Command::Run {
            experiment,
            config,
            out,
            seeds,
        } => {
            env_seed()?;
            let mut spec = match config {
                Some(path) => load_config(&path, experiment)?,
                None => ExperimentSpec::defaults(experiment),
            };
            if let Some(out) = out {
                spec.output_dir = out;
            }
            if let Some(SeedList(seeds)) = seeds {
                spec.seeds = seeds;
            }
            let output = run_experiment(&spec)?;
            for group in &output.summary.groups {
                let eps = group.epsilon.map(|e| format!(" eps={e}")).unwrap_or_default();
                println!(
                    "{}{eps} {} std={}: median {} = {:.4} bits over {} seed(s)",
                    experiment,
                    group.noise_kind.as_str(),
                    group.noise_std,
                    group.metric,
                    group.median,
                    group.seeds.len()
                );
            }
            println!("wrote {}", output.csv_path.display());
            println!("wrote {}", output.summary_path.display());
            println!("wrote {}", output.svg_path.display());
            Ok(())
        }
        Command::Estimate {
            rho,
            epochs,
            batch_size,
            learning_rate,
            seed,
        } => {
            let truth = gaussian_mi(&GaussianPairSpec::standard(rho)?)?;
            let config = MineConfig {
                epochs,
                batch_size,
                learning_rate,
                seed: seed.or(env_seed()?).unwrap_or(0),
                ..MineConfig::default()
            };
            let trace = estimate_mi(
                |n, rng| mifunnel::experiment::gaussian_pair(rho, n, rng),
                &config,
            )?;
            println!("estimate_bits {}", trace.final_bits);
            println!("true_bits {truth}");
            Ok(())
        }
        Command::Oracle { rho } => {
            println!("{}", gaussian_mi(&GaussianPairSpec::standard(rho)?)?);
            Ok(())
        }
    }
}
