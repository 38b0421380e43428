use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use papi::experiment::{
    ablate_command, evaluate_command, generate_data, plot_command, train_command, ExperimentConfig, TrainReport,
};

#[derive(Parser)]
#[command(name = "papi", version, about = "Partial-label learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write candidate-labeled training sets and test splits as CSV.
    GenerateData(Common),
    /// Train every (q, variant, seed) run and write summary.csv.
    Train(Common),
    /// Re-score saved checkpoints on their test splits.
    Evaluate(Common),
    /// Train all three variants on paired seeds and write ablation.csv.
    Ablate(Common),
    /// Draw SVG charts for every metrics CSV in the output directory.
    Plot(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` config file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single seed (overrides `seeds`).
    #[arg(long)]
    seed: Option<u64>,
    /// Single candidate flip probability (overrides `q`).
    #[arg(long)]
    q: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            config.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            config.seeds = vec![seed];
        }
        if let Some(q) = self.q {
            config.q = vec![q];
        }
        config.validate().context("invalid command-line override")?;
        Ok(config)
    }
}

fn report(r: &TrainReport) {
    for row in &r.summary {
        println!(
            "{:<13} q={:<5} runs={} test_acc={:.4} ± {:.4}",
            row.variant.as_str(),
            row.q.map_or("na".to_string(), |q| q.to_string()),
            row.runs,
            row.mean,
            row.std
        );
    }
    println!("wrote {}", r.summary_path.display());
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::GenerateData(c) => {
            for path in generate_data(&c.load()?)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Train(c) => report(&train_command(&c.load()?)?),
        Command::Ablate(c) => report(&ablate_command(&c.load()?)?),
        Command::Evaluate(c) => println!("wrote {}", evaluate_command(&c.load()?)?.display()),
        Command::Plot(c) => {
            for path in plot_command(&c.load()?)? {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}
