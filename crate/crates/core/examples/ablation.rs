//! Full method against its two ablations on the same seeds, written as
//! `ablation.csv` plus one metrics CSV per run.
//!
//!     cargo run --release --example ablation -- [out_dir] [epochs]

use papi::experiment::{ablate_command, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "ablation_runs".into());
    let epochs = args.next().unwrap_or_else(|| "60".into());
    let config = ExperimentConfig::parse(&format!("q = 0.3, 0.7\nseeds = 1, 2\nepochs = {epochs}\nout = {out}\n"))?;
    let report = ablate_command(&config)?;
    print!("{}", std::fs::read_to_string(&report.summary_path)?);
    Ok(())
}
