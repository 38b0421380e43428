//! Trains a short run and renders its loss, accuracy and disagreement curves
//! as SVG next to the metrics CSV.
//!
//!     cargo run --release --example plot_metrics -- [out_dir]

use papi::experiment::{plot_metrics_file, run_one, ExperimentConfig, RunKey};
use papi::papi::Variant;

fn main() -> papi::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "plot_runs".into());
    let config = ExperimentConfig::parse(&format!("epochs = 40\nout = {out}\n"))?;
    let key = RunKey {
        variant: Variant::Full,
        q: Some(0.5),
        seed: 1,
    };
    run_one(&config, key)?;
    for path in plot_metrics_file(&config.out_dir.join(key.metrics_file()))? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
