//! Parses a `key = value` experiment config, reports errors with their key
//! and line, and prints the fully resolved settings.
//!
//!     cargo run --example experiment_config -- [path]

use papi::experiment::ExperimentConfig;

fn main() {
    let config = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(std::path::Path::new(&path)),
        None => ExperimentConfig::parse("# toy sweep\nq = 0.1, 0.3, 0.5, 0.7\nvariants = full, no_alignment\n"),
    };
    match config {
        Ok(c) => print!("{}", c.serialize()),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
    for bad in ["q = 1.5", "learning_rat = 0.1", "epochs = ten"] {
        println!("`{bad}` -> {}", ExperimentConfig::parse(bad).unwrap_err());
    }
}
