//! Compares the objective's analytic gradient with central finite differences
//! on random small models, for every ablation variant.
//!
//!     cargo run --release --example gradient_check -- [models]

use papi::papi::{GradCheckProblem, Variant};

fn main() -> papi::Result<()> {
    let models: u64 = std::env::args().nth(1).map_or(10, |s| s.parse().expect("model count"));
    for variant in Variant::ALL {
        let mut worst = 0.0f64;
        let mut worst_block = String::new();
        for seed in 0..models {
            let report = GradCheckProblem::sample(seed, variant)?.check(1e-4)?;
            for (name, err) in &report.per_parameter_errors {
                if *err > worst {
                    worst = *err;
                    worst_block = name.clone();
                }
            }
            assert!(report.passed, "{variant} seed {seed}: {report:?}");
        }
        println!("{variant:<13} {models} models, max relative error {worst:.2e} ({worst_block})");
    }
    Ok(())
}
