//! Candidate-set statistics for the uniform and instance-dependent generators.
//!
//!     cargo run --release --example candidate_generation

use papi::data::{instance_dependent_candidates, make_blobs, pretrain_oracle, uniform_candidates};

fn main() -> papi::Result<()> {
    let (k, n) = (10, 10_000);
    let clean = make_blobs(k, n / k, k, 3.0, 42)?;

    println!("uniform generator, K={k}, N={n}");
    println!("{:>5} {:>10} {:>10} {:>10}", "q", "mean |Y|", "expected", "3 s.e.");
    for q in [0.0, 0.1, 0.3, 0.5, 0.7, 1.0] {
        let ds = uniform_candidates(&clean, q, 7)?;
        let expected = 1.0 + (k - 1) as f64 * q;
        let se = ((k - 1) as f64 * q * (1.0 - q) / n as f64).sqrt();
        println!("{q:>5} {:>10.4} {expected:>10.4} {:>10.4}", ds.mean_candidate_count(), 3.0 * se);
    }

    let scores = pretrain_oracle(&clean, 50, 3)?;
    let ds = instance_dependent_candidates(&clean, &scores, 4)?;
    let mut size_histogram = vec![0usize; k + 1];
    for e in ds.examples() {
        size_histogram[e.candidates.len()] += 1;
    }
    println!("\ninstance-dependent generator, mean |Y| = {:.4}", ds.mean_candidate_count());
    for (size, count) in size_histogram.iter().enumerate().filter(|(_, c)| **c > 0) {
        println!("  |Y| = {size:>2}: {count}");
    }
    Ok(())
}
