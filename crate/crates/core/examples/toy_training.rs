//! Train on four Gaussian blobs with uniform candidate sets and print the
//! per-epoch trace.
//!
//!     cargo run --release --example toy_training -- [q] [seed] [variant]

use papi::data::{uniform_candidates, BlobSpec};
use papi::papi::{train, TrainConfig, Variant};

fn main() -> papi::Result<()> {
    let mut args = std::env::args().skip(1);
    let q: f64 = args.next().map_or(0.5, |s| s.parse().expect("q"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let variant: Variant = args.next().map_or(Ok(Variant::Full), |s| s.parse())?;

    let blobs = BlobSpec {
        num_classes: 4,
        dim: 8,
        separation: 6.0,
    };
    let train_set = uniform_candidates(&blobs.sample(500, seed, 0)?, q, seed)?;
    let test_set = blobs.sample(200, seed, 1)?;
    println!(
        "{} train / {} test, mean candidate count {:.3}",
        train_set.len(),
        test_set.len(),
        train_set.mean_candidate_count()
    );

    let config = TrainConfig {
        seed,
        variant,
        ..TrainConfig::default()
    };
    let start = std::time::Instant::now();
    let outcome = train(&train_set, &test_set, &config)?;
    for m in outcome.metrics.iter().filter(|m| m.epoch % 20 == 0 || m.epoch + 1 == config.epochs) {
        println!(
            "epoch {:3}  cla {:.4}  ali {:.4}  test {:.4}  proto {:.4}  purity {:.4}  intra {:.3}  inter {:.3}",
            m.epoch,
            m.mean_cla_loss,
            m.mean_ali_loss,
            m.test_accuracy,
            m.proto_accuracy,
            m.disambiguation_purity,
            m.intra_class_sim.unwrap_or(f64::NAN),
            m.inter_class_sim
        );
    }
    println!("{:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
