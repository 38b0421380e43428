//! Representation diagnostics over training: linear vs prototype classifier
//! disagreement, prototype-classifier accuracy, and intra/inter-class cosine
//! similarity of the projected embeddings on the test split.
//!
//!     cargo run --release --example diagnostics -- [q]

use papi::data::{uniform_candidates, BlobSpec};
use papi::eval::{intra_inter_similarity, prototype_classifier_accuracy};
use papi::papi::{train, TrainConfig};

fn main() -> papi::Result<()> {
    let q: f64 = std::env::args().nth(1).map_or(0.7, |s| s.parse().expect("q"));
    let blobs = BlobSpec {
        num_classes: 6,
        dim: 6,
        separation: 3.0,
    };
    let train_set = uniform_candidates(&blobs.sample(300, 1, 0)?, q, 2)?;
    let test_set = blobs.sample(100, 1, 1)?;
    let config = TrainConfig {
        epochs: 60,
        seed: 3,
        ..TrainConfig::default()
    };
    let out = train(&train_set, &test_set, &config)?;
    println!("epoch  linear  proto  lin+/proto-  proto+/lin-  intra   inter");
    for m in out.metrics.iter().filter(|m| m.epoch % 5 == 0 || m.epoch + 1 == config.epochs) {
        println!(
            "{:>5}  {:.3}   {:.3}  {:>11}  {:>11}  {:.3}   {:.3}",
            m.epoch,
            m.test_accuracy,
            m.proto_accuracy,
            m.linear_right_proto_wrong,
            m.proto_right_linear_wrong,
            m.intra_class_sim.unwrap_or(f64::NAN),
            m.inter_class_sim
        );
    }
    let proto_acc = prototype_classifier_accuracy(&out.params, &out.prototypes, config.tau, &test_set)?;
    let sim = intra_inter_similarity(&out.params, &test_set, config.similarity_pairs, 0)?;
    println!(
        "final prototype accuracy {proto_acc:.4}; intra {:.3} over {} pairs, inter {:.3} over {} pairs",
        sim.intra.unwrap_or(f64::NAN),
        sim.intra_pairs,
        sim.inter,
        sim.inter_pairs
    );
    Ok(())
}
