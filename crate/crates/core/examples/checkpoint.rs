//! Saves a trained model with its prototypes, reloads it and checks that the
//! reloaded model makes the same predictions.
//!
//!     cargo run --release --example checkpoint

use papi::data::{uniform_candidates, BlobSpec};
use papi::eval::{linear_predictions, prototype_predictions};
use papi::model::{read_checkpoint, write_checkpoint};
use papi::papi::{train, TrainConfig};

fn main() -> papi::Result<()> {
    let blobs = BlobSpec {
        num_classes: 3,
        dim: 4,
        separation: 4.0,
    };
    let train_set = uniform_candidates(&blobs.sample(100, 5, 0)?, 0.4, 6)?;
    let test_set = blobs.sample(50, 5, 1)?;
    let config = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let out = train(&train_set, &test_set, &config)?;

    let text = write_checkpoint(&out.params, &out.prototypes);
    let (params, prototypes) = read_checkpoint(&text)?;
    assert_eq!(params, out.params);
    let x = test_set.features();
    assert_eq!(linear_predictions(&params, &x)?, linear_predictions(&out.params, &x)?);
    assert_eq!(
        prototype_predictions(&params, &prototypes, config.tau, &x)?,
        prototype_predictions(&out.params, &out.prototypes, config.tau, &x)?
    );
    println!("{} parameters, {} bytes of checkpoint, reload is exact", params.num_parameters(), text.len());
    println!("{}", text.lines().take(2).collect::<Vec<_>>().join("\n"));
    Ok(())
}
