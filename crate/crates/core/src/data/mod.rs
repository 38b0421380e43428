//! Partially labeled datasets: construction, candidate generation,
//! augmentation, mixup and CSV persistence.

pub mod augment;
pub mod dataset;
pub mod generate;
pub mod io;
pub mod oracle;

pub use augment::{augment, mix_with, mixup_batch, AugmentMode, AugmentationSpec, Composition, MixBatch};
pub use dataset::{CandidateKind, Example, GenerationMeta, PllDataset};
pub use generate::{instance_dependent_candidates, make_blobs, uniform_candidates, BlobSpec};
pub use io::{load_dataset, read_dataset, read_dataset_with_classes, save_dataset, write_dataset};
pub use oracle::{pretrain_oracle, train_oracle, Oracle, OracleConfig};
