//! The training objective and loop.

pub mod config;
pub mod gradcheck;
pub mod metrics;
pub mod objective;
pub mod terms;
pub mod train;

pub use config::{TrainConfig, Variant};
pub use gradcheck::{GradCheckProblem, MIN_RELU_MARGIN};
pub use metrics::{metrics_to_csv_string, read_metrics_csv, write_metrics_csv, EpochMetrics, METRICS_HEADER};
pub use objective::{batch_forward, batch_loss_and_grad, full_objective, BatchForward, BatchLoss, BatchViews, MixedViews, ObjectiveSettings};
pub use terms::{align_weight, disambiguate, update_prototypes, update_pseudo_target, PseudoTarget};
pub use train::{train, train_with_observer, BatchObservation, TrainOutcome};
