//! Config files, experiment commands and SVG plots.

pub mod commands;
pub mod config;
pub mod plot;

pub use commands::{
    ablate_command, build_datasets, evaluate_command, generate_data, mean_and_std, plot_command, plot_metrics_file, run_one,
    summarize, train_command, RunKey, RunResult, SummaryRow, TrainReport,
};
pub use config::{ExperimentConfig, Generator};
pub use plot::{ChartSpec, Series};
