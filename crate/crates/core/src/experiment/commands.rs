//! The experiment commands behind the CLI. Every command writes only
//! per-run files plus one table per command, and reruns with the same config
//! reproduce byte-identical CSVs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, Generator};
use super::plot::{write_svg, ChartSpec};
use crate::data::{
    instance_dependent_candidates, load_dataset, pretrain_oracle, save_dataset, uniform_candidates, BlobSpec, CandidateKind,
    PllDataset,
};
use crate::error::{Error, Result};
use crate::eval::{accuracy, embedding_similarity, linear_predictions, prototype_predictions};
use crate::model::{embed, load_checkpoint, save_checkpoint};
use crate::papi::{metrics_to_csv_string, read_metrics_csv, train, EpochMetrics, TrainConfig, Variant};
use crate::rng::{Purpose, SeedTree};

/// Identity of one training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunKey {
    pub variant: Variant,
    /// `None` when candidate sets are not drawn by the uniform generator.
    pub q: Option<f64>,
    pub seed: u64,
}

pub fn q_label(q: Option<f64>) -> String {
    q.map_or_else(|| "na".to_string(), |q| q.to_string())
}

impl RunKey {
    pub fn stem(&self) -> String {
        format!("{}_q{}_s{}", self.variant, q_label(self.q), self.seed)
    }

    pub fn metrics_file(&self) -> String {
        format!("metrics_{}.csv", self.stem())
    }

    pub fn checkpoint_file(&self) -> String {
        format!("checkpoint_{}.txt", self.stem())
    }
}

impl std::fmt::Display for RunKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "variant={} q={} seed={}", self.variant, q_label(self.q), self.seed)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub key: RunKey,
    pub metrics: Vec<EpochMetrics>,
}

impl RunResult {
    pub fn final_test_accuracy(&self) -> Option<f64> {
        self.metrics.last().map(|m| m.test_accuracy)
    }
}

/// One summary row: final test accuracy over seeds for a (variant, q) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub variant: Variant,
    pub q: Option<f64>,
    pub runs: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1); 0 for a single run.
    pub std: f64,
}

pub const SUMMARY_HEADER: &str = "variant,q,runs,mean_test_acc,std_test_acc";
pub const ABLATION_HEADER: &str = "q,variant,runs,mean_test_acc,std_test_acc,diff_vs_full";

pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn wrap(key: RunKey, e: Error) -> Error {
    Error::Run {
        run: key.to_string(),
        source: Box::new(e),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Train and test sets for one `(q, seed)` cell. Blob test sets are fully labeled.
pub fn build_datasets(config: &ExperimentConfig, q: Option<f64>, seed: u64) -> Result<(PllDataset, PllDataset)> {
    match config.generator {
        Generator::Csv => {
            let train_path = config.train_csv.as_ref().expect("validated");
            let test_path = config.test_csv.as_ref().expect("validated");
            Ok((load_dataset(train_path)?, load_dataset(test_path)?))
        }
        Generator::Blobs => {
            let seeds = SeedTree::new(seed);
            let blobs = BlobSpec {
                num_classes: config.num_classes,
                dim: config.dim,
                separation: config.separation,
            };
            let data_seed = seeds.purpose(Purpose::Data).seed();
            let clean = blobs.sample(config.train_per_class, data_seed, 0)?;
            let test = blobs.sample(config.test_per_class, data_seed, 1)?;
            let candidate_seed = seeds.purpose(Purpose::Candidates).seed();
            let train = match (config.candidates, q) {
                (CandidateKind::Uniform, Some(q)) => uniform_candidates(&clean, q, candidate_seed)?,
                (CandidateKind::Uniform, None) => {
                    return Err(Error::InvalidArgument("uniform candidates need a q".into()));
                }
                (CandidateKind::InstanceDependent, _) => {
                    let scores = pretrain_oracle(&clean, config.oracle_epochs, seeds.purpose(Purpose::Oracle).seed())?;
                    instance_dependent_candidates(&clean, &scores, candidate_seed)?
                }
            };
            Ok((train, test))
        }
    }
}

pub fn data_file_name(kind: CandidateKind, q: Option<f64>, seed: u64) -> String {
    format!("data_{}_q{}_s{}.csv", kind.as_str(), q_label(q), seed)
}

/// Writes one training CSV per `(q, seed)` plus the matching test split.
pub fn generate_data(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    if config.generator != Generator::Blobs {
        return Err(Error::InvalidArgument("generate-data needs generator = blobs".into()));
    }
    ensure_dir(&config.out_dir)?;
    let mut written = Vec::new();
    for &seed in &config.seeds {
        for q in config.q_axis() {
            let (train_set, test_set) = build_datasets(config, q, seed)?;
            let path = config.out_dir.join(data_file_name(config.candidates, q, seed));
            save_dataset(&train_set, &path)?;
            written.push(path);
            let test_path = config.out_dir.join(format!("test_s{seed}.csv"));
            if !written.contains(&test_path) {
                save_dataset(&test_set, &test_path)?;
                written.push(test_path);
            }
        }
    }
    Ok(written)
}

fn run_config(config: &ExperimentConfig, key: &RunKey) -> TrainConfig {
    TrainConfig {
        seed: key.seed,
        variant: key.variant,
        ..config.train.clone()
    }
}

/// Trains one run and writes its metrics CSV and checkpoint.
pub fn run_one(config: &ExperimentConfig, key: RunKey) -> Result<RunResult> {
    let (train_set, test_set) = build_datasets(config, key.q, key.seed).map_err(|e| wrap(key, e))?;
    let outcome = train(&train_set, &test_set, &run_config(config, &key)).map_err(|e| wrap(key, e))?;
    ensure_dir(&config.out_dir)?;
    let metrics_path = config.out_dir.join(key.metrics_file());
    write_file(&metrics_path, &metrics_to_csv_string(&outcome.metrics))?;
    save_checkpoint(&config.out_dir.join(key.checkpoint_file()), &outcome.params, &outcome.prototypes)?;
    Ok(RunResult {
        key,
        metrics: outcome.metrics,
    })
}

fn run_grid(config: &ExperimentConfig, variants: &[Variant]) -> Result<Vec<RunResult>> {
    let mut results = Vec::new();
    for q in config.q_axis() {
        for &variant in variants {
            for &seed in &config.seeds {
                results.push(run_one(config, RunKey { variant, q, seed })?);
            }
        }
    }
    Ok(results)
}

/// Groups runs into (variant, q) cells in first-seen order.
pub fn summarize(results: &[RunResult]) -> Vec<SummaryRow> {
    let mut cells: Vec<(Variant, Option<f64>, Vec<f64>)> = Vec::new();
    for r in results {
        let Some(acc) = r.final_test_accuracy() else { continue };
        match cells.iter_mut().find(|(v, q, _)| *v == r.key.variant && *q == r.key.q) {
            Some(cell) => cell.2.push(acc),
            None => cells.push((r.key.variant, r.key.q, vec![acc])),
        }
    }
    cells
        .into_iter()
        .map(|(variant, q, accs)| {
            let (mean, std) = mean_and_std(&accs);
            SummaryRow {
                variant,
                q,
                runs: accs.len(),
                mean,
                std,
            }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.variant, q_label(r.q), r.runs, r.mean, r.std);
    }
    out
}

/// Three rows per q (full first), with each variant's mean minus the full variant's mean.
pub fn ablation_csv(rows: &[SummaryRow]) -> String {
    let mut out = format!("{ABLATION_HEADER}\n");
    let mut qs: Vec<Option<f64>> = Vec::new();
    for r in rows {
        if !qs.contains(&r.q) {
            qs.push(r.q);
        }
    }
    for q in qs {
        let full = rows.iter().find(|r| r.q == q && r.variant == Variant::Full).map(|r| r.mean);
        for variant in Variant::ALL {
            if let Some(r) = rows.iter().find(|r| r.q == q && r.variant == variant) {
                let diff = full.map_or(f64::NAN, |f| r.mean - f);
                let _ = writeln!(out, "{},{},{},{},{},{}", q_label(q), variant, r.runs, r.mean, r.std, diff);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub runs: Vec<RunResult>,
    pub summary: Vec<SummaryRow>,
    pub summary_path: PathBuf,
}

/// Runs every (q, variant, seed) in the config and writes `summary.csv`.
pub fn train_command(config: &ExperimentConfig) -> Result<TrainReport> {
    let runs = run_grid(config, &config.variants)?;
    let summary = summarize(&runs);
    let summary_path = config.out_dir.join("summary.csv");
    write_file(&summary_path, &summary_csv(&summary))?;
    Ok(TrainReport {
        runs,
        summary,
        summary_path,
    })
}

/// Runs all three variants on the same seeds and writes `ablation.csv`.
pub fn ablate_command(config: &ExperimentConfig) -> Result<TrainReport> {
    let runs = run_grid(config, &Variant::ALL)?;
    let summary = summarize(&runs);
    let summary_path = config.out_dir.join("ablation.csv");
    write_file(&summary_path, &ablation_csv(&summary))?;
    Ok(TrainReport {
        runs,
        summary,
        summary_path,
    })
}

pub const EVALUATION_HEADER: &str = "variant,q,seed,test_acc,proto_acc,intra_sim,inter_sim";

/// Reloads each run's checkpoint, re-scores it on its test split and writes `evaluation.csv`.
pub fn evaluate_command(config: &ExperimentConfig) -> Result<PathBuf> {
    let mut out = format!("{EVALUATION_HEADER}\n");
    for q in config.q_axis() {
        for &variant in &config.variants {
            for &seed in &config.seeds {
                let key = RunKey { variant, q, seed };
                let (params, prototypes) = load_checkpoint(&config.out_dir.join(key.checkpoint_file()))?;
                let (_, test_set) = build_datasets(config, q, seed)?;
                let x = test_set.features();
                let labels = test_set.true_labels();
                let test_acc = accuracy(&linear_predictions(&params, &x)?, &labels)?;
                let proto_acc = accuracy(&prototype_predictions(&params, &prototypes, config.train.tau, &x)?, &labels)?;
                let sim = embedding_similarity(
                    &embed(&params, &x)?,
                    &labels,
                    config.train.similarity_pairs,
                    SeedTree::new(seed).purpose(Purpose::Eval).seed(),
                )?;
                let intra = sim.intra.map(|v| v.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{variant},{},{seed},{test_acc},{proto_acc},{intra},{}",
                    q_label(q),
                    sim.inter
                );
            }
        }
    }
    ensure_dir(&config.out_dir)?;
    let path = config.out_dir.join("evaluation.csv");
    write_file(&path, &out)?;
    Ok(path)
}

/// The three standard charts drawn for each metrics file.
pub fn standard_charts() -> Vec<ChartSpec> {
    vec![
        ChartSpec::new("loss", "Training loss", "loss", &["cla_loss", "ali_loss"]),
        ChartSpec::new("accuracy", "Accuracy", "accuracy", &["train_acc", "test_acc", "proto_acc", "disamb_purity"]),
        ChartSpec::new(
            "disagreement",
            "Linear vs prototype classifier disagreement",
            "test examples",
            &["lin_right_proto_wrong", "proto_right_lin_wrong"],
        ),
    ]
}

/// Draws the standard charts for one metrics CSV next to it.
pub fn plot_metrics_file(path: &Path) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let metrics = read_metrics_csv(text.as_bytes())?;
    if metrics.is_empty() {
        return Err(Error::InvalidArgument(format!("{}: no epochs to plot", path.display())));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("metrics");
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut written = Vec::new();
    for chart in standard_charts() {
        let svg = chart.render_csv(&text)?;
        let out = dir.join(format!("{stem}_{}.svg", chart.name));
        write_svg(&out, &svg)?;
        written.push(out);
    }
    Ok(written)
}

/// Plots every `metrics_*.csv` in the output directory.
pub fn plot_command(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dir = &config.out_dir;
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("metrics_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidArgument(format!("no metrics_*.csv files in {}", dir.display())));
    }
    let mut written = Vec::new();
    for f in files {
        written.extend(plot_metrics_file(&f)?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std_uses_n_minus_one() {
        let (m, s) = mean_and_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_std(&[0.7]), (0.7, 0.0));
    }

    #[test]
    fn run_names() {
        let key = RunKey {
            variant: Variant::NoMixup,
            q: Some(0.3),
            seed: 7,
        };
        assert_eq!(key.metrics_file(), "metrics_no_mixup_q0.3_s7.csv");
        assert_eq!(data_file_name(CandidateKind::Uniform, Some(0.0), 2), "data_uniform_q0_s2.csv");
        assert_eq!(data_file_name(CandidateKind::InstanceDependent, None, 2), "data_instance_dependent_qna_s2.csv");
    }

    fn fake(variant: Variant, q: f64, seed: u64, acc: f64) -> RunResult {
        let m = EpochMetrics {
            epoch: 0,
            mean_cla_loss: 0.0,
            mean_ali_loss: 0.0,
            train_accuracy: acc,
            test_accuracy: acc,
            proto_accuracy: acc,
            disambiguation_purity: 1.0,
            linear_right_proto_wrong: 0,
            proto_right_linear_wrong: 0,
            intra_class_sim: None,
            inter_class_sim: 0.0,
        };
        RunResult {
            key: RunKey { variant, q: Some(q), seed },
            metrics: vec![m],
        }
    }

    #[test]
    fn ablation_table_has_three_rows_per_q() {
        let mut runs = Vec::new();
        for q in [0.3, 0.7] {
            for v in Variant::ALL {
                for s in [1, 2] {
                    runs.push(fake(v, q, s, 0.9 + s as f64 * 0.01));
                }
            }
        }
        let csv = ablation_csv(&summarize(&runs));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], ABLATION_HEADER);
        assert_eq!(lines.len(), 1 + 6);
        assert_eq!(lines.iter().filter(|l| l.starts_with("0.7,")).count(), 3);
        assert!(lines[1].starts_with("0.3,full,2,"));
        assert!(lines[1].ends_with(",0"));
    }

    #[test]
    fn summary_of_single_seed_has_zero_std() {
        let rows = summarize(&[fake(Variant::Full, 0.5, 7, 0.93)]);
        assert_eq!(summary_csv(&rows), format!("{SUMMARY_HEADER}\nfull,0.5,1,0.93,0\n"));
    }
}
