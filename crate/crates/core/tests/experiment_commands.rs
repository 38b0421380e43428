use std::fs;
use std::path::Path;

use papi::data::load_dataset;
use papi::experiment::{
    ablate_command, evaluate_command, generate_data, mean_and_std, plot_command, plot_metrics_file, train_command,
    ExperimentConfig,
};
use papi::papi::{read_metrics_csv, Variant};
use papi::Error;

fn small(out: &Path, extra: &str) -> ExperimentConfig {
    let overridden: Vec<&str> = extra.lines().filter_map(|l| l.split('=').next()).map(str::trim).collect();
    let base = ["epochs = 3", "train_per_class = 20", "test_per_class = 8", "batch_size = 16", "warmup_epochs = 0", "ramp_epochs = 2"]
        .into_iter()
        .filter(|l| !overridden.contains(&l.split('=').next().unwrap().trim()));
    let text = format!("{}\nout = {}\n{extra}", base.collect::<Vec<_>>().join("\n"), out.display());
    ExperimentConfig::parse(&text).unwrap()
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap()
}

#[test]
fn generate_data_is_deterministic_and_names_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let extra = "seeds = 4\nq = 0, 0.3\nnum_classes = 10\ndim = 10\ntrain_per_class = 300\n";
    let written_a = generate_data(&small(a.path(), extra)).unwrap();
    generate_data(&small(b.path(), extra)).unwrap();
    let names: Vec<String> = written_a
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["data_uniform_q0_s4.csv", "test_s4.csv", "data_uniform_q0.3_s4.csv"]);
    for name in &names {
        assert_eq!(read(&a.path().join(name)), read(&b.path().join(name)), "{name}");
    }
    let singletons = load_dataset(&a.path().join("data_uniform_q0_s4.csv")).unwrap();
    assert!(singletons.examples().iter().all(|e| e.candidates.len() == 1));
    let noisy = load_dataset(&a.path().join("data_uniform_q0.3_s4.csv")).unwrap();
    let n = noisy.len() as f64;
    let se = (9.0 * 0.3 * 0.7 / n).sqrt();
    assert!((noisy.mean_candidate_count() - 3.7).abs() <= 3.0 * se);
}

#[test]
fn single_seed_summary_has_zero_std_and_reruns_match() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let extra = "seeds = 7\nvariants = full, no_mixup, no_alignment\n";
    let report = train_command(&small(a.path(), extra)).unwrap();
    train_command(&small(b.path(), extra)).unwrap();
    assert_eq!(report.summary.len(), 3);
    let text = fs::read_to_string(&report.summary_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "variant,q,runs,mean_test_acc,std_test_acc");
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        assert!(line.ends_with(",0"), "{line}");
    }
    for name in ["summary.csv", "metrics_full_q0.5_s7.csv", "metrics_no_alignment_q0.5_s7.csv"] {
        assert_eq!(read(&a.path().join(name)), read(&b.path().join(name)), "{name}");
    }
    assert!(a.path().join("checkpoint_full_q0.5_s7.txt").exists());
}

#[test]
fn summary_recomputes_from_per_run_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(dir.path(), "seeds = 1, 2, 3\nq = 0.3\n");
    let report = train_command(&config).unwrap();
    let finals: Vec<f64> = [1, 2, 3]
        .iter()
        .map(|s| {
            let text = fs::read_to_string(dir.path().join(format!("metrics_full_q0.3_s{s}.csv"))).unwrap();
            read_metrics_csv(text.as_bytes()).unwrap().last().unwrap().test_accuracy
        })
        .collect();
    let (mean, std) = mean_and_std(&finals);
    assert_eq!(report.summary[0].mean, mean);
    assert_eq!(report.summary[0].std, std);
    let row = fs::read_to_string(&report.summary_path).unwrap();
    assert!(row.lines().nth(1).unwrap().starts_with("full,0.3,3,"));
}

#[test]
fn ablation_pairs_variants_and_matches_train() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let extra = "seeds = 2, 3\nq = 0.3, 0.7\n";
    let ablation = ablate_command(&small(a.path(), extra)).unwrap();
    let text = fs::read_to_string(&ablation.summary_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "q,variant,runs,mean_test_acc,std_test_acc,diff_vs_full");
    assert_eq!(lines.len(), 1 + 6);
    for q in ["0.3", "0.7"] {
        let rows: Vec<&&str> = lines.iter().filter(|l| l.starts_with(&format!("{q},"))).collect();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].contains(",full,") && rows[1].contains(",no_mixup,") && rows[2].contains(",no_alignment,"));
    }
    let trained = train_command(&small(b.path(), extra)).unwrap();
    let full = ablation.summary.iter().filter(|r| r.variant == Variant::Full);
    for (x, y) in full.zip(&trained.summary) {
        assert_eq!(x, y);
    }
    assert_eq!(
        read(&a.path().join("metrics_full_q0.7_s3.csv")),
        read(&b.path().join("metrics_full_q0.7_s3.csv"))
    );
}

#[test]
fn evaluate_rescoring_matches_final_training_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(dir.path(), "seeds = 5\n");
    let report = train_command(&config).unwrap();
    let path = evaluate_command(&config).unwrap();
    let text = fs::read_to_string(path).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let last = report.runs[0].metrics.last().unwrap();
    assert_eq!(row[0..3], ["full", "0.5", "5"]);
    assert_eq!(row[3].parse::<f64>().unwrap(), last.test_accuracy);
    assert_eq!(row[4].parse::<f64>().unwrap(), last.proto_accuracy);
}

#[test]
fn plots_are_well_formed_svg() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(dir.path(), "seeds = 1\nepochs = 2\n");
    train_command(&config).unwrap();
    let written = plot_command(&config).unwrap();
    assert_eq!(written.len(), 3);
    for path in written {
        let svg = fs::read_to_string(&path).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let polylines: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("polyline")).collect();
        assert!(!polylines.is_empty());
        for p in polylines {
            assert_eq!(p.attribute("points").unwrap().split(' ').count(), 2, "{}", path.display());
        }
        assert!(doc.descendants().any(|n| n.text() == Some("epoch")));
    }
}

#[test]
fn plotting_empty_metrics_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("metrics_empty.csv");
    fs::write(&path, "epoch,cla_loss,ali_loss,train_acc,test_acc,proto_acc,disamb_purity,lin_right_proto_wrong,proto_right_lin_wrong,intra_sim,inter_sim\n").unwrap();
    assert!(plot_metrics_file(&path).is_err());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_errors_name_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "epochs = 5\n\nq = 0.1, 1.5\n").unwrap();
    match ExperimentConfig::load(&path) {
        Err(Error::Config { line, key, .. }) => assert_eq!((line, key.as_str()), (3, "q")),
        other => panic!("{other:?}"),
    }
    assert!(matches!(ExperimentConfig::load(&dir.path().join("missing.cfg")), Err(Error::Io { .. })));
}

#[test]
fn csv_generator_trains_from_files() {
    let dir = tempfile::tempdir().unwrap();
    generate_data(&small(dir.path(), "seeds = 1\nq = 0.3\n")).unwrap();
    let extra = format!(
        "generator = csv\ntrain_csv = {}\ntest_csv = {}\nseeds = 1\n",
        dir.path().join("data_uniform_q0.3_s1.csv").display(),
        dir.path().join("test_s1.csv").display()
    );
    let report = train_command(&small(&dir.path().join("from_csv"), &extra)).unwrap();
    assert_eq!(report.runs.len(), 1);
    assert!(dir.path().join("from_csv/metrics_full_qna_s1.csv").exists());
}
