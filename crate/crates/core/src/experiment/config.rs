//! Plain `key = value` experiment configuration.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Lists are comma-separated. Every key is optional and falls back to the
//! default shown by [`ExperimentConfig::serialize`] on a default config.
//!
//! | key | type | default |
//! |---|---|---|
//! | `generator` | `blobs` or `csv` | `blobs` |
//! | `num_classes`, `dim`, `separation` | blob layout | `4`, `8`, `6` |
//! | `train_per_class`, `test_per_class` | blob sizes | `500`, `200` |
//! | `train_csv`, `test_csv` | paths, required for `csv` | none |
//! | `candidates` | `uniform` or `instance_dependent` | `uniform` |
//! | `oracle_epochs`, `oracle_hidden` | scoring model budget | `50`, `32` |
//! | `seeds` | list of u64 | `1, 2, 3` |
//! | `q` | list of reals in [0, 1] | `0.5` |
//! | `variants` | list of `full`, `no_mixup`, `no_alignment` | `full` |
//! | `out` | output directory | `runs` |
//! | training keys | see [`TrainConfig`] | |

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::{CandidateKind, Composition};
use crate::error::{Error, Result};
use crate::papi::{TrainConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Blobs,
    Csv,
}

impl Generator {
    pub fn as_str(self) -> &'static str {
        match self {
            Generator::Blobs => "blobs",
            Generator::Csv => "csv",
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blobs" => Ok(Generator::Blobs),
            "csv" => Ok(Generator::Csv),
            other => Err(Error::InvalidArgument(format!("unknown generator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub generator: Generator,
    pub num_classes: usize,
    pub dim: usize,
    pub separation: f64,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub train_csv: Option<PathBuf>,
    pub test_csv: Option<PathBuf>,
    pub candidates: CandidateKind,
    pub oracle_epochs: usize,
    pub oracle_hidden: usize,
    pub seeds: Vec<u64>,
    pub q: Vec<f64>,
    pub variants: Vec<Variant>,
    pub out_dir: PathBuf,
    /// `seed` and `variant` here are overwritten per run.
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            generator: Generator::Blobs,
            num_classes: 4,
            dim: 8,
            separation: 6.0,
            train_per_class: 500,
            test_per_class: 200,
            train_csv: None,
            test_csv: None,
            candidates: CandidateKind::Uniform,
            oracle_epochs: 50,
            oracle_hidden: 32,
            seeds: vec![1, 2, 3],
            q: vec![0.5],
            variants: vec![Variant::Full],
            out_dir: PathBuf::from("runs"),
            train: TrainConfig::default(),
        }
    }
}

fn parse_value<T: FromStr>(raw: &str) -> std::result::Result<T, String> {
    raw.parse::<T>().map_err(|_| format!("expected {}, got `{raw}`", std::any::type_name::<T>()))
}

fn parse_list<T: FromStr>(raw: &str) -> std::result::Result<Vec<T>, String> {
    raw.split(',').map(|s| parse_value(s.trim())).collect()
}

fn parse_bool(raw: &str) -> std::result::Result<bool, String> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{raw}`")),
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        let mut seen: Vec<(String, usize)> = Vec::new();
        for (n, raw_line) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    line: line_no,
                    key: line.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
                return Err(Error::Config {
                    line: line_no,
                    key: key.to_string(),
                    message: format!("duplicate key, first set on line {first}"),
                });
            }
            seen.push((key.to_string(), line_no));
            config.set(key, value).map_err(|message| Error::Config {
                line: line_no,
                key: key.to_string(),
                message,
            })?;
        }
        config.validate_with_lines(&seen)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let t = &mut self.train;
        match key {
            "generator" => self.generator = v.parse().map_err(|e: Error| e.to_string())?,
            "num_classes" => self.num_classes = parse_value(v)?,
            "dim" => self.dim = parse_value(v)?,
            "separation" => self.separation = parse_value(v)?,
            "train_per_class" => self.train_per_class = parse_value(v)?,
            "test_per_class" => self.test_per_class = parse_value(v)?,
            "train_csv" => self.train_csv = Some(PathBuf::from(v)),
            "test_csv" => self.test_csv = Some(PathBuf::from(v)),
            "candidates" => self.candidates = v.parse().map_err(|e: Error| e.to_string())?,
            "oracle_epochs" => self.oracle_epochs = parse_value(v)?,
            "oracle_hidden" => self.oracle_hidden = parse_value(v)?,
            "seeds" => self.seeds = parse_list(v)?,
            "q" => self.q = parse_list(v)?,
            "variants" => {
                self.variants = v
                    .split(',')
                    .map(|s| s.trim().parse::<Variant>().map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "out" => self.out_dir = PathBuf::from(v),
            "tau" => t.tau = parse_value(v)?,
            "lambda_ema" => t.lambda_ema = parse_value(v)?,
            "gamma_proto" => t.gamma_proto = parse_value(v)?,
            "mixup_alpha" => t.mixup_alpha = parse_value(v)?,
            "batch_size" => t.batch_size = parse_value(v)?,
            "epochs" => t.epochs = parse_value(v)?,
            "warmup_epochs" => t.warmup_epochs = parse_value(v)?,
            "ramp_epochs" => t.ramp_epochs = parse_value(v)?,
            "align_weight_max" => t.align_weight_max = parse_value(v)?,
            "learning_rate" => t.learning_rate = parse_value(v)?,
            "cosine_lr" => t.cosine_lr = parse_bool(v)?,
            "weight_decay" => t.weight_decay = parse_value(v)?,
            "weak_noise_sigma" => t.augmentation.weak_noise_sigma = parse_value(v)?,
            "strong_noise_sigma" => t.augmentation.strong_noise_sigma = parse_value(v)?,
            "strong_dropout_rate" => t.augmentation.strong_dropout_rate = parse_value(v)?,
            "composition" => t.augmentation.composition = v.parse::<Composition>().map_err(|e| e.to_string())?,
            "encoder_hidden" => t.encoder_hidden = if v.is_empty() { Vec::new() } else { parse_list(v)? },
            "encoder_dim" => t.encoder_dim = parse_value(v)?,
            "projector_hidden" => t.projector_hidden = parse_value(v)?,
            "projection_dim" => t.projection_dim = parse_value(v)?,
            "similarity_pairs" => t.similarity_pairs = parse_value(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Range checks; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        self.validate_with_lines(&[])
    }

    fn validate_with_lines(&self, lines: &[(String, usize)]) -> Result<()> {
        let fail = |key: &str, message: String| {
            let line = lines.iter().find(|(k, _)| k == key).map_or(0, |(_, l)| *l);
            Err(Error::Config {
                line,
                key: key.to_string(),
                message,
            })
        };
        if self.seeds.is_empty() {
            return fail("seeds", "at least one seed is required".into());
        }
        if self.q.is_empty() {
            return fail("q", "at least one q is required".into());
        }
        if let Some(q) = self.q.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return fail("q", format!("q must lie in [0, 1], got {q}"));
        }
        if self.variants.is_empty() {
            return fail("variants", "at least one variant is required".into());
        }
        if self.num_classes < 2 {
            return fail("num_classes", format!("need at least 2 classes, got {}", self.num_classes));
        }
        if self.dim == 0 {
            return fail("dim", "must be positive".into());
        }
        if !(self.separation > 0.0) || !self.separation.is_finite() {
            return fail("separation", format!("must be > 0, got {}", self.separation));
        }
        if self.train_per_class == 0 {
            return fail("train_per_class", "must be positive".into());
        }
        if self.test_per_class == 0 {
            return fail("test_per_class", "must be positive".into());
        }
        if self.oracle_hidden == 0 {
            return fail("oracle_hidden", "must be positive".into());
        }
        if self.generator == Generator::Csv {
            if self.train_csv.is_none() {
                return fail("train_csv", "required when generator = csv".into());
            }
            if self.test_csv.is_none() {
                return fail("test_csv", "required when generator = csv".into());
            }
        }
        self.train.validate().or_else(|e| {
            let message = e.to_string();
            let key = KEYS
                .iter()
                .find(|k| message.contains(*k))
                .copied()
                .unwrap_or("training");
            fail(key, message)
        })
    }

    /// Text form that [`ExperimentConfig::parse`] reads back to an equal config.
    pub fn serialize(&self) -> String {
        let t = &self.train;
        let a = &t.augmentation;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("generator", self.generator.as_str().into());
        put("num_classes", self.num_classes.to_string());
        put("dim", self.dim.to_string());
        put("separation", self.separation.to_string());
        put("train_per_class", self.train_per_class.to_string());
        put("test_per_class", self.test_per_class.to_string());
        if let Some(p) = &self.train_csv {
            put("train_csv", p.display().to_string());
        }
        if let Some(p) = &self.test_csv {
            put("test_csv", p.display().to_string());
        }
        put("candidates", self.candidates.as_str().into());
        put("oracle_epochs", self.oracle_epochs.to_string());
        put("oracle_hidden", self.oracle_hidden.to_string());
        put("seeds", join(&self.seeds));
        put("q", join(&self.q));
        put("variants", join(&self.variants));
        put("out", self.out_dir.display().to_string());
        put("tau", t.tau.to_string());
        put("lambda_ema", t.lambda_ema.to_string());
        put("gamma_proto", t.gamma_proto.to_string());
        put("mixup_alpha", t.mixup_alpha.to_string());
        put("batch_size", t.batch_size.to_string());
        put("epochs", t.epochs.to_string());
        put("warmup_epochs", t.warmup_epochs.to_string());
        put("ramp_epochs", t.ramp_epochs.to_string());
        put("align_weight_max", t.align_weight_max.to_string());
        put("learning_rate", t.learning_rate.to_string());
        put("cosine_lr", t.cosine_lr.to_string());
        put("weight_decay", t.weight_decay.to_string());
        put("weak_noise_sigma", a.weak_noise_sigma.to_string());
        put("strong_noise_sigma", a.strong_noise_sigma.to_string());
        put("strong_dropout_rate", a.strong_dropout_rate.to_string());
        put("composition", a.composition.as_str().into());
        put("encoder_hidden", join(&t.encoder_hidden));
        put("encoder_dim", t.encoder_dim.to_string());
        put("projector_hidden", t.projector_hidden.to_string());
        put("projection_dim", t.projection_dim.to_string());
        put("similarity_pairs", t.similarity_pairs.to_string());
        out
    }

    /// Candidate-noise levels to sweep. Only the uniform generator on
    /// synthetic blobs is parameterized by `q`; other sources run once.
    pub fn q_axis(&self) -> Vec<Option<f64>> {
        if self.generator == Generator::Blobs && self.candidates == CandidateKind::Uniform {
            self.q.iter().copied().map(Some).collect()
        } else {
            vec![None]
        }
    }
}

/// Every accepted key, in serialization order.
pub const KEYS: [&str; 36] = [
    "generator",
    "num_classes",
    "dim",
    "separation",
    "train_per_class",
    "test_per_class",
    "train_csv",
    "test_csv",
    "candidates",
    "oracle_epochs",
    "oracle_hidden",
    "seeds",
    "q",
    "variants",
    "out",
    "tau",
    "lambda_ema",
    "gamma_proto",
    "mixup_alpha",
    "batch_size",
    "epochs",
    "warmup_epochs",
    "ramp_epochs",
    "align_weight_max",
    "learning_rate",
    "cosine_lr",
    "weight_decay",
    "weak_noise_sigma",
    "strong_noise_sigma",
    "strong_dropout_rate",
    "composition",
    "encoder_hidden",
    "encoder_dim",
    "projector_hidden",
    "projection_dim",
    "similarity_pairs",
];
