use crate::data::AugmentationSpec;
use crate::error::{Error, Result};
use crate::eval::DEFAULT_MAX_PAIRS;
use crate::model::ModelDims;

/// Ablation variant of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Full,
    /// Alignment on the unmixed views.
    NoMixup,
    /// Classification loss only.
    NoAlignment,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Full, Variant::NoMixup, Variant::NoAlignment];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoMixup => "no_mixup",
            Variant::NoAlignment => "no_alignment",
        }
    }

    pub fn uses_alignment(self) -> bool {
        self != Variant::NoAlignment
    }

    pub fn uses_mixup(self) -> bool {
        self == Variant::Full
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "no_mixup" => Ok(Variant::NoMixup),
            "no_alignment" => Ok(Variant::NoAlignment),
            other => Err(Error::InvalidArgument(format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Prototype softmax temperature.
    pub tau: f64,
    /// Weight on the previous pseudo-target in its moving average.
    pub lambda_ema: f64,
    /// Weight on the previous prototype in its moving average.
    pub gamma_proto: f64,
    /// Beta(α, α) parameter for the mixup coefficient.
    pub mixup_alpha: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub warmup_epochs: usize,
    pub ramp_epochs: usize,
    pub align_weight_max: f64,
    pub learning_rate: f64,
    pub cosine_lr: bool,
    pub weight_decay: f64,
    pub seed: u64,
    pub variant: Variant,
    pub augmentation: AugmentationSpec,
    pub encoder_hidden: Vec<usize>,
    pub encoder_dim: usize,
    pub projector_hidden: usize,
    pub projection_dim: usize,
    /// Pair cap for the per-epoch intra/inter-class similarity estimate.
    pub similarity_pairs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            tau: 0.1,
            lambda_ema: 0.9,
            gamma_proto: 0.99,
            mixup_alpha: 4.0,
            batch_size: 64,
            epochs: 200,
            warmup_epochs: 5,
            ramp_epochs: 20,
            align_weight_max: 1.0,
            learning_rate: 0.05,
            cosine_lr: true,
            weight_decay: 1e-4,
            seed: 0,
            variant: Variant::Full,
            augmentation: AugmentationSpec::default(),
            encoder_hidden: vec![64],
            encoder_dim: 64,
            projector_hidden: 64,
            projection_dim: 16,
            similarity_pairs: DEFAULT_MAX_PAIRS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return bad(format!("tau must be > 0, got {}", self.tau));
        }
        for (name, v) in [("lambda_ema", self.lambda_ema), ("gamma_proto", self.gamma_proto)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if !(self.mixup_alpha > 0.0) || !self.mixup_alpha.is_finite() {
            return bad(format!("mixup_alpha must be > 0, got {}", self.mixup_alpha));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if !(self.align_weight_max >= 0.0) || !self.align_weight_max.is_finite() {
            return bad(format!("align_weight_max must be >= 0, got {}", self.align_weight_max));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning_rate must be >= 0, got {}", self.learning_rate));
        }
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return bad(format!("weight_decay must be >= 0, got {}", self.weight_decay));
        }
        if self.similarity_pairs == 0 {
            return bad("similarity_pairs must be positive".into());
        }
        self.augmentation.validate()
    }

    pub fn model_dims(&self, input_dim: usize, num_classes: usize) -> ModelDims {
        ModelDims {
            input_dim,
            encoder_hidden: self.encoder_hidden.clone(),
            encoder_dim: self.encoder_dim,
            projector_hidden: self.projector_hidden,
            projection_dim: self.projection_dim,
            num_classes,
        }
    }

    /// Cosine decay from `learning_rate` to 0 over `epochs`, or constant.
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        if !self.cosine_lr || self.epochs == 0 {
            return self.learning_rate;
        }
        let progress = epoch as f64 / self.epochs as f64;
        self.learning_rate * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos())
    }
}
