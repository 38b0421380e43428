//! Vector-space view augmentations and mixup batches.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution, Normal};

use crate::error::{Error, Result};
use crate::numerics::RealMatrix;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentMode {
    Weak,
    Strong,
}

/// Which augmentation produces each of the two views. The first view is the
/// one the classifier sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    /// Weak first view, strong second view.
    StrongWeak,
    TwoStrong,
    TwoWeak,
}

impl Composition {
    pub fn modes(self) -> (AugmentMode, AugmentMode) {
        match self {
            Composition::StrongWeak => (AugmentMode::Weak, AugmentMode::Strong),
            Composition::TwoStrong => (AugmentMode::Strong, AugmentMode::Strong),
            Composition::TwoWeak => (AugmentMode::Weak, AugmentMode::Weak),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Composition::StrongWeak => "S+W",
            Composition::TwoStrong => "2xS",
            Composition::TwoWeak => "2xW",
        }
    }
}

impl std::str::FromStr for Composition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S+W" | "W+S" => Ok(Composition::StrongWeak),
            "2xS" | "2×S" => Ok(Composition::TwoStrong),
            "2xW" | "2×W" => Ok(Composition::TwoWeak),
            other => Err(Error::InvalidArgument(format!("unknown augmentation composition `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationSpec {
    pub weak_noise_sigma: f64,
    pub strong_noise_sigma: f64,
    pub strong_dropout_rate: f64,
    pub composition: Composition,
}

impl Default for AugmentationSpec {
    fn default() -> Self {
        AugmentationSpec {
            weak_noise_sigma: 0.2,
            strong_noise_sigma: 0.6,
            strong_dropout_rate: 0.2,
            composition: Composition::StrongWeak,
        }
    }
}

impl AugmentationSpec {
    pub fn identity() -> Self {
        AugmentationSpec {
            weak_noise_sigma: 0.0,
            strong_noise_sigma: 0.0,
            strong_dropout_rate: 0.0,
            composition: Composition::StrongWeak,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigma_ok = |s: f64| s >= 0.0 && s.is_finite();
        if !sigma_ok(self.weak_noise_sigma) || !sigma_ok(self.strong_noise_sigma) {
            return Err(Error::InvalidArgument("noise sigmas must be finite and >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.strong_dropout_rate) {
            return Err(Error::InvalidArgument(format!(
                "dropout rate must lie in [0, 1], got {}",
                self.strong_dropout_rate
            )));
        }
        Ok(())
    }
}

/// Weak: additive Gaussian noise. Strong: larger noise, then each coordinate
/// is zeroed independently with probability `strong_dropout_rate` (no rescaling).
pub fn augment(batch: &RealMatrix, mode: AugmentMode, spec: &AugmentationSpec, seed: u64) -> Result<RealMatrix> {
    spec.validate()?;
    let (sigma, dropout) = match mode {
        AugmentMode::Weak => (spec.weak_noise_sigma, 0.0),
        AugmentMode::Strong => (spec.strong_noise_sigma, spec.strong_dropout_rate),
    };
    let mut out = batch.clone();
    if sigma == 0.0 && dropout == 0.0 {
        return Ok(out);
    }
    let mut rng = rng_from_seed(seed);
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    for v in out.as_mut_slice() {
        if sigma > 0.0 {
            *v += noise.sample(&mut rng);
        }
        if dropout > 0.0 && rng.random::<f64>() < dropout {
            *v = 0.0;
        }
    }
    Ok(out)
}

/// A mixed batch `x̂_i = φ·x_i + (1 − φ)·x_{m(i)}` with one `φ` per batch.
#[derive(Debug, Clone, PartialEq)]
pub struct MixBatch {
    pub mixed_features: RealMatrix,
    pub partner_index: Vec<usize>,
    pub mix_coeff: f64,
}

/// Mixes with `φ ~ Beta(α, α)` and a uniformly random partner permutation.
pub fn mixup_batch(batch: &RealMatrix, alpha: f64, seed: u64) -> Result<MixBatch> {
    if batch.rows() < 2 {
        return Err(Error::BatchSize(batch.rows()));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("mixup alpha must be > 0, got {alpha}")));
    }
    let mut rng = rng_from_seed(seed);
    let beta = Beta::new(alpha, alpha).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let coeff = beta.sample(&mut rng).clamp(0.0, 1.0);
    let mut partner: Vec<usize> = (0..batch.rows()).collect();
    partner.shuffle(&mut rng);
    mix_with(batch, coeff, partner)
}

/// Mixes with a caller-chosen coefficient and partner permutation.
pub fn mix_with(batch: &RealMatrix, mix_coeff: f64, partner_index: Vec<usize>) -> Result<MixBatch> {
    if !(0.0..=1.0).contains(&mix_coeff) {
        return Err(Error::InvalidArgument(format!("mix coefficient must lie in [0, 1], got {mix_coeff}")));
    }
    if partner_index.len() != batch.rows() || !is_permutation(&partner_index) {
        return Err(Error::InvalidArgument("partner index must be a permutation of the batch".into()));
    }
    let mut mixed = RealMatrix::zeros(batch.rows(), batch.cols());
    for (i, &m) in partner_index.iter().enumerate() {
        for ((o, &a), &b) in mixed.row_mut(i).iter_mut().zip(batch.row(i)).zip(batch.row(m)) {
            *o = mix_coeff * a + (1.0 - mix_coeff) * b;
        }
    }
    Ok(MixBatch {
        mixed_features: mixed,
        partner_index,
        mix_coeff,
    })
}

fn is_permutation(idx: &[usize]) -> bool {
    let mut seen = vec![false; idx.len()];
    idx.iter().all(|&i| i < seen.len() && !std::mem::replace(&mut seen[i], true))
}
