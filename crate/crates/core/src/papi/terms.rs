//! Per-sample terms of the objective and the two moving-average updates.

use super::config::TrainConfig;
use crate::data::PllDataset;
use crate::error::{Error, Result};
use crate::model::Prototypes;
use crate::numerics::{cross_entropy, kl_divergence, softmax_rows, RealMatrix, EPSILON_PROB};

/// Tolerance for pseudo-target rows summing to one.
pub const TARGET_TOLERANCE: f64 = 1e-6;

/// Softmax over prototype logits: `s_ij ∝ exp(z_i · c_j / τ)`.
pub fn prototypical_similarity(logits: &RealMatrix) -> RealMatrix {
    softmax_rows(logits)
}

/// Restricts `r` to the candidate set and renormalizes. Falls back to uniform
/// over the candidates when they carry less than [`EPSILON_PROB`] mass.
pub fn disambiguate(r: &[f64], candidates: &[usize]) -> Result<Vec<f64>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if let Some(&c) = candidates.iter().find(|&&c| c >= r.len()) {
        return Err(Error::InvalidArgument(format!("candidate {c} out of range for {} classes", r.len())));
    }
    let mass: f64 = candidates.iter().map(|&j| r[j]).sum();
    let mut u = vec![0.0; r.len()];
    if mass < EPSILON_PROB {
        let share = 1.0 / candidates.len() as f64;
        for &j in candidates {
            u[j] = share;
        }
    } else {
        for &j in candidates {
            u[j] = r[j] / mass;
        }
    }
    Ok(u)
}

/// `λ·p_old + (1 − λ)·u`. Both rows must vanish off `candidates`.
pub fn update_pseudo_target(p_old: &[f64], u: &[f64], lambda_ema: f64, candidates: &[usize]) -> Result<Vec<f64>> {
    if p_old.len() != u.len() {
        return Err(Error::Dimension {
            op: "update_pseudo_target",
            left: (1, p_old.len()),
            right: (1, u.len()),
        });
    }
    for (j, (&a, &b)) in p_old.iter().zip(u).enumerate() {
        if (a != 0.0 || b != 0.0) && candidates.binary_search(&j).is_err() {
            return Err(Error::Support(format!("class {j} carries mass but is not a candidate")));
        }
    }
    Ok(p_old
        .iter()
        .zip(u)
        .map(|(&a, &b)| lambda_ema * a + (1.0 - lambda_ema) * b)
        .collect())
}

/// `KL(p ‖ s1) + KL(p ‖ s2)`.
pub fn alignment_loss(p: &[f64], s1: &[f64], s2: &[f64]) -> Result<f64> {
    Ok(kl_divergence(p, s1)? + kl_divergence(p, s2)?)
}

/// `φ·L(p_i, ŝ) + (1 − φ)·L(p_partner, ŝ)` with `L` the two-view alignment loss.
pub fn mixed_alignment_loss(p_i: &[f64], p_partner: &[f64], s_hat1: &[f64], s_hat2: &[f64], mix_coeff: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mix_coeff) {
        return Err(Error::InvalidArgument(format!("mix coefficient must lie in [0, 1], got {mix_coeff}")));
    }
    Ok(mix_coeff * alignment_loss(p_i, s_hat1, s_hat2)?
        + (1.0 - mix_coeff) * alignment_loss(p_partner, s_hat1, s_hat2)?)
}

/// Cross-entropy of the classifier output `r` against the pseudo-target `p`.
pub fn classification_loss(p: &[f64], r: &[f64]) -> Result<f64> {
    cross_entropy(p, r)
}

/// Zero during warm-up, then a linear ramp to `align_weight_max`, then flat.
pub fn align_weight(epoch: usize, config: &TrainConfig) -> f64 {
    if epoch < config.warmup_epochs {
        return 0.0;
    }
    if config.ramp_epochs == 0 {
        return config.align_weight_max;
    }
    let progress = (epoch - config.warmup_epochs) as f64 / config.ramp_epochs as f64;
    config.align_weight_max * progress.min(1.0)
}

pub fn total_loss(cla: f64, ali: f64, align_weight: f64) -> f64 {
    cla + align_weight * ali
}

/// Per-example disambiguated label distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoTarget {
    p: RealMatrix,
}

impl PseudoTarget {
    /// Uniform over each example's candidate set.
    pub fn uniform(dataset: &PllDataset) -> Self {
        let mut p = RealMatrix::zeros(dataset.len(), dataset.num_classes());
        for (i, e) in dataset.examples().iter().enumerate() {
            let share = 1.0 / e.candidates.len() as f64;
            for &j in &e.candidates {
                p.set(i, j, share);
            }
        }
        PseudoTarget { p }
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.p.row(i)
    }

    pub fn rows(&self, indices: &[usize]) -> RealMatrix {
        self.p.select_rows(indices)
    }

    /// Disambiguates `r` against the candidates and folds it into row `i`.
    pub fn update_row(&mut self, i: usize, r: &[f64], candidates: &[usize], lambda_ema: f64) -> Result<()> {
        let u = disambiguate(r, candidates)?;
        let next = update_pseudo_target(self.p.row(i), &u, lambda_ema, candidates)?;
        self.p.row_mut(i).copy_from_slice(&next);
        Ok(())
    }

    /// Labels used for prototype updates: row argmax, lowest index on ties.
    pub fn pseudo_labels(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| crate::numerics::argmax(self.p.row(i))).collect()
    }

    /// Checks every row is a distribution supported exactly on its candidates.
    pub fn check_invariants(&self, dataset: &PllDataset) -> Result<()> {
        if self.p.rows() != dataset.len() {
            return Err(Error::Dimension {
                op: "pseudo target",
                left: self.p.shape(),
                right: (dataset.len(), dataset.num_classes()),
            });
        }
        for (i, e) in dataset.examples().iter().enumerate() {
            let row = self.p.row(i);
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > TARGET_TOLERANCE {
                return Err(Error::Distribution(format!("pseudo target row {i} sums to {sum}")));
            }
            for (j, &v) in row.iter().enumerate() {
                if v < 0.0 || (v != 0.0 && !e.is_candidate(j)) {
                    return Err(Error::Support(format!("pseudo target row {i} has mass {v} on class {j}")));
                }
            }
        }
        Ok(())
    }
}

/// Moving-average prototype update. Every view-1 row is folded in batch
/// order, then every view-2 row; each fold renormalizes the prototype.
pub fn update_prototypes(
    prototypes: &mut Prototypes,
    z1: &RealMatrix,
    z2: &RealMatrix,
    pseudo_labels: &[usize],
    gamma_proto: f64,
) -> Result<()> {
    if z1.shape() != z2.shape() || z1.rows() != pseudo_labels.len() || z1.cols() != prototypes.dim() {
        return Err(Error::Dimension {
            op: "update_prototypes",
            left: z1.shape(),
            right: (pseudo_labels.len(), prototypes.dim()),
        });
    }
    if let Some(&k) = pseudo_labels.iter().find(|&&k| k >= prototypes.num_classes()) {
        return Err(Error::InvalidArgument(format!("pseudo label {k} out of range")));
    }
    let mut next = vec![0.0; prototypes.dim()];
    for z in [z1, z2] {
        for (i, &k) in pseudo_labels.iter().enumerate() {
            for ((n, &c), &zi) in next.iter_mut().zip(prototypes.row(k)).zip(z.row(i)) {
                *n = gamma_proto * c + (1.0 - gamma_proto) * zi;
            }
            prototypes.set_normalized(k, &next)?;
        }
    }
    Ok(())
}
