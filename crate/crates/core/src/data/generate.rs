//! Synthetic blobs and the two candidate-set generators.

use rand::Rng;
use rand_distr::StandardNormal;

use super::dataset::{CandidateKind, Example, GenerationMeta, PllDataset};
use crate::error::{Error, Result};
use crate::numerics::RealMatrix;
use crate::rng::{rng_from_seed, SeedTree};

/// Gaussian blob layout shared by a train and a test split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobSpec {
    pub num_classes: usize,
    pub dim: usize,
    pub separation: f64,
}

impl BlobSpec {
    fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::InvalidArgument(format!("blobs need K >= 2, got {}", self.num_classes)));
        }
        if self.dim == 0 {
            return Err(Error::InvalidArgument("blobs need dim >= 1".into()));
        }
        if !(self.separation > 0.0) || !self.separation.is_finite() {
            return Err(Error::InvalidArgument(format!("separation must be > 0, got {}", self.separation)));
        }
        Ok(())
    }

    /// Class means `separation · u_k`. The `u_k` are the standard basis when
    /// `K <= dim`, otherwise seeded random unit directions.
    pub fn class_means(&self, seed: u64) -> Result<RealMatrix> {
        self.validate()?;
        let (k, d) = (self.num_classes, self.dim);
        let mut means = RealMatrix::zeros(k, d);
        if k <= d {
            for c in 0..k {
                means.set(c, c, self.separation);
            }
        } else {
            let mut rng = SeedTree::new(seed).child(0).rng();
            for c in 0..k {
                let mut dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                for v in &mut dir {
                    *v *= self.separation / norm;
                }
                means.row_mut(c).copy_from_slice(&dir);
            }
        }
        Ok(means)
    }

    /// Draws `per_class` unit-variance samples around each mean. `split`
    /// selects an independent noise stream so train and test never share draws.
    pub fn sample(&self, per_class: usize, seed: u64, split: u64) -> Result<PllDataset> {
        if per_class == 0 {
            return Err(Error::InvalidArgument("per_class must be >= 1".into()));
        }
        let means = self.class_means(seed)?;
        let mut rng = SeedTree::new(seed).child(1 + split).rng();
        let mut examples = Vec::with_capacity(per_class * self.num_classes);
        for c in 0..self.num_classes {
            for _ in 0..per_class {
                let features = means
                    .row(c)
                    .iter()
                    .map(|&m| m + rng.sample::<f64, _>(StandardNormal))
                    .collect();
                examples.push(Example::fully_labeled(features, c));
            }
        }
        PllDataset::new(examples, self.num_classes)
    }
}

/// Fully labeled Gaussian blobs; the training split of [`BlobSpec::sample`].
pub fn make_blobs(num_classes: usize, per_class: usize, dim: usize, separation: f64, seed: u64) -> Result<PllDataset> {
    BlobSpec {
        num_classes,
        dim,
        separation,
    }
    .sample(per_class, seed, 0)
}

/// Flips every incorrect label into the candidate set independently with probability `q`.
pub fn uniform_candidates(dataset: &PllDataset, q: f64, seed: u64) -> Result<PllDataset> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("q must lie in [0, 1], got {q}")));
    }
    dataset.require_fully_labeled()?;
    let k = dataset.num_classes();
    let mut rng = rng_from_seed(seed);
    let examples = dataset
        .examples()
        .iter()
        .map(|e| {
            let candidates = (0..k)
                .filter(|&j| {
                    // one draw per incorrect label keeps streams aligned across q
                    j == e.true_label || rng.random::<f64>() < q
                })
                .collect();
            Example::new(e.features.clone(), e.true_label, candidates)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PllDataset::new(examples, k)?.with_meta(GenerationMeta {
        kind: CandidateKind::Uniform,
        q,
        seed,
    }))
}

/// Flips incorrect label `j` with probability `g_j(x) / max_{k ≠ y} g_k(x)`,
/// where `g` are the oracle's scores for the example.
pub fn instance_dependent_candidates(dataset: &PllDataset, oracle_scores: &RealMatrix, seed: u64) -> Result<PllDataset> {
    dataset.require_fully_labeled()?;
    let k = dataset.num_classes();
    oracle_scores.ensure_shape("instance_dependent_candidates", dataset.len(), k)?;
    let mut rng = rng_from_seed(seed);
    let mut examples = Vec::with_capacity(dataset.len());
    for (i, e) in dataset.examples().iter().enumerate() {
        let scores = oracle_scores.row(i);
        if scores.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidArgument(format!("oracle scores of example {i} must be finite and >= 0")));
        }
        let max_incorrect = (0..k)
            .filter(|&j| j != e.true_label)
            .map(|j| scores[j])
            .fold(0.0f64, f64::max);
        if !(max_incorrect > 0.0) {
            return Err(Error::DegenerateScores(i));
        }
        let mut candidates = Vec::with_capacity(k);
        for j in 0..k {
            if j == e.true_label {
                candidates.push(j);
                continue;
            }
            let flip = scores[j] / max_incorrect;
            let draw: f64 = rng.random();
            // the top-scored label has flip == 1 and draw < 1 always holds
            if draw < flip {
                candidates.push(j);
            }
        }
        examples.push(Example::new(e.features.clone(), e.true_label, candidates)?);
    }
    Ok(PllDataset::new(examples, k)?.with_meta(GenerationMeta {
        kind: CandidateKind::InstanceDependent,
        q: 0.0,
        seed,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_class_minimal_blobs() {
        let d = make_blobs(2, 1, 3, 1.0, 5).unwrap();
        assert_eq!(d.len(), 2);
        assert_ne!(d.examples()[0].true_label, d.examples()[1].true_label);
        assert!(d.is_fully_labeled());
    }

    #[test]
    fn blobs_are_deterministic() {
        let a = make_blobs(3, 10, 4, 2.0, 99).unwrap();
        let b = make_blobs(3, 10, 4, 2.0, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, make_blobs(3, 10, 4, 2.0, 100).unwrap());
    }

    #[test]
    fn blobs_reject_bad_arguments() {
        assert!(make_blobs(1, 10, 4, 2.0, 0).is_err());
        assert!(make_blobs(2, 0, 4, 2.0, 0).is_err());
        assert!(make_blobs(2, 1, 4, 0.0, 0).is_err());
    }

    #[test]
    fn more_classes_than_dims_uses_random_directions() {
        let spec = BlobSpec {
            num_classes: 5,
            dim: 2,
            separation: 3.0,
        };
        let means = spec.class_means(1).unwrap();
        for row in means.rows_iter() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_extremes() {
        let base = make_blobs(5, 20, 3, 2.0, 1).unwrap();
        let none = uniform_candidates(&base, 0.0, 2).unwrap();
        assert!(none.examples().iter().all(|e| e.candidates == vec![e.true_label]));
        let all = uniform_candidates(&base, 1.0, 2).unwrap();
        assert!(all.examples().iter().all(|e| e.candidates == (0..5).collect::<Vec<_>>()));
        assert!(uniform_candidates(&base, 1.5, 2).is_err());
        assert!(uniform_candidates(&all, 0.5, 2).is_err());
    }

    #[test]
    fn instance_dependent_cases() {
        let base = make_blobs(4, 5, 3, 2.0, 1).unwrap();
        let uniform_scores = RealMatrix::filled(base.len(), 4, 0.25);
        let all = instance_dependent_candidates(&base, &uniform_scores, 3).unwrap();
        assert!(all.examples().iter().all(|e| e.candidates.len() == 4));

        let mut degenerate = RealMatrix::zeros(base.len(), 4);
        for (i, e) in base.examples().iter().enumerate() {
            degenerate.set(i, e.true_label, 1.0);
        }
        assert!(matches!(
            instance_dependent_candidates(&base, &degenerate, 3),
            Err(Error::DegenerateScores(0))
        ));
    }
}
