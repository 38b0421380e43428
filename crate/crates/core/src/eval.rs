//! Accuracy and representation diagnostics on unaugmented inputs.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::data::PllDataset;
use crate::error::{Error, Result};
use crate::model::{classify, embed, prototype_logits, ModelParams, Prototypes};
use crate::numerics::{dot, RealMatrix};
use crate::rng::rng_from_seed;

/// Pair cap used when the caller has no preference.
pub const DEFAULT_MAX_PAIRS: usize = 100_000;

pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty prediction set".into()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::Dimension {
            op: "accuracy",
            left: (predictions.len(), 1),
            right: (labels.len(), 1),
        });
    }
    let hits = predictions.iter().zip(labels).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / predictions.len() as f64)
}

pub fn linear_predictions(params: &ModelParams, x: &RealMatrix) -> Result<Vec<usize>> {
    Ok(classify(params, x)?.argmax_rows())
}

/// Nearest prototype by cosine similarity.
pub fn prototype_predictions(params: &ModelParams, prototypes: &Prototypes, tau: f64, x: &RealMatrix) -> Result<Vec<usize>> {
    let z = embed(params, x)?;
    Ok(prototype_logits(&z, prototypes, tau)?.argmax_rows())
}

pub fn prototype_classifier_accuracy(
    params: &ModelParams,
    prototypes: &Prototypes,
    tau: f64,
    test_set: &PllDataset,
) -> Result<f64> {
    let pred = prototype_predictions(params, prototypes, tau, &test_set.features())?;
    accuracy(&pred, &test_set.true_labels())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityStats {
    /// Mean cosine over same-class pairs; `None` when no class has two samples.
    pub intra: Option<f64>,
    pub inter: f64,
    /// Classes with fewer than two samples, left out of the intra estimate.
    pub skipped_classes: Vec<usize>,
    pub intra_pairs: usize,
    pub inter_pairs: usize,
}

pub fn intra_inter_similarity(params: &ModelParams, test_set: &PllDataset, max_pairs: usize, seed: u64) -> Result<SimilarityStats> {
    let z = embed(params, &test_set.features())?;
    embedding_similarity(&z, &test_set.true_labels(), max_pairs, seed)
}

/// Mean pairwise cosine of unit-norm rows, split into same-label and
/// different-label pairs. Each side is enumerated exactly when it has at most
/// `max_pairs` pairs and sampled with replacement otherwise.
pub fn embedding_similarity(z: &RealMatrix, labels: &[usize], max_pairs: usize, seed: u64) -> Result<SimilarityStats> {
    if z.rows() != labels.len() {
        return Err(Error::Dimension {
            op: "embedding_similarity",
            left: z.shape(),
            right: (labels.len(), 1),
        });
    }
    if max_pairs == 0 {
        return Err(Error::InvalidArgument("max_pairs must be positive".into()));
    }
    let num_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &y) in labels.iter().enumerate() {
        members[y].push(i);
    }
    let present: Vec<usize> = (0..num_classes).filter(|&k| !members[k].is_empty()).collect();
    if present.len() < 2 {
        return Err(Error::InvalidArgument("similarity needs at least 2 classes present".into()));
    }
    let skipped_classes: Vec<usize> = present.iter().copied().filter(|&k| members[k].len() < 2).collect();
    let cos = |i: usize, j: usize| dot(z.row(i), z.row(j));
    let mut rng = rng_from_seed(seed);

    let pair_counts: Vec<u64> = members.iter().map(|m| (m.len() as u64 * m.len().saturating_sub(1) as u64) / 2).collect();
    let total_intra: u64 = pair_counts.iter().sum();
    let (intra, intra_pairs) = if total_intra == 0 {
        (None, 0)
    } else if total_intra <= max_pairs as u64 {
        let mut sum = 0.0;
        for m in &members {
            for (a, &i) in m.iter().enumerate() {
                for &j in &m[a + 1..] {
                    sum += cos(i, j);
                }
            }
        }
        (Some(sum / total_intra as f64), total_intra as usize)
    } else {
        let pick = WeightedIndex::new(&pair_counts).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut sum = 0.0;
        for _ in 0..max_pairs {
            let m = &members[pick.sample(&mut rng)];
            let a = rng.random_range(0..m.len());
            let mut b = rng.random_range(0..m.len() - 1);
            if b >= a {
                b += 1;
            }
            sum += cos(m[a], m[b]);
        }
        (Some(sum / max_pairs as f64), max_pairs)
    };

    let n = labels.len() as u64;
    let total_inter = n * (n - 1) / 2 - total_intra;
    let (inter, inter_pairs) = if total_inter <= max_pairs as u64 {
        let mut sum = 0.0;
        for i in 0..labels.len() {
            for j in i + 1..labels.len() {
                if labels[i] != labels[j] {
                    sum += cos(i, j);
                }
            }
        }
        (sum / total_inter as f64, total_inter as usize)
    } else {
        let mut sum = 0.0;
        let mut taken = 0;
        while taken < max_pairs {
            let i = rng.random_range(0..labels.len());
            let j = rng.random_range(0..labels.len());
            if labels[i] != labels[j] {
                sum += cos(i, j);
                taken += 1;
            }
        }
        (sum / max_pairs as f64, max_pairs)
    };

    Ok(SimilarityStats {
        intra,
        inter,
        skipped_classes,
        intra_pairs,
        inter_pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DisagreementCounts {
    pub lin_right_proto_wrong: usize,
    pub proto_right_lin_wrong: usize,
}

pub fn count_disagreements(linear: &[usize], prototypical: &[usize], labels: &[usize]) -> Result<DisagreementCounts> {
    if linear.len() != labels.len() || prototypical.len() != labels.len() {
        return Err(Error::Dimension {
            op: "count_disagreements",
            left: (linear.len(), prototypical.len()),
            right: (labels.len(), labels.len()),
        });
    }
    let mut counts = DisagreementCounts::default();
    for ((&l, &p), &y) in linear.iter().zip(prototypical).zip(labels) {
        if l == y && p != y {
            counts.lin_right_proto_wrong += 1;
        } else if p == y && l != y {
            counts.proto_right_lin_wrong += 1;
        }
    }
    Ok(counts)
}

pub fn disagreement_counts(
    params: &ModelParams,
    prototypes: &Prototypes,
    tau: f64,
    batch: &RealMatrix,
    true_labels: &[usize],
) -> Result<DisagreementCounts> {
    let lin = linear_predictions(params, batch)?;
    let proto = prototype_predictions(params, prototypes, tau, batch)?;
    count_disagreements(&lin, &proto, true_labels)
}

/// Fraction of rows whose argmax (lowest index on ties) is the true label.
pub fn disambiguation_purity(targets: &RealMatrix, true_labels: &[usize]) -> Result<f64> {
    if targets.rows() != true_labels.len() {
        return Err(Error::Dimension {
            op: "disambiguation_purity",
            left: targets.shape(),
            right: (true_labels.len(), 1),
        });
    }
    accuracy(&targets.argmax_rows(), true_labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0], &[1, 1]).unwrap(), 0.0);
        assert!((accuracy(&[0, 1, 1], &[0, 1, 0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn identical_embeddings() {
        let z = RealMatrix::from_rows(&[[1.0, 0.0]; 6]).unwrap();
        let s = embedding_similarity(&z, &[0, 0, 1, 1, 2, 2], 100, 1).unwrap();
        assert!((s.intra.unwrap() - 1.0).abs() < 1e-12);
        assert!((s.inter - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_singletons() {
        let z = RealMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let s = embedding_similarity(&z, &[0, 1], 100, 1).unwrap();
        assert_eq!(s.inter, 0.0);
        assert_eq!(s.intra, None);
        assert_eq!(s.skipped_classes, vec![0, 1]);
        assert!(embedding_similarity(&z, &[0, 0], 100, 1).is_err());
    }

    #[test]
    fn sampled_estimate_is_close_to_exact() {
        let rows: Vec<[f64; 2]> = (0..60)
            .map(|i| {
                let a = i as f64 * 0.37;
                [a.cos(), a.sin()]
            })
            .collect();
        let z = RealMatrix::from_rows(&rows).unwrap();
        let labels: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let exact = embedding_similarity(&z, &labels, 10_000, 1).unwrap();
        let sampled = embedding_similarity(&z, &labels, 500, 1).unwrap();
        assert_eq!(sampled.inter_pairs, 500);
        assert!((exact.inter - sampled.inter).abs() < 0.1);
        assert!((exact.intra.unwrap() - sampled.intra.unwrap()).abs() < 0.1);
        assert_eq!(sampled, embedding_similarity(&z, &labels, 500, 1).unwrap());
    }

    #[test]
    fn disagreement_examples() {
        let y = [0, 1, 2, 1];
        assert_eq!(count_disagreements(&y, &y, &y).unwrap(), DisagreementCounts::default());
        let wrong = [1, 2, 0, 0];
        let c = count_disagreements(&y, &wrong, &y).unwrap();
        assert_eq!(c.lin_right_proto_wrong, 4);
        assert_eq!(c.proto_right_lin_wrong, 0);
        let c = count_disagreements(&wrong, &wrong, &y).unwrap();
        assert_eq!(c, DisagreementCounts::default());
    }

    #[test]
    fn purity_examples() {
        let p = RealMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(disambiguation_purity(&p, &[0, 2]).unwrap(), 1.0);
        // uniform over {0, 1} with the true label at the higher index
        let tie = RealMatrix::from_rows(&[[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]]).unwrap();
        assert_eq!(disambiguation_purity(&tie, &[1, 2]).unwrap(), 0.0);
    }
}
