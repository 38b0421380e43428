//! The training loop.
//!
//! Per epoch the training set is reshuffled into mini-batches. Per batch:
//!
//! 1. augment the batch into two views and run the model forward;
//! 2. fold the classifier's candidate-restricted prediction into each row's
//!    pseudo-target (treated as a constant from here on);
//! 3. mix the raw batch with a shuffled copy and augment the mix into two views
//!    (full variant only);
//! 4. compute cross-entropy plus the weighted alignment term, backprop, take
//!    an SGD step;
//! 5. move each pseudo-labeled class prototype toward the batch embeddings.

use rand::seq::SliceRandom;

use super::config::{TrainConfig, Variant};
use super::metrics::EpochMetrics;
use super::objective::{batch_forward, batch_loss_and_grad, BatchLoss, BatchViews, MixedViews, ObjectiveSettings};
use super::terms::{align_weight, update_prototypes, PseudoTarget};
use crate::data::{augment, mix_with, mixup_batch, MixBatch, PllDataset};
use crate::error::{Error, Result};
use crate::eval::{accuracy, count_disagreements, disambiguation_purity, embedding_similarity, linear_predictions};
use crate::model::{embed, init_params, init_prototypes, prototype_logits, ModelParams, Prototypes};
use crate::numerics::RealMatrix;
use crate::rng::{Purpose, SeedTree};

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub prototypes: Prototypes,
    pub targets: PseudoTarget,
    pub metrics: Vec<EpochMetrics>,
}

/// State visible to a per-batch observer, after the prototype update.
pub struct BatchObservation<'a> {
    pub epoch: usize,
    pub batch: usize,
    pub indices: &'a [usize],
    pub dataset: &'a PllDataset,
    pub targets: &'a PseudoTarget,
    pub prototypes: &'a Prototypes,
    pub loss: &'a BatchLoss,
    pub params: &'a ModelParams,
}

pub fn train(train_set: &PllDataset, test_set: &PllDataset, config: &TrainConfig) -> Result<TrainOutcome> {
    train_with_observer(train_set, test_set, config, |_| {})
}

pub fn train_with_observer<F>(
    train_set: &PllDataset,
    test_set: &PllDataset,
    config: &TrainConfig,
    mut observer: F,
) -> Result<TrainOutcome>
where
    F: FnMut(&BatchObservation<'_>),
{
    config.validate()?;
    if train_set.is_empty() || test_set.is_empty() {
        return Err(Error::InvalidArgument("training and test sets must be nonempty".into()));
    }
    if train_set.feature_dim() != test_set.feature_dim() || train_set.num_classes() != test_set.num_classes() {
        return Err(Error::InvalidArgument("train and test sets disagree on dims or classes".into()));
    }
    let k = train_set.num_classes();
    let seeds = SeedTree::new(config.seed);
    let dims = config.model_dims(train_set.feature_dim(), k);
    let mut params = init_params(&dims, seeds.purpose(Purpose::Init).seed())?;
    let mut prototypes = init_prototypes(k, dims.projection_dim, seeds.purpose(Purpose::Prototypes).seed())?;
    let mut targets = PseudoTarget::uniform(train_set);

    let features = train_set.features();
    let evaluator = Evaluator::new(train_set, test_set, config, seeds.purpose(Purpose::Eval).seed());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut metrics = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut seeds.purpose(Purpose::Shuffle).child(epoch as u64).rng());
        let lr = config.learning_rate_at(epoch);
        let settings = ObjectiveSettings {
            tau: config.tau,
            align_weight: if config.variant.uses_alignment() { align_weight(epoch, config) } else { 0.0 },
            variant: config.variant,
        };
        let (mut cla_sum, mut ali_sum, mut batches) = (0.0, 0.0, 0usize);
        for (b, indices) in order.chunks(config.batch_size).enumerate() {
            let batch_seeds = BatchSeeds {
                augment: seeds.purpose(Purpose::Augment).child(epoch as u64).child(b as u64),
                mixup: seeds.purpose(Purpose::Mixup).child(epoch as u64).child(b as u64),
            };
            let mut step = || -> Result<BatchLoss> {
                let x = features.select_rows(indices);
                let views = make_views(&x, config, &batch_seeds)?;
                let fwd = batch_forward(&params, &views)?;
                for (row, &i) in indices.iter().enumerate() {
                    targets.update_row(i, fwd.main.r.row(row), &train_set.examples()[i].candidates, config.lambda_ema)?;
                }
                let batch_targets = targets.rows(indices);
                let (loss, grads) = batch_loss_and_grad(&params, &prototypes, &fwd, &batch_targets, &settings)?;
                params.apply_sgd(&grads, lr, config.weight_decay)?;
                if !params.is_finite() {
                    return Err(Error::NonFinite("parameters after SGD step".into()));
                }
                let labels = targets.pseudo_labels(indices);
                update_prototypes(&mut prototypes, fwd.main.z1(), fwd.main.z2(), &labels, config.gamma_proto)?;
                Ok(loss)
            };
            let loss = step().map_err(|e| Error::Training {
                epoch,
                batch: b,
                source: Box::new(e),
            })?;
            cla_sum += loss.cla;
            ali_sum += loss.ali;
            batches += 1;
            observer(&BatchObservation {
                epoch,
                batch: b,
                indices,
                dataset: train_set,
                targets: &targets,
                prototypes: &prototypes,
                loss: &loss,
                params: &params,
            });
        }
        let m = evaluator
            .evaluate(epoch, &params, &prototypes, &targets, cla_sum / batches as f64, ali_sum / batches as f64)
            .map_err(|e| Error::Training {
                epoch,
                batch: batches,
                source: Box::new(e),
            })?;
        metrics.push(m);
    }
    Ok(TrainOutcome {
        params,
        prototypes,
        targets,
        metrics,
    })
}

struct BatchSeeds {
    augment: SeedTree,
    mixup: SeedTree,
}

fn make_views(x: &RealMatrix, config: &TrainConfig, seeds: &BatchSeeds) -> Result<BatchViews> {
    let spec = &config.augmentation;
    let (mode1, mode2) = spec.composition.modes();
    let weak = augment(x, mode1, spec, seeds.augment.child(0).seed())?;
    let strong = augment(x, mode2, spec, seeds.augment.child(1).seed())?;
    let mixed = if config.variant == Variant::Full {
        let mix: MixBatch = if x.rows() >= 2 {
            mixup_batch(x, config.mixup_alpha, seeds.mixup.seed())?
        } else {
            mix_with(x, 1.0, vec![0])?
        };
        Some(MixedViews {
            weak: augment(&mix.mixed_features, mode1, spec, seeds.augment.child(2).seed())?,
            strong: augment(&mix.mixed_features, mode2, spec, seeds.augment.child(3).seed())?,
            partner: mix.partner_index,
            mix_coeff: mix.mix_coeff,
        })
    } else {
        None
    };
    Ok(BatchViews { weak, strong, mixed })
}

struct Evaluator<'a> {
    train_features: RealMatrix,
    train_labels: Vec<usize>,
    test_features: RealMatrix,
    test_labels: Vec<usize>,
    config: &'a TrainConfig,
    seed: u64,
}

impl<'a> Evaluator<'a> {
    fn new(train_set: &PllDataset, test_set: &PllDataset, config: &'a TrainConfig, seed: u64) -> Self {
        Evaluator {
            train_features: train_set.features(),
            train_labels: train_set.true_labels(),
            test_features: test_set.features(),
            test_labels: test_set.true_labels(),
            config,
            seed,
        }
    }

    fn evaluate(
        &self,
        epoch: usize,
        params: &ModelParams,
        prototypes: &Prototypes,
        targets: &PseudoTarget,
        mean_cla_loss: f64,
        mean_ali_loss: f64,
    ) -> Result<EpochMetrics> {
        let train_pred = linear_predictions(params, &self.train_features)?;
        let test_pred = linear_predictions(params, &self.test_features)?;
        let z = embed(params, &self.test_features)?;
        let proto_pred = prototype_logits(&z, prototypes, self.config.tau)?.argmax_rows();
        let disagreements = count_disagreements(&test_pred, &proto_pred, &self.test_labels)?;
        let similarity = embedding_similarity(&z, &self.test_labels, self.config.similarity_pairs, self.seed)?;
        Ok(EpochMetrics {
            epoch,
            mean_cla_loss,
            mean_ali_loss,
            train_accuracy: accuracy(&train_pred, &self.train_labels)?,
            test_accuracy: accuracy(&test_pred, &self.test_labels)?,
            proto_accuracy: accuracy(&proto_pred, &self.test_labels)?,
            disambiguation_purity: disambiguation_purity(targets.matrix(), &self.train_labels)?,
            linear_right_proto_wrong: disagreements.lin_right_proto_wrong,
            proto_right_linear_wrong: disagreements.proto_right_lin_wrong,
            intra_class_sim: similarity.intra,
            inter_class_sim: similarity.inter,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_blobs, uniform_candidates, BlobSpec};

    fn tiny() -> (PllDataset, PllDataset, TrainConfig) {
        let spec = BlobSpec {
            num_classes: 3,
            dim: 4,
            separation: 4.0,
        };
        let train = uniform_candidates(&spec.sample(10, 1, 0).unwrap(), 0.5, 2).unwrap();
        let test = spec.sample(5, 1, 1).unwrap();
        let config = TrainConfig {
            epochs: 2,
            batch_size: 8,
            warmup_epochs: 0,
            ramp_epochs: 1,
            encoder_hidden: vec![8],
            encoder_dim: 8,
            projector_hidden: 8,
            projection_dim: 4,
            seed: 3,
            ..TrainConfig::default()
        };
        (train, test, config)
    }

    #[test]
    fn zero_epochs_is_a_no_op() {
        let (train_set, test, mut config) = tiny();
        config.epochs = 0;
        let out = train(&train_set, &test, &config).unwrap();
        assert!(out.metrics.is_empty());
        let seeds = SeedTree::new(config.seed);
        let init = init_params(&config.model_dims(4, 3), seeds.purpose(Purpose::Init).seed()).unwrap();
        assert_eq!(out.params, init);
        assert_eq!(out.targets, PseudoTarget::uniform(&train_set));
    }

    #[test]
    fn one_batch_changes_parameters() {
        let (train_set, test, mut config) = tiny();
        config.epochs = 1;
        config.batch_size = train_set.len();
        let out = train(&train_set, &test, &config).unwrap();
        let init = init_params(
            &config.model_dims(4, 3),
            SeedTree::new(config.seed).purpose(Purpose::Init).seed(),
        )
        .unwrap();
        assert_ne!(out.params, init);
        assert_eq!(out.metrics.len(), 1);
    }

    #[test]
    fn runs_are_deterministic_for_each_variant() {
        let (train_set, test, mut config) = tiny();
        for v in Variant::ALL {
            config.variant = v;
            let a = train(&train_set, &test, &config).unwrap();
            let b = train(&train_set, &test, &config).unwrap();
            assert_eq!(a.metrics, b.metrics);
            assert_eq!(a.params, b.params);
        }
    }

    #[test]
    fn single_row_tail_batch_is_handled() {
        let (_, test, mut config) = tiny();
        let train_set = uniform_candidates(&make_blobs(3, 3, 4, 4.0, 1).unwrap(), 0.3, 1).unwrap();
        config.batch_size = 8; // 9 examples → tail batch of 1
        train(&train_set, &test, &config).unwrap();
    }

    #[test]
    fn mismatched_sets_rejected() {
        let (train_set, _, config) = tiny();
        let other = make_blobs(3, 2, 5, 1.0, 1).unwrap();
        assert!(train(&train_set, &other, &config).is_err());
    }
}
