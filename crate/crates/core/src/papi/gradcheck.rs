//! Random small problems for checking the objective's analytic gradient
//! against central finite differences.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::Variant;
use super::objective::{batch_forward, full_objective, BatchViews, MixedViews, ObjectiveSettings};
use crate::data::{augment, mixup_batch, AugmentMode, AugmentationSpec};
use crate::error::{Error, Result};
use crate::model::{init_params, init_prototypes, ModelDims, ModelParams, Prototypes};
use crate::numerics::{finite_diff_check, GradCheckReport, RealMatrix};
use crate::rng::SeedTree;

/// Smallest |pre-activation| accepted; closer to a ReLU kink the loss is not
/// differentiable at step size and the comparison is meaningless.
pub const MIN_RELU_MARGIN: f64 = 1e-3;

const MAX_ATTEMPTS: u64 = 64;

/// A model, prototypes, one batch of views and frozen targets.
#[derive(Debug, Clone)]
pub struct GradCheckProblem {
    pub params: ModelParams,
    pub prototypes: Prototypes,
    pub views: BatchViews,
    pub targets: RealMatrix,
    pub settings: ObjectiveSettings,
}

fn randn(rows: usize, cols: usize, rng: &mut impl Rng) -> RealMatrix {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    RealMatrix::from_vec(rows, cols, data).expect("sized")
}

/// Random distributions, each supported on a random nonempty label subset.
fn random_targets(rows: usize, k: usize, rng: &mut impl Rng) -> RealMatrix {
    let mut t = RealMatrix::zeros(rows, k);
    for i in 0..rows {
        let mut labels: Vec<usize> = (0..k).collect();
        labels.shuffle(rng);
        let size = rng.random_range(1..=k);
        let weights: Vec<f64> = (0..size).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for (&j, w) in labels[..size].iter().zip(&weights) {
            t.set(i, j, w / total);
        }
    }
    t
}

/// Zero biases make the normalized projection scale-invariant in any hidden
/// unit that is the only one active on a row, which pins parts of the true
/// gradient at exactly zero.
fn randomize_biases(params: &mut ModelParams, rng: &mut impl Rng) -> Result<()> {
    let mut flat = params.flatten();
    let mut offset = 0;
    for block in params.layout() {
        if block.name.ends_with(".bias") {
            for v in &mut flat[offset..offset + block.len] {
                *v = 0.5 * rng.sample::<f64, _>(StandardNormal);
            }
        }
        offset += block.len;
    }
    params.load_flat(&flat)
}

impl GradCheckProblem {
    fn draw(seeds: SeedTree, variant: Variant) -> Result<Self> {
        let mut rng = seeds.child(0).rng();
        let num_classes = rng.random_range(2..=5);
        let dims = ModelDims {
            input_dim: rng.random_range(2..=5),
            encoder_hidden: vec![rng.random_range(3..=6)],
            encoder_dim: rng.random_range(3..=5),
            projector_hidden: rng.random_range(3..=6),
            projection_dim: rng.random_range(2..=4),
            num_classes,
        };
        let batch = rng.random_range(3..=6);
        let mut params = init_params(&dims, seeds.child(1).seed())?;
        randomize_biases(&mut params, &mut rng)?;
        let prototypes = init_prototypes(num_classes, dims.projection_dim, seeds.child(2).seed())?;
        let x = randn(batch, dims.input_dim, &mut rng);
        let spec = AugmentationSpec::default();
        let weak = augment(&x, AugmentMode::Weak, &spec, seeds.child(3).seed())?;
        let strong = augment(&x, AugmentMode::Strong, &spec, seeds.child(4).seed())?;
        let mixed = if variant.uses_mixup() {
            let mix = mixup_batch(&x, 4.0, seeds.child(5).seed())?;
            Some(MixedViews {
                weak: augment(&mix.mixed_features, AugmentMode::Weak, &spec, seeds.child(6).seed())?,
                strong: augment(&mix.mixed_features, AugmentMode::Strong, &spec, seeds.child(7).seed())?,
                partner: mix.partner_index,
                mix_coeff: mix.mix_coeff,
            })
        } else {
            None
        };
        let settings = ObjectiveSettings {
            tau: rng.random_range(0.1..1.0),
            align_weight: rng.random_range(0.1..1.5),
            variant,
        };
        Ok(GradCheckProblem {
            params,
            prototypes,
            views: BatchViews { weak, strong, mixed },
            targets: random_targets(batch, num_classes, &mut rng),
            settings,
        })
    }

    /// Draws a random problem for `seed`, redrawing until every ReLU
    /// pre-activation is at least [`MIN_RELU_MARGIN`] away from zero and
    /// every projection has a usable norm.
    pub fn sample(seed: u64, variant: Variant) -> Result<Self> {
        let root = SeedTree::new(seed);
        for attempt in 0..MAX_ATTEMPTS {
            let problem = Self::draw(root.child(attempt), variant)?;
            let Ok(fwd) = batch_forward(&problem.params, &problem.views) else { continue };
            if fwd.relu_margin() >= MIN_RELU_MARGIN {
                return Ok(problem);
            }
        }
        Err(Error::InvalidArgument(format!("no differentiable problem found for seed {seed}")))
    }

    /// Runs the finite-difference comparison over every parameter.
    pub fn check(&self, tolerance: f64) -> Result<GradCheckReport> {
        let mut probe = self.params.clone();
        finite_diff_check(
            |flat| {
                probe.load_flat(flat)?;
                let (loss, grads) = full_objective(&probe, &self.prototypes, &self.views, &self.targets, &self.settings)?;
                Ok((loss.total, grads.flatten()))
            },
            &self.params.flatten(),
            &self.params.layout(),
            tolerance,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_problems_pass_for_every_variant() {
        for seed in 0..4 {
            for v in Variant::ALL {
                let problem = GradCheckProblem::sample(seed, v).unwrap();
                let report = problem.check(1e-4).unwrap();
                assert!(report.passed, "seed {seed} {v}: {report:?}");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = GradCheckProblem::sample(9, Variant::Full).unwrap();
        let b = GradCheckProblem::sample(9, Variant::Full).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.targets, b.targets);
    }
}
