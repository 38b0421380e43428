//! Batch objective: cross-entropy on the first view plus the weighted
//! prototypical alignment term, with analytic gradients for every parameter.
//!
//! Pseudo-targets and prototypes enter as constants. With `t_i = φ·p_i + (1 − φ)·p_{m(i)}`
//! the alignment gradient on the cosine logits of each view is `w·(ŝ_i − t_i)/B`,
//! and the classification gradient on the classifier logits is `(r_i − p_i)/B`.

use super::config::Variant;
use super::terms::{mixed_alignment_loss, prototypical_similarity, total_loss};
use crate::error::{Error, Result};
use crate::model::{backward_view, encode_view, forward, prototype_logits, ForwardCache, ModelParams, Prototypes, ViewCache};
use crate::numerics::{cross_entropy_with_logits, kl_divergence_with_logits, linear_backward, RealMatrix};

/// The two augmented views of a mixed batch and how it was mixed.
#[derive(Debug, Clone)]
pub struct MixedViews {
    pub weak: RealMatrix,
    pub strong: RealMatrix,
    pub partner: Vec<usize>,
    pub mix_coeff: f64,
}

#[derive(Debug, Clone)]
pub struct BatchViews {
    pub weak: RealMatrix,
    pub strong: RealMatrix,
    /// Present only for the full variant.
    pub mixed: Option<MixedViews>,
}

#[derive(Debug, Clone)]
pub struct MixedForward {
    pub view1: ViewCache,
    pub view2: ViewCache,
    pub partner: Vec<usize>,
    pub mix_coeff: f64,
}

#[derive(Debug, Clone)]
pub struct BatchForward {
    pub main: ForwardCache,
    pub mixed: Option<MixedForward>,
}

impl BatchForward {
    pub fn relu_margin(&self) -> f64 {
        let mixed = self
            .mixed
            .as_ref()
            .map_or(f64::INFINITY, |m| m.view1.relu_margin().min(m.view2.relu_margin()));
        self.main.relu_margin().min(mixed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSettings {
    pub tau: f64,
    pub align_weight: f64,
    pub variant: Variant,
}

#[derive(Debug, Clone)]
pub struct BatchLoss {
    /// Mean classification loss.
    pub cla: f64,
    /// Mean alignment loss; 0 for the no-alignment variant.
    pub ali: f64,
    pub total: f64,
    pub per_sample_cla: Vec<f64>,
    /// Every KL term evaluated, for invariant checks.
    pub kl_terms: Vec<f64>,
    /// Prototype similarity rows the alignment term used (one matrix per view).
    pub similarities: Vec<RealMatrix>,
}

pub fn batch_forward(params: &ModelParams, views: &BatchViews) -> Result<BatchForward> {
    let main = forward(params, &views.weak, &views.strong)?;
    let mixed = match &views.mixed {
        None => None,
        Some(m) => {
            if m.weak.shape() != views.weak.shape() || m.strong.shape() != views.weak.shape() {
                return Err(Error::Dimension {
                    op: "mixed views",
                    left: m.weak.shape(),
                    right: views.weak.shape(),
                });
            }
            Some(MixedForward {
                view1: encode_view(params, &m.weak)?,
                view2: encode_view(params, &m.strong)?,
                partner: m.partner.clone(),
                mix_coeff: m.mix_coeff,
            })
        }
    };
    Ok(BatchForward { main, mixed })
}

/// Loss and gradient for one batch given frozen `targets` (`B × K`).
pub fn batch_loss_and_grad(
    params: &ModelParams,
    prototypes: &Prototypes,
    fwd: &BatchForward,
    targets: &RealMatrix,
    settings: &ObjectiveSettings,
) -> Result<(BatchLoss, ModelParams)> {
    let b = fwd.main.batch_size();
    let k = fwd.main.r.cols();
    targets.ensure_shape("batch targets", b, k)?;
    let inv_b = 1.0 / b as f64;
    let mut grads = params.zeros_like();

    let mut per_sample_cla = Vec::with_capacity(b);
    let mut dlogits = RealMatrix::zeros(b, k);
    for i in 0..b {
        let (p, r) = (targets.row(i), fwd.main.r.row(i));
        per_sample_cla.push(cross_entropy_with_logits(p, fwd.main.class_logits.row(i))?);
        for ((d, &ri), &pi) in dlogits.row_mut(i).iter_mut().zip(r).zip(p) {
            *d = (ri - pi) * inv_b;
        }
    }
    let cla = per_sample_cla.iter().sum::<f64>() * inv_b;
    let class_grads = linear_backward(fwd.main.v1(), &params.classifier.weights, &dlogits)?;
    grads.classifier.weights = class_grads.weights;
    grads.classifier.bias = class_grads.bias;
    let dv1 = class_grads.input;

    let mut kl_terms = Vec::new();
    let mut similarities = Vec::new();
    let mut ali = 0.0;
    if !settings.variant.uses_alignment() {
        backward_view(params, &fwd.main.view1, None, Some(&dv1), &mut grads)?;
    } else {
        let identity: Vec<usize> = (0..b).collect();
        let (views, partner, phi) = match (&fwd.mixed, settings.variant) {
            (Some(m), Variant::Full) => ([&m.view1, &m.view2], m.partner.as_slice(), m.mix_coeff),
            (None, Variant::NoMixup) => ([&fwd.main.view1, &fwd.main.view2], identity.as_slice(), 1.0),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "variant {} does not match the presence of mixed views",
                    settings.variant
                )))
            }
        };
        if partner.len() != b {
            return Err(Error::Dimension {
                op: "mixup partner",
                left: (partner.len(), 1),
                right: (b, 1),
            });
        }
        let w = settings.align_weight;
        let mut dz = Vec::with_capacity(2);
        for view in views {
            let logits = prototype_logits(&view.z, prototypes, settings.tau)?;
            let s = prototypical_similarity(&logits);
            let mut dlog = RealMatrix::zeros(b, k);
            for i in 0..b {
                let (p_i, p_m, s_i) = (targets.row(i), targets.row(partner[i]), s.row(i));
                let self_kl = kl_divergence_with_logits(p_i, logits.row(i))?;
                let partner_kl = kl_divergence_with_logits(p_m, logits.row(i))?;
                kl_terms.push(self_kl);
                kl_terms.push(partner_kl);
                ali += phi * self_kl + (1.0 - phi) * partner_kl;
                for (j, d) in dlog.row_mut(i).iter_mut().enumerate() {
                    let target = phi * p_i[j] + (1.0 - phi) * p_m[j];
                    *d = w * (s_i[j] - target) * inv_b;
                }
            }
            dz.push(dlog.matmul(prototypes.matrix())?.scale(1.0 / settings.tau));
            similarities.push(s);
        }
        ali *= inv_b;
        match &fwd.mixed {
            Some(m) => {
                backward_view(params, &fwd.main.view1, None, Some(&dv1), &mut grads)?;
                backward_view(params, &m.view1, Some(&dz[0]), None, &mut grads)?;
                backward_view(params, &m.view2, Some(&dz[1]), None, &mut grads)?;
            }
            None => {
                backward_view(params, &fwd.main.view1, Some(&dz[0]), Some(&dv1), &mut grads)?;
                backward_view(params, &fwd.main.view2, Some(&dz[1]), None, &mut grads)?;
            }
        }
    }

    let total = total_loss(cla, ali, settings.align_weight);
    if !total.is_finite() {
        return Err(Error::NonFinite("batch loss".into()));
    }
    Ok((
        BatchLoss {
            cla,
            ali,
            total,
            per_sample_cla,
            kl_terms,
            similarities,
        },
        grads,
    ))
}

/// Per-sample mixed alignment loss recomputed from the term functions; used to
/// cross-check the fused batch computation.
pub fn reference_alignment(targets: &RealMatrix, s1: &RealMatrix, s2: &RealMatrix, partner: &[usize], phi: f64) -> Result<f64> {
    let mut sum = 0.0;
    for i in 0..targets.rows() {
        sum += mixed_alignment_loss(targets.row(i), targets.row(partner[i]), s1.row(i), s2.row(i), phi)?;
    }
    Ok(sum / targets.rows() as f64)
}

/// Forward plus loss: the full objective as a function of the parameters.
pub fn full_objective(
    params: &ModelParams,
    prototypes: &Prototypes,
    views: &BatchViews,
    targets: &RealMatrix,
    settings: &ObjectiveSettings,
) -> Result<(BatchLoss, ModelParams)> {
    let fwd = batch_forward(params, views)?;
    batch_loss_and_grad(params, prototypes, &fwd, targets, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_params, init_prototypes, ModelDims};
    use crate::numerics::finite_diff_check;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn randn(rows: usize, cols: usize, rng: &mut impl Rng) -> RealMatrix {
        let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        RealMatrix::from_vec(rows, cols, data).unwrap()
    }

    fn random_targets(b: usize, k: usize, rng: &mut impl Rng) -> RealMatrix {
        let mut t = RealMatrix::zeros(b, k);
        for i in 0..b {
            let raw: Vec<f64> = (0..k).map(|_| if rng.random::<f64>() < 0.6 { rng.random::<f64>() } else { 0.0 }).collect();
            let sum: f64 = raw.iter().sum();
            let row: Vec<f64> = if sum > 0.0 { raw.iter().map(|v| v / sum).collect() } else { (0..k).map(|j| (j == 0) as u8 as f64).collect() };
            t.row_mut(i).copy_from_slice(&row);
        }
        t
    }

    fn setup(seed: u64, variant: Variant) -> (ModelParams, Prototypes, BatchViews, RealMatrix) {
        let mut rng = rng_from_seed(seed);
        let dims = ModelDims {
            input_dim: 3,
            encoder_hidden: vec![5],
            encoder_dim: 4,
            projector_hidden: 5,
            projection_dim: 3,
            num_classes: 3,
        };
        let b = 4;
        let params = init_params(&dims, seed).unwrap();
        let protos = init_prototypes(3, 3, seed + 1).unwrap();
        let mixed = (variant == Variant::Full).then(|| MixedViews {
            weak: randn(b, 3, &mut rng),
            strong: randn(b, 3, &mut rng),
            partner: vec![2, 0, 3, 1],
            mix_coeff: 0.3,
        });
        let views = BatchViews {
            weak: randn(b, 3, &mut rng),
            strong: randn(b, 3, &mut rng),
            mixed,
        };
        (params, protos, views, random_targets(b, 3, &mut rng))
    }

    fn grad_check(seed: u64, variant: Variant) -> f64 {
        let (params, protos, views, targets) = setup(seed, variant);
        let settings = ObjectiveSettings {
            tau: 0.5,
            align_weight: 0.7,
            variant,
        };
        let fwd = batch_forward(&params, &views).unwrap();
        assert!(fwd.relu_margin() > 1e-4, "seed {seed} sits on a ReLU kink");
        let mut probe = params.clone();
        let report = finite_diff_check(
            |flat| {
                probe.load_flat(flat)?;
                let (loss, grads) = full_objective(&probe, &protos, &views, &targets, &settings)?;
                Ok((loss.total, grads.flatten()))
            },
            &params.flatten(),
            &params.layout(),
            1e-4,
        )
        .unwrap();
        assert!(report.passed, "{variant}: {report:?}");
        report.max_relative_error
    }

    #[test]
    fn gradients_match_finite_differences_for_every_variant() {
        for v in Variant::ALL {
            grad_check(11, v);
        }
    }

    #[test]
    fn fused_alignment_matches_term_functions() {
        let (params, protos, views, targets) = setup(5, Variant::Full);
        let settings = ObjectiveSettings {
            tau: 0.3,
            align_weight: 1.0,
            variant: Variant::Full,
        };
        let (loss, _) = full_objective(&params, &protos, &views, &targets, &settings).unwrap();
        let m = views.mixed.as_ref().unwrap();
        let reference = reference_alignment(&targets, &loss.similarities[0], &loss.similarities[1], &m.partner, m.mix_coeff).unwrap();
        assert!((loss.ali - reference).abs() < 1e-12);
        assert!((loss.total - (loss.cla + loss.ali)).abs() < 1e-12);
    }

    #[test]
    fn no_alignment_touches_no_projector_gradient() {
        let (params, protos, views, targets) = setup(3, Variant::NoAlignment);
        let settings = ObjectiveSettings {
            tau: 0.3,
            align_weight: 1.0,
            variant: Variant::NoAlignment,
        };
        let (loss, grads) = full_objective(&params, &protos, &views, &targets, &settings).unwrap();
        assert_eq!(loss.ali, 0.0);
        assert!(loss.similarities.is_empty());
        assert!(grads.projector.iter().all(|l| l.weights.as_slice().iter().all(|&g| g == 0.0)));
    }

    #[test]
    fn zero_align_weight_leaves_only_classification_gradient() {
        let (params, protos, views, targets) = setup(5, Variant::Full);
        let run = |variant, w| {
            let settings = ObjectiveSettings {
                tau: 0.3,
                align_weight: w,
                variant,
            };
            full_objective(&params, &protos, &views, &targets, &settings).unwrap()
        };
        let (full_loss, full_grads) = run(Variant::Full, 0.0);
        let no_mix_views = BatchViews {
            mixed: None,
            ..views.clone()
        };
        let settings = ObjectiveSettings {
            tau: 0.3,
            align_weight: 0.0,
            variant: Variant::NoAlignment,
        };
        let (cla_loss, cla_grads) = full_objective(&params, &protos, &no_mix_views, &targets, &settings).unwrap();
        assert_eq!(full_loss.total, cla_loss.total);
        assert!(full_loss.ali > 0.0);
        assert_eq!(full_grads.flatten(), cla_grads.flatten());
    }

    #[test]
    fn mismatched_variant_is_rejected() {
        let (params, protos, views, targets) = setup(3, Variant::NoMixup);
        let settings = ObjectiveSettings {
            tau: 0.3,
            align_weight: 1.0,
            variant: Variant::Full,
        };
        assert!(full_objective(&params, &protos, &views, &targets, &settings).is_err());
    }
}
