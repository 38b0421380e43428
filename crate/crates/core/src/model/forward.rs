//! Forward passes that keep every intermediate needed for backprop.

use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::numerics::{
    l2_normalize_backward, l2_normalize_rows, linear_backward, relu, relu_backward, softmax_rows, Linear,
    RealMatrix,
};

/// Intermediates of an MLP with ReLU between consecutive layers.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// Input to each layer.
    inputs: Vec<RealMatrix>,
    /// Pre-activation output of every layer except the last.
    pre_activations: Vec<RealMatrix>,
}

impl MlpCache {
    /// Smallest `|pre-activation|` over all ReLU inputs; distance to the nearest kink.
    pub fn relu_margin(&self) -> f64 {
        self.pre_activations
            .iter()
            .flat_map(|m| m.as_slice().iter())
            .fold(f64::INFINITY, |acc, v| acc.min(v.abs()))
    }
}

pub fn mlp_forward(layers: &[Linear], x: &RealMatrix) -> Result<(RealMatrix, MlpCache)> {
    let mut inputs = Vec::with_capacity(layers.len());
    let mut pre_activations = Vec::with_capacity(layers.len().saturating_sub(1));
    let mut current = x.clone();
    for (i, layer) in layers.iter().enumerate() {
        let out = layer.forward(&current)?;
        inputs.push(current);
        if i + 1 < layers.len() {
            current = relu(&out);
            pre_activations.push(out);
        } else {
            current = out;
        }
    }
    Ok((current, MlpCache { inputs, pre_activations }))
}

/// Accumulates parameter gradients into `grads` and returns the input gradient.
pub fn mlp_backward(layers: &[Linear], cache: &MlpCache, upstream: RealMatrix, grads: &mut [Linear]) -> Result<RealMatrix> {
    let mut g = upstream;
    for i in (0..layers.len()).rev() {
        let lg = linear_backward(&cache.inputs[i], &layers[i].weights, &g)?;
        grads[i].weights.add_assign(&lg.weights)?;
        for (b, d) in grads[i].bias.iter_mut().zip(&lg.bias) {
            *b += d;
        }
        g = if i > 0 {
            relu_backward(&cache.pre_activations[i - 1], &lg.input)?
        } else {
            lg.input
        };
    }
    Ok(g)
}

/// One augmented view pushed through encoder and projector.
#[derive(Debug, Clone)]
pub struct ViewCache {
    encoder: MlpCache,
    /// Encoder output `v`.
    pub v: RealMatrix,
    projector: MlpCache,
    /// Projector output before normalization.
    pub projected: RealMatrix,
    /// Unit-norm projection `z`.
    pub z: RealMatrix,
}

impl ViewCache {
    pub fn relu_margin(&self) -> f64 {
        self.encoder.relu_margin().min(self.projector.relu_margin())
    }
}

pub fn encode_view(params: &ModelParams, x: &RealMatrix) -> Result<ViewCache> {
    let (v, encoder) = mlp_forward(&params.encoder, x)?;
    let (projected, projector) = mlp_forward(&params.projector, &v)?;
    let z = l2_normalize_rows(&projected)?;
    Ok(ViewCache {
        encoder,
        v,
        projector,
        projected,
        z,
    })
}

/// Backprop through one view given gradients on `z` and/or directly on `v`.
pub fn backward_view(
    params: &ModelParams,
    view: &ViewCache,
    grad_z: Option<&RealMatrix>,
    grad_v: Option<&RealMatrix>,
    grads: &mut ModelParams,
) -> Result<()> {
    let mut dv = match grad_z {
        Some(dz) => {
            let dproj = l2_normalize_backward(&view.projected, dz)?;
            Some(mlp_backward(&params.projector, &view.projector, dproj, &mut grads.projector)?)
        }
        None => None,
    };
    if let Some(extra) = grad_v {
        match dv.as_mut() {
            Some(d) => d.add_assign(extra)?,
            None => dv = Some(extra.clone()),
        }
    }
    if let Some(dv) = dv {
        mlp_backward(&params.encoder, &view.encoder, dv, &mut grads.encoder)?;
    }
    Ok(())
}

/// Both views plus the classifier output on the first.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub view1: ViewCache,
    pub view2: ViewCache,
    pub class_logits: RealMatrix,
    /// Classifier probabilities `r = softmax(h(v1))`.
    pub r: RealMatrix,
}

impl ForwardCache {
    pub fn v1(&self) -> &RealMatrix {
        &self.view1.v
    }

    pub fn v2(&self) -> &RealMatrix {
        &self.view2.v
    }

    pub fn z1(&self) -> &RealMatrix {
        &self.view1.z
    }

    pub fn z2(&self) -> &RealMatrix {
        &self.view2.z
    }

    pub fn r(&self) -> &RealMatrix {
        &self.r
    }

    pub fn batch_size(&self) -> usize {
        self.r.rows()
    }

    pub fn relu_margin(&self) -> f64 {
        self.view1.relu_margin().min(self.view2.relu_margin())
    }
}

pub fn forward(params: &ModelParams, view1: &RealMatrix, view2: &RealMatrix) -> Result<ForwardCache> {
    if view1.shape() != view2.shape() {
        return Err(Error::Dimension {
            op: "forward views",
            left: view1.shape(),
            right: view2.shape(),
        });
    }
    let view1 = encode_view(params, view1)?;
    let view2 = encode_view(params, view2)?;
    let class_logits = params.classifier.forward(&view1.v)?;
    let r = softmax_rows(&class_logits);
    Ok(ForwardCache {
        view1,
        view2,
        class_logits,
        r,
    })
}

/// Classifier probabilities on unaugmented inputs.
pub fn classify(params: &ModelParams, x: &RealMatrix) -> Result<RealMatrix> {
    let (v, _) = mlp_forward(&params.encoder, x)?;
    Ok(softmax_rows(&params.classifier.forward(&v)?))
}

/// Normalized projections on unaugmented inputs.
pub fn embed(params: &ModelParams, x: &RealMatrix) -> Result<RealMatrix> {
    Ok(encode_view(params, x)?.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::{init_params, ModelDims};

    fn input(rows: usize, cols: usize) -> RealMatrix {
        let data = (0..rows * cols).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        RealMatrix::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn shared_weights_give_equal_views() {
        let p = init_params(&ModelDims::new(4, 3), 1).unwrap();
        let x = input(5, 4);
        let c = forward(&p, &x, &x).unwrap();
        assert_eq!(c.v1(), c.v2());
        assert_eq!(c.z1(), c.z2());
    }

    #[test]
    fn cache_shapes_and_normalization() {
        let dims = ModelDims::new(4, 3);
        let p = init_params(&dims, 2).unwrap();
        let x = input(1, 4);
        let c = forward(&p, &x, &x.scale(0.5)).unwrap();
        assert_eq!(c.v1().shape(), (1, dims.encoder_dim));
        assert_eq!(c.z2().shape(), (1, dims.projection_dim));
        assert_eq!(c.r().shape(), (1, 3));
        for row in c.r().rows_iter() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        for row in c.z1().rows_iter().chain(c.z2().rows_iter()) {
            assert!((row.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn view_shape_mismatch() {
        let p = init_params(&ModelDims::new(4, 3), 1).unwrap();
        assert!(forward(&p, &input(2, 4), &input(3, 4)).is_err());
        assert!(forward(&p, &input(2, 3), &input(2, 3)).is_err());
    }

    #[test]
    fn degenerate_projection_is_reported() {
        let mut p = init_params(&ModelDims::new(4, 3), 1).unwrap();
        p.projector[1] = Linear::zeros(p.projector[1].d_in(), p.projector[1].d_out());
        assert!(matches!(encode_view(&p, &input(2, 4)), Err(Error::DegenerateVector { .. })));
    }
}
