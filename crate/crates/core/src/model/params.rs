use crate::error::{Error, Result};
use crate::numerics::{sgd_step, Linear, ParamBlock};
use crate::rng::SeedTree;

/// Layer widths of the encoder `f`, projector `g` and classifier `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDims {
    pub input_dim: usize,
    /// Hidden widths of the encoder; ReLU sits between consecutive layers.
    pub encoder_hidden: Vec<usize>,
    pub encoder_dim: usize,
    pub projector_hidden: usize,
    pub projection_dim: usize,
    pub num_classes: usize,
}

impl ModelDims {
    /// Encoder `d → 64 → 64`, projector `64 → 64 → 16`.
    pub fn new(input_dim: usize, num_classes: usize) -> Self {
        ModelDims {
            input_dim,
            encoder_hidden: vec![64],
            encoder_dim: 64,
            projector_hidden: 64,
            projection_dim: 16,
            num_classes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let widths = std::iter::once(self.input_dim)
            .chain(self.encoder_hidden.iter().copied())
            .chain([self.encoder_dim, self.projector_hidden]);
        if widths.into_iter().any(|w| w == 0) {
            return Err(Error::InvalidArgument(format!("all layer widths must be positive: {self:?}")));
        }
        if self.projection_dim < 2 {
            return Err(Error::InvalidArgument("projection dim must be >= 2".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidArgument("need at least 2 classes".into()));
        }
        Ok(())
    }

    fn encoder_widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim];
        w.extend(&self.encoder_hidden);
        w.push(self.encoder_dim);
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub encoder: Vec<Linear>,
    /// Exactly two layers with a ReLU between them.
    pub projector: Vec<Linear>,
    pub classifier: Linear,
}

pub fn init_params(dims: &ModelDims, seed: u64) -> Result<ModelParams> {
    dims.validate()?;
    let mut rng = SeedTree::new(seed).rng();
    let encoder = dims
        .encoder_widths()
        .windows(2)
        .map(|w| Linear::init_uniform(w[0], w[1], &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let projector = vec![
        Linear::init_uniform(dims.encoder_dim, dims.projector_hidden, &mut rng)?,
        Linear::init_uniform(dims.projector_hidden, dims.projection_dim, &mut rng)?,
    ];
    let classifier = Linear::init_uniform(dims.encoder_dim, dims.num_classes, &mut rng)?;
    Ok(ModelParams {
        encoder,
        projector,
        classifier,
    })
}

impl ModelParams {
    /// Checks that layer shapes chain and reconstructs the dims.
    pub fn dims(&self) -> Result<ModelDims> {
        let chain_err = |what: &str| Error::InvalidArgument(format!("layer shapes do not chain: {what}"));
        if self.encoder.is_empty() || self.projector.len() != 2 {
            return Err(chain_err("encoder must be nonempty and projector must have 2 layers"));
        }
        for (i, pair) in self.encoder.windows(2).enumerate() {
            if pair[0].d_out() != pair[1].d_in() {
                return Err(chain_err(&format!("encoder layer {i} -> {}", i + 1)));
            }
        }
        let all = self.encoder.iter().chain(&self.projector).chain([&self.classifier]);
        if all.into_iter().any(|l| l.bias.len() != l.d_out()) {
            return Err(chain_err("bias length"));
        }
        let enc_dim = self.encoder.last().map(Linear::d_out).unwrap_or(0);
        if self.projector[0].d_in() != enc_dim || self.projector[1].d_in() != self.projector[0].d_out() {
            return Err(chain_err("projector"));
        }
        if self.classifier.d_in() != enc_dim {
            return Err(chain_err("classifier"));
        }
        let dims = ModelDims {
            input_dim: self.encoder[0].d_in(),
            encoder_hidden: self.encoder[..self.encoder.len() - 1].iter().map(Linear::d_out).collect(),
            encoder_dim: enc_dim,
            projector_hidden: self.projector[0].d_out(),
            projection_dim: self.projector[1].d_out(),
            num_classes: self.classifier.d_out(),
        };
        dims.validate()?;
        Ok(dims)
    }

    pub fn zeros_like(&self) -> Self {
        let z = |l: &Linear| Linear::zeros(l.d_in(), l.d_out());
        ModelParams {
            encoder: self.encoder.iter().map(z).collect(),
            projector: self.projector.iter().map(z).collect(),
            classifier: z(&self.classifier),
        }
    }

    /// Layers with their checkpoint prefixes, in a fixed order.
    pub fn named_layers(&self) -> Vec<(String, &Linear)> {
        let mut out: Vec<(String, &Linear)> = Vec::new();
        out.extend(self.encoder.iter().enumerate().map(|(i, l)| (format!("encoder.{i}"), l)));
        out.extend(self.projector.iter().enumerate().map(|(i, l)| (format!("projector.{i}"), l)));
        out.push(("classifier".into(), &self.classifier));
        out
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut Linear> {
        self.encoder
            .iter_mut()
            .chain(self.projector.iter_mut())
            .chain(std::iter::once(&mut self.classifier))
    }

    pub fn layout(&self) -> Vec<ParamBlock> {
        self.named_layers()
            .into_iter()
            .flat_map(|(name, l)| {
                [
                    ParamBlock::new(format!("{name}.weight"), l.weights.as_slice().len()),
                    ParamBlock::new(format!("{name}.bias"), l.bias.len()),
                ]
            })
            .collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.layout().iter().map(|b| b.len).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        for (_, l) in self.named_layers() {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn load_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_parameters() {
            return Err(Error::Dimension {
                op: "load_flat",
                left: (flat.len(), 1),
                right: (self.num_parameters(), 1),
            });
        }
        let mut offset = 0;
        for l in self.layers_mut() {
            let n = l.weights.as_slice().len();
            l.weights.as_mut_slice().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
            let n = l.bias.len();
            l.bias.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    /// Applies [`sgd_step`] to every weight and bias.
    pub fn apply_sgd(&mut self, grads: &ModelParams, learning_rate: f64, weight_decay: f64) -> Result<()> {
        let grad_layers: Vec<&Linear> = grads.named_layers().into_iter().map(|(_, l)| l).collect();
        let mut layers: Vec<&mut Linear> = self.layers_mut().collect();
        if layers.len() != grad_layers.len() {
            return Err(Error::Dimension {
                op: "apply_sgd",
                left: (layers.len(), 1),
                right: (grad_layers.len(), 1),
            });
        }
        for (l, g) in layers.iter_mut().zip(grad_layers) {
            sgd_step(l.weights.as_mut_slice(), g.weights.as_slice(), learning_rate, weight_decay)?;
            sgd_step(&mut l.bias, &g.bias, learning_rate, weight_decay)?;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.flatten().iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let dims = ModelDims::new(5, 3);
        let a = init_params(&dims, 4).unwrap();
        assert_eq!(a, init_params(&dims, 4).unwrap());
        assert_ne!(a, init_params(&dims, 5).unwrap());
        for (_, l) in a.named_layers() {
            assert!(l.bias.iter().all(|&b| b == 0.0));
            let limit = (6.0 / l.d_in() as f64).sqrt();
            assert!(l.weights.as_slice().iter().all(|w| w.abs() <= limit));
        }
        assert_eq!(a.dims().unwrap(), dims);
    }

    #[test]
    fn invalid_dims() {
        let mut dims = ModelDims::new(5, 3);
        dims.projection_dim = 1;
        assert!(init_params(&dims, 0).is_err());
        assert!(init_params(&ModelDims::new(0, 3), 0).is_err());
        assert!(init_params(&ModelDims::new(4, 1), 0).is_err());
    }

    #[test]
    fn flatten_round_trip() {
        let p = init_params(&ModelDims::new(3, 2), 1).unwrap();
        let mut q = p.zeros_like();
        q.load_flat(&p.flatten()).unwrap();
        assert_eq!(p, q);
        assert_eq!(p.layout().len(), 2 * p.named_layers().len());
    }
}
