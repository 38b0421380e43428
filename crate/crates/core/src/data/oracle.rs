//! Scoring model for instance-dependent candidate generation: a one-hidden-layer
//! MLP trained with cross-entropy on clean labels. The output layer starts at
//! zero, so an untrained oracle scores every class uniformly.

use rand::seq::SliceRandom;

use super::dataset::PllDataset;
use crate::error::{Error, Result};
use crate::numerics::{linear_backward, relu, relu_backward, sgd_step, softmax_rows, Linear, RealMatrix};
use crate::rng::SeedTree;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            hidden: 32,
            epochs: 50,
            learning_rate: 0.05,
            batch_size: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Oracle {
    hidden: Linear,
    output: Linear,
}

impl Oracle {
    pub fn scores(&self, features: &RealMatrix) -> Result<RealMatrix> {
        let h = relu(&self.hidden.forward(features)?);
        Ok(softmax_rows(&self.output.forward(&h)?))
    }
}

pub fn pretrain_oracle(dataset: &PllDataset, epochs: usize, seed: u64) -> Result<RealMatrix> {
    let config = OracleConfig {
        epochs,
        seed,
        ..OracleConfig::default()
    };
    train_oracle(dataset, &config)?.scores(&dataset.features())
}

pub fn train_oracle(dataset: &PllDataset, config: &OracleConfig) -> Result<Oracle> {
    dataset.require_fully_labeled()?;
    if dataset.is_empty() || config.batch_size == 0 || config.hidden == 0 {
        return Err(Error::InvalidArgument("oracle needs data, a positive batch size and hidden width".into()));
    }
    let k = dataset.num_classes();
    let seeds = SeedTree::new(config.seed);
    let mut oracle = Oracle {
        hidden: Linear::init_uniform(dataset.feature_dim(), config.hidden, &mut seeds.child(0).rng())?,
        output: Linear::zeros(config.hidden, k),
    };
    let features = dataset.features();
    let labels = dataset.true_labels();
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut seeds.child(1).child(epoch as u64).rng());
        for chunk in order.chunks(config.batch_size) {
            let x = features.select_rows(chunk);
            let pre = oracle.hidden.forward(&x)?;
            let h = relu(&pre);
            let probs = softmax_rows(&oracle.output.forward(&h)?);
            let scale = 1.0 / chunk.len() as f64;
            let mut dlogits = probs.scale(scale);
            for (row, &i) in chunk.iter().enumerate() {
                let v = dlogits.get(row, labels[i]) - scale;
                dlogits.set(row, labels[i], v);
            }
            let out_grads = linear_backward(&h, &oracle.output.weights, &dlogits)?;
            let dpre = relu_backward(&pre, &out_grads.input)?;
            let hid_grads = linear_backward(&x, &oracle.hidden.weights, &dpre)?;
            let lr = config.learning_rate;
            sgd_step(oracle.output.weights.as_mut_slice(), out_grads.weights.as_slice(), lr, 0.0)?;
            sgd_step(&mut oracle.output.bias, &out_grads.bias, lr, 0.0)?;
            sgd_step(oracle.hidden.weights.as_mut_slice(), hid_grads.weights.as_slice(), lr, 0.0)?;
            sgd_step(&mut oracle.hidden.bias, &hid_grads.bias, lr, 0.0)?;
        }
    }
    Ok(oracle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate::make_blobs;

    #[test]
    fn untrained_oracle_is_uniform() {
        let d = make_blobs(4, 5, 3, 2.0, 1).unwrap();
        let scores = pretrain_oracle(&d, 0, 3).unwrap();
        assert!(scores.as_slice().iter().all(|&v| (v - 0.25).abs() < 1e-12));
    }

    #[test]
    fn rows_are_distributions() {
        let d = make_blobs(3, 20, 4, 3.0, 1).unwrap();
        let scores = pretrain_oracle(&d, 3, 3).unwrap();
        for row in scores.rows_iter() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }
}
