//! Differentiable layer kernels with hand-written backward passes.
//!
//! Each forward function is pure. The matching backward function takes the
//! forward input (and, where cheaper, the forward output) plus the upstream
//! gradient, and returns the gradient with respect to the forward input.

use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::matrix::RealMatrix;
use crate::error::{Error, Result};

/// Smallest row norm accepted by [`l2_normalize_rows`].
pub const EPSILON_NORM: f64 = 1e-12;

/// Affine layer `y = x·W + b` with `W` stored as `d_in × d_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weights: RealMatrix,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        Linear {
            weights: RealMatrix::zeros(d_in, d_out),
            bias: vec![0.0; d_out],
        }
    }

    /// Fan-in scaled uniform init on `[-sqrt(6/d_in), sqrt(6/d_in)]`, zero bias.
    pub fn init_uniform<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidArgument(format!(
                "linear layer dims must be positive, got {d_in}x{d_out}"
            )));
        }
        let limit = (6.0 / d_in as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let data = (0..d_in * d_out).map(|_| dist.sample(rng)).collect();
        Ok(Linear {
            weights: RealMatrix::from_vec(d_in, d_out, data)?,
            bias: vec![0.0; d_out],
        })
    }

    pub fn d_in(&self) -> usize {
        self.weights.rows()
    }

    pub fn d_out(&self) -> usize {
        self.weights.cols()
    }

    pub fn forward(&self, input: &RealMatrix) -> Result<RealMatrix> {
        linear_forward(input, &self.weights, &self.bias)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearGrads {
    pub input: RealMatrix,
    pub weights: RealMatrix,
    pub bias: Vec<f64>,
}

pub fn linear_forward(input: &RealMatrix, weights: &RealMatrix, bias: &[f64]) -> Result<RealMatrix> {
    if input.cols() != weights.rows() || bias.len() != weights.cols() {
        return Err(Error::Dimension {
            op: "linear_forward",
            left: input.shape(),
            right: weights.shape(),
        });
    }
    let mut out = input.matmul(weights)?;
    for r in 0..out.rows() {
        for (o, &b) in out.row_mut(r).iter_mut().zip(bias) {
            *o += b;
        }
    }
    Ok(out)
}

/// Gradients of `linear_forward` given its input and the upstream gradient.
pub fn linear_backward(input: &RealMatrix, weights: &RealMatrix, upstream: &RealMatrix) -> Result<LinearGrads> {
    if input.cols() != weights.rows() || upstream.cols() != weights.cols() || upstream.rows() != input.rows() {
        return Err(Error::Dimension {
            op: "linear_backward",
            left: upstream.shape(),
            right: (input.rows(), weights.cols()),
        });
    }
    Ok(LinearGrads {
        input: upstream.matmul_transpose(weights)?,
        weights: input.transpose_matmul(upstream)?,
        bias: upstream.column_sums(),
    })
}

pub fn relu(input: &RealMatrix) -> RealMatrix {
    input.map(|v| if v > 0.0 { v } else { 0.0 })
}

/// Masks `upstream` by `pre_activation > 0`.
pub fn relu_backward(pre_activation: &RealMatrix, upstream: &RealMatrix) -> Result<RealMatrix> {
    let mut out = upstream.clone();
    if pre_activation.shape() != upstream.shape() {
        return Err(Error::Dimension {
            op: "relu_backward",
            left: pre_activation.shape(),
            right: upstream.shape(),
        });
    }
    for (g, &x) in out.as_mut_slice().iter_mut().zip(pre_activation.as_slice()) {
        if x <= 0.0 {
            *g = 0.0;
        }
    }
    Ok(out)
}

pub fn softmax_row(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &RealMatrix) -> RealMatrix {
    let mut out = RealMatrix::zeros(logits.rows(), logits.cols());
    for r in 0..logits.rows() {
        out.row_mut(r).copy_from_slice(&softmax_row(logits.row(r)));
    }
    out
}

/// Backward of softmax given its output `probs`: `s ⊙ (g − ⟨g, s⟩)` per row.
pub fn softmax_backward(probs: &RealMatrix, upstream: &RealMatrix) -> Result<RealMatrix> {
    if probs.shape() != upstream.shape() {
        return Err(Error::Dimension {
            op: "softmax_backward",
            left: probs.shape(),
            right: upstream.shape(),
        });
    }
    let mut out = RealMatrix::zeros(probs.rows(), probs.cols());
    for r in 0..probs.rows() {
        let s = probs.row(r);
        let g = upstream.row(r);
        let inner: f64 = s.iter().zip(g).map(|(a, b)| a * b).sum();
        for ((o, &si), &gi) in out.row_mut(r).iter_mut().zip(s).zip(g) {
            *o = si * (gi - inner);
        }
    }
    Ok(out)
}

fn row_norm(row: &[f64]) -> f64 {
    row.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn l2_normalize_rows(m: &RealMatrix) -> Result<RealMatrix> {
    let mut out = m.clone();
    for r in 0..m.rows() {
        let norm = row_norm(m.row(r));
        if !(norm >= EPSILON_NORM) {
            return Err(Error::DegenerateVector { row: r, norm });
        }
        for v in out.row_mut(r) {
            *v /= norm;
        }
    }
    Ok(out)
}

/// Backward of row normalization: `(g − z⟨z, g⟩) / ‖x‖` per row.
pub fn l2_normalize_backward(input: &RealMatrix, upstream: &RealMatrix) -> Result<RealMatrix> {
    if input.shape() != upstream.shape() {
        return Err(Error::Dimension {
            op: "l2_normalize_backward",
            left: input.shape(),
            right: upstream.shape(),
        });
    }
    let mut out = RealMatrix::zeros(input.rows(), input.cols());
    for r in 0..input.rows() {
        let x = input.row(r);
        let norm = row_norm(x);
        if !(norm >= EPSILON_NORM) {
            return Err(Error::DegenerateVector { row: r, norm });
        }
        let g = upstream.row(r);
        let zg: f64 = x.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() / norm;
        for ((o, &xi), &gi) in out.row_mut(r).iter_mut().zip(x).zip(g) {
            *o = (gi - xi / norm * zg) / norm;
        }
    }
    Ok(out)
}
