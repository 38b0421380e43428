//! Dense matrices, layer kernels with explicit backward passes, loss
//! kernels, SGD and a finite-difference gradient checker.

pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod matrix;
pub mod optim;

pub use gradcheck::{finite_diff_check, GradCheckReport, ParamBlock};
pub use layers::{
    l2_normalize_backward, l2_normalize_rows, linear_backward, linear_forward, relu, relu_backward,
    softmax_backward, softmax_row, softmax_rows, Linear, LinearGrads, EPSILON_NORM,
};
pub use loss::{
    check_distribution, cross_entropy, cross_entropy_with_logits, kl_divergence, kl_divergence_with_logits, log_softmax_row,
    EPSILON_PROB,
};
pub use matrix::{argmax, dot, RealMatrix};
pub use optim::sgd_step;
