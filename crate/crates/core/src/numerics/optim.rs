use crate::error::{Error, Result};

/// In-place SGD with L2 weight decay: `w ← w − lr·(g + wd·w)`.
pub fn sgd_step(params: &mut [f64], grads: &[f64], learning_rate: f64, weight_decay: f64) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::Dimension {
            op: "sgd_step",
            left: (params.len(), 1),
            right: (grads.len(), 1),
        });
    }
    for (w, &g) in params.iter_mut().zip(grads) {
        *w -= learning_rate * (g + weight_decay * *w);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_examples() {
        let mut w = vec![1.0, -2.0];
        sgd_step(&mut w, &[0.3, 0.4], 0.0, 0.1).unwrap();
        assert_eq!(w, vec![1.0, -2.0]);
        sgd_step(&mut w, &[0.0, 0.0], 0.5, 0.0).unwrap();
        assert_eq!(w, vec![1.0, -2.0]);
        let mut w = vec![1.0];
        sgd_step(&mut w, &[0.5], 0.1, 0.0).unwrap();
        assert!((w[0] - 0.95).abs() < 1e-15);
        assert!(sgd_step(&mut w, &[0.5, 0.1], 0.1, 0.0).is_err());
    }

    #[test]
    fn weight_decay_shrinks() {
        let mut w = vec![2.0];
        sgd_step(&mut w, &[0.0], 0.1, 0.5).unwrap();
        assert!((w[0] - 1.9).abs() < 1e-15);
    }
}
