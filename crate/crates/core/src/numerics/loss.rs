//! Distribution losses on single probability rows.

use crate::error::{Error, Result};

/// Floor applied to predicted probabilities before taking logs.
pub const EPSILON_PROB: f64 = 1e-12;

/// Tolerance on `Σ p = 1` for inputs of the loss kernels.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-6;

pub fn check_distribution(name: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Distribution(format!("{name} is empty")));
    }
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < -DISTRIBUTION_TOLERANCE) {
        return Err(Error::Distribution(format!("{name} has entry {v}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::Distribution(format!("{name} sums to {sum}")));
    }
    Ok(())
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            op: "distribution pair",
            left: (1, a.len()),
            right: (1, b.len()),
        });
    }
    Ok(())
}

/// `KL(p ‖ s) = Σ p_j (ln p_j − ln s_j)` with `0 · ln 0 = 0` and `s` floored at [`EPSILON_PROB`].
pub fn kl_divergence(p: &[f64], s: &[f64]) -> Result<f64> {
    check_pair(p, s)?;
    check_distribution("target", p)?;
    check_distribution("prediction", s)?;
    Ok(p.iter()
        .zip(s)
        .filter(|(&pj, _)| pj > 0.0)
        .map(|(&pj, &sj)| pj * (pj.ln() - sj.max(EPSILON_PROB).ln()))
        .sum())
}

/// `−Σ target_j ln pred_j` with `pred` floored at [`EPSILON_PROB`].
pub fn cross_entropy(target: &[f64], pred: &[f64]) -> Result<f64> {
    check_pair(target, pred)?;
    check_distribution("target", target)?;
    check_distribution("prediction", pred)?;
    Ok(-target
        .iter()
        .zip(pred)
        .filter(|(&t, _)| t != 0.0)
        .map(|(&t, &q)| t * q.max(EPSILON_PROB).ln())
        .sum::<f64>())
}

/// `ln softmax(logits)` with max subtraction; finite for any finite logits.
pub fn log_softmax_row(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&v| v - max - log_sum).collect()
}

/// [`cross_entropy`] against `softmax(logits)`, computed without a floor so the
/// value stays consistent with the gradient `softmax(logits) − target`.
pub fn cross_entropy_with_logits(target: &[f64], logits: &[f64]) -> Result<f64> {
    check_pair(target, logits)?;
    check_distribution("target", target)?;
    Ok(-target
        .iter()
        .zip(log_softmax_row(logits))
        .filter(|(&t, _)| t != 0.0)
        .map(|(&t, ls)| t * ls)
        .sum::<f64>())
}

/// [`kl_divergence`] against `softmax(logits)`, without a floor.
pub fn kl_divergence_with_logits(p: &[f64], logits: &[f64]) -> Result<f64> {
    check_pair(p, logits)?;
    check_distribution("target", p)?;
    Ok(p.iter()
        .zip(log_softmax_row(logits))
        .filter(|(&pj, _)| pj > 0.0)
        .map(|(&pj, ls)| pj * (pj.ln() - ls))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - LN_2).abs() < 1e-12);
        // 0.5·ln(0.5/0.9) + 0.5·ln(0.5/0.1), evaluated at 50 digits:
        // 0.5·(−0.587786664902119…) + 0.5·(1.609437912434100…) = 0.510825623765990…
        let expected = 0.510_825_623_765_990_7;
        assert!((kl_divergence(&[0.5, 0.5], &[0.9, 0.1]).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn kl_rejects_unnormalized() {
        assert!(matches!(kl_divergence(&[0.5, 0.6], &[0.5, 0.5]), Err(Error::Distribution(_))));
        assert!(matches!(kl_divergence(&[1.0], &[0.5, 0.5]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn kl_clamps_zero_prediction() {
        let v = kl_divergence(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(v.is_finite());
        assert!((v + EPSILON_PROB.ln()).abs() < 1e-9);
    }

    #[test]
    fn cross_entropy_examples() {
        assert!(cross_entropy(&[0.0, 1.0], &[0.0, 1.0]).unwrap() <= 1e-9);
        assert!((cross_entropy(&[0.5, 0.5], &[0.5, 0.5]).unwrap() - LN_2).abs() < 1e-12);
        let v = cross_entropy(&[0.0, 1.0, 0.0], &[0.5, 0.25, 0.25]).unwrap();
        assert!((v - 4f64.ln()).abs() < 1e-12);
        assert!(cross_entropy(&[0.2, 0.2], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn logit_forms_match_probability_forms() {
        let logits = [0.3, -1.2, 2.0];
        let probs = crate::numerics::softmax_row(&logits);
        let p = [0.2, 0.0, 0.8];
        assert!((cross_entropy_with_logits(&p, &logits).unwrap() - cross_entropy(&p, &probs).unwrap()).abs() < 1e-12);
        assert!((kl_divergence_with_logits(&p, &logits).unwrap() - kl_divergence(&p, &probs).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn logit_forms_do_not_saturate() {
        // softmax underflows to 0 for the target class; the loss keeps growing
        let ce = cross_entropy_with_logits(&[1.0, 0.0], &[-800.0, 0.0]).unwrap();
        assert!((ce - 800.0).abs() < 1e-9);
        assert!((kl_divergence_with_logits(&[1.0, 0.0], &[-800.0, 0.0]).unwrap() - 800.0).abs() < 1e-9);
    }
}
