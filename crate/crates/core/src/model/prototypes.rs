use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{l2_normalize_rows, RealMatrix};
use crate::rng::SeedTree;

/// Tolerance on prototype row norms.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// `K × d_p` matrix of unit-norm class prototypes.
#[derive(Debug, Clone, PartialEq)]
pub struct Prototypes {
    matrix: RealMatrix,
}

pub fn init_prototypes(num_classes: usize, dim: usize, seed: u64) -> Result<Prototypes> {
    if num_classes < 2 || dim == 0 {
        return Err(Error::InvalidArgument(format!(
            "prototypes need K >= 2 and d_p >= 1, got {num_classes}x{dim}"
        )));
    }
    let mut rng = SeedTree::new(seed).rng();
    let data = (0..num_classes * dim).map(|_| rng.sample(StandardNormal)).collect();
    Prototypes::from_matrix(l2_normalize_rows(&RealMatrix::from_vec(num_classes, dim, data)?)?)
}

impl Prototypes {
    /// Wraps a matrix whose rows are already unit norm.
    pub fn from_matrix(matrix: RealMatrix) -> Result<Self> {
        for (k, row) in matrix.rows_iter().enumerate() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::DegenerateVector { row: k, norm });
            }
        }
        Ok(Prototypes { matrix })
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    pub fn num_classes(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        self.matrix.row(k)
    }

    /// Replaces row `k` with `value / ‖value‖`.
    pub fn set_normalized(&mut self, k: usize, value: &[f64]) -> Result<()> {
        let norm = value.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm >= crate::numerics::EPSILON_NORM) {
            return Err(Error::DegenerateVector { row: k, norm });
        }
        for (c, &v) in self.matrix.row_mut(k).iter_mut().zip(value) {
            *c = v / norm;
        }
        Ok(())
    }
}

/// Cosine logits `z_i · c_k / τ` for unit-norm `z` rows.
pub fn prototype_logits(z: &RealMatrix, prototypes: &Prototypes, tau: f64) -> Result<RealMatrix> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("temperature must be > 0, got {tau}")));
    }
    Ok(z.matmul_transpose(prototypes.matrix())?.scale(1.0 / tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_rows_are_unit_and_deterministic() {
        let p = init_prototypes(5, 3, 7).unwrap();
        for row in p.matrix().rows_iter() {
            assert!((row.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() < 1e-9);
        }
        assert_eq!(p, init_prototypes(5, 3, 7).unwrap());
        let two = init_prototypes(2, 2, 1).unwrap();
        let cos: f64 = two.row(0).iter().zip(two.row(1)).map(|(a, b)| a * b).sum();
        assert!(cos.abs() < 1.0 - 1e-9);
        assert!(init_prototypes(1, 3, 0).is_err());
    }

    #[test]
    fn logits_examples() {
        let protos = Prototypes::from_matrix(RealMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap()).unwrap();
        let z = RealMatrix::row_vector(&[1.0, 0.0]);
        let l = prototype_logits(&z, &protos, 1.0).unwrap();
        assert_eq!(l.row(0), &[1.0, 0.0]);
        let l10 = prototype_logits(&z, &protos, 0.1).unwrap();
        assert!((l10.get(0, 0) - 10.0).abs() < 1e-12);
        assert!(prototype_logits(&z, &protos, 0.0).is_err());
    }

    #[test]
    fn rejects_non_unit_rows() {
        assert!(Prototypes::from_matrix(RealMatrix::from_rows(&[[2.0, 0.0]]).unwrap()).is_err());
    }
}
