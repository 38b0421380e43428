//! Central finite-difference gradient checker.

use crate::error::{Error, Result};

/// Step used for central differences.
pub const FD_STEP: f64 = 1e-5;

/// Floor on the relative-error denominator.
pub const DENOMINATOR_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Worst relative error within each named parameter block.
    pub per_parameter_errors: Vec<(String, f64)>,
    pub passed: bool,
}

/// A named contiguous block of a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamBlock {
    pub name: String,
    pub len: usize,
}

impl ParamBlock {
    pub fn new(name: impl Into<String>, len: usize) -> Self {
        ParamBlock { name: name.into(), len }
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(DENOMINATOR_FLOOR)
}

/// `(f(x + h) − f(x − h)) / 2h` with `h = FD_STEP`.
pub fn central_difference(mut f: impl FnMut(f64) -> f64, x: f64) -> f64 {
    let plus = f(x + FD_STEP);
    let minus = f(x - FD_STEP);
    (plus - minus) / (2.0 * FD_STEP)
}

/// Compares the analytic gradient returned by `loss` against central
/// differences of its value, coordinate by coordinate.
///
/// `loss` maps a flat parameter vector to `(value, gradient)`. `layout`
/// partitions the vector into named blocks and must cover it exactly.
pub fn finite_diff_check<F>(mut loss: F, params: &[f64], layout: &[ParamBlock], tolerance: f64) -> Result<GradCheckReport>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let total: usize = layout.iter().map(|b| b.len).sum();
    if total != params.len() {
        return Err(Error::Dimension {
            op: "finite_diff_check layout",
            left: (total, 1),
            right: (params.len(), 1),
        });
    }
    let (value, analytic) = loss(params)?;
    if !value.is_finite() {
        return Err(Error::NonFinite("loss at base point".into()));
    }
    if analytic.len() != params.len() {
        return Err(Error::Dimension {
            op: "finite_diff_check gradient",
            left: (analytic.len(), 1),
            right: (params.len(), 1),
        });
    }

    let mut probe = params.to_vec();
    let mut per_parameter_errors = Vec::with_capacity(layout.len());
    let mut max_relative_error = 0.0f64;
    let mut offset = 0;
    for block in layout {
        let mut block_max = 0.0f64;
        for i in offset..offset + block.len {
            let mut eval = |x: f64| -> Result<f64> {
                probe[i] = x;
                let (v, _) = loss(&probe)?;
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("loss while perturbing {}[{}]", block.name, i - offset)));
                }
                Ok(v)
            };
            let plus = eval(params[i] + FD_STEP)?;
            let minus = eval(params[i] - FD_STEP)?;
            probe[i] = params[i];
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            block_max = block_max.max(relative_error(analytic[i], numeric));
        }
        max_relative_error = max_relative_error.max(block_max);
        per_parameter_errors.push((block.name.clone(), block_max));
        offset += block.len;
    }
    Ok(GradCheckReport {
        max_relative_error,
        per_parameter_errors,
        passed: max_relative_error < tolerance,
    })
}
