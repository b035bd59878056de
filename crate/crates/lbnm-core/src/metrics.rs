//! Error measures.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::linalg::norm;
use crate::C64;

/// Interior targets with computed values and optional ground truth.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FieldSample {
    pub points: Vec<Point>,
    pub values: Vec<C64>,
    pub truth: Option<Vec<C64>>,
    /// `false` for targets that failed the inside test.
    pub valid: Vec<bool>,
}

impl FieldSample {
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// `‖u_c − u‖ / ‖u‖` over valid points.
pub fn relative_l2(sample: &FieldSample) -> Result<f64> {
    let truth = sample
        .truth
        .as_ref()
        .ok_or_else(|| invalid("relative error needs a reference field"))?;
    let n = sample.values.len();
    if truth.len() != n || sample.valid.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: truth.len().min(sample.valid.len()),
        });
    }
    let (mut diff, mut reference) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in (0..n).filter(|&i| sample.valid[i]) {
        diff.push(sample.values[i] - truth[i]);
        reference.push(truth[i]);
    }
    let denom = norm(&reference);
    if !(denom > 0.0) {
        return Err(Error::ZeroTruth);
    }
    Ok(norm(&diff) / denom)
}

/// Least-squares slope of `log₁₀(error)` against `M`.
pub fn convergence_slope(errors: &[(f64, f64)]) -> Result<f64> {
    if errors.len() < 3 {
        return Err(invalid("slope fit needs at least 3 points"));
    }
    if errors.iter().any(|(_, e)| !(*e > 0.0)) {
        return Err(invalid("slope fit needs positive errors"));
    }
    let n = errors.len() as f64;
    let mx = errors.iter().map(|(m, _)| m).sum::<f64>() / n;
    let my = errors.iter().map(|(_, e)| e.log10()).sum::<f64>() / n;
    let sxx: f64 = errors.iter().map(|(m, _)| (m - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = errors.iter().map(|(m, e)| (m - mx) * (e.log10() - my)).sum();
    Ok(sxy / sxx)
}
