//! Choice of the Tikhonov weight α: the two a-priori rules and generalized
//! cross-validation.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, ComplexMatrix, SvdBundle};
use crate::C64;

pub const ALPHA_FLOOR: f64 = 1e-300;
/// About 3.75 candidates per decade.
pub const DEFAULT_GRID_SIZE: usize = 121;
/// Default grid bounds relative to `‖V‖₂²`. The lower end sits at `eps²`:
/// the factor-based solve stays accurate down there, and the normalized
/// Bessel designs need it.
pub const DEFAULT_GRID_LO: f64 = 1e-32;
pub const DEFAULT_GRID_HI: f64 = 1.0;
/// Relative slack under which two GCV values count as tied.
const TIE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum GcvGrid {
    /// `count` log-spaced points from `lo·‖V‖²` to `hi·‖V‖²`.
    Relative { lo: f64, hi: f64, count: usize },
    Explicit(Vec<f64>),
}

impl Default for GcvGrid {
    fn default() -> Self {
        GcvGrid::Relative {
            lo: DEFAULT_GRID_LO,
            hi: DEFAULT_GRID_HI,
            count: DEFAULT_GRID_SIZE,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlphaPolicy {
    Fixed(f64),
    /// `N (ρ/d)^{2M_h}`; `N` is taken from the design matrix.
    TheoreticalBb { rho: f64, d: f64, half_order: usize },
    /// `M N R^{−2M}`; `M`, `N` are taken from the design matrix.
    TheoreticalFs { radius: f64 },
    Gcv(GcvGrid),
}

pub fn alpha_theoretical_bb(n: usize, rho: f64, d: f64, half_order: usize) -> Result<f64> {
    if !(rho > 0.0 && rho < d) || !d.is_finite() {
        return Err(invalid("theoretical rule needs 0 < rho < d"));
    }
    if n == 0 || half_order == 0 {
        return Err(invalid("theoretical rule needs N, M_h >= 1"));
    }
    let ln = (n as f64).ln() + 2.0 * half_order as f64 * (rho / d).ln();
    Ok(ln.exp().max(ALPHA_FLOOR))
}

pub fn alpha_theoretical_fs(m: usize, n: usize, radius: f64) -> Result<f64> {
    if !(radius > 1.0) || !radius.is_finite() {
        return Err(invalid("source-ring rule needs R > 1"));
    }
    if m == 0 || n == 0 {
        return Err(invalid("source-ring rule needs M, N >= 1"));
    }
    let ln = (m as f64).ln() + (n as f64).ln() - 2.0 * m as f64 * radius.ln();
    Ok(ln.exp().max(ALPHA_FLOOR))
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::EmptyGrid);
    }
    if !(lo > 0.0 && hi >= lo) || !hi.is_finite() {
        return Err(invalid("grid bounds must satisfy 0 < lo <= hi"));
    }
    if count == 1 {
        return Ok(alloc::vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect())
}

impl GcvGrid {
    /// Candidates for a matrix with largest singular value `s_max`.
    pub fn resolve(&self, s_max: f64) -> Result<Vec<f64>> {
        match self {
            GcvGrid::Relative { lo, hi, count } => {
                let scale = s_max * s_max;
                if !(scale > 0.0) {
                    return Err(invalid("GCV on a zero matrix"));
                }
                log_grid(lo * scale, hi * scale, *count)
            }
            GcvGrid::Explicit(v) => {
                if v.is_empty() {
                    return Err(Error::EmptyGrid);
                }
                if v.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                    return Err(invalid("GCV candidates must be positive"));
                }
                Ok(v.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GcvCurve {
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GcvSelection {
    pub alpha: f64,
    pub curve: GcvCurve,
}

/// Projections of `f` onto the left singular vectors.
pub struct GcvData<'a> {
    s: &'a [f64],
    beta2: Vec<f64>,
    perp2: f64,
    n: usize,
}

impl<'a> GcvData<'a> {
    pub fn new(svd: &'a SvdBundle, f: &[C64]) -> Result<Self> {
        let n = svd.u.rows();
        if f.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.len(),
            });
        }
        let beta = svd.u.adjoint_mul_vec(f)?;
        let fit = svd.u.mul_vec(&beta)?;
        let perp: Vec<C64> = f.iter().zip(&fit).map(|(a, b)| a - b).collect();
        Ok(GcvData {
            s: &svd.s,
            beta2: beta.iter().map(|b| b.norm_sqr()).collect(),
            perp2: linalg::norm(&perp).powi(2),
            n,
        })
    }

    /// `G(α) = ‖(I − A)f‖² / trace(I − A)²`.
    pub fn value(&self, alpha: f64) -> f64 {
        let mut resid = self.perp2;
        let mut trace = (self.n - self.s.len()) as f64;
        for (s, b2) in self.s.iter().zip(&self.beta2) {
            let damp = alpha / (s * s + alpha);
            resid += damp * damp * b2;
            trace += damp;
        }
        resid / (trace * trace)
    }
}

/// Minimizes `G` over the grid, preferring the larger α among near-ties.
pub fn gcv_select_svd(svd: &SvdBundle, f: &[C64], grid: &[f64]) -> Result<GcvSelection> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let data = GcvData::new(svd, f)?;
    let values: Vec<f64> = grid.iter().map(|&a| data.value(a)).collect();
    let best = values.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::NonFinite);
    }
    let alpha = grid
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v <= best * (1.0 + TIE))
        .map(|(&a, _)| a)
        .fold(0.0, f64::max);
    Ok(GcvSelection {
        alpha,
        curve: GcvCurve {
            alphas: grid.to_vec(),
            values,
        },
    })
}

pub fn gcv_select(v: &ComplexMatrix, f: &[C64], grid: &[f64]) -> Result<GcvSelection> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    gcv_select_svd(&linalg::svd(v)?, f, grid)
}

/// Resolved α plus the GCV curve when one was computed.
pub fn resolve_alpha(
    policy: &AlphaPolicy,
    v: &ComplexMatrix,
    f: &[C64],
) -> Result<(f64, Option<GcvCurve>)> {
    match policy {
        AlphaPolicy::Fixed(a) => {
            if !(*a > 0.0) || !a.is_finite() {
                return Err(invalid("fixed alpha must be positive"));
            }
            Ok((*a, None))
        }
        AlphaPolicy::TheoreticalBb { rho, d, half_order } => {
            Ok((alpha_theoretical_bb(v.rows(), *rho, *d, *half_order)?, None))
        }
        AlphaPolicy::TheoreticalFs { radius } => {
            Ok((alpha_theoretical_fs(v.cols(), v.rows(), *radius)?, None))
        }
        AlphaPolicy::Gcv(grid) => {
            let svd = linalg::svd(v)?;
            let alphas = grid.resolve(svd.s[0])?;
            let sel = gcv_select_svd(&svd, f, &alphas)?;
            Ok((sel.alpha, Some(sel.curve)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_gram;
    use crate::testutil::{gauss_solve, random_matrix, random_vec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// G(α) with the influence matrix formed by dense solves.
    fn dense_gcv(v: &ComplexMatrix, f: &[C64], alpha: f64) -> f64 {
        let n = v.rows();
        let g = hermitian_gram(v, alpha);
        let c = gauss_solve(&g, &v.adjoint_mul_vec(f).unwrap());
        let fit = v.mul_vec(&c).unwrap();
        let resid: f64 = f.iter().zip(&fit).map(|(a, b)| (a - b).norm_sqr()).sum();
        let mut trace = n as f64;
        for i in 0..n {
            // column i of A = V (G^{-1} V* e_i)
            let vi: Vec<C64> = v.row(i).iter().map(|z| z.conj()).collect();
            let col = v.mul_vec(&gauss_solve(&g, &vi)).unwrap();
            trace -= col[i].re;
        }
        resid / (trace * trace)
    }

    #[test]
    fn bb_rule_values() {
        let a = alpha_theoretical_bb(100, 0.5, 1.0, 10).unwrap();
        assert!((a / (100.0 * 2f64.powi(-20)) - 1.0).abs() < 1e-13);
        assert_eq!(alpha_theoretical_bb(100, 0.5, 1.0, 100_000).unwrap(), ALPHA_FLOOR);
        assert!(alpha_theoretical_bb(100, 1.0, 1.0, 10).is_err());
    }

    #[test]
    fn bb_rule_monotone() {
        for mh in 1..30 {
            assert!(alpha_theoretical_bb(50, 0.4, 1.0, mh + 1).unwrap() < alpha_theoretical_bb(50, 0.4, 1.0, mh).unwrap());
        }
        for n in 1..30 {
            assert!(alpha_theoretical_bb(n + 1, 0.4, 1.0, 5).unwrap() > alpha_theoretical_bb(n, 0.4, 1.0, 5).unwrap());
        }
    }

    #[test]
    fn fs_rule_values() {
        let a = alpha_theoretical_fs(408, 408, 1.05).unwrap();
        let want_log10 = 2.0 * 408f64.log10() - 816.0 * 1.05f64.log10();
        assert!((a.log10() - want_log10).abs() < 1e-12);
        let e = core::f64::consts::E;
        assert!((alpha_theoretical_fs(1, 1, e).unwrap() - (-2.0f64).exp()).abs() < 1e-16);
        assert!(alpha_theoretical_fs(1, 1, 1.0).is_err());
    }

    #[test]
    fn orthonormal_square_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let q = linalg::svd(&random_matrix(&mut rng, 8, 8)).unwrap().u;
        let f = random_vec(&mut rng, 8);
        let grid = log_grid(1e-6, 1e2, 30).unwrap();
        let sel = gcv_select(&q, &f, &grid).unwrap();
        let want = linalg::norm(&f).powi(2) / 64.0;
        for g in &sel.curve.values {
            assert!((g / want - 1.0).abs() < 1e-10);
        }
        assert_eq!(sel.alpha, 1e2);
    }

    #[test]
    fn rank_deficient_prefers_small_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_matrix(&mut rng, 6, 3);
        // fourth column duplicates the first
        let v = ComplexMatrix::from_fn(6, 4, |i, j| a[(i, if j == 3 { 0 } else { j })]);
        let f = v.mul_vec(&random_vec(&mut rng, 4)).unwrap();
        let grid = log_grid(1e-10, 1e0, 21).unwrap();
        let sel = gcv_select(&v, &f, &grid).unwrap();
        assert!(sel.alpha <= 1e-8, "{:e}", sel.alpha);
        // the dense oracle squares the condition number; skip where it is unreliable
        for (&al, &g) in grid.iter().zip(&sel.curve.values).filter(|(a, _)| **a >= 1e-6) {
            let d = dense_gcv(&v, &f, al);
            assert!((g - d).abs() <= 1e-8 * d, "{al:e}: {g:e} vs {d:e}");
        }
    }

    #[test]
    fn single_candidate() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let v = random_matrix(&mut rng, 5, 3);
        let f = random_vec(&mut rng, 5);
        assert_eq!(gcv_select(&v, &f, &[3.5e-4]).unwrap().alpha, 3.5e-4);
        assert_eq!(gcv_select(&v, &f, &[]).unwrap_err(), Error::EmptyGrid);
    }

    #[test]
    fn svd_path_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for &(n, m) in &[(10, 4), (30, 20), (12, 12)] {
            let v = random_matrix(&mut rng, n, m);
            let f = random_vec(&mut rng, n);
            let grid = log_grid(1e-6, 1e1, 20).unwrap();
            let sel = gcv_select(&v, &f, &grid).unwrap();
            for (&al, &g) in grid.iter().zip(&sel.curve.values) {
                let d = dense_gcv(&v, &f, al);
                assert!((g - d).abs() <= 1e-8 * d, "{n}x{m} {al:e}");
            }
        }
    }

    #[test]
    fn scale_invariant_selection() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let v = random_matrix(&mut rng, 15, 6);
        let f = random_vec(&mut rng, 15);
        let grid = log_grid(1e-8, 1e1, 40).unwrap();
        let a = gcv_select(&v, &f, &grid).unwrap().alpha;
        let scaled: Vec<C64> = f.iter().map(|z| z * C64::new(-3.0, 7.0)).collect();
        assert_eq!(gcv_select(&v, &scaled, &grid).unwrap().alpha, a);
    }

    #[test]
    fn default_grid_is_relative() {
        let g = GcvGrid::default().resolve(10.0).unwrap();
        assert_eq!(g.len(), 121);
        assert!((g[0] / 1e-30 - 1.0).abs() < 1e-12);
        assert!((g[120] / 100.0 - 1.0).abs() < 1e-12);
    }
}
