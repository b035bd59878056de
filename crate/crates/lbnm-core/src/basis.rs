//! Hypothesis spaces: the normalized Bessel basis, the fundamental-solution
//! ring and unions of Bessel bases about several centers.
//!
//! Bessel slot `m ∈ [0, 2M_h]` holds order `n = m − M_h`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::linalg::ComplexMatrix;
use crate::specfun;
use crate::C64;

/// `|J_n(kρ)|` below this is treated as a Dirichlet eigenvalue hit.
pub const EIGENVALUE_THRESHOLD: f64 = 1e-280;
/// Default enclosing-radius margin over the farthest collocation point.
pub const RHO_MARGIN: f64 = 1.05;
const SOURCE_MIN_DISTANCE: f64 = 1e-12;

/// `k = k_r + iσ` with `k_r > 0`, `σ ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wavenumber {
    pub k_r: f64,
    pub sigma: f64,
}

impl Wavenumber {
    pub fn new(k_r: f64, sigma: f64) -> Result<Self> {
        if !(k_r > 0.0) || !k_r.is_finite() || !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(invalid("wavenumber needs k_r > 0 and sigma >= 0"));
        }
        Ok(Wavenumber { k_r, sigma })
    }

    /// `σ = ratio · k_r`.
    pub fn with_damping_ratio(k_r: f64, ratio: f64) -> Result<Self> {
        Self::new(k_r, ratio * k_r)
    }

    pub fn value(self) -> C64 {
        C64::new(self.k_r, self.sigma)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BesselBasisSpec {
    pub center: Point,
    pub half_order: usize,
    pub rho: f64,
}

impl BesselBasisSpec {
    /// Uses `ρ = 1.05 · max |x_j − center|`.
    pub fn enclosing(center: Point, half_order: usize, points: &[Point]) -> Self {
        let r = points.iter().map(|p| p.dist(center)).fold(0.0, f64::max);
        BesselBasisSpec {
            center,
            half_order,
            rho: RHO_MARGIN * r,
        }
    }

    pub fn len(&self) -> usize {
        2 * self.half_order + 1
    }

    /// Number of points outside the circle of radius ρ.
    pub fn enclosure_violations(&self, points: &[Point]) -> usize {
        points.iter().filter(|p| p.dist(self.center) > self.rho).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FsBasisSpec {
    pub center: Point,
    pub radius: f64,
    pub count: usize,
}

impl FsBasisSpec {
    pub fn sources(&self) -> Vec<Point> {
        (0..self.count)
            .map(|j| {
                let a = TAU * j as f64 / self.count as f64;
                self.center + Point::new(self.radius * a.cos(), self.radius * a.sin())
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiCenterSpec {
    pub centers: Vec<BesselBasisSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisSpec {
    Bessel(BesselBasisSpec),
    Fs(FsBasisSpec),
    MultiCenter(MultiCenterSpec),
    /// Concatenation, as produced by enrichment.
    Union(Vec<BasisSpec>),
}

impl BasisSpec {
    pub fn len(&self) -> usize {
        match self {
            BasisSpec::Bessel(b) => b.len(),
            BasisSpec::Fs(f) => f.count,
            BasisSpec::MultiCenter(m) => m.centers.iter().map(|c| c.len()).sum(),
            BasisSpec::Union(parts) => parts.iter().map(|p| p.len()).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
enum Block {
    Bessel {
        spec: BesselBasisSpec,
        /// `ln(√(2πρ)|J_n(kρ)|)` for `n = 0..=M_h`.
        log_norm: Vec<f64>,
    },
    Fs {
        sources: Vec<Point>,
    },
}

impl Block {
    fn len(&self) -> usize {
        match self {
            Block::Bessel { spec, .. } => spec.len(),
            Block::Fs { sources } => sources.len(),
        }
    }
}

/// A basis specification prepared for a wavenumber.
#[derive(Clone, Debug)]
pub struct Basis {
    spec: BasisSpec,
    k: Wavenumber,
    blocks: Vec<Block>,
}

fn bessel_block(spec: &BesselBasisSpec, k: Wavenumber) -> Result<Block> {
    if !(spec.rho > 0.0) || !spec.rho.is_finite() {
        return Err(invalid("normalization radius must be positive"));
    }
    let j = specfun::bessel_j_batch_log(spec.half_order, k.value() * spec.rho)?;
    let ln_threshold = EIGENVALUE_THRESHOLD.ln();
    let half_ln = 0.5 * (TAU * spec.rho).ln();
    let mut log_norm = Vec::with_capacity(j.len());
    for (n, v) in j.iter().enumerate() {
        if v.is_zero() || v.ln_abs < ln_threshold {
            return Err(Error::EigenvalueProximity {
                order: n as i64,
                magnitude: if v.is_zero() { 0.0 } else { v.ln_abs.exp() },
            });
        }
        log_norm.push(v.ln_abs + half_ln);
    }
    Ok(Block::Bessel {
        spec: spec.clone(),
        log_norm,
    })
}

fn collect_blocks(spec: &BasisSpec, k: Wavenumber, out: &mut Vec<Block>) -> Result<()> {
    match spec {
        BasisSpec::Bessel(b) => out.push(bessel_block(b, k)?),
        BasisSpec::MultiCenter(m) => {
            if m.centers.is_empty() {
                return Err(invalid("multi-center basis needs at least one center"));
            }
            for c in &m.centers {
                out.push(bessel_block(c, k)?);
            }
        }
        BasisSpec::Fs(f) => {
            if f.count == 0 || !(f.radius > 0.0) {
                return Err(invalid("source ring needs count >= 1 and radius > 0"));
            }
            out.push(Block::Fs { sources: f.sources() });
        }
        BasisSpec::Union(parts) => {
            for p in parts {
                collect_blocks(p, k, out)?;
            }
        }
    }
    Ok(())
}

impl Basis {
    /// Checks the normalization of every Bessel block once.
    pub fn new(spec: BasisSpec, k: Wavenumber) -> Result<Self> {
        let mut blocks = Vec::new();
        collect_blocks(&spec, k, &mut blocks)?;
        if blocks.iter().all(|b| b.len() == 0) {
            return Err(invalid("basis has no functions"));
        }
        Ok(Basis { spec, k, blocks })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn wavenumber(&self) -> Wavenumber {
        self.k
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(Block::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Concatenation of `self` followed by `other`.
    pub fn union(&self, other: &Basis) -> Result<Basis> {
        if self.k != other.k {
            return Err(invalid("cannot join bases prepared for different wavenumbers"));
        }
        let mut parts = match &self.spec {
            BasisSpec::Union(p) => p.clone(),
            s => vec![s.clone()],
        };
        parts.push(other.spec.clone());
        let mut blocks = self.blocks.clone();
        blocks.extend(other.blocks.iter().cloned());
        Ok(Basis {
            spec: BasisSpec::Union(parts),
            k: self.k,
            blocks,
        })
    }

    /// All basis functions at `x`, written into `out` (length [`Basis::len`]).
    pub fn eval_into(&self, x: Point, out: &mut [C64]) -> Result<()> {
        if out.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: out.len(),
            });
        }
        let k = self.k.value();
        let mut offset = 0;
        for block in &self.blocks {
            let len = block.len();
            let dst = &mut out[offset..offset + len];
            match block {
                Block::Bessel { spec, log_norm } => bessel_entries(spec, log_norm, k, x, dst)?,
                Block::Fs { sources } => {
                    for (d, &y) in dst.iter_mut().zip(sources) {
                        *d = fundamental_solution(k, x, y)?;
                    }
                }
            }
            offset += len;
        }
        Ok(())
    }

    pub fn eval(&self, x: Point) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// `V_{jm} = u_m(x_j)`.
    pub fn design_matrix(&self, points: &[Point]) -> Result<ComplexMatrix> {
        let m = self.len();
        let mut data = vec![C64::new(0.0, 0.0); points.len() * m];
        for (row, &p) in data.chunks_mut(m.max(1)).zip(points) {
            self.eval_into(p, row)?;
        }
        ComplexMatrix::from_row_major(points.len(), m, data)
    }
}

fn bessel_entries(
    spec: &BesselBasisSpec,
    log_norm: &[f64],
    k: C64,
    x: Point,
    out: &mut [C64],
) -> Result<()> {
    let mh = spec.half_order;
    let (r, theta) = x.polar_about(spec.center);
    out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
    if r == 0.0 {
        out[mh] = C64::new((-log_norm[0]).exp(), 0.0);
        return Ok(());
    }
    let j = specfun::bessel_j_batch_log(mh, k * r)?;
    for (n, (v, &ln)) in j.iter().zip(log_norm).enumerate() {
        if v.is_zero() {
            continue;
        }
        let mag = (v.ln_abs - ln).exp();
        let phase = v.arg + n as f64 * theta;
        let (s, c) = phase.sin_cos();
        let pos = C64::new(mag * c, mag * s);
        out[mh + n] = pos;
        if n > 0 {
            // (−1)^n J_n e^{−inθ}
            let (s, c) = (v.arg - n as f64 * theta).sin_cos();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            out[mh - n] = C64::new(sign * mag * c, sign * mag * s);
        }
    }
    Ok(())
}

/// `(i/4) H_0^{(1)}(k|x − y|)`.
pub fn fundamental_solution(k: C64, x: Point, y: Point) -> Result<C64> {
    let d = x.dist(y);
    if d < SOURCE_MIN_DISTANCE {
        return Err(Error::Singular("evaluation point coincides with a source"));
    }
    Ok(C64::new(0.0, 0.25) * specfun::hankel1(0, k * d)?)
}

pub fn eval_bessel_basis(spec: &BesselBasisSpec, k: Wavenumber, x: Point) -> Result<Vec<C64>> {
    Basis::new(BasisSpec::Bessel(spec.clone()), k)?.eval(x)
}

pub fn eval_fs_basis(spec: &FsBasisSpec, k: Wavenumber, x: Point) -> Result<Vec<C64>> {
    Basis::new(BasisSpec::Fs(spec.clone()), k)?.eval(x)
}

pub fn eval_multicenter_basis(spec: &MultiCenterSpec, k: Wavenumber, x: Point) -> Result<Vec<C64>> {
    Basis::new(BasisSpec::MultiCenter(spec.clone()), k)?.eval(x)
}

/// Truncation residual of the addition-theorem expansion of a source at
/// `d e^{iφ}` about the origin, evaluated at `x` with `|x| < d`.
pub fn graf_check(d: f64, k: Wavenumber, x: Point, phi: f64, n_trunc: usize) -> Result<f64> {
    let (r, theta) = x.polar_about(Point::ORIGIN);
    if !(d > 0.0) || !(r < d) {
        return Err(invalid("graf_check needs |x| < d"));
    }
    let kv = k.value();
    let source = Point::new(d * phi.cos(), d * phi.sin());
    let lhs = fundamental_solution(kv, x, source)?;
    let h = specfun::hankel1_batch(n_trunc, kv * d)?;
    let j = specfun::bessel_j_batch(n_trunc, kv * r)?;
    let mut sum = h[0] * j[0];
    for n in 1..=n_trunc {
        sum += h[n] * j[n] * (2.0 * (n as f64 * (theta - phi)).cos());
    }
    Ok((lhs - C64::new(0.0, 0.25) * sum).norm())
}

/// Phase-free quick check that `k²` is not near a Dirichlet eigenvalue of the
/// disk of radius `rho`: smallest `|J_n(kρ)|` over `n ≤ half_order`.
pub fn min_boundary_bessel(k: Wavenumber, rho: f64, half_order: usize) -> Result<f64> {
    let j = specfun::bessel_j_batch_log(half_order, k.value() * rho)?;
    Ok(j.iter()
        .map(|v| if v.is_zero() { 0.0 } else { v.ln_abs.exp() })
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(mh: usize, rho: f64) -> BesselBasisSpec {
        BesselBasisSpec {
            center: Point::ORIGIN,
            half_order: mh,
            rho,
        }
    }

    fn k(kr: f64, s: f64) -> Wavenumber {
        Wavenumber::new(kr, s).unwrap()
    }

    #[test]
    fn wavenumber_validation() {
        assert!(Wavenumber::new(0.0, 0.0).is_err());
        assert!(Wavenumber::new(1.0, -0.1).is_err());
        assert_eq!(Wavenumber::with_damping_ratio(10.0, 0.05).unwrap().sigma, 0.5);
    }

    #[test]
    fn center_value() {
        let kk = k(7.0, 0.3);
        let s = spec(5, 1.0);
        let v = eval_bessel_basis(&s, kk, Point::ORIGIN).unwrap();
        let j0 = specfun::bessel_j(0, kk.value()).unwrap().norm();
        for (m, z) in v.iter().enumerate() {
            if m == 5 {
                assert!((z.re - 1.0 / (TAU.sqrt() * j0)).abs() < 1e-14);
                assert_eq!(z.im, 0.0);
            } else {
                assert_eq!(*z, C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn real_wavenumber_symmetries() {
        let kk = k(9.0, 0.0);
        let s = spec(6, 1.2);
        let x = Point::new(0.31, -0.52);
        let xr = Point::new(0.31, 0.52);
        let a = eval_bessel_basis(&s, kk, x).unwrap();
        let b = eval_bessel_basis(&s, kk, xr).unwrap();
        for n in 0..=6usize {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((a[6 - n] - a[6 + n].conj() * sign).norm() < 1e-14);
            assert!((b[6 + n] - a[6 + n].conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn matches_direct_quotient() {
        let kk = k(10.0, 0.0);
        let s = spec(20, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let th: f64 = rng.gen_range(0.0..TAU);
            let x = Point::new(0.5 * th.cos(), 0.5 * th.sin());
            let v = eval_bessel_basis(&s, kk, x).unwrap();
            for n in -20i64..=20 {
                let num = specfun::bessel_j(n, kk.value() * 0.5).unwrap()
                    * C64::from_polar(1.0, n as f64 * th);
                let den = (TAU * 1.0f64).sqrt() * specfun::bessel_j(n, kk.value()).unwrap().norm();
                let want = num / den;
                let got = v[(n + 20) as usize];
                assert!((got - want).norm() <= 1e-12 * want.norm(), "n={n}");
            }
        }
    }

    #[test]
    fn unit_norm_on_reference_circle() {
        for &(kk, mh, rho) in &[(k(10.0, 0.0), 30, 1.0), (k(184.79, 36.958), 60, 0.87), (k(8.0, 0.4), 40, 1.0)] {
            let s = spec(mh, rho);
            let basis = Basis::new(BasisSpec::Bessel(s), kk).unwrap();
            let q = 4096;
            let mut acc = vec![0.0; 2 * mh + 1];
            for j in 0..q {
                let a = TAU * j as f64 / q as f64;
                let v = basis.eval(Point::new(rho * a.cos(), rho * a.sin())).unwrap();
                for (s, z) in acc.iter_mut().zip(&v) {
                    *s += z.norm_sqr();
                }
            }
            for s in acc {
                assert!((s * TAU * rho / q as f64 - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn damped_entries_do_not_collapse() {
        let s = spec(40, 1.0);
        let x = Point::new(0.1, 0.0);
        for i in 0..=10 {
            let kk = k(50.0, 0.02 * i as f64 * 50.0);
            let v = eval_bessel_basis(&s, kk, x).unwrap();
            assert!(v.iter().all(|z| z.norm() > 1e-280 && z.norm().is_finite()));
        }
    }

    #[test]
    fn eigenvalue_proximity_detected() {
        // first zero of J_0
        let j01 = 2.404_825_557_695_773;
        let err = Basis::new(BasisSpec::Bessel(spec(3, 1.0)), k(j01, 0.0));
        // exact zero unreachable in floating point; only a negligible |J_0| is flagged
        if let Err(e) = err {
            assert!(matches!(e, Error::EigenvalueProximity { order: 0, .. }));
        }
        assert!(min_boundary_bessel(k(j01, 0.0), 1.0, 3).unwrap() < 1e-15);
    }

    #[test]
    fn single_source_value() {
        let kk = k(3.0, 0.5);
        let f = FsBasisSpec {
            center: Point::ORIGIN,
            radius: 1.5,
            count: 1,
        };
        let v = eval_fs_basis(&f, kk, Point::ORIGIN).unwrap();
        let want = C64::new(0.0, 0.25) * specfun::hankel1(0, kk.value() * 1.5).unwrap();
        assert!((v[0] - want).norm() < 1e-15);
        assert!(eval_fs_basis(&f, kk, Point::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn source_kernel_decays() {
        let kk = k(100.0, 10.0);
        let y = Point::new(2.0, 0.0);
        let near = fundamental_solution(kk.value(), Point::new(1.9, 0.0), y).unwrap().norm();
        let far = fundamental_solution(kk.value(), Point::new(1.0, 0.0), y).unwrap().norm();
        assert!(far / near < 1e-3);
        // asymptotic |H_0(z)| ≈ √(2/(π|z|)) e^{−Im z}
        let asym = ((0.1f64 / 1.0).sqrt()) * (-10.0f64 * 0.9).exp();
        assert!((far / near / asym - 1.0).abs() < 0.05);
    }

    #[test]
    fn ring_rotation_permutes_entries() {
        let kk = k(6.0, 0.2);
        let f = FsBasisSpec {
            center: Point::ORIGIN,
            radius: 1.4,
            count: 12,
        };
        let x = Point::new(0.4, 0.3);
        let a = TAU / 12.0;
        let xr = Point::new(x.x * a.cos() - x.y * a.sin(), x.x * a.sin() + x.y * a.cos());
        let v = eval_fs_basis(&f, kk, x).unwrap();
        let w = eval_fs_basis(&f, kk, xr).unwrap();
        for j in 0..12 {
            assert!((w[(j + 1) % 12] - v[j]).norm() < 1e-12 * v[j].norm());
        }
    }

    fn three_centers(mh: usize) -> MultiCenterSpec {
        MultiCenterSpec {
            centers: [(-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
                .iter()
                .map(|&(x, y)| BesselBasisSpec {
                    center: Point::new(x, y),
                    half_order: mh,
                    rho: 1.5,
                })
                .collect(),
        }
    }

    #[test]
    fn multicenter_layout() {
        let kk = k(50.0, 2.0);
        let single = MultiCenterSpec {
            centers: vec![spec(8, 1.0)],
        };
        let x = Point::new(0.2, 0.1);
        assert_eq!(
            eval_multicenter_basis(&single, kk, x).unwrap(),
            eval_bessel_basis(&spec(8, 1.0), kk, x).unwrap()
        );
        let m = three_centers(33);
        let v = eval_multicenter_basis(&m, kk, Point::new(0.0, 1.0)).unwrap();
        assert_eq!(v.len(), 201);
        let block = &v[67..134];
        for (i, z) in block.iter().enumerate() {
            assert_eq!(*z != C64::new(0.0, 0.0), i == 33);
        }
    }

    #[test]
    fn graf_expansion() {
        let kk = k(5.0, 0.0);
        let d = 2.0;
        let x = Point::new(0.3 * d * 0.6, 0.3 * d * 0.8);
        let res = graf_check(d, kk, x, 0.7, 60).unwrap();
        let scale = specfun::hankel1(0, kk.value() * 0.7 * d).unwrap().norm();
        assert!(res <= 1e-10 * scale, "{res:e}");
        assert!(graf_check(d, kk, Point::ORIGIN, 0.7, 5).unwrap() < 1e-15);
        let r10 = graf_check(d, kk, Point::new(1.2, 0.0), 0.3, 10).unwrap();
        let r20 = graf_check(d, kk, Point::new(1.2, 0.0), 0.3, 20).unwrap();
        let r40 = graf_check(d, kk, Point::new(1.2, 0.0), 0.3, 40).unwrap();
        assert!(r20 <= r10 && r40 <= r20);
        assert!(graf_check(d, kk, Point::new(2.5, 0.0), 0.0, 5).is_err());
    }

    fn laplace_residual(basis: &Basis, x: Point, h: f64) -> (Vec<C64>, Vec<C64>) {
        let c = basis.eval(x).unwrap();
        let e = [
            basis.eval(Point::new(x.x + h, x.y)).unwrap(),
            basis.eval(Point::new(x.x - h, x.y)).unwrap(),
            basis.eval(Point::new(x.x, x.y + h)).unwrap(),
            basis.eval(Point::new(x.x, x.y - h)).unwrap(),
        ];
        let k2 = basis.wavenumber().value().powi(2);
        let res = (0..c.len())
            .map(|i| (e[0][i] + e[1][i] + e[2][i] + e[3][i] - c[i] * 4.0) / (h * h) + k2 * c[i])
            .collect();
        (res, c)
    }

    #[test]
    fn basis_functions_solve_helmholtz() {
        let kk = k(12.0, 1.5);
        let specs = [
            BasisSpec::Bessel(spec(10, 1.0)),
            BasisSpec::Fs(FsBasisSpec {
                center: Point::ORIGIN,
                radius: 1.3,
                count: 8,
            }),
            BasisSpec::MultiCenter(three_centers(4)),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let k2 = kk.value().norm_sqr();
        for s in specs {
            let basis = Basis::new(s, kk).unwrap();
            // FD truncation grows like (n h / r)^4 near a center; stay at r >= 0.3
            for _ in 0..20 {
                let r: f64 = rng.gen_range(0.3..0.8);
                let a: f64 = rng.gen_range(0.0..TAU);
                let (res, val) = laplace_residual(&basis, Point::new(r * a.cos(), r * a.sin()), 1e-4);
                for (i, (e, u)) in res.iter().zip(&val).enumerate() {
                    if u.norm() > 1e-200 {
                        assert!(e.norm() <= 1e-4 * k2 * u.norm(), "slot {i}: {e} vs {u}");
                    }
                }
            }
        }
    }

    #[test]
    fn union_concatenates() {
        let kk = k(4.0, 0.0);
        let a = Basis::new(BasisSpec::Bessel(spec(2, 1.0)), kk).unwrap();
        let b = Basis::new(
            BasisSpec::Fs(FsBasisSpec {
                center: Point::ORIGIN,
                radius: 2.0,
                count: 3,
            }),
            kk,
        )
        .unwrap();
        let u = a.union(&b).unwrap();
        assert_eq!(u.len(), 8);
        assert_eq!(u.spec().len(), 8);
        let x = Point::new(0.1, 0.2);
        let mut want = a.eval(x).unwrap();
        want.extend(b.eval(x).unwrap());
        assert_eq!(u.eval(x).unwrap(), want);
    }
}
