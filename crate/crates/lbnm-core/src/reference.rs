//! Closed-form Helmholtz solutions and boundary-only data used as ground
//! truth and boundary-data generators.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::basis::{fundamental_solution, Wavenumber};
use crate::error::{invalid, Error, Result};
use crate::geometry::{BoundaryCurve, CollocationSet, Point};
use crate::specfun;
use crate::C64;

/// Gaussian pulse exponent weight.
pub const PULSE_WIDTH: f64 = 20.0;
/// Default offset of the dipole sources along the outward normal.
pub const DIPOLE_OFFSET: f64 = 0.3;

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceField {
    /// `e^{ik(x cos φ + y sin φ)}`.
    PlaneWave { direction: f64 },
    /// `Φ(x, y₁) − Φ(x, y₂)` with `Φ = (i/4)H_0^{(1)}(k|·|)`.
    Dipole { y1: Point, y2: Point },
    /// `Σ_c exp(−w|x − c|²)`; boundary data only.
    Pulse { centers: Vec<Point>, width: f64 },
    /// Boundary data only.
    Constant(C64),
    /// `Σ a_n J_n(k|x − c|) e^{inθ}`.
    BesselSeries { center: Point, terms: Vec<(i64, C64)> },
}

impl ReferenceField {
    /// The two-pulse boundary condition of the C-shape experiment.
    pub fn c_shape_pulse() -> Self {
        ReferenceField::Pulse {
            centers: alloc::vec![Point::new(0.2, 1.0), Point::new(-1.2, 0.0)],
            width: PULSE_WIDTH,
        }
    }

    /// Sources a distance `offset` outside the curve along the outward normal
    /// at `t = π/4` and `t = 5π/4`.
    pub fn dipole_outside(curve: &BoundaryCurve, offset: f64) -> Result<Self> {
        let place = |t: f64| curve.point(t) + offset * curve.outward_normal(t);
        let (y1, y2) = (place(PI / 4.0), place(5.0 * PI / 4.0));
        if !(offset > 0.0) || curve.is_inside(y1) || curve.is_inside(y2) {
            return Err(invalid("dipole sources must lie outside the domain"));
        }
        Ok(ReferenceField::Dipole { y1, y2 })
    }

    /// Bessel series whose coefficients decay like `(r/d)^{|n|}` at radius `r`,
    /// i.e. a field continuable up to radius `d` about `center`.
    pub fn bessel_series_to_radius(k: Wavenumber, center: Point, d: f64, n_max: i64) -> Result<Self> {
        if !(d > 0.0) || n_max < 0 {
            return Err(invalid("series needs d > 0 and n_max >= 0"));
        }
        let j = specfun::bessel_j_batch_log(n_max as usize, k.value() * d)?;
        let mut terms = Vec::with_capacity(2 * n_max as usize + 1);
        for n in -n_max..=n_max {
            let v = j[n.unsigned_abs() as usize];
            if v.is_zero() {
                return Err(Error::EigenvalueProximity { order: n, magnitude: 0.0 });
            }
            let sign = if n < 0 && n % 2 != 0 { -1.0 } else { 1.0 };
            // 1 / J_n(kd)
            terms.push((n, C64::from_polar(sign * (-v.ln_abs).exp(), -v.arg)));
        }
        Ok(ReferenceField::BesselSeries { center, terms })
    }

    /// Whether the field is a Helmholtz solution with a known interior value.
    pub fn has_interior_truth(&self) -> bool {
        !matches!(self, ReferenceField::Pulse { .. } | ReferenceField::Constant(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReferenceField::PlaneWave { .. } => "plane_wave",
            ReferenceField::Dipole { .. } => "dipole",
            ReferenceField::Pulse { .. } => "pulse",
            ReferenceField::Constant(_) => "constant",
            ReferenceField::BesselSeries { .. } => "bessel_series",
        }
    }
}

pub fn eval_reference(field: &ReferenceField, k: Wavenumber, x: Point) -> Result<C64> {
    let kv = k.value();
    match field {
        ReferenceField::PlaneWave { direction } => {
            let s = x.x * direction.cos() + x.y * direction.sin();
            Ok((C64::i() * kv * s).exp())
        }
        ReferenceField::Dipole { y1, y2 } => {
            if y1 == y2 {
                return Ok(C64::new(0.0, 0.0));
            }
            Ok(fundamental_solution(kv, x, *y1)? - fundamental_solution(kv, x, *y2)?)
        }
        ReferenceField::Pulse { centers, width } => Ok(C64::new(
            centers
                .iter()
                .map(|c| {
                    let d = x - *c;
                    (-width * (d.x * d.x + d.y * d.y)).exp()
                })
                .sum(),
            0.0,
        )),
        ReferenceField::Constant(c) => Ok(*c),
        ReferenceField::BesselSeries { center, terms } => {
            let n_max = terms.iter().map(|(n, _)| n.unsigned_abs()).max().unwrap_or(0) as usize;
            let (r, theta) = x.polar_about(*center);
            let j = specfun::bessel_j_batch(n_max, kv * r)?;
            let mut sum = C64::new(0.0, 0.0);
            for &(n, a) in terms {
                let jn = j[n.unsigned_abs() as usize];
                let jn = if n < 0 && n % 2 != 0 { -jn } else { jn };
                sum += a * jn * C64::from_polar(1.0, n as f64 * theta);
            }
            Ok(sum)
        }
    }
}

/// `f_j = u(x_j)` at the collocation points.
pub fn boundary_trace(field: &ReferenceField, k: Wavenumber, collocation: &CollocationSet) -> Result<Vec<C64>> {
    collocation.points.iter().map(|&p| eval_reference(field, k, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_curve, sample_collocation, CurveKind, SamplingRule, C_SHAPE_GAP};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn k(kr: f64, s: f64) -> Wavenumber {
        Wavenumber::new(kr, s).unwrap()
    }

    const PLANE: ReferenceField = ReferenceField::PlaneWave { direction: 0.0 };

    #[test]
    fn plane_wave_on_axis() {
        let kk = k(184.79, 9.2395);
        assert_eq!(eval_reference(&PLANE, kk, Point::new(0.0, 3.7)).unwrap(), C64::new(1.0, 0.0));
        let v = eval_reference(&PLANE, kk, Point::new(1.0, 0.0)).unwrap();
        let want = C64::from_polar((-9.2395f64).exp(), 184.79);
        assert!((v - want).norm() < 1e-14 * want.norm());
    }

    #[test]
    fn plane_wave_damping_law() {
        let kk = k(30.0, 2.5);
        let a = eval_reference(&PLANE, kk, Point::new(0.2, 0.4)).unwrap().norm();
        let b = eval_reference(&PLANE, kk, Point::new(0.5, 0.4)).unwrap().norm();
        assert!((b / a - (-2.5f64 * 0.3).exp()).abs() < 1e-15);
    }

    #[test]
    fn coincident_dipole_vanishes() {
        let y = Point::new(2.0, 1.0);
        let f = ReferenceField::Dipole { y1: y, y2: y };
        assert_eq!(eval_reference(&f, k(5.0, 0.1), Point::new(0.1, 0.0)).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn dipole_default_placement_is_outside() {
        let kite = make_curve(CurveKind::Kite).unwrap();
        let f = ReferenceField::dipole_outside(&kite, DIPOLE_OFFSET).unwrap();
        if let ReferenceField::Dipole { y1, y2 } = f {
            assert!(!kite.is_inside(y1) && !kite.is_inside(y2));
            assert!((y1.dist(kite.point(PI / 4.0)) - 0.3).abs() < 1e-12);
        } else {
            unreachable!();
        }
    }

    #[test]
    fn constant_and_pulse_traces() {
        let c = make_curve(CurveKind::CShape { center_radius: 1.0, width: 0.4, gap: C_SHAPE_GAP }).unwrap();
        let set = sample_collocation(&c, 400, SamplingRule::UniformParameter).unwrap();
        let ones = boundary_trace(&ReferenceField::Constant(C64::new(1.0, 0.0)), k(50.0, 2.0), &set).unwrap();
        assert!(ones.iter().all(|z| *z == C64::new(1.0, 0.0)));
        let pulse = boundary_trace(&ReferenceField::c_shape_pulse(), k(50.0, 2.0), &set).unwrap();
        let imax = (0..400).max_by(|&a, &b| pulse[a].re.partial_cmp(&pulse[b].re).unwrap()).unwrap();
        let p = set.points[imax];
        assert!(p.dist(Point::new(0.2, 1.0)) < 0.25 || p.dist(Point::new(-1.2, 0.0)) < 0.25, "{p:?}");
        assert!(!ReferenceField::c_shape_pulse().has_interior_truth());
    }

    #[test]
    fn disk_plane_wave_trace() {
        let d = make_curve(CurveKind::Disk { center: Point::ORIGIN, radius: 1.0 }).unwrap();
        let set = sample_collocation(&d, 4, SamplingRule::UniformParameter).unwrap();
        let kk = k(3.0, 0.2);
        let f = boundary_trace(&PLANE, kk, &set).unwrap();
        let e = |x: f64| (C64::i() * kk.value() * x).exp();
        let want = [e(1.0), e(0.0), e(-1.0), e(0.0)];
        for (a, b) in f.iter().zip(want) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn fields_solve_helmholtz() {
        let kk = k(20.0, 1.0);
        let kite = make_curve(CurveKind::Kite).unwrap();
        let fields = [
            PLANE,
            ReferenceField::dipole_outside(&kite, DIPOLE_OFFSET).unwrap(),
            ReferenceField::bessel_series_to_radius(kk, Point::ORIGIN, 2.0, 20).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let h = 1e-4;
        for f in &fields {
            for _ in 0..20 {
                let p = Point::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
                let u = |q: Point| eval_reference(f, kk, q).unwrap();
                let lap = (u(Point::new(p.x + h, p.y)) + u(Point::new(p.x - h, p.y)) + u(Point::new(p.x, p.y + h))
                    + u(Point::new(p.x, p.y - h))
                    - u(p) * 4.0)
                    / (h * h);
                let k2 = kk.value() * kk.value();
                assert!((lap + k2 * u(p)).norm() <= 1e-4 * k2.norm() * u(p).norm(), "{}", f.name());
            }
        }
    }

    #[test]
    fn bessel_series_terms_scale_with_radius() {
        let kk = k(8.0, 0.4);
        let f = ReferenceField::bessel_series_to_radius(kk, Point::ORIGIN, 2.0, 30).unwrap();
        // |a_n J_n(k·1)| ≈ 2^{-|n|} for large n
        if let ReferenceField::BesselSeries { terms, .. } = f {
            let (n, a) = terms[0];
            assert_eq!(n, -30);
            let mag = (a * specfun::bessel_j(n, kk.value()).unwrap()).norm();
            assert!((mag.log2() + 30.0).abs() < 3.0, "{}", mag.log2());
        }
    }
}
