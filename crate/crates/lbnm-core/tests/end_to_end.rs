use lbnm_core::basis::{Basis, BasisSpec, BesselBasisSpec, FsBasisSpec, Wavenumber};
use lbnm_core::geometry::{interior_grid, make_curve, sample_collocation, CurveKind, SamplingRule};
use lbnm_core::linalg;
use lbnm_core::metrics::relative_l2;
use lbnm_core::operator::{learn, ProblemSpec};
use lbnm_core::reference::{boundary_trace, eval_reference, ReferenceField};
use lbnm_core::regularization::{AlphaPolicy, GcvGrid};
use lbnm_core::{Point, C64};
use std::f64::consts::TAU;

fn disk() -> lbnm_core::geometry::BoundaryCurve {
    make_curve(CurveKind::Disk { center: Point::ORIGIN, radius: 1.0 }).unwrap()
}

fn disk_error(field: ReferenceField, k: Wavenumber, half_order: usize) -> f64 {
    let curve = disk();
    let set = sample_collocation(&curve, 4 * half_order + 8, SamplingRule::UniformParameter).unwrap();
    let spec = BasisSpec::Bessel(BesselBasisSpec::enclosing(Point::ORIGIN, half_order, &set.points));
    let problem = ProblemSpec { curve: curve.clone(), k, boundary: field.clone() };
    let op = learn(&problem, spec, set.clone(), &AlphaPolicy::Gcv(GcvGrid::default())).unwrap();
    let f = boundary_trace(&field, k, &set).unwrap();
    let grid = interior_grid(&curve, 0.05).unwrap();
    let mut s = op.apply(&f, &grid.points, Some(&curve)).unwrap();
    s.truth = Some(grid.points.iter().map(|&p| eval_reference(&field, k, p).unwrap()).collect());
    relative_l2(&s).unwrap()
}

#[test]
fn disk_plane_wave() {
    let k = Wavenumber::new(5.0, 0.0).unwrap();
    let e = disk_error(ReferenceField::PlaneWave { direction: 0.4 }, k, 20);
    assert!(e <= 1e-10, "{e:e}");
}

#[test]
fn disk_dipole_damped() {
    let k = Wavenumber::with_damping_ratio(8.0, 0.05).unwrap();
    let field = ReferenceField::dipole_outside(&disk(), 1.0).unwrap();
    let e = disk_error(field, k, 40);
    assert!(e <= 1e-8, "{e:e}");
}

#[test]
fn normalized_columns_have_unit_norm_on_the_reference_circle() {
    let k = Wavenumber::with_damping_ratio(40.0, 0.2).unwrap();
    let spec = BesselBasisSpec { center: Point::new(0.3, -0.2), half_order: 60, rho: 1.3 };
    let basis = Basis::new(BasisSpec::Bessel(spec.clone()), k).unwrap();
    let q = 400;
    let pts: Vec<Point> = (0..q)
        .map(|j| {
            let t = TAU * j as f64 / q as f64;
            spec.center + spec.rho * Point::new(t.cos(), t.sin())
        })
        .collect();
    let v = basis.design_matrix(&pts).unwrap();
    let w = TAU * spec.rho / q as f64;
    for j in 0..v.cols() {
        let n = (linalg::norm(&v.column(j)).powi(2) * w).sqrt();
        assert!((n - 1.0).abs() < 1e-6, "column {j}: {n}");
    }
}

#[test]
fn zero_data_gives_zero_field() {
    let curve = disk();
    let k = Wavenumber::new(5.0, 0.5).unwrap();
    let set = sample_collocation(&curve, 60, SamplingRule::UniformParameter).unwrap();
    let spec = BasisSpec::Fs(FsBasisSpec { center: Point::ORIGIN, radius: 1.5, count: 40 });
    let problem = ProblemSpec { curve: curve.clone(), k, boundary: ReferenceField::Constant(C64::new(0.0, 0.0)) };
    let op = learn(&problem, spec, set, &AlphaPolicy::TheoreticalFs { radius: 1.5 }).unwrap();
    let s = op.apply(&[C64::new(0.0, 0.0); 60], &[Point::new(0.1, 0.2)], None).unwrap();
    assert_eq!(s.values, vec![C64::new(0.0, 0.0)]);
}

#[test]
fn apply_is_linear_and_matches_operator_rows() {
    let curve = disk();
    let k = Wavenumber::new(6.0, 0.3).unwrap();
    let set = sample_collocation(&curve, 80, SamplingRule::UniformParameter).unwrap();
    let spec = BasisSpec::Bessel(BesselBasisSpec::enclosing(Point::ORIGIN, 15, &set.points));
    let field = ReferenceField::PlaneWave { direction: 1.0 };
    let problem = ProblemSpec { curve, k, boundary: field.clone() };
    let op = learn(&problem, spec, set.clone(), &AlphaPolicy::Fixed(1e-12)).unwrap();
    let f1 = boundary_trace(&field, k, &set).unwrap();
    let f2: Vec<C64> = (0..80).map(|j| C64::from_polar(1.0, 0.37 * j as f64)).collect();
    let sum: Vec<C64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
    let x = [Point::new(0.2, -0.5), Point::new(-0.6, 0.1)];
    let (a, b, c) = (
        op.apply(&f1, &x, None).unwrap().values,
        op.apply(&f2, &x, None).unwrap().values,
        op.apply(&sum, &x, None).unwrap().values,
    );
    for i in 0..2 {
        assert!((a[i] + b[i] - c[i]).norm() <= 1e-12 * c[i].norm());
        let row = op.operator_coefficients(x[i]).unwrap();
        let via_row: C64 = row.iter().zip(&f1).map(|(r, f)| r * f).sum();
        assert!((via_row - a[i]).norm() <= 1e-9 * a[i].norm(), "{via_row} {}", a[i]);
    }
}
