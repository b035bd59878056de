//! Experiment drivers shared by the CLI and the acceptance suite.

use std::time::Instant;

use lbnm_core::basis::{Basis, BasisSpec, BesselBasisSpec, FsBasisSpec, MultiCenterSpec, Wavenumber};
use lbnm_core::geometry::{interior_grid, make_curve, sample_collocation, BoundaryCurve, CollocationSet, CurveKind, SamplingRule};
use lbnm_core::linalg::{self, svd};
use lbnm_core::metrics::{convergence_slope, relative_l2, FieldSample};
use lbnm_core::operator::{evaluate, learn, LearnedOperator, ProblemSpec};
use lbnm_core::reference::{boundary_trace, eval_reference, ReferenceField};
use lbnm_core::regularization::{gcv_select_svd, AlphaPolicy, GcvCurve, GcvGrid};
use lbnm_core::{Point, C64};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use crate::config::{half_order_for, AlphaConfig, BasisConfig, Damping, ExperimentConfig, FieldConfig};
use crate::error::{CliError, Result};

/// Targets per work item.
const CHUNK: usize = 256;

pub fn pool(threads: Option<usize>) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))
}

fn concat<T>(parts: Vec<lbnm_core::Result<Vec<T>>>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// `b(z)·c` over `targets`, chunked across the pool. Order is preserved.
pub fn evaluate_par(pool: &ThreadPool, basis: &Basis, c: &[C64], targets: &[Point]) -> Result<Vec<C64>> {
    pool.install(|| concat(targets.par_chunks(CHUNK).map(|ch| evaluate(basis, c, ch)).collect()))
}

pub fn truth_par(pool: &ThreadPool, field: &ReferenceField, k: Wavenumber, targets: &[Point]) -> Result<Vec<C64>> {
    pool.install(|| {
        concat(
            targets
                .par_chunks(CHUNK)
                .map(|ch| ch.iter().map(|&p| eval_reference(field, k, p)).collect())
                .collect(),
        )
    })
}

pub fn wavenumber(k_r: f64, damping: Damping) -> Result<Wavenumber> {
    Ok(match damping {
        Damping::Sigma(s) => Wavenumber::new(k_r, s)?,
        Damping::Ratio(r) => Wavenumber::with_damping_ratio(k_r, r)?,
    })
}

/// Everything `learn` needs, resolved from a config.
#[derive(Clone, Debug)]
pub struct Setup {
    pub curve: BoundaryCurve,
    pub k: Wavenumber,
    pub collocation: CollocationSet,
    pub field: ReferenceField,
    pub basis: BasisSpec,
    pub policy: AlphaPolicy,
}

impl Setup {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Setup> {
        let curve = make_curve(cfg.curve_kind()?)?;
        let k = wavenumber(cfg.k_r, cfg.damping)?;
        let collocation = sample_collocation(&curve, cfg.n, cfg.sampling)?;
        let pts = &collocation.points;
        let basis = match &cfg.basis {
            BasisConfig::Bessel { center, half_order, rho } => {
                let mut b = BesselBasisSpec::enclosing(*center, *half_order, pts);
                if let Some(r) = rho {
                    b.rho = *r;
                }
                BasisSpec::Bessel(b)
            }
            BasisConfig::Fs { center, radius, count } => BasisSpec::Fs(FsBasisSpec {
                center: center.unwrap_or_else(|| collocation.centroid()),
                radius: *radius,
                count: count.unwrap_or(cfg.n),
            }),
            BasisConfig::MultiCenter { centers, half_order, rho } => multicenter_spec(centers, *half_order, *rho, pts),
        };
        let policy = match (&cfg.alpha, &basis) {
            (AlphaConfig::Gcv { lo, hi, count }, _) => AlphaPolicy::Gcv(GcvGrid::Relative { lo: *lo, hi: *hi, count: *count }),
            (AlphaConfig::Fixed(a), _) => AlphaPolicy::Fixed(*a),
            (AlphaConfig::TheoreticalBb { d }, BasisSpec::Bessel(b)) => {
                AlphaPolicy::TheoreticalBb { rho: b.rho, d: *d, half_order: b.half_order }
            }
            (AlphaConfig::TheoreticalFs, BasisSpec::Fs(f)) => AlphaPolicy::TheoreticalFs { radius: f.radius },
            _ => return Err(CliError::Invalid("alpha policy does not match the basis".into())),
        };
        let field = match &cfg.field {
            FieldConfig::PlaneWave { direction } => ReferenceField::PlaneWave { direction: *direction },
            FieldConfig::Dipole { sources: Some((y1, y2)), .. } => {
                if curve.is_inside(*y1) || curve.is_inside(*y2) {
                    return Err(CliError::Invalid("dipole sources must lie outside the domain".into()));
                }
                ReferenceField::Dipole { y1: *y1, y2: *y2 }
            }
            FieldConfig::Dipole { sources: None, offset } => ReferenceField::dipole_outside(&curve, *offset)?,
            FieldConfig::Pulse => ReferenceField::c_shape_pulse(),
            FieldConfig::Constant { re, im } => ReferenceField::Constant(C64::new(*re, *im)),
            FieldConfig::BesselSeries { d, n_max } => {
                let center = match &basis {
                    BasisSpec::Bessel(b) => b.center,
                    _ => Point::ORIGIN,
                };
                ReferenceField::bessel_series_to_radius(k, center, *d, *n_max as i64)?
            }
        };
        Ok(Setup { curve, k, collocation, field, basis, policy })
    }

    pub fn problem(&self) -> ProblemSpec {
        ProblemSpec { curve: self.curve.clone(), k: self.k, boundary: self.field.clone() }
    }

    pub fn boundary_data(&self) -> Result<Vec<C64>> {
        Ok(boundary_trace(&self.field, self.k, &self.collocation)?)
    }

    pub fn learn(&self) -> Result<LearnedOperator> {
        Ok(learn(&self.problem(), self.basis.clone(), self.collocation.clone(), &self.policy)?)
    }
}

/// Per-center ρ encloses the whole boundary from that center.
pub fn multicenter_spec(centers: &[Point], half_order: usize, rho: Option<f64>, points: &[Point]) -> BasisSpec {
    let specs: Vec<BesselBasisSpec> = centers
        .iter()
        .map(|&c| {
            let mut b = BesselBasisSpec::enclosing(c, half_order, points);
            if let Some(r) = rho {
                b.rho = r;
            }
            b
        })
        .collect();
    if specs.len() == 1 {
        BasisSpec::Bessel(specs.into_iter().next().unwrap())
    } else {
        BasisSpec::MultiCenter(MultiCenterSpec { centers: specs })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub error: Option<f64>,
    pub training_residual: f64,
    pub relative_training_residual: Option<f64>,
    pub targets: usize,
    pub offline_seconds: f64,
    pub online_seconds: f64,
}

pub struct SolveOutcome {
    pub op: LearnedOperator,
    pub f: Vec<C64>,
    pub sample: FieldSample,
    pub summary: SolveSummary,
}

fn rel_or_none(x: f64, scale: f64) -> Option<f64> {
    (scale > 0.0).then_some(x / scale)
}

/// Learns and applies on `targets` (the interior grid by default).
pub fn solve_on(pool: &ThreadPool, setup: &Setup, targets: Option<Vec<Point>>, grid_h: f64) -> Result<SolveOutcome> {
    let t0 = Instant::now();
    let op = setup.learn()?;
    let offline = t0.elapsed().as_secs_f64();
    let targets = match targets {
        Some(t) => t,
        None => interior_grid(&setup.curve, grid_h)?.points,
    };
    let f = setup.boundary_data()?;
    let t1 = Instant::now();
    let c = op.coefficients(&f)?;
    let basis = op.basis().expect("learned with a basis");
    let values = evaluate_par(pool, basis, &c, &targets)?;
    let online = t1.elapsed().as_secs_f64();
    let valid = targets.iter().map(|&p| setup.curve.is_inside(p)).collect();
    let truth = if setup.field.has_interior_truth() {
        Some(truth_par(pool, &setup.field, setup.k, &targets)?)
    } else {
        None
    };
    let sample = FieldSample { points: targets, values, truth, valid };
    let error = match &sample.truth {
        Some(t) if linalg::norm(t) > 0.0 => Some(relative_l2(&sample)?),
        _ => None,
    };
    let res = op.training_residual(&f)?;
    let (n, m) = op.dims();
    let summary = SolveSummary {
        n,
        m,
        alpha: op.alpha(),
        error,
        training_residual: res,
        relative_training_residual: rel_or_none(res, linalg::norm(&f)),
        targets: sample.points.len(),
        offline_seconds: offline,
        online_seconds: online,
    };
    Ok(SolveOutcome { op, f, sample, summary })
}

pub fn solve(pool: &ThreadPool, cfg: &ExperimentConfig) -> Result<SolveOutcome> {
    solve_on(pool, &Setup::from_config(cfg)?, None, cfg.grid_h)
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityRow {
    pub geometry: String,
    pub ratio: f64,
    pub method: &'static str,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub error: f64,
    pub relative_training_residual: f64,
}

fn curve_named(name: &str) -> Result<BoundaryCurve> {
    Ok(make_curve(match name {
        "kite" => CurveKind::Kite,
        "flower" => CurveKind::Flower,
        other => return Err(CliError::Invalid(format!("unknown sweep geometry `{other}`"))),
    })?)
}

/// BB with GCV against FS with the theoretical rule, for one geometry and ratio.
pub fn stability_pair(pool: &ThreadPool, cfg: &ExperimentConfig, geometry: &str, n: usize, ratio: f64) -> Result<[StabilityRow; 2]> {
    let curve = curve_named(geometry)?;
    let k = Wavenumber::with_damping_ratio(cfg.k_r, ratio)?;
    let collocation = sample_collocation(&curve, n, cfg.sampling)?;
    let grid = interior_grid(&curve, cfg.grid_h)?.points;
    let field = ReferenceField::PlaneWave { direction: 0.0 };
    let truth = truth_par(pool, &field, k, &grid)?;
    let bb = BasisSpec::Bessel(BesselBasisSpec::enclosing(Point::ORIGIN, half_order_for(n), &collocation.points));
    let fs = BasisSpec::Fs(FsBasisSpec { center: collocation.centroid(), radius: cfg.sweep.fs_radius, count: n });
    let runs = [
        ("BB", bb, AlphaPolicy::Gcv(GcvGrid::default())),
        ("FS", fs, AlphaPolicy::TheoreticalFs { radius: cfg.sweep.fs_radius }),
    ];
    let mut rows = Vec::new();
    for (method, basis, policy) in runs {
        let setup = Setup { curve: curve.clone(), k, collocation: collocation.clone(), field: field.clone(), basis, policy };
        let e = field_error(pool, &setup, &grid, &truth)?;
        rows.push(StabilityRow {
            geometry: geometry.into(),
            ratio,
            method,
            n,
            m: e.m,
            alpha: e.alpha,
            error: e.error,
            relative_training_residual: e.residual,
        });
    }
    Ok(rows.try_into().expect("two rows"))
}

pub fn stability_sweep(pool: &ThreadPool, cfg: &ExperimentConfig) -> Result<Vec<StabilityRow>> {
    let cases: Vec<(String, usize, f64)> = cfg
        .sweep
        .geometries
        .iter()
        .flat_map(|(g, n)| cfg.sweep.ratios.iter().map(move |&r| (g.clone(), *n, r)))
        .collect();
    let rows: Vec<Result<[StabilityRow; 2]>> =
        pool.install(|| cases.par_iter().map(|(g, n, r)| stability_pair(pool, cfg, g, *n, *r)).collect());
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

struct FieldError {
    m: usize,
    alpha: f64,
    error: f64,
    residual: f64,
}

fn field_error(pool: &ThreadPool, setup: &Setup, grid: &[Point], truth: &[C64]) -> Result<FieldError> {
    let op = setup.learn()?;
    let f = setup.boundary_data()?;
    let c = op.coefficients(&f)?;
    let values = evaluate_par(pool, op.basis().expect("basis"), &c, grid)?;
    let sample = FieldSample { points: grid.to_vec(), values, truth: Some(truth.to_vec()), valid: vec![true; grid.len()] };
    Ok(FieldError {
        m: op.dims().1,
        alpha: op.alpha(),
        error: relative_l2(&sample)?,
        residual: op.training_residual(&f)? / linalg::norm(&f),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub method: &'static str,
    pub alpha: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceOutcome {
    pub rows: Vec<ConvergenceRow>,
    pub bb_slope: Option<f64>,
    pub fs_slope: Option<f64>,
}

/// Fixed `N`, varying `M`; BB with GCV and FS with the theoretical rule.
pub fn convergence(pool: &ThreadPool, cfg: &ExperimentConfig) -> Result<ConvergenceOutcome> {
    let curve = make_curve(cfg.curve_kind()?)?;
    let k = wavenumber(cfg.k_r, cfg.damping)?;
    let collocation = sample_collocation(&curve, cfg.n, cfg.sampling)?;
    let grid = interior_grid(&curve, cfg.grid_h)?.points;
    let field = match &cfg.field {
        FieldConfig::PlaneWave { direction } => ReferenceField::PlaneWave { direction: *direction },
        _ => Setup::from_config(cfg)?.field,
    };
    if !field.has_interior_truth() {
        return Err(CliError::Invalid("convergence needs a field with interior truth".into()));
    }
    let truth = truth_par(pool, &field, k, &grid)?;
    let center = match cfg.basis {
        BasisConfig::Bessel { center, .. } => center,
        _ => Point::ORIGIN,
    };
    let r = cfg.convergence.fs_radius;
    let mut cases = Vec::new();
    for &m in &cfg.convergence.m_values {
        let bb = BasisSpec::Bessel(BesselBasisSpec::enclosing(center, half_order_for(m), &collocation.points));
        cases.push((m, "BB", bb, AlphaPolicy::Gcv(GcvGrid::default())));
        let fs = BasisSpec::Fs(FsBasisSpec { center: collocation.centroid(), radius: r, count: m });
        cases.push((m, "FS", fs, AlphaPolicy::TheoreticalFs { radius: r }));
    }
    let results: Vec<Result<ConvergenceRow>> = pool.install(|| {
        cases
            .into_par_iter()
            .map(|(m, method, basis, policy)| {
                let setup = Setup { curve: curve.clone(), k, collocation: collocation.clone(), field: field.clone(), basis, policy };
                let e = field_error(pool, &setup, &grid, &truth)?;
                Ok(ConvergenceRow { m, method, alpha: e.alpha, error: e.error })
            })
            .collect()
    });
    let rows: Vec<ConvergenceRow> = results.into_iter().collect::<Result<_>>()?;
    let slope = |method: &str| {
        let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.method == method).map(|r| (r.m as f64, r.error)).collect();
        convergence_slope(&pts).ok()
    };
    Ok(ConvergenceOutcome { bb_slope: slope("BB"), fs_slope: slope("FS"), rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualProfile {
    pub label: String,
    pub m: usize,
    pub alpha: f64,
    /// `‖f − Vc_*‖ / ‖f‖` on the collocation points.
    pub training_residual: f64,
    /// Same ratio on a 4× denser boundary sample offset from the training points.
    pub boundary_residual: f64,
    pub tip_median: f64,
    pub tip_max: f64,
    pub back_median: f64,
    #[serde(skip)]
    pub points: Vec<Point>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MulticenterField {
    pub field: String,
    pub single: ResidualProfile,
    pub multi: ResidualProfile,
    pub reference: ResidualProfile,
    /// Relative interior difference of the `m_total` multi-center field against
    /// the `reference_m_total` run.
    pub self_convergence: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Boundary residual profile of an operator on a dense off-collocation sample.
fn residual_profile(
    label: &str,
    op: &LearnedOperator,
    curve: &BoundaryCurve,
    field: &ReferenceField,
    k: Wavenumber,
    f: &[C64],
    pool: &ThreadPool,
    cfg: &ExperimentConfig,
) -> Result<ResidualProfile> {
    let n = f.len();
    let dense: Vec<Point> = (0..4 * n)
        .map(|j| curve.point(std::f64::consts::TAU * (j as f64 + 0.5) / (4 * n) as f64))
        .collect();
    let fd = truth_par(pool, field, k, &dense)?;
    let c = op.coefficients(f)?;
    let u = evaluate_par(pool, op.basis().expect("basis"), &c, &dense)?;
    let res: Vec<f64> = u.iter().zip(&fd).map(|(a, b)| (a - b).norm()).collect();
    let diff: Vec<C64> = u.iter().zip(&fd).map(|(a, b)| a - b).collect();
    let pick = |keep: &dyn Fn(&Point) -> bool| -> Vec<f64> {
        dense.iter().zip(&res).filter(|(p, _)| keep(p)).map(|(_, r)| *r).collect()
    };
    let (tip_x, back_x) = (cfg.multicenter.tip_x, cfg.multicenter.back_x);
    let tip = pick(&|p| p.x > tip_x);
    let back = pick(&|p| p.x < back_x);
    Ok(ResidualProfile {
        label: label.into(),
        m: op.dims().1,
        alpha: op.alpha(),
        training_residual: op.training_residual(f)? / linalg::norm(f),
        boundary_residual: linalg::norm(&diff) / linalg::norm(&fd),
        tip_max: tip.iter().cloned().fold(0.0, f64::max),
        tip_median: median(tip),
        back_median: median(back),
        points: dense,
        residuals: res,
    })
}

/// Single center against several centers at equal total DOF, pulse and
/// constant data, plus a self-convergence check against a larger run.
pub fn multicenter(pool: &ThreadPool, cfg: &ExperimentConfig) -> Result<Vec<MulticenterField>> {
    let curve = make_curve(cfg.curve_kind()?)?;
    let k = wavenumber(cfg.k_r, cfg.damping)?;
    let mc = &cfg.multicenter;
    let per_center = |total: usize| half_order_for(total / mc.centers.len());
    let n = cfg.n;
    let set = sample_collocation(&curve, n, cfg.sampling)?;
    let set_ref = sample_collocation(&curve, n * mc.reference_m_total / mc.m_total.max(1), cfg.sampling)?;
    let grid = interior_grid(&curve, cfg.grid_h)?.points;
    let policy = AlphaPolicy::Gcv(match cfg.alpha {
        AlphaConfig::Gcv { lo, hi, count } => GcvGrid::Relative { lo, hi, count },
        _ => GcvGrid::default(),
    });
    let fields = [ReferenceField::c_shape_pulse(), ReferenceField::Constant(C64::new(1.0, 0.0))];
    let mut out = Vec::new();
    for field in fields {
        let run = |label: &str, spec: BasisSpec, set: &CollocationSet| -> Result<(LearnedOperator, Vec<C64>, ResidualProfile)> {
            let setup = Setup { curve: curve.clone(), k, collocation: set.clone(), field: field.clone(), basis: spec, policy: policy.clone() };
            let op = setup.learn()?;
            let f = setup.boundary_data()?;
            let prof = residual_profile(label, &op, &curve, &field, k, &f, pool, cfg)?;
            Ok((op, f, prof))
        };
        let single_spec = multicenter_spec(&[mc.single_center], half_order_for(mc.m_total), None, &set.points);
        let (_, _, single) = run("single", single_spec, &set)?;
        let (op_m, f_m, multi) = run("multi", multicenter_spec(&mc.centers, per_center(mc.m_total), None, &set.points), &set)?;
        let (op_r, f_r, reference) = run(
            "reference",
            multicenter_spec(&mc.centers, per_center(mc.reference_m_total), None, &set_ref.points),
            &set_ref,
        )?;
        let um = evaluate_par(pool, op_m.basis().expect("basis"), &op_m.coefficients(&f_m)?, &grid)?;
        let ur = evaluate_par(pool, op_r.basis().expect("basis"), &op_r.coefficients(&f_r)?, &grid)?;
        let sample = FieldSample { points: grid.clone(), values: um, truth: Some(ur), valid: vec![true; grid.len()] };
        out.push(MulticenterField {
            field: field.name().into(),
            single,
            multi,
            reference,
            self_convergence: relative_l2(&sample)?,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct GcvReport {
    pub alpha: f64,
    pub s_max: f64,
    #[serde(skip)]
    pub curve: GcvCurve,
}

/// The GCV function of the configured design matrix and boundary data.
pub fn gcv_curve(cfg: &ExperimentConfig) -> Result<GcvReport> {
    let setup = Setup::from_config(cfg)?;
    let basis = Basis::new(setup.basis.clone(), setup.k)?;
    let v = basis.design_matrix(&setup.collocation.points)?;
    let f = setup.boundary_data()?;
    let bundle = svd(&v)?;
    let grid = match &setup.policy {
        AlphaPolicy::Gcv(g) => g.clone(),
        _ => GcvGrid::default(),
    };
    let alphas = grid.resolve(bundle.s[0])?;
    let sel = gcv_select_svd(&bundle, &f, &alphas)?;
    Ok(GcvReport { alpha: sel.alpha, s_max: bundle.s[0], curve: sel.curve })
}

/// Disk solves for a Bessel series continuable to `d`, with the
/// theoretical α rule, over a range of `M_h`.
pub fn decay_rate(k: Wavenumber, rho: f64, d: f64, n: usize, half_orders: &[usize], grid_h: f64) -> Result<Vec<(usize, f64, f64)>> {
    let curve = make_curve(CurveKind::Disk { center: Point::ORIGIN, radius: 1.0 })?;
    let field = ReferenceField::bessel_series_to_radius(k, Point::ORIGIN, d, 120)?;
    let set = sample_collocation(&curve, n, SamplingRule::UniformParameter)?;
    let grid = interior_grid(&curve, grid_h)?.points;
    let truth: Vec<C64> = grid.iter().map(|&p| eval_reference(&field, k, p)).collect::<lbnm_core::Result<_>>()?;
    let problem = ProblemSpec { curve, k, boundary: field.clone() };
    let f = boundary_trace(&field, k, &set)?;
    let mut out = Vec::new();
    for &mh in half_orders {
        let spec = BasisSpec::Bessel(BesselBasisSpec { center: Point::ORIGIN, half_order: mh, rho });
        let op = learn(&problem, spec, set.clone(), &AlphaPolicy::TheoreticalBb { rho, d, half_order: mh })?;
        let values = evaluate(op.basis().expect("basis"), &op.coefficients(&f)?, &grid)?;
        let s = FieldSample { points: grid.clone(), values, truth: Some(truth.clone()), valid: vec![true; grid.len()] };
        out.push((mh, relative_l2(&s)?, op.alpha()));
    }
    Ok(out)
}

/// Largest `|‖u_n‖ − 1|` over the columns, with the norm taken by the
/// `q`-point trapezoidal rule on the normalization circle.
pub fn normalization_defect(spec: &BesselBasisSpec, k: Wavenumber, q: usize) -> Result<f64> {
    let basis = Basis::new(BasisSpec::Bessel(spec.clone()), k)?;
    let pts: Vec<Point> = (0..q)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / q as f64;
            spec.center + spec.rho * Point::new(t.cos(), t.sin())
        })
        .collect();
    let v = basis.design_matrix(&pts)?;
    let w = std::f64::consts::TAU * spec.rho / q as f64;
    Ok((0..v.cols())
        .map(|j| ((linalg::norm(&v.column(j)).powi(2) * w).sqrt() - 1.0).abs())
        .fold(0.0, f64::max))
}
