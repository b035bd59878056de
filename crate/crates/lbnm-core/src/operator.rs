//! The learned boundary-to-interior operator.
//!
//! Learning assembles `V`, resolves α and caches the factors of
//! `V*V + αI`. Applying to boundary data `f` computes
//! `c_* = (V*V + αI)^{-1}V* f` once from the factors and then
//! `u(z) = b(z)·c_*` per target. The explicit `M × N` map is available but
//! not used for solves: summing its columns cancels badly once α is small. Enrichment with
//! new columns switches to the primal factorization of `VV* + αI`, which
//! takes per-column rank-one updates.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{Basis, BasisSpec, Wavenumber};
use crate::error::{invalid, Error, Result};
use crate::geometry::{BoundaryCurve, CollocationSet, Point};
use crate::linalg::{self, factor_regularized, solve_coefficients, ComplexMatrix, Mode, RegularizedFactorization};
use crate::metrics::FieldSample;
use crate::reference::{boundary_trace, ReferenceField};
use crate::regularization::{resolve_alpha, AlphaPolicy, GcvCurve};
use crate::C64;

const SPOT_CHECK_TOL: f64 = 1e-10;

/// Domain, wavenumber and Dirichlet data.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub curve: BoundaryCurve,
    pub k: Wavenumber,
    pub boundary: ReferenceField,
}

/// Values `f(x_j)` at the collocation points.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData(Vec<C64>);

impl BoundaryData {
    pub fn new(values: Vec<C64>, collocation_count: usize) -> Result<Self> {
        if values.len() != collocation_count {
            return Err(Error::DimensionMismatch {
                expected: collocation_count,
                found: values.len(),
            });
        }
        Ok(BoundaryData(values))
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }
}

#[derive(Clone, Debug)]
enum Solver {
    Dual {
        fact: RegularizedFactorization,
    },
    Primal {
        fact: RegularizedFactorization,
    },
}

#[derive(Clone, Debug)]
pub struct LearnedOperator {
    basis: Option<Basis>,
    collocation: Option<CollocationSet>,
    alpha: f64,
    v: ComplexMatrix,
    solver: Solver,
    gcv: Option<GcvCurve>,
}

/// Checks `R*R x` against `V*(Vx) + αx` on a fixed probe vector.
fn spot_check(fact: &RegularizedFactorization, v: &ComplexMatrix) -> Result<()> {
    let m = fact.dim();
    let x: Vec<C64> = (0..m)
        .map(|j| C64::from_polar(1.0 / (1.0 + j as f64), 0.7 * j as f64))
        .collect();
    let got = fact.gram_apply(&x)?;
    let want: Vec<C64> = match fact.mode() {
        Mode::Dual => v.adjoint_mul_vec(&v.mul_vec(&x)?)?,
        Mode::Primal => v.mul_vec(&v.adjoint_mul_vec(&x)?)?,
    }
    .iter()
    .zip(&x)
    .map(|(g, xi)| g + xi * fact.alpha())
    .collect();
    let d: Vec<C64> = got.iter().zip(&want).map(|(a, b)| a - b).collect();
    if linalg::norm(&d) > SPOT_CHECK_TOL * linalg::norm(&want) {
        return Err(Error::Singular("factorization does not reproduce the Gram matrix"));
    }
    Ok(())
}

/// Algorithm entry point: assemble `V`, pick α, factor.
pub fn learn(
    problem: &ProblemSpec,
    basis: BasisSpec,
    collocation: CollocationSet,
    policy: &AlphaPolicy,
) -> Result<LearnedOperator> {
    let basis = Basis::new(basis, problem.k)?;
    let v = basis.design_matrix(&collocation.points)?;
    let f = boundary_trace(&problem.boundary, problem.k, &collocation)?;
    let (alpha, gcv) = resolve_alpha(policy, &v, &f)?;
    let mut op = LearnedOperator::from_design(v, alpha)?;
    op.basis = Some(basis);
    op.collocation = Some(collocation);
    op.gcv = gcv;
    Ok(op)
}

impl LearnedOperator {
    /// Operator for an explicit design matrix, without a basis attached.
    pub fn from_design(v: ComplexMatrix, alpha: f64) -> Result<Self> {
        let fact = factor_regularized(&v, alpha, Mode::Dual)?;
        spot_check(&fact, &v)?;
        Ok(LearnedOperator {
            basis: None,
            collocation: None,
            alpha,
            v,
            solver: Solver::Dual { fact },
            gcv: None,
        })
    }

    /// Attaches the basis the columns of `V` came from.
    pub fn with_basis(mut self, basis: Basis, collocation: CollocationSet) -> Result<Self> {
        if basis.len() != self.v.cols() || collocation.len() != self.v.rows() {
            return Err(invalid("basis or collocation does not match the design matrix"));
        }
        self.basis = Some(basis);
        self.collocation = Some(collocation);
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn design(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn basis(&self) -> Option<&Basis> {
        self.basis.as_ref()
    }

    pub fn collocation(&self) -> Option<&CollocationSet> {
        self.collocation.as_ref()
    }

    pub fn wavenumber(&self) -> Option<Wavenumber> {
        self.basis.as_ref().map(Basis::wavenumber)
    }

    pub fn gcv_curve(&self) -> Option<&GcvCurve> {
        self.gcv.as_ref()
    }

    /// `(N, M)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.v.rows(), self.v.cols())
    }

    pub fn mode(&self) -> Mode {
        match self.solver {
            Solver::Dual { .. } => Mode::Dual,
            Solver::Primal { .. } => Mode::Primal,
        }
    }

    fn check_f(&self, f: &[C64]) -> Result<()> {
        if f.len() != self.v.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.v.rows(),
                found: f.len(),
            });
        }
        Ok(())
    }

    /// `c_* = (V*V + αI)^{-1}V* f`.
    pub fn coefficients(&self, f: &[C64]) -> Result<Vec<C64>> {
        self.check_f(f)?;
        match &self.solver {
            Solver::Dual { fact } | Solver::Primal { fact } => solve_coefficients(fact, &self.v, f),
        }
    }

    /// The factorization solves go through.
    pub fn factorization(&self) -> &RegularizedFactorization {
        match &self.solver {
            Solver::Dual { fact } | Solver::Primal { fact } => fact,
        }
    }

    /// The `M × N` map `f ↦ c_*`, for diagnostics.
    pub fn coefficient_map(&self) -> Result<ComplexMatrix> {
        match &self.solver {
            Solver::Dual { fact } | Solver::Primal { fact } => fact.coefficient_map(&self.v),
        }
    }

    /// `‖f − V c_*‖`.
    pub fn training_residual(&self, f: &[C64]) -> Result<f64> {
        let r = self.boundary_residuals(f)?;
        Ok(linalg::norm(&r))
    }

    /// `f − V c_*` per collocation point.
    pub fn boundary_residuals(&self, f: &[C64]) -> Result<Vec<C64>> {
        let c = self.coefficients(f)?;
        let fit = self.v.mul_vec(&c)?;
        Ok(f.iter().zip(&fit).map(|(a, b)| a - b).collect())
    }

    fn require_basis(&self) -> Result<&Basis> {
        self.basis
            .as_ref()
            .ok_or_else(|| invalid("operator has no basis attached; use the row-vector methods"))
    }

    /// `u(z_p) = b(z_p)·c_*`. Points failing the inside test are flagged, not dropped.
    pub fn apply(&self, f: &[C64], targets: &[Point], curve: Option<&BoundaryCurve>) -> Result<FieldSample> {
        let basis = self.require_basis()?;
        let c = self.coefficients(f)?;
        let values = evaluate(basis, &c, targets)?;
        let valid = match curve {
            Some(curve) => targets.iter().map(|&p| curve.is_inside(p)).collect(),
            None => vec![true; targets.len()],
        };
        Ok(FieldSample {
            points: targets.to_vec(),
            values,
            truth: None,
            valid,
        })
    }

    /// `a_*(x) = b(x) P`, so that `a_*(x)·f` equals the applied value.
    pub fn operator_coefficients(&self, target: Point) -> Result<Vec<C64>> {
        let b = self.require_basis()?.eval(target)?;
        self.operator_row(&b)
    }

    /// `b·P` for an explicit row `b` of basis values.
    pub fn operator_row(&self, b: &[C64]) -> Result<Vec<C64>> {
        match &self.solver {
            Solver::Dual { fact } => fact.map_row(b),
            Solver::Primal { .. } => self.primal_operator_row(b),
        }
    }

    fn primal_factor(&self) -> Result<RegularizedFactorization> {
        match &self.solver {
            Solver::Primal { fact } => Ok(fact.clone()),
            Solver::Dual { .. } => factor_regularized(&self.v, self.alpha, Mode::Primal),
        }
    }

    /// `b V*(VV* + αI)^{-1}` through the primal factorization.
    pub fn primal_operator_row(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.v.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.v.cols(),
                found: b.len(),
            });
        }
        self.primal_factor()?.map_row(b)
    }

    /// Same operator with the primal factorization as its solve state.
    pub fn into_primal(self) -> Result<Self> {
        if let Solver::Primal { .. } = self.solver {
            return Ok(self);
        }
        let fact = self.primal_factor()?;
        spot_check(&fact, &self.v)?;
        Ok(LearnedOperator {
            solver: Solver::Primal { fact },
            ..self
        })
    }

    /// Appends raw columns by rank-one updates of the primal factor.
    /// Any attached basis is dropped since the new columns have no evaluator.
    pub fn enrich_columns(&self, columns: &[Vec<C64>]) -> Result<Self> {
        let mut fact = self.primal_factor()?;
        let mut v = self.v.clone();
        for col in columns {
            fact = fact.rank_one_update(col)?;
            v = v.append_column(col)?;
        }
        Ok(LearnedOperator {
            basis: None,
            collocation: self.collocation.clone(),
            alpha: self.alpha,
            v,
            solver: Solver::Primal { fact },
            gcv: None,
        })
    }

    /// Appends the functions of `extra`, evaluated at the training points.
    pub fn enrich(&self, extra: &Basis) -> Result<Self> {
        let basis = self.require_basis()?;
        let collocation = self
            .collocation
            .as_ref()
            .ok_or_else(|| invalid("operator has no collocation set"))?;
        let new_v = extra.design_matrix(&collocation.points)?;
        let columns: Vec<Vec<C64>> = (0..new_v.cols()).map(|j| new_v.column(j)).collect();
        let mut op = self.enrich_columns(&columns)?;
        op.basis = Some(basis.union(extra)?);
        Ok(op)
    }
}

/// `b(z)·c` at every target.
pub fn evaluate(basis: &Basis, coefficients: &[C64], targets: &[Point]) -> Result<Vec<C64>> {
    if coefficients.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: coefficients.len(),
        });
    }
    let mut row = vec![C64::new(0.0, 0.0); basis.len()];
    targets
        .iter()
        .map(|&p| {
            basis.eval_into(p, &mut row)?;
            Ok(row.iter().zip(coefficients).map(|(b, c)| b * c).sum())
        })
        .collect()
}
