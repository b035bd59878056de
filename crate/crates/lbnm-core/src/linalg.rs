//! Dense complex linear algebra for the regularized least-squares fit.
//!
//! The regularized Gram matrices `V*V + αI` (dual) and `VV* + αI` (primal)
//! are never formed for factorization. Their triangular factor `R` with
//! `R*R = Gram + αI` is obtained from a Householder QR of the stacked matrix
//! `[V; √α I]` (respectively `[V*; √α I]`), which keeps the conditioning at
//! `‖V‖/√α` instead of its square. The leading block of the orthogonal
//! factor is kept so coefficient solves avoid the normal equations.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const MIN_PIVOT: f64 = 1e-300;
const MAX_SWEEPS: usize = 80;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds from row-major entries, rejecting wrong lengths and non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(l)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.cols, x.len())?;
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `A* x`.
    pub fn adjoint_mul_vec(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.rows, x.len())?;
        let mut out = vec![ZERO; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        Ok(out)
    }

    /// Row vector times matrix, `x A`.
    pub fn row_vec_mul(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.rows, x.len())?;
        let mut out = vec![ZERO; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn append_column(&self, column: &[C64]) -> Result<ComplexMatrix> {
        check_len(self.rows, column.len())?;
        Ok(Self::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                column[i]
            }
        }))
    }

    fn to_col_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Euclidean norm with pairwise summation of squares.
pub fn norm(x: &[C64]) -> f64 {
    fn pairwise(x: &[C64]) -> f64 {
        if x.len() <= 16 {
            x.iter().map(|z| z.norm_sqr()).sum()
        } else {
            let (a, b) = x.split_at(x.len() / 2);
            pairwise(a) + pairwise(b)
        }
    }
    pairwise(x).sqrt()
}

/// `Σ conj(a_i) b_i`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Default)]
struct CompensatedSum {
    sum: C64,
    carry: C64,
}

impl CompensatedSum {
    fn add_part(sum: f64, carry: &mut f64, x: f64) -> f64 {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            *carry += (sum - t) + x;
        } else {
            *carry += (x - t) + sum;
        }
        t
    }

    fn add(&mut self, x: C64) {
        self.sum.re = Self::add_part(self.sum.re, &mut self.carry.re, x.re);
        self.sum.im = Self::add_part(self.sum.im, &mut self.carry.im, x.im);
    }

    fn value(self) -> C64 {
        self.sum + self.carry
    }
}

/// `V*V + αI`, assembled with compensated summation.
pub fn hermitian_gram(v: &ComplexMatrix, alpha: f64) -> ComplexMatrix {
    let m = v.cols();
    let cols = v.to_col_major();
    let n = v.rows();
    let mut g = ComplexMatrix::zeros(m, m);
    for p in 0..m {
        for q in p..m {
            let mut acc = CompensatedSum::default();
            for (a, b) in cols[p * n..(p + 1) * n].iter().zip(&cols[q * n..(q + 1) * n]) {
                acc.add(a.conj() * b);
            }
            let mut val = acc.value();
            if p == q {
                val = C64::new(val.re + alpha, 0.0);
            }
            g[(p, q)] = val;
            g[(q, p)] = val.conj();
        }
    }
    g
}

/// Householder QR of a column-major `m × n` matrix, `m ≥ n`.
struct Householder {
    m: usize,
    n: usize,
    /// Column-major; strictly-lower part holds reflector tails (head is 1).
    a: Vec<C64>,
    tau: Vec<f64>,
    diag: Vec<C64>,
    perm: Vec<usize>,
}

impl Householder {
    fn factor(mut a: Vec<C64>, m: usize, n: usize, pivot: bool) -> Self {
        debug_assert!(m >= n);
        let mut tau = vec![0.0; n];
        let mut diag = vec![ZERO; n];
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            if pivot {
                let mut best = k;
                let mut best_norm = -1.0;
                for j in k..n {
                    let s: f64 = a[j * m + k..(j + 1) * m].iter().map(|z| z.norm_sqr()).sum();
                    if s > best_norm {
                        best_norm = s;
                        best = j;
                    }
                }
                if best != k {
                    for i in 0..m {
                        a.swap(k * m + i, best * m + i);
                    }
                    perm.swap(k, best);
                }
            }
            let (head, tail) = a.split_at_mut((k + 1) * m);
            let col = &mut head[k * m + k..];
            let norm_x = norm(col);
            if norm_x == 0.0 {
                continue;
            }
            let x0 = col[0];
            let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
            let alpha = -phase * norm_x;
            let v0 = x0 - alpha;
            for z in col[1..].iter_mut() {
                *z /= v0;
            }
            let tail_sq: f64 = col[1..].iter().map(|z| z.norm_sqr()).sum();
            let t = 2.0 / (1.0 + tail_sq);
            col[0] = alpha;
            tau[k] = t;
            diag[k] = alpha;
            let v_tail = &col[1..];
            for j in (k + 1)..n {
                let cj = &mut tail[(j - k - 1) * m + k..(j - k) * m];
                let w = cj[0] + dot(v_tail, &cj[1..]);
                let tw = w * t;
                cj[0] -= tw;
                for (c, v) in cj[1..].iter_mut().zip(v_tail) {
                    *c -= tw * v;
                }
            }
        }
        Householder {
            m,
            n,
            a,
            tau,
            diag,
            perm,
        }
    }

    fn reflect(&self, k: usize, x: &mut [C64]) {
        let t = self.tau[k];
        if t == 0.0 {
            return;
        }
        let v_tail = &self.a[k * self.m + k + 1..(k + 1) * self.m];
        let seg = &mut x[k..];
        let w = seg[0] + dot(v_tail, &seg[1..]);
        let tw = w * t;
        seg[0] -= tw;
        for (c, v) in seg[1..].iter_mut().zip(v_tail) {
            *c -= tw * v;
        }
    }

    /// `x ← Q x` for a length-`m` vector.
    fn apply_q(&self, x: &mut [C64]) {
        for k in (0..self.n).rev() {
            self.reflect(k, x);
        }
    }

    /// Upper-triangular `n × n`, row-major.
    fn r(&self) -> Vec<C64> {
        let n = self.n;
        let mut r = vec![ZERO; n * n];
        for i in 0..n {
            r[i * n + i] = self.diag[i];
            for j in (i + 1)..n {
                r[i * n + j] = self.a[j * self.m + i];
            }
        }
        r
    }

    /// First `rows` rows of the thin `m × n` orthogonal factor.
    fn q_block(&self, rows: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rows, self.n);
        let mut e = vec![ZERO; self.m];
        for j in 0..self.n {
            e.iter_mut().for_each(|z| *z = ZERO);
            e[j] = ONE;
            self.apply_q(&mut e);
            for i in 0..rows {
                out[(i, j)] = e[i];
            }
        }
        out
    }
}

/// Which regularized Gram matrix a factorization represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `VV* + αI`, `N × N`.
    Primal,
    /// `V*V + αI`, `M × M`.
    Dual,
}

/// Triangular factor `R` (real positive diagonal) with `R*R = Gram + αI`.
#[derive(Clone, Debug)]
pub struct RegularizedFactorization {
    mode: Mode,
    alpha: f64,
    n_rows: usize,
    n_cols: usize,
    dim: usize,
    r: Vec<C64>,
    /// Leading block of the orthogonal factor of the stacked matrix: `V = Q₁R`
    /// (dual) or `V* = Q₁R` (primal).
    q_top: ComplexMatrix,
}

/// Factorizes `V*V + αI` (dual) or `VV* + αI` (primal).
pub fn factor_regularized(
    v: &ComplexMatrix,
    alpha: f64,
    mode: Mode,
) -> Result<RegularizedFactorization> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!(
            "regularization weight must be positive, got {alpha:e}"
        )));
    }
    let (n_rows, n_cols) = (v.rows(), v.cols());
    let (top, dim) = match mode {
        Mode::Dual => (v.clone(), n_cols),
        Mode::Primal => (v.adjoint(), n_rows),
    };
    let top_rows = top.rows();
    let m = top_rows + dim;
    let sqrt_alpha = alpha.sqrt();
    let mut stacked = vec![ZERO; m * dim];
    for j in 0..dim {
        for i in 0..top_rows {
            stacked[j * m + i] = top[(i, j)];
        }
        stacked[j * m + top_rows + j] = C64::new(sqrt_alpha, 0.0);
    }
    let qr = Householder::factor(stacked, m, dim, false);
    let mut r = qr.r();
    let mut q_top = qr.q_block(top_rows);
    for k in 0..dim {
        let d = r[k * dim + k];
        let mag = d.norm();
        if !(mag >= MIN_PIVOT) {
            return Err(Error::Factorization { index: k });
        }
        let phase = d / mag;
        let conj_phase = phase.conj();
        for j in k..dim {
            r[k * dim + j] *= conj_phase;
        }
        r[k * dim + k] = C64::new(mag, 0.0);
        for i in 0..top_rows {
            q_top[(i, k)] *= phase;
        }
    }
    Ok(RegularizedFactorization {
        mode,
        alpha,
        n_rows,
        n_cols,
        dim,
        r,
        q_top,
    })
}

impl RegularizedFactorization {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(N, M)` of the design matrix this factorization belongs to.
    pub fn source_dims(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    /// Order of the factored Hermitian matrix.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_factor(&self) -> ComplexMatrix {
        ComplexMatrix::from_row_major(self.dim, self.dim, self.r.clone())
            .expect("finite by construction")
    }

    /// Leading block `Q₁` of the orthogonal factor, if still available.
    pub fn q_top(&self) -> &ComplexMatrix {
        &self.q_top
    }

    /// Rebuilds a factorization from exported `R` and `Q₁`.
    pub fn from_parts(mode: Mode, alpha: f64, r: &ComplexMatrix, q_top: ComplexMatrix) -> Result<Self> {
        let dim = r.rows();
        check_len(dim, r.cols())?;
        check_len(dim, q_top.cols())?;
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter("regularization weight must be positive".into()));
        }
        for i in 0..dim {
            let d = r[(i, i)];
            if d.im != 0.0 || !(d.re >= MIN_PIVOT) {
                return Err(Error::Factorization { index: i });
            }
            if (0..i).any(|j| r[(i, j)] != ZERO) {
                return Err(Error::InvalidParameter("R factor is not upper triangular".into()));
            }
        }
        let (n_rows, n_cols) = match mode {
            Mode::Dual => (q_top.rows(), dim),
            Mode::Primal => (dim, q_top.rows()),
        };
        Ok(RegularizedFactorization {
            mode,
            alpha,
            n_rows,
            n_cols,
            dim,
            r: r.as_slice().to_vec(),
            q_top,
        })
    }

    /// `c_*` straight from the stored factors: `R^{-1}Q₁*f` (dual) or
    /// `Q₁R^{-*}f` (primal). Never goes through the normal equations.
    pub fn factor_coefficients(&self, f: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n_rows, f.len())?;
        let q = &self.q_top;
        match self.mode {
            Mode::Dual => {
                let mut c = q.adjoint_mul_vec(f)?;
                self.back_solve(&mut c);
                Ok(c)
            }
            Mode::Primal => {
                let mut y = f.to_vec();
                self.forward_solve_adjoint(&mut y);
                q.mul_vec(&y)
            }
        }
    }

    /// Row form of the map: `b R^{-1} Q₁*` (dual) or `b Q₁ R^{-*}` (primal).
    pub fn map_row(&self, b: &[C64]) -> Result<Vec<C64>> {
        let q = &self.q_top;
        let n = self.dim;
        match self.mode {
            Mode::Dual => {
                check_len(n, b.len())?;
                // w R = b
                let mut w = b.to_vec();
                for j in 0..n {
                    let s: C64 = (0..j).map(|i| w[i] * self.r[i * n + j]).sum();
                    w[j] = (w[j] - s) / self.r[j * n + j];
                }
                Ok((0..q.rows())
                    .map(|i| q.row(i).iter().zip(&w).map(|(qi, wk)| wk * qi.conj()).sum())
                    .collect())
            }
            Mode::Primal => {
                check_len(q.rows(), b.len())?;
                // a R* = b Q₁, i.e. R a* = (b Q₁)*
                let mut y = vec![ZERO; n];
                for (i, bi) in b.iter().enumerate() {
                    for (yk, qk) in y.iter_mut().zip(q.row(i)) {
                        *yk += bi * qk;
                    }
                }
                let mut a: Vec<C64> = y.iter().map(|z| z.conj()).collect();
                self.back_solve(&mut a);
                Ok(a.iter().map(|z| z.conj()).collect())
            }
        }
    }

    /// `R x`.
    fn r_mul(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.r[i * n + i..(i + 1) * n]
                    .iter()
                    .zip(&x[i..])
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `(R*R) x`, i.e. the regularized Gram matrix applied to `x`.
    pub fn gram_apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.dim, x.len())?;
        let y = self.r_mul(x);
        let n = self.dim;
        let mut out = vec![ZERO; n];
        for i in 0..n {
            for j in i..n {
                out[j] += self.r[i * n + j].conj() * y[i];
            }
        }
        Ok(out)
    }

    /// Solves `R x = b` in place.
    fn back_solve(&self, x: &mut [C64]) {
        let n = self.dim;
        for i in (0..n).rev() {
            let row = &self.r[i * n..(i + 1) * n];
            let s: C64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
    }

    /// Solves `R* x = b` in place.
    fn forward_solve_adjoint(&self, x: &mut [C64]) {
        let n = self.dim;
        for i in 0..n {
            let xi = x[i] / self.r[i * n + i].conj();
            x[i] = xi;
            for j in (i + 1)..n {
                x[j] -= self.r[i * n + j].conj() * xi;
            }
        }
    }

    /// `(Gram + αI)^{-1} b`.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        check_len(self.dim, b.len())?;
        let mut x = b.to_vec();
        self.forward_solve_adjoint(&mut x);
        self.back_solve(&mut x);
        Ok(x)
    }

    fn check_source(&self, v: &ComplexMatrix) -> Result<()> {
        check_len(self.n_rows, v.rows())?;
        check_len(self.n_cols, v.cols())
    }

    /// The linear map `f ↦ c_* = (V*V + αI)^{-1} V* f` as an `M × N` matrix.
    pub fn coefficient_map(&self, v: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_source(v)?;
        let (n, m) = (self.n_rows, self.n_cols);
        let q = &self.q_top;
        match self.mode {
            Mode::Dual => {
                // R^{-1} Q₁*
                let mut out = ComplexMatrix::zeros(m, n);
                let mut col = vec![ZERO; m];
                for j in 0..n {
                    for (k, c) in col.iter_mut().enumerate() {
                        *c = q[(j, k)].conj();
                    }
                    self.back_solve(&mut col);
                    for k in 0..m {
                        out[(k, j)] = col[k];
                    }
                }
                Ok(out)
            }
            Mode::Primal => {
                // Q₁ R^{-*}: row i is conj of R^{-1} applied to conj(row i of Q₁)
                let mut out = ComplexMatrix::zeros(m, n);
                let mut row = vec![ZERO; n];
                for i in 0..m {
                    for (j, c) in row.iter_mut().enumerate() {
                        *c = q[(i, j)].conj();
                    }
                    self.back_solve(&mut row);
                    for j in 0..n {
                        out[(i, j)] = row[j].conj();
                    }
                }
                Ok(out)
            }
        }
    }

    /// Adds a column `u` to `V` in primal mode: `VV* + αI + uu*`.
    ///
    /// `u*` becomes a new row of the stacked matrix; a Givens sweep restores
    /// the triangle in `O(N²)` and the same rotations carry `Q₁` along in
    /// `O(NM)`.
    pub fn rank_one_update(&self, new_column: &[C64]) -> Result<RegularizedFactorization> {
        if self.mode != Mode::Primal {
            return Err(Error::Mode("rank-one column update needs the primal factorization"));
        }
        check_len(self.n_rows, new_column.len())?;
        let n = self.dim;
        let mut r = self.r.clone();
        let rows = self.q_top.rows();
        let mut q = ComplexMatrix::zeros(rows + 1, n);
        q.data[..rows * n].copy_from_slice(self.q_top.as_slice());
        // extra orthogonal column, starts as e_new
        let mut x = vec![ZERO; rows + 1];
        x[rows] = C64::new(1.0, 0.0);
        // Givens sweep on [R; w] with w = u*, zeroing w.
        let mut w: Vec<C64> = new_column.iter().map(|z| z.conj()).collect();
        for k in 0..n {
            let b = w[k];
            if b == ZERO {
                continue;
            }
            let a = r[k * n + k].re;
            let rad = a.hypot(b.norm());
            for j in k..n {
                let rkj = r[k * n + j];
                let wj = w[j];
                r[k * n + j] = (rkj * a + b.conj() * wj) / rad;
                w[j] = (-b * rkj + wj * a) / rad;
            }
            r[k * n + k] = C64::new(r[k * n + k].re, 0.0);
            if !(r[k * n + k].re >= MIN_PIVOT) {
                return Err(Error::Factorization { index: k });
            }
            for (i, xi) in x.iter_mut().enumerate() {
                let qik = q.data[i * n + k];
                q.data[i * n + k] = (qik * a + b * *xi) / rad;
                *xi = (-b.conj() * qik + *xi * a) / rad;
            }
        }
        Ok(RegularizedFactorization {
            mode: Mode::Primal,
            alpha: self.alpha,
            n_rows: self.n_rows,
            n_cols: self.n_cols + 1,
            dim: n,
            r,
            q_top: q,
        })
    }
}

/// The Tikhonov coefficients `c_* = argmin ‖f − Vc‖² + α‖c‖²`.
pub fn solve_coefficients(
    fact: &RegularizedFactorization,
    v: &ComplexMatrix,
    f: &[C64],
) -> Result<Vec<C64>> {
    fact.check_source(v)?;
    fact.factor_coefficients(f)
}

/// Thin singular value decomposition `V = U diag(s) W*`.
#[derive(Clone, Debug)]
pub struct SvdBundle {
    /// `N × r` left singular vectors.
    pub u: ComplexMatrix,
    /// Descending, nonnegative; `r = min(N, M)`.
    pub s: Vec<f64>,
    /// `M × r` right singular vectors.
    pub w: ComplexMatrix,
}

impl SvdBundle {
    /// `U diag(s) W*`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (n, m, r) = (self.u.rows(), self.w.rows(), self.s.len());
        ComplexMatrix::from_fn(n, m, |i, j| {
            (0..r)
                .map(|k| self.u[(i, k)] * self.s[k] * self.w[(j, k)].conj())
                .sum()
        })
    }
}

/// One-sided Jacobi on the columns of a column-major `m × n` matrix,
/// accumulating the rotations in `jac` (`n × n`, column-major).
fn jacobi_orthogonalize(a: &mut [C64], m: usize, n: usize, jac: &mut [C64]) -> Result<()> {
    let tol = (m as f64).sqrt() * f64::EPSILON;
    let col_norm = |a: &[C64], j: usize| -> f64 {
        a[j * m..(j + 1) * m].iter().map(|z| z.norm_sqr()).sum()
    };
    let mut norms: Vec<f64> = (0..n).map(|j| col_norm(a, j)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                if norms[p] == 0.0 || norms[q] == 0.0 {
                    continue;
                }
                let (lo, hi) = a.split_at_mut(q * m);
                let ap = &mut lo[p * m..(p + 1) * m];
                let aq = &mut hi[..m];
                let g = dot(ap, aq);
                let gabs = g.norm();
                if gabs <= tol * (norms[p] * norms[q]).sqrt() {
                    continue;
                }
                rotated = true;
                let e = g / gabs;
                let zeta = (norms[q] - norms[p]) / (2.0 * gabs);
                let t = if zeta >= 0.0 { 1.0 } else { -1.0 } / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let se = e * s;
                let se_conj = se.conj();
                for (x, y) in ap.iter_mut().zip(aq.iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = xp * c - se_conj * yq;
                    *y = se * xp + yq * c;
                }
                let (jlo, jhi) = jac.split_at_mut(q * n);
                let jp = &mut jlo[p * n..(p + 1) * n];
                let jq = &mut jhi[..n];
                for (x, y) in jp.iter_mut().zip(jq.iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = xp * c - se_conj * yq;
                    *y = se * xp + yq * c;
                }
                norms[p] = ap.iter().map(|z| z.norm_sqr()).sum();
                norms[q] = aq.iter().map(|z| z.norm_sqr()).sum();
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

/// Thin SVD by column-pivoted QR followed by one-sided Jacobi on `R*`.
pub fn svd(v: &ComplexMatrix) -> Result<SvdBundle> {
    let (n, m) = (v.rows(), v.cols());
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("svd of an empty matrix".into()));
    }
    if n < m {
        let t = svd(&v.adjoint())?;
        return Ok(SvdBundle {
            u: t.w,
            s: t.s,
            w: t.u,
        });
    }
    let qr = Householder::factor(v.to_col_major(), n, m, true);
    let r = qr.r();
    // A = R*, column-major
    let mut a = vec![ZERO; m * m];
    for i in 0..m {
        for j in i..m {
            a[i * m + j] = r[i * m + j].conj();
        }
    }
    let mut jac = vec![ZERO; m * m];
    for i in 0..m {
        jac[i * m + i] = ONE;
    }
    jacobi_orthogonalize(&mut a, m, m, &mut jac)?;

    let mut s: Vec<f64> = (0..m).map(|j| norm(&a[j * m..(j + 1) * m])).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| s[y].partial_cmp(&s[x]).unwrap_or(core::cmp::Ordering::Equal));

    let mut u = ComplexMatrix::zeros(n, m);
    let mut w = ComplexMatrix::zeros(m, m);
    let mut col = vec![ZERO; n];
    for (dst, &src) in order.iter().enumerate() {
        let sv = s[src];
        // left: Q [J_src; 0]
        col.iter_mut().for_each(|z| *z = ZERO);
        col[..m].copy_from_slice(&jac[src * m..(src + 1) * m]);
        qr.apply_q(&mut col);
        for i in 0..n {
            u[(i, dst)] = col[i];
        }
        // right: P (a_src / s)
        if sv > 0.0 {
            for i in 0..m {
                w[(qr.perm[i], dst)] = a[src * m + i] / sv;
            }
        }
    }
    s = order.iter().map(|&i| s[i]).collect();
    Ok(SvdBundle { u, s, w })
}
