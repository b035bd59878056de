//! Text formats: polylines, CSV tables, learned-operator files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use lbnm_core::basis::{Basis, BasisSpec, BesselBasisSpec, FsBasisSpec, MultiCenterSpec, Wavenumber};
use lbnm_core::linalg::{ComplexMatrix, Mode, RegularizedFactorization};
use lbnm_core::metrics::FieldSample;
use lbnm_core::operator::{evaluate, LearnedOperator};
use lbnm_core::{Point, C64};

use crate::error::{CliError, Result};

pub const OPERATOR_MAGIC: &str = "lbnm-operator";
pub const OPERATOR_VERSION: u32 = 1;

/// 17 significant digits, round-trips every `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn bad_line(path: &Path, line: usize, msg: impl Into<String>) -> CliError {
    CliError::Format { path: path.into(), line, msg: msg.into() }
}

/// One `x y` pair per line, `#` comments, implicitly closed.
pub fn read_polyline(path: &Path) -> Result<Vec<Point>> {
    let text = read(path)?;
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let s = line.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = s
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad_line(path, i + 1, format!("expected `x y`, got `{s}`")))?;
        if v.len() != 2 || !v.iter().all(|x| x.is_finite()) {
            return Err(bad_line(path, i + 1, format!("expected `x y`, got `{s}`")));
        }
        pts.push(Point::new(v[0], v[1]));
    }
    if pts.len() < 3 {
        return Err(bad_line(path, 0, "polyline needs at least 3 vertices"));
    }
    Ok(pts)
}

/// Rows of two numbers; a non-numeric first row is taken as a header.
fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad_line(path, i + 1, e.to_string()))?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        let parse = |j: usize| rec.get(j).and_then(|s| s.parse::<f64>().ok()).filter(|x| x.is_finite());
        match (parse(0), parse(1), rec.len()) {
            (Some(a), Some(b), 2) => out.push((a, b)),
            _ if i == 0 && rec.get(0).is_some_and(|s| s.parse::<f64>().is_err()) => continue,
            _ => return Err(bad_line(path, line, "expected two numbers per row")),
        }
    }
    Ok(out)
}

pub fn read_complex_csv(path: &Path) -> Result<Vec<C64>> {
    Ok(read_pairs(path)?.into_iter().map(|(a, b)| C64::new(a, b)).collect())
}

pub fn read_points_csv(path: &Path) -> Result<Vec<Point>> {
    Ok(read_pairs(path)?.into_iter().map(|(a, b)| Point::new(a, b)).collect())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e.into()))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, e.into())
}

/// Header plus rows of preformatted cells.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_complex_csv(path: &Path, values: &[C64]) -> Result<()> {
    let rows: Vec<Vec<String>> = values.iter().map(|z| vec![num(z.re), num(z.im)]).collect();
    write_table(path, &["re", "im"], &rows)
}

pub fn write_points_csv(path: &Path, points: &[Point]) -> Result<()> {
    let rows: Vec<Vec<String>> = points.iter().map(|p| vec![num(p.x), num(p.y)]).collect();
    write_table(path, &["x", "y"], &rows)
}

/// `x, y, re, im, abs_err, valid`; `abs_err` is empty without truth.
pub fn write_field_csv(path: &Path, s: &FieldSample) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..s.points.len())
        .map(|i| {
            let err = match &s.truth {
                Some(t) => num((t[i] - s.values[i]).norm()),
                None => String::new(),
            };
            vec![
                num(s.points[i].x),
                num(s.points[i].y),
                num(s.values[i].re),
                num(s.values[i].im),
                err,
                (s.valid[i] as u8).to_string(),
            ]
        })
        .collect();
    write_table(path, &["x", "y", "re", "im", "abs_err", "valid"], &rows)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// A learned operator read back from disk: factors and basis, no design matrix.
#[derive(Clone, Debug)]
pub struct StoredOperator {
    pub basis: Basis,
    pub factorization: RegularizedFactorization,
    pub collocation: Vec<Point>,
}

impl StoredOperator {
    pub fn alpha(&self) -> f64 {
        self.factorization.alpha()
    }

    pub fn coefficients(&self, f: &[C64]) -> Result<Vec<C64>> {
        Ok(self.factorization.factor_coefficients(f)?)
    }

    pub fn apply(&self, f: &[C64], targets: &[Point]) -> Result<Vec<C64>> {
        let c = self.coefficients(f)?;
        Ok(evaluate(&self.basis, &c, targets)?)
    }

    /// Many right-hand sides on one target set: basis values at the targets
    /// are computed once, then each `f` costs one solve and one product.
    pub fn apply_many(&self, fs: &[Vec<C64>], targets: &[Point]) -> Result<Vec<Vec<C64>>> {
        let b = self.basis.design_matrix(targets)?;
        fs.iter()
            .map(|f| Ok(b.mul_vec(&self.coefficients(f)?)?))
            .collect()
    }
}

fn flatten(spec: &BasisSpec, out: &mut Vec<String>) -> Result<()> {
    let bessel = |b: &BesselBasisSpec| {
        format!("bessel {} {} {} {}", num(b.center.x), num(b.center.y), b.half_order, num(b.rho))
    };
    match spec {
        BasisSpec::Bessel(b) => out.push(bessel(b)),
        BasisSpec::MultiCenter(m) => out.extend(m.centers.iter().map(bessel)),
        BasisSpec::Fs(f) => out.push(format!("fs {} {} {} {}", num(f.center.x), num(f.center.y), num(f.radius), f.count)),
        BasisSpec::Union(parts) => {
            for p in parts {
                flatten(p, out)?;
            }
        }
    }
    Ok(())
}

/// Header, basis blocks, collocation points, then `R` (upper triangle by
/// rows) and `Q₁` (by rows) as `re im` pairs.
pub fn write_operator(path: &Path, op: &LearnedOperator) -> Result<()> {
    let basis = op
        .basis()
        .ok_or_else(|| CliError::Invalid("operator has no basis attached".into()))?;
    let points = op
        .collocation()
        .map(|c| c.points.clone())
        .ok_or_else(|| CliError::Invalid("operator has no collocation set".into()))?;
    let fact = op.factorization();
    let k = basis.wavenumber();
    let (n, m) = op.dims();
    let mut blocks = Vec::new();
    flatten(basis.spec(), &mut blocks)?;

    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| CliError::io(path, e);
    writeln!(w, "{OPERATOR_MAGIC} {OPERATOR_VERSION}").map_err(io)?;
    writeln!(w, "n {n}\nm {m}").map_err(io)?;
    writeln!(w, "k {} {}", num(k.k_r), num(k.sigma)).map_err(io)?;
    writeln!(w, "alpha {}", num(fact.alpha())).map_err(io)?;
    let mode = match fact.mode() {
        Mode::Dual => "dual",
        Mode::Primal => "primal",
    };
    writeln!(w, "mode {mode}").map_err(io)?;
    writeln!(w, "blocks {}", blocks.len()).map_err(io)?;
    for b in &blocks {
        writeln!(w, "{b}").map_err(io)?;
    }
    writeln!(w, "collocation").map_err(io)?;
    for p in &points {
        writeln!(w, "{} {}", num(p.x), num(p.y)).map_err(io)?;
    }
    let r = fact.r_factor();
    let dim = r.rows();
    writeln!(w, "r {dim}").map_err(io)?;
    for i in 0..dim {
        let row: Vec<String> = (i..dim).map(|j| format!("{} {}", num(r[(i, j)].re), num(r[(i, j)].im))).collect();
        writeln!(w, "{}", row.join(" ")).map_err(io)?;
    }
    let q = fact.q_top();
    writeln!(w, "q {} {}", q.rows(), q.cols()).map_err(io)?;
    for i in 0..q.rows() {
        let row: Vec<String> = q.row(i).iter().map(|z| format!("{} {}", num(z.re), num(z.im))).collect();
        writeln!(w, "{}", row.join(" ")).map_err(io)?;
    }
    writeln!(w, "end").map_err(io)?;
    w.flush().map_err(io)
}

struct Lines<'a> {
    path: &'a Path,
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        let (i, s) = self.it.next().ok_or_else(|| bad_line(self.path, self.line + 1, "unexpected end of file"))?;
        self.line = i + 1;
        Ok(s)
    }

    fn err(&self, msg: impl Into<String>) -> CliError {
        bad_line(self.path, self.line, msg)
    }

    /// Line starting with `key`, remaining tokens returned.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let s = self.next()?;
        let mut t = s.split_whitespace();
        if t.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`, got `{s}`")));
        }
        Ok(t.collect())
    }

    fn one<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let t = self.keyed(key)?;
        match t.as_slice() {
            [v] => v.parse().map_err(|_| self.err(format!("bad value for `{key}`"))),
            _ => Err(self.err(format!("`{key}` takes one value"))),
        }
    }

    fn numbers(&mut self, count: usize) -> Result<Vec<f64>> {
        let s = self.next()?;
        let v: Vec<f64> = s
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| self.err("bad number"))?;
        if v.len() != count {
            return Err(self.err(format!("expected {count} numbers, found {}", v.len())));
        }
        Ok(v)
    }
}

fn complexes(v: &[f64]) -> impl Iterator<Item = C64> + '_ {
    v.chunks(2).map(|p| C64::new(p[0], p[1]))
}

pub fn read_operator(path: &Path) -> Result<StoredOperator> {
    let text = read(path)?;
    let mut l = Lines { path, it: text.lines().enumerate(), line: 0 };
    let version: u32 = l.one(OPERATOR_MAGIC)?;
    if version != OPERATOR_VERSION {
        return Err(l.err(format!("unsupported operator version {version}")));
    }
    let n: usize = l.one("n")?;
    let m: usize = l.one("m")?;
    let k = l.keyed("k")?;
    let kv: Vec<f64> = k.iter().filter_map(|s| s.parse().ok()).collect();
    if kv.len() != 2 || k.len() != 2 {
        return Err(l.err("`k` takes k_r and sigma"));
    }
    let k = Wavenumber::new(kv[0], kv[1])?;
    let alpha: f64 = l.one("alpha")?;
    let mode = match l.one::<String>("mode")?.as_str() {
        "dual" => Mode::Dual,
        "primal" => Mode::Primal,
        other => return Err(l.err(format!("unknown mode `{other}`"))),
    };
    let nb: usize = l.one("blocks")?;
    let mut bessel = Vec::new();
    let mut parts = Vec::new();
    for _ in 0..nb {
        let s = l.next()?;
        let t: Vec<&str> = s.split_whitespace().collect();
        let f = |i: usize| t.get(i).and_then(|v| v.parse::<f64>().ok());
        let u = |i: usize| t.get(i).and_then(|v| v.parse::<usize>().ok());
        match (t.first().copied(), t.len()) {
            (Some("bessel"), 5) => {
                let (Some(x), Some(y), Some(mh), Some(rho)) = (f(1), f(2), u(3), f(4)) else {
                    return Err(l.err("bad bessel block"));
                };
                bessel.push(BesselBasisSpec { center: Point::new(x, y), half_order: mh, rho });
            }
            (Some("fs"), 5) => {
                let (Some(x), Some(y), Some(radius), Some(count)) = (f(1), f(2), f(3), u(4)) else {
                    return Err(l.err("bad fs block"));
                };
                parts.push(BasisSpec::Fs(FsBasisSpec { center: Point::new(x, y), radius, count }));
            }
            _ => return Err(l.err(format!("bad basis block `{s}`"))),
        }
    }
    let spec = match (bessel.len(), parts.len()) {
        (1, 0) => BasisSpec::Bessel(bessel.remove(0)),
        (0, 1) => parts.remove(0),
        (b, 0) if b > 1 => BasisSpec::MultiCenter(MultiCenterSpec { centers: bessel }),
        _ => {
            let mut all: Vec<BasisSpec> = bessel.into_iter().map(BasisSpec::Bessel).collect();
            all.extend(parts);
            BasisSpec::Union(all)
        }
    };
    let basis = Basis::new(spec, k)?;
    if basis.len() != m {
        return Err(l.err(format!("basis has {} functions, header says m = {m}", basis.len())));
    }
    l.keyed("collocation")?;
    let mut collocation = Vec::with_capacity(n);
    for _ in 0..n {
        let v = l.numbers(2)?;
        collocation.push(Point::new(v[0], v[1]));
    }
    let dim: usize = l.one("r")?;
    let expected_dim = if mode == Mode::Dual { m } else { n };
    if dim != expected_dim {
        return Err(l.err(format!("R has order {dim}, expected {expected_dim}")));
    }
    let mut r = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        let v = l.numbers(2 * (dim - i))?;
        for (j, z) in complexes(&v).enumerate() {
            r[(i, i + j)] = z;
        }
    }
    let q = l.keyed("q")?;
    let qd: Vec<usize> = q.iter().filter_map(|s| s.parse().ok()).collect();
    let q_rows = if mode == Mode::Dual { n } else { m };
    if qd != [q_rows, dim] {
        return Err(l.err(format!("Q has shape {q:?}, expected {q_rows} {dim}")));
    }
    let mut data = Vec::with_capacity(q_rows * dim);
    for _ in 0..q_rows {
        data.extend(complexes(&l.numbers(2 * dim)?));
    }
    let q = ComplexMatrix::from_row_major(q_rows, dim, data)?;
    l.keyed("end")?;
    let factorization = RegularizedFactorization::from_parts(mode, alpha, &r, q)?;
    Ok(StoredOperator { basis, factorization, collocation })
}
