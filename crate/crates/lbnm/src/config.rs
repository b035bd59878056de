//! Experiment configuration: flat `key = value` lines grouped under
//! `[section]` headers. `#` starts a comment. See `docs/config.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lbnm_core::geometry::{CurveKind, SamplingRule, C_SHAPE_GAP};
use lbnm_core::regularization::{DEFAULT_GRID_HI, DEFAULT_GRID_LO, DEFAULT_GRID_SIZE};
use lbnm_core::reference::DIPOLE_OFFSET;
use lbnm_core::Point;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Kite,
    Flower,
    CShape { center_radius: f64, width: f64, gap_deg: f64 },
    Disk { center: Point, radius: f64 },
    Polyline { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Damping {
    Sigma(f64),
    Ratio(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisConfig {
    /// `rho` defaults to the enclosing radius of the collocation points.
    Bessel { center: Point, half_order: usize, rho: Option<f64> },
    /// `center` defaults to the collocation centroid, `count` to `N`.
    Fs { center: Option<Point>, radius: f64, count: Option<usize> },
    MultiCenter { centers: Vec<Point>, half_order: usize, rho: Option<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlphaConfig {
    Gcv { lo: f64, hi: f64, count: usize },
    Fixed(f64),
    /// ρ and `M_h` come from the Bessel basis.
    TheoreticalBb { d: f64 },
    /// `R` comes from the source ring.
    TheoreticalFs,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldConfig {
    PlaneWave { direction: f64 },
    /// Explicit sources, or placed `offset` outside the curve.
    Dipole { sources: Option<(Point, Point)>, offset: f64 },
    Pulse,
    Constant { re: f64, im: f64 },
    /// Continuable to radius `d` about the basis center.
    BesselSeries { d: f64, n_max: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub ratios: Vec<f64>,
    /// Geometry name and collocation count; `M = N`.
    pub geometries: Vec<(String, usize)>,
    pub fs_radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceConfig {
    pub m_values: Vec<usize>,
    pub fs_radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MulticenterConfig {
    pub centers: Vec<Point>,
    pub single_center: Point,
    pub m_total: usize,
    pub reference_m_total: usize,
    /// Boundary points with `x` above this count as the tip region.
    pub tip_x: f64,
    /// Boundary points with `x` below this count as the back region.
    pub back_x: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub sampling: SamplingRule,
    pub k_r: f64,
    pub damping: Damping,
    pub n: usize,
    pub basis: BasisConfig,
    pub alpha: AlphaConfig,
    pub field: FieldConfig,
    pub grid_h: f64,
    pub seed: u64,
    pub sweep: SweepConfig,
    pub convergence: ConvergenceConfig,
    pub multicenter: MulticenterConfig,
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

/// Parsed `[section] key = value` text, with line numbers kept for errors.
struct Raw {
    path: String,
    entries: BTreeMap<(String, String), Entry>,
}

impl Raw {
    fn parse(text: &str, path: &str) -> Result<Raw> {
        let mut section = String::new();
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |msg: String| CliError::Config { path: path.into(), line: line_no, msg };
            let s = line.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err("unterminated section header".into()))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = s.split_once('=').ok_or_else(|| err(format!("expected key = value, got `{s}`")))?;
            if section.is_empty() {
                return Err(err("key outside of any section".into()));
            }
            let key = (section.clone(), k.trim().to_string());
            if entries.contains_key(&key) {
                return Err(err(format!("duplicate key `{}`", key.1)));
            }
            entries.insert(key, Entry { value: v.trim().to_string(), line: line_no, used: false });
        }
        Ok(Raw { path: path.into(), entries })
    }

    fn get(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let e = self.entries.get_mut(&(section.to_string(), key.to_string()))?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn fail(&self, line: usize, msg: impl Into<String>) -> CliError {
        CliError::Config { path: self.path.clone(), line, msg: msg.into() }
    }

    fn parsed<T>(&mut self, section: &str, key: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => f(&v)
                .map(Some)
                .ok_or_else(|| self.fail(line, format!("bad value for {section}.{key}: `{v}`"))),
        }
    }

    fn f64(&mut self, section: &str, key: &str) -> Result<Option<f64>> {
        self.parsed(section, key, |v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    fn usize(&mut self, section: &str, key: &str) -> Result<Option<usize>> {
        self.parsed(section, key, |v| v.parse().ok())
    }

    fn point(&mut self, section: &str, key: &str) -> Result<Option<Point>> {
        self.parsed(section, key, parse_point)
    }

    fn word(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        self.get(section, key).map(|(v, l)| (v.to_ascii_lowercase(), l))
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.entries.get(&(section.to_string(), key.to_string())).map_or(0, |e| e.line)
    }

    fn finish(&self) -> Result<()> {
        match self.entries.iter().find(|(_, e)| !e.used) {
            Some(((s, k), e)) => Err(self.fail(e.line, format!("unknown key {s}.{k}"))),
            None => Ok(()),
        }
    }
}

const SECTIONS: &[&str] = &[
    "domain",
    "wavenumber",
    "basis",
    "solve",
    "field",
    "output",
    "sweep",
    "convergence",
    "multicenter",
];

fn parse_point(s: &str) -> Option<Point> {
    let s = s.trim().trim_start_matches('(').trim_end_matches(')');
    let (a, b) = s.split_once(',')?;
    let (x, y) = (a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?);
    (x.is_finite() && y.is_finite()).then_some(Point::new(x, y))
}

fn parse_points(s: &str) -> Option<Vec<Point>> {
    s.split(';').map(parse_point).collect()
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

/// `a:b:step` (inclusive) or a comma list.
fn parse_range(s: &str) -> Option<Vec<usize>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (a, b, st): (usize, usize, usize) =
            (parts[0].trim().parse().ok()?, parts[1].trim().parse().ok()?, parts[2].trim().parse().ok()?);
        if st == 0 || a > b {
            return None;
        }
        return Some((a..=b).step_by(st).collect());
    }
    parse_list(s)
}

fn parse_geometries(s: &str, n: usize) -> Option<Vec<(String, usize)>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',')
        .map(|g| {
            let g = g.trim();
            match g.split_once(':') {
                Some((name, count)) => Some((name.trim().to_ascii_lowercase(), count.trim().parse().ok()?)),
                None => Some((g.to_ascii_lowercase(), n)),
            }
        })
        .collect()
}

/// `M_h` for `M` degrees of freedom, rounded down so that `2M_h + 1 ≤ M`.
pub fn half_order_for(m: usize) -> usize {
    m.saturating_sub(1) / 2
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: Domain::Kite,
            sampling: SamplingRule::UniformParameter,
            k_r: 184.79,
            damping: Damping::Ratio(0.0),
            n: 408,
            basis: BasisConfig::Bessel { center: Point::ORIGIN, half_order: half_order_for(408), rho: None },
            alpha: AlphaConfig::Gcv { lo: DEFAULT_GRID_LO, hi: DEFAULT_GRID_HI, count: DEFAULT_GRID_SIZE },
            field: FieldConfig::PlaneWave { direction: 0.0 },
            grid_h: 0.02,
            seed: 0,
            sweep: SweepConfig {
                ratios: vec![0.0, 0.01, 0.05, 0.2],
                geometries: vec![("kite".into(), 408), ("flower".into(), 288)],
                fs_radius: 1.05,
            },
            convergence: ConvergenceConfig { m_values: (180..=300).step_by(20).collect(), fs_radius: 1.05 },
            multicenter: MulticenterConfig {
                centers: vec![Point::new(-1.0, 0.0), Point::new(0.0, 1.0), Point::new(0.0, -1.0)],
                single_center: Point::new(-1.0, 0.0),
                m_total: 600,
                reference_m_total: 1200,
                tip_x: 0.0,
                back_x: -0.8,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse_in(&text, &path.display().to_string(), path.parent())
    }

    /// Parses config text; unset keys keep their defaults.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        Self::parse_in(text, origin, None)
    }

    /// Relative file paths are taken relative to `base`.
    fn parse_in(text: &str, origin: &str, base: Option<&Path>) -> Result<Self> {
        let mut raw = Raw::parse(text, origin)?;
        let mut c = ExperimentConfig::default();

        if let Some((kind, line)) = raw.word("domain", "kind") {
            c.domain = match kind.as_str() {
                "kite" => Domain::Kite,
                "flower" => Domain::Flower,
                "c_shape" => Domain::CShape { center_radius: 1.0, width: 0.4, gap_deg: C_SHAPE_GAP.to_degrees() },
                "disk" => Domain::Disk { center: Point::ORIGIN, radius: 1.0 },
                "polyline" => {
                    let (p, _) = raw
                        .get("domain", "file")
                        .ok_or_else(|| raw.fail(line, "polyline domain needs domain.file"))?;
                    let p = PathBuf::from(p);
                    let p = match base {
                        Some(dir) if p.is_relative() => dir.join(p),
                        _ => p,
                    };
                    Domain::Polyline { path: p }
                }
                other => return Err(raw.fail(line, format!("unknown domain kind `{other}`"))),
            };
        }
        match &mut c.domain {
            Domain::CShape { center_radius, width, gap_deg } => {
                *center_radius = raw.f64("domain", "center_radius")?.unwrap_or(*center_radius);
                *width = raw.f64("domain", "width")?.unwrap_or(*width);
                *gap_deg = raw.f64("domain", "gap_deg")?.unwrap_or(*gap_deg);
            }
            Domain::Disk { center, radius } => {
                *center = raw.point("domain", "center")?.unwrap_or(*center);
                *radius = raw.f64("domain", "radius")?.unwrap_or(*radius);
            }
            _ => {}
        }
        if let Some((s, line)) = raw.word("domain", "sampling") {
            c.sampling = match s.as_str() {
                "uniform_parameter" => SamplingRule::UniformParameter,
                "uniform_arc_length" => SamplingRule::UniformArcLength,
                _ => return Err(raw.fail(line, format!("unknown sampling rule `{s}`"))),
            };
        }

        c.k_r = raw.f64("wavenumber", "k_r")?.unwrap_or(c.k_r);
        let sigma = raw.f64("wavenumber", "sigma")?;
        let ratio = raw.f64("wavenumber", "damping_ratio")?;
        c.damping = match (sigma, ratio) {
            (Some(_), Some(_)) => {
                return Err(raw.fail(raw.line_of("wavenumber", "sigma"), "give sigma or damping_ratio, not both"))
            }
            (Some(s), None) => Damping::Sigma(s),
            (None, Some(r)) => Damping::Ratio(r),
            (None, None) => c.damping,
        };

        c.n = raw.usize("solve", "n")?.unwrap_or(c.n);
        let m = raw.usize("basis", "m")?;
        let mh = raw.usize("basis", "half_order")?;
        let kind = raw.word("basis", "kind");
        let half_order = |default: usize| mh.or(m.map(half_order_for)).unwrap_or(default);
        c.basis = match kind.as_ref().map(|(k, l)| (k.as_str(), *l)) {
            None | Some(("bessel", _)) => BasisConfig::Bessel {
                center: raw.point("basis", "center")?.unwrap_or(Point::ORIGIN),
                half_order: half_order(half_order_for(c.n)),
                rho: raw.f64("basis", "rho")?,
            },
            Some(("fs", _)) => BasisConfig::Fs {
                center: raw.point("basis", "center")?,
                radius: raw.f64("basis", "radius")?.unwrap_or(1.05),
                count: m,
            },
            Some(("multicenter", line)) => BasisConfig::MultiCenter {
                centers: raw
                    .parsed("basis", "centers", parse_points)?
                    .ok_or_else(|| raw.fail(line, "multicenter basis needs basis.centers"))?,
                half_order: half_order(99),
                rho: raw.f64("basis", "rho")?,
            },
            Some((other, line)) => return Err(raw.fail(line, format!("unknown basis kind `{other}`"))),
        };

        if let Some((a, line)) = raw.word("solve", "alpha") {
            c.alpha = match a.as_str() {
                "gcv" => AlphaConfig::Gcv { lo: DEFAULT_GRID_LO, hi: DEFAULT_GRID_HI, count: DEFAULT_GRID_SIZE },
                "fixed" => AlphaConfig::Fixed(
                    raw.f64("solve", "alpha_value")?
                        .ok_or_else(|| raw.fail(line, "fixed alpha needs solve.alpha_value"))?,
                ),
                "theoretical_bb" => AlphaConfig::TheoreticalBb {
                    d: raw.f64("solve", "d")?.ok_or_else(|| raw.fail(line, "theoretical_bb needs solve.d"))?,
                },
                "theoretical_fs" => AlphaConfig::TheoreticalFs,
                other => return Err(raw.fail(line, format!("unknown alpha policy `{other}`"))),
            };
        } else if let BasisConfig::Fs { .. } = c.basis {
            c.alpha = AlphaConfig::TheoreticalFs;
        }
        if let AlphaConfig::Gcv { lo, hi, count } = &mut c.alpha {
            for (key, slot) in [("gcv_lo", &mut *lo), ("gcv_hi", &mut *hi)] {
                if let Some(v) = raw.f64("solve", key)? {
                    *slot = v;
                }
            }
            if let Some(v) = raw.usize("solve", "gcv_count")? {
                *count = v;
            }
        }

        if let Some((f, line)) = raw.word("field", "kind") {
            c.field = match f.as_str() {
                "plane_wave" => FieldConfig::PlaneWave { direction: raw.f64("field", "direction")?.unwrap_or(0.0) },
                "dipole" => {
                    let y1 = raw.point("field", "y1")?;
                    let y2 = raw.point("field", "y2")?;
                    let sources = match (y1, y2) {
                        (Some(a), Some(b)) => Some((a, b)),
                        (None, None) => None,
                        _ => return Err(raw.fail(line, "dipole needs both field.y1 and field.y2")),
                    };
                    FieldConfig::Dipole { sources, offset: raw.f64("field", "offset")?.unwrap_or(DIPOLE_OFFSET) }
                }
                "pulse" => FieldConfig::Pulse,
                "constant" => FieldConfig::Constant {
                    re: raw.f64("field", "re")?.unwrap_or(1.0),
                    im: raw.f64("field", "im")?.unwrap_or(0.0),
                },
                "bessel_series" => FieldConfig::BesselSeries {
                    d: raw.f64("field", "d")?.ok_or_else(|| raw.fail(line, "bessel_series needs field.d"))?,
                    n_max: raw.usize("field", "n_max")?.unwrap_or(120),
                },
                other => return Err(raw.fail(line, format!("unknown field kind `{other}`"))),
            };
        }

        c.grid_h = raw.f64("output", "grid_h")?.unwrap_or(c.grid_h);
        c.seed = raw.parsed("output", "seed", |v| v.parse().ok())?.unwrap_or(c.seed);

        if let Some(r) = raw.parsed("sweep", "ratios", parse_list)? {
            c.sweep.ratios = r;
        }
        let n = c.n;
        if let Some(g) = raw.parsed("sweep", "geometries", |s| parse_geometries(s, n))? {
            c.sweep.geometries = g;
        }
        c.sweep.fs_radius = raw.f64("sweep", "fs_radius")?.unwrap_or(c.sweep.fs_radius);

        if let Some(m) = raw.parsed("convergence", "m_values", parse_range)? {
            c.convergence.m_values = m;
        }
        c.convergence.fs_radius = raw.f64("convergence", "fs_radius")?.unwrap_or(c.convergence.fs_radius);

        let mc = &mut c.multicenter;
        if let Some(p) = raw.parsed("multicenter", "centers", parse_points)? {
            mc.centers = p;
        }
        mc.single_center = raw.point("multicenter", "single_center")?.unwrap_or(mc.single_center);
        mc.m_total = raw.usize("multicenter", "m_total")?.unwrap_or(mc.m_total);
        mc.reference_m_total = raw.usize("multicenter", "reference_m_total")?.unwrap_or(mc.reference_m_total);
        mc.tip_x = raw.f64("multicenter", "tip_x")?.unwrap_or(mc.tip_x);
        mc.back_x = raw.f64("multicenter", "back_x")?.unwrap_or(mc.back_x);

        raw.finish()?;
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Invalid(m.into()));
        if !(self.k_r > 0.0) {
            return bad("wavenumber.k_r must be positive");
        }
        match self.damping {
            Damping::Sigma(s) | Damping::Ratio(s) if s < 0.0 => return bad("damping must be nonnegative"),
            _ => {}
        }
        if self.n == 0 {
            return bad("solve.n must be at least 1");
        }
        if !(self.grid_h > 0.0) {
            return bad("output.grid_h must be positive");
        }
        if let Domain::Polyline { path } = &self.domain {
            if !path.exists() {
                return Err(CliError::Invalid(format!("polyline file {} does not exist", path.display())));
            }
        }
        if let AlphaConfig::Gcv { lo, hi, count } = self.alpha {
            if !(lo > 0.0 && hi >= lo && count >= 1) {
                return bad("gcv grid needs 0 < gcv_lo <= gcv_hi and gcv_count >= 1");
            }
        }
        if matches!(self.alpha, AlphaConfig::TheoreticalBb { .. }) && !matches!(self.basis, BasisConfig::Bessel { .. }) {
            return bad("theoretical_bb needs a bessel basis");
        }
        if matches!(self.alpha, AlphaConfig::TheoreticalFs) && !matches!(self.basis, BasisConfig::Fs { .. }) {
            return bad("theoretical_fs needs an fs basis");
        }
        if self.sweep.ratios.iter().any(|r| !(*r >= 0.0)) {
            return bad("sweep.ratios must be nonnegative");
        }
        for (g, n) in &self.sweep.geometries {
            if !matches!(g.as_str(), "kite" | "flower") || *n == 0 {
                return Err(CliError::Invalid(format!("sweep geometry `{g}:{n}` unsupported (kite, flower)")));
            }
        }
        if self.convergence.m_values.contains(&0) {
            return bad("convergence.m_values must be positive");
        }
        let mc = &self.multicenter;
        if mc.centers.is_empty() || mc.m_total < mc.centers.len() || mc.reference_m_total < mc.centers.len() {
            return bad("multicenter needs centers and m_total >= number of centers");
        }
        Ok(())
    }

    /// Canonical text form; `parse(render())` gives back the same config.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let p = |p: Point| format!("{}, {}", p.x, p.y);
        let pts = |v: &[Point]| v.iter().map(|&q| p(q)).collect::<Vec<_>>().join("; ");
        let _ = writeln!(s, "[domain]");
        match &self.domain {
            Domain::Kite => _ = writeln!(s, "kind = kite"),
            Domain::Flower => _ = writeln!(s, "kind = flower"),
            Domain::CShape { center_radius, width, gap_deg } => {
                _ = writeln!(s, "kind = c_shape\ncenter_radius = {center_radius}\nwidth = {width}\ngap_deg = {gap_deg}")
            }
            Domain::Disk { center, radius } => _ = writeln!(s, "kind = disk\ncenter = {}\nradius = {radius}", p(*center)),
            Domain::Polyline { path } => _ = writeln!(s, "kind = polyline\nfile = {}", path.display()),
        }
        let rule = match self.sampling {
            SamplingRule::UniformParameter => "uniform_parameter",
            SamplingRule::UniformArcLength => "uniform_arc_length",
        };
        let _ = writeln!(s, "sampling = {rule}\n\n[wavenumber]\nk_r = {}", self.k_r);
        match self.damping {
            Damping::Sigma(x) => _ = writeln!(s, "sigma = {x}"),
            Damping::Ratio(x) => _ = writeln!(s, "damping_ratio = {x}"),
        }
        let _ = writeln!(s, "\n[basis]");
        match &self.basis {
            BasisConfig::Bessel { center, half_order, rho } => {
                _ = writeln!(s, "kind = bessel\ncenter = {}\nhalf_order = {half_order}", p(*center));
                if let Some(r) = rho {
                    _ = writeln!(s, "rho = {r}");
                }
            }
            BasisConfig::Fs { center, radius, count } => {
                _ = writeln!(s, "kind = fs\nradius = {radius}");
                if let Some(c) = center {
                    _ = writeln!(s, "center = {}", p(*c));
                }
                if let Some(m) = count {
                    _ = writeln!(s, "m = {m}");
                }
            }
            BasisConfig::MultiCenter { centers, half_order, rho } => {
                _ = writeln!(s, "kind = multicenter\ncenters = {}\nhalf_order = {half_order}", pts(centers));
                if let Some(r) = rho {
                    _ = writeln!(s, "rho = {r}");
                }
            }
        }
        let _ = writeln!(s, "\n[solve]\nn = {}", self.n);
        match &self.alpha {
            AlphaConfig::Gcv { lo, hi, count } => {
                _ = writeln!(s, "alpha = gcv\ngcv_lo = {lo:e}\ngcv_hi = {hi:e}\ngcv_count = {count}")
            }
            AlphaConfig::Fixed(a) => _ = writeln!(s, "alpha = fixed\nalpha_value = {a:e}"),
            AlphaConfig::TheoreticalBb { d } => _ = writeln!(s, "alpha = theoretical_bb\nd = {d}"),
            AlphaConfig::TheoreticalFs => _ = writeln!(s, "alpha = theoretical_fs"),
        }
        let _ = writeln!(s, "\n[field]");
        match &self.field {
            FieldConfig::PlaneWave { direction } => _ = writeln!(s, "kind = plane_wave\ndirection = {direction}"),
            FieldConfig::Dipole { sources, offset } => {
                _ = writeln!(s, "kind = dipole\noffset = {offset}");
                if let Some((a, b)) = sources {
                    _ = writeln!(s, "y1 = {}\ny2 = {}", p(*a), p(*b));
                }
            }
            FieldConfig::Pulse => _ = writeln!(s, "kind = pulse"),
            FieldConfig::Constant { re, im } => _ = writeln!(s, "kind = constant\nre = {re}\nim = {im}"),
            FieldConfig::BesselSeries { d, n_max } => _ = writeln!(s, "kind = bessel_series\nd = {d}\nn_max = {n_max}"),
        }
        let _ = writeln!(s, "\n[output]\ngrid_h = {}\nseed = {}", self.grid_h, self.seed);
        let ratios: Vec<String> = self.sweep.ratios.iter().map(|r| r.to_string()).collect();
        let geoms: Vec<String> = self.sweep.geometries.iter().map(|(g, n)| format!("{g}:{n}")).collect();
        let _ = writeln!(
            s,
            "\n[sweep]\nratios = {}\ngeometries = {}\nfs_radius = {}",
            ratios.join(", "),
            geoms.join(", "),
            self.sweep.fs_radius
        );
        let ms: Vec<String> = self.convergence.m_values.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(s, "\n[convergence]\nm_values = {}\nfs_radius = {}", ms.join(", "), self.convergence.fs_radius);
        let mc = &self.multicenter;
        let _ = writeln!(
            s,
            "\n[multicenter]\ncenters = {}\nsingle_center = {}\nm_total = {}\nreference_m_total = {}\ntip_x = {}\nback_x = {}",
            pts(&mc.centers),
            p(mc.single_center),
            mc.m_total,
            mc.reference_m_total,
            mc.tip_x,
            mc.back_x
        );
        s
    }

    pub fn curve_kind(&self) -> Result<CurveKind> {
        Ok(match &self.domain {
            Domain::Kite => CurveKind::Kite,
            Domain::Flower => CurveKind::Flower,
            Domain::CShape { center_radius, width, gap_deg } => CurveKind::CShape {
                center_radius: *center_radius,
                width: *width,
                gap: gap_deg.to_radians(),
            },
            Domain::Disk { center, radius } => CurveKind::Disk { center: *center, radius: *radius },
            Domain::Polyline { path } => CurveKind::Polyline(crate::io::read_polyline(path)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&c.render(), "x").unwrap(), c);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let text = "[domain]\nkind = kite\n\n[solve]\nn = forty\n";
        match ExperimentConfig::parse(text, "cfg") {
            Err(CliError::Config { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        match ExperimentConfig::parse("[basis]\nkind = bessel\nfoo = 1\n", "cfg") {
            Err(CliError::Config { line, msg, .. }) => assert!(line == 3 && msg.contains("foo")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn m_rounds_down_to_an_odd_count() {
        let c = ExperimentConfig::parse("[basis]\nm = 408\n", "x").unwrap();
        assert_eq!(c.basis, BasisConfig::Bessel { center: Point::ORIGIN, half_order: 203, rho: None });
    }

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_range("180:300:20").unwrap().len(), 7);
        assert_eq!(parse_range("5, 7").unwrap(), vec![5, 7]);
        assert_eq!(parse_range("").unwrap(), Vec::<usize>::new());
        assert!(parse_range("3:1:1").is_none());
    }

    #[test]
    fn fs_defaults_to_its_own_rule() {
        let c = ExperimentConfig::parse("[basis]\nkind = fs\nradius = 1.5\n", "x").unwrap();
        assert_eq!(c.alpha, AlphaConfig::TheoreticalFs);
    }
}
