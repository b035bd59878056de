//! Parametric boundaries, collocation sampling, interior grids and the
//! point-in-domain test.
//!
//! Every curve is parametrized over `t ∈ [0, 2π)` with counter-clockwise
//! orientation, so the outward normal is the tangent rotated clockwise.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::ops::{Add, Mul, Sub};

use crate::error::{invalid, Error, Result};

/// Samples used for the winding-number polygon and for arc length.
pub const INSIDE_SAMPLES: usize = 4096;
/// Samples used for the self-intersection test.
pub const SIMPLICITY_SAMPLES: usize = 2048;
/// Points closer than this to the boundary count as outside.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// `(r, θ)` of `self` about `center`.
    pub fn polar_about(self, center: Point) -> (f64, f64) {
        let d = self - center;
        (d.norm(), d.y.atan2(d.x))
    }

    fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, p: Point) -> Point {
        Point::new(self * p.x, self * p.y)
    }
}

/// Default C-shape gap: 100° centered on the +x axis.
pub const C_SHAPE_GAP: f64 = 100.0 * PI / 180.0;

#[derive(Clone, Debug, PartialEq)]
pub enum CurveKind {
    Kite,
    Flower,
    /// Annular sector about the origin with straight radial end caps.
    CShape {
        center_radius: f64,
        width: f64,
        gap: f64,
    },
    Disk { center: Point, radius: f64 },
    /// Closed polygon, parametrized proportionally to arc length.
    Polyline(Vec<Point>),
}

/// Piece of a piecewise description traversed at unit speed.
#[derive(Clone, Copy, Debug)]
enum Piece {
    Arc { radius: f64, start: f64, sweep: f64 },
    Segment { from: Point, to: Point },
}

impl Piece {
    fn length(&self) -> f64 {
        match *self {
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
            Piece::Segment { from, to } => from.dist(to),
        }
    }

    /// Point and unit tangent at fraction `u ∈ [0, 1]`.
    fn eval(&self, u: f64) -> (Point, Point) {
        match *self {
            Piece::Arc { radius, start, sweep } => {
                let a = start + sweep * u;
                let (s, c) = a.sin_cos();
                let sign = sweep.signum();
                (Point::new(radius * c, radius * s), Point::new(-sign * s, sign * c))
            }
            Piece::Segment { from, to } => {
                let d = to - from;
                (from + u * d, (1.0 / d.norm()) * d)
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Pieces {
    pieces: Vec<Piece>,
    /// Cumulative lengths, `ends[i]` is the arc length at the end of piece `i`.
    ends: Vec<f64>,
}

impl Pieces {
    fn new(pieces: Vec<Piece>) -> Self {
        let mut total = 0.0;
        let ends = pieces
            .iter()
            .map(|p| {
                total += p.length();
                total
            })
            .collect();
        Pieces { pieces, ends }
    }

    fn total(&self) -> f64 {
        *self.ends.last().unwrap_or(&0.0)
    }

    fn eval(&self, t: f64) -> (Point, Point) {
        let s = wrap(t) / TAU * self.total();
        let i = self.ends.partition_point(|&e| e <= s).min(self.pieces.len() - 1);
        let begin = if i == 0 { 0.0 } else { self.ends[i - 1] };
        let len = self.ends[i] - begin;
        let u = if len > 0.0 { ((s - begin) / len).clamp(0.0, 1.0) } else { 0.0 };
        let (p, tangent) = self.pieces[i].eval(u);
        (p, (self.total() / TAU) * tangent)
    }
}

fn wrap(t: f64) -> f64 {
    let r = t - TAU * (t / TAU).floor();
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A closed, simple, counter-clockwise boundary curve.
#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    kind: CurveKind,
    pieces: Option<Pieces>,
    polygon: Vec<Point>,
    bbox: (Point, Point),
}

/// Builds a curve and validates that it is simple.
pub fn make_curve(kind: CurveKind) -> Result<BoundaryCurve> {
    let pieces = match &kind {
        CurveKind::Kite | CurveKind::Flower => None,
        CurveKind::Disk { center, radius } => {
            if !(*radius > 0.0) || !center.x.is_finite() || !center.y.is_finite() {
                return Err(invalid("disk radius must be positive"));
            }
            None
        }
        CurveKind::CShape {
            center_radius,
            width,
            gap,
        } => {
            let (rc, w, gap) = (*center_radius, *width, *gap);
            if !(w > 0.0 && rc > w / 2.0) {
                return Err(invalid("C-shape needs center_radius > width/2 > 0"));
            }
            if !(gap > 0.0 && gap < PI) {
                return Err(invalid("C-shape gap angle must lie in (0, π)"));
            }
            let (inner, outer) = (rc - w / 2.0, rc + w / 2.0);
            let (a0, a1) = (gap / 2.0, TAU - gap / 2.0);
            let at = |r: f64, a: f64| Point::new(r * a.cos(), r * a.sin());
            Some(Pieces::new(alloc::vec![
                Piece::Arc { radius: outer, start: a0, sweep: a1 - a0 },
                Piece::Segment { from: at(outer, a1), to: at(inner, a1) },
                Piece::Arc { radius: inner, start: a1, sweep: a0 - a1 },
                Piece::Segment { from: at(inner, a0), to: at(outer, a0) },
            ]))
        }
        CurveKind::Polyline(vertices) => {
            if vertices.len() < 3 {
                return Err(invalid("polyline needs at least 3 vertices"));
            }
            if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(Error::NonFinite);
            }
            let n = vertices.len();
            let segments: Vec<Piece> = (0..n)
                .map(|i| Piece::Segment { from: vertices[i], to: vertices[(i + 1) % n] })
                .collect();
            if segments.iter().any(|s| s.length() == 0.0) {
                return Err(invalid("polyline has repeated consecutive vertices"));
            }
            if let Some((a, b)) = first_crossing(vertices) {
                return Err(Error::SelfIntersecting { first: a, second: b });
            }
            Some(Pieces::new(segments))
        }
    };

    let mut curve = BoundaryCurve {
        kind,
        pieces,
        polygon: Vec::new(),
        bbox: (Point::ORIGIN, Point::ORIGIN),
    };
    if let CurveKind::Polyline(vertices) = &curve.kind {
        if signed_area(vertices) < 0.0 {
            let mut rev = vertices.clone();
            rev.reverse();
            return make_curve(CurveKind::Polyline(rev));
        }
        curve.polygon = vertices.clone();
    } else {
        let simple: Vec<Point> = (0..SIMPLICITY_SAMPLES)
            .map(|j| curve.point(TAU * j as f64 / SIMPLICITY_SAMPLES as f64))
            .collect();
        if let Some((a, b)) = first_crossing(&simple) {
            return Err(Error::SelfIntersecting { first: a, second: b });
        }
        curve.polygon = (0..INSIDE_SAMPLES)
            .map(|j| curve.point(TAU * j as f64 / INSIDE_SAMPLES as f64))
            .collect();
    }
    let mut lo = curve.polygon[0];
    let mut hi = lo;
    for p in &curve.polygon {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    curve.bbox = (lo, hi);
    Ok(curve)
}

fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>()
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// First pair of non-adjacent edges of the closed polygon that cross.
fn first_crossing(poly: &[Point]) -> Option<(usize, usize)> {
    let n = poly.len();
    let edge = |i: usize| (poly[i], poly[(i + 1) % n]);
    let boxes: Vec<(Point, Point)> = (0..n)
        .map(|i| {
            let (a, b) = edge(i);
            (Point::new(a.x.min(b.x), a.y.min(b.y)), Point::new(a.x.max(b.x), a.y.max(b.y)))
        })
        .collect();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (bi, bj) = (boxes[i], boxes[j]);
            if bi.1.x < bj.0.x || bj.1.x < bi.0.x || bi.1.y < bj.0.y || bj.1.y < bi.0.y {
                continue;
            }
            let (a, b) = edge(i);
            let (c, d) = edge(j);
            if segments_cross(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

impl BoundaryCurve {
    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    /// Short tag for reports.
    pub fn name(&self) -> &'static str {
        match self.kind {
            CurveKind::Kite => "kite",
            CurveKind::Flower => "flower",
            CurveKind::CShape { .. } => "c_shape",
            CurveKind::Disk { .. } => "disk",
            CurveKind::Polyline(_) => "polyline",
        }
    }

    pub fn point(&self, t: f64) -> Point {
        self.point_and_velocity(t).0
    }

    /// Derivative of the parametrization with respect to `t`.
    pub fn velocity(&self, t: f64) -> Point {
        self.point_and_velocity(t).1
    }

    fn point_and_velocity(&self, t: f64) -> (Point, Point) {
        if let Some(p) = &self.pieces {
            return p.eval(t);
        }
        let (s, c) = t.sin_cos();
        match self.kind {
            CurveKind::Kite => (
                Point::new(0.5 * c + 0.3 * (2.0 * t).cos() - 0.2, 0.6 * s),
                Point::new(-0.5 * s - 0.6 * (2.0 * t).sin(), 0.6 * c),
            ),
            CurveKind::Flower => {
                let r = 0.5 - 0.1 * (6.0 * t).cos();
                let dr = 0.6 * (6.0 * t).sin();
                (
                    Point::new(r * c, r * s),
                    Point::new(dr * c - r * s, dr * s + r * c),
                )
            }
            CurveKind::Disk { center, radius } => (
                center + Point::new(radius * c, radius * s),
                Point::new(-radius * s, radius * c),
            ),
            _ => unreachable!("piecewise curves carry pieces"),
        }
    }

    /// Outward unit normal at parameter `t`.
    pub fn outward_normal(&self, t: f64) -> Point {
        let v = self.velocity(t);
        (1.0 / v.norm()) * Point::new(v.y, -v.x)
    }

    /// Polygonal approximation used by [`BoundaryCurve::is_inside`].
    pub fn polygon(&self) -> &[Point] {
        &self.polygon
    }

    /// Perimeter of the polygonal approximation.
    pub fn length(&self) -> f64 {
        let n = self.polygon.len();
        (0..n).map(|i| self.polygon[i].dist(self.polygon[(i + 1) % n])).sum()
    }

    /// Largest distance from `center` to the boundary.
    pub fn max_distance_from(&self, center: Point) -> f64 {
        self.polygon.iter().map(|p| p.dist(center)).fold(0.0, f64::max)
    }

    /// Winding-number test; points within [`BOUNDARY_MARGIN`] of the polygon are outside.
    pub fn is_inside(&self, p: Point) -> bool {
        let (lo, hi) = self.bbox;
        if p.x <= lo.x || p.x >= hi.x || p.y <= lo.y || p.y >= hi.y {
            return false;
        }
        let n = self.polygon.len();
        let mut winding = 0i64;
        let mut min_dist2 = f64::INFINITY;
        for i in 0..n {
            let a = self.polygon[i];
            let b = self.polygon[(i + 1) % n];
            let ab = b - a;
            let u = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
            let q = a + u * ab;
            min_dist2 = min_dist2.min((p - q).dot(p - q));
            if a.y <= p.y {
                if b.y > p.y && ab.cross(p - a) > 0.0 {
                    winding += 1;
                }
            } else if b.y <= p.y && ab.cross(p - a) < 0.0 {
                winding -= 1;
            }
        }
        winding != 0 && min_dist2.sqrt() >= BOUNDARY_MARGIN
    }
}

/// How collocation parameters are spaced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SamplingRule {
    #[default]
    UniformParameter,
    UniformArcLength,
}

#[derive(Clone, Debug)]
pub struct CollocationSet {
    pub points: Vec<Point>,
    pub params: Vec<f64>,
}

impl CollocationSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Point {
        let n = self.points.len() as f64;
        let s = self.points.iter().fold(Point::ORIGIN, |acc, &p| acc + p);
        (1.0 / n) * s
    }

    pub fn max_distance_from(&self, center: Point) -> f64 {
        self.points.iter().map(|p| p.dist(center)).fold(0.0, f64::max)
    }
}

pub fn sample_collocation(curve: &BoundaryCurve, n: usize, rule: SamplingRule) -> Result<CollocationSet> {
    if n == 0 {
        return Err(invalid("collocation count must be at least 1"));
    }
    let params: Vec<f64> = match rule {
        SamplingRule::UniformParameter => (0..n).map(|j| TAU * j as f64 / n as f64).collect(),
        SamplingRule::UniformArcLength => arc_length_params(curve, n),
    };
    let points = params.iter().map(|&t| curve.point(t)).collect();
    Ok(CollocationSet { points, params })
}

fn arc_length_params(curve: &BoundaryCurve, n: usize) -> Vec<f64> {
    const FINE: usize = 8 * INSIDE_SAMPLES;
    let ts: Vec<f64> = (0..=FINE).map(|j| TAU * j as f64 / FINE as f64).collect();
    let mut cum = Vec::with_capacity(FINE + 1);
    cum.push(0.0);
    for j in 0..FINE {
        let last = cum[j];
        cum.push(last + curve.point(ts[j]).dist(curve.point(ts[j + 1])));
    }
    let total = cum[FINE];
    (0..n)
        .map(|j| {
            let s = total * j as f64 / n as f64;
            let i = cum.partition_point(|&c| c <= s).clamp(1, FINE);
            let (c0, c1) = (cum[i - 1], cum[i]);
            let u = if c1 > c0 { (s - c0) / (c1 - c0) } else { 0.0 };
            ts[i - 1] + u * (ts[i] - ts[i - 1])
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct InteriorGrid {
    pub points: Vec<Point>,
    pub spacing: f64,
}

/// Origin-anchored lattice `(ih, jh)` clipped to the strict interior.
pub fn interior_grid(curve: &BoundaryCurve, h: f64) -> Result<InteriorGrid> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid("grid spacing must be positive"));
    }
    let (lo, hi) = curve.bbox;
    let (i0, i1) = ((lo.x / h).floor() as i64, (hi.x / h).ceil() as i64);
    let (j0, j1) = ((lo.y / h).floor() as i64, (hi.y / h).ceil() as i64);
    let mut points = Vec::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let p = Point::new(i as f64 * h, j as f64 * h);
            if curve.is_inside(p) {
                points.push(p);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(InteriorGrid { points, spacing: h })
}
