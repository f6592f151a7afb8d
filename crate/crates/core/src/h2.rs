//! Upper half-plane primitives: points, geodesics, isometries, strips.
//!
//! Every strip computation goes through a *normalized frame*: an isometry that
//! sends the strip axis to the imaginary axis (oriented 0 → ∞) and the strip
//! center to `i`. In that frame the bounding geodesics are the half-circles
//! `|z| = e^{∓ε/2}`, the equidistant leaves are rays from the origin, and the
//! orthogonal leaves are half-circles centered at 0.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for metric comparisons.
pub const TOL: f64 = 1e-9;
/// Tolerance for incidence (point on geodesic, endpoint agreement).
pub const INCIDENCE_TOL: f64 = 1e-8;

/// A point of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) || y <= 0.0 {
            return Err(Error::InvalidPoint { x, y });
        }
        Ok(Point { x, y })
    }

    /// The point `i`.
    pub const I: Point = Point { x: 0.0, y: 1.0 };

    #[cfg(test)]
    pub(crate) fn from_polar(r: f64, theta: f64) -> Point {
        Point {
            x: r * theta.cos(),
            y: r * theta.sin(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn abs(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Argument in (0, π).
    pub fn arg(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub(crate) fn scaled(&self, s: f64) -> Point {
        Point {
            x: self.x * s,
            y: self.y * s,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Hyperbolic distance. Uses `sinh(d/2) = |p - q| / (2 sqrt(y_p y_q))`, which
/// stays accurate for nearby points.
pub fn dist(p: Point, q: Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let euclid = dx.hypot(dy);
    2.0 * (euclid / (2.0 * (p.y * q.y).sqrt())).asinh()
}

/// A point of the ideal boundary `R ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IdealPoint {
    Finite(f64),
    Infinity,
}

impl IdealPoint {
    /// Position on the circle `R ∪ {∞}` as an angle in (-π, π]; ∞ maps to π.
    fn circle_angle(&self) -> f64 {
        match *self {
            IdealPoint::Finite(x) => 2.0 * x.atan(),
            IdealPoint::Infinity => PI,
        }
    }

    /// Chordal agreement on the boundary circle.
    pub fn approx_eq(&self, other: &IdealPoint, tol: f64) -> bool {
        let mut d = (self.circle_angle() - other.circle_angle()).abs();
        if d > PI {
            d = 2.0 * PI - d;
        }
        d <= tol
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            IdealPoint::Finite(x) => Some(x),
            IdealPoint::Infinity => None,
        }
    }

    /// `|x|`, with ∞ for the point at infinity.
    fn modulus(&self) -> f64 {
        match *self {
            IdealPoint::Finite(x) => x.abs(),
            IdealPoint::Infinity => f64::INFINITY,
        }
    }
}

/// An oriented geodesic line, stored by its ideal endpoints (from `u` to `v`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub u: IdealPoint,
    pub v: IdealPoint,
}

/// Euclidean shape of a geodesic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeodesicShape {
    Vertical { x: f64 },
    HalfCircle { center: f64, radius: f64 },
}

impl Geodesic {
    pub fn new(u: IdealPoint, v: IdealPoint) -> Result<Self> {
        if u.approx_eq(&v, 1e-15) {
            return Err(Error::DegenerateGeodesic);
        }
        if let IdealPoint::Finite(x) = u {
            if !x.is_finite() {
                return Err(Error::DegenerateGeodesic);
            }
        }
        if let IdealPoint::Finite(x) = v {
            if !x.is_finite() {
                return Err(Error::DegenerateGeodesic);
            }
        }
        Ok(Geodesic { u, v })
    }

    pub fn from_endpoints(u: f64, v: f64) -> Result<Self> {
        Geodesic::new(IdealPoint::Finite(u), IdealPoint::Finite(v))
    }

    /// The imaginary axis, oriented upward.
    pub const IMAGINARY_AXIS: Geodesic = Geodesic {
        u: IdealPoint::Finite(0.0),
        v: IdealPoint::Infinity,
    };

    /// Half-circle `|z| = r`, oriented from `-r` to `r`.
    pub fn circle(r: f64) -> Geodesic {
        Geodesic {
            u: IdealPoint::Finite(-r),
            v: IdealPoint::Finite(r),
        }
    }

    /// The geodesic through `p` and `q`, oriented from `p` toward `q`.
    pub fn through(p: Point, q: Point) -> Result<Self> {
        if dist(p, q) < 1e-15 {
            return Err(Error::DegenerateGeodesic);
        }
        let dx = q.x - p.x;
        let scale = 1.0 + p.abs().max(q.abs());
        if dx.abs() <= 1e-14 * scale {
            let x = 0.5 * (p.x + q.x);
            return Ok(if q.y > p.y {
                Geodesic {
                    u: IdealPoint::Finite(x),
                    v: IdealPoint::Infinity,
                }
            } else {
                Geodesic {
                    u: IdealPoint::Infinity,
                    v: IdealPoint::Finite(x),
                }
            });
        }
        let c = (q.norm_sqr() - p.norm_sqr()) / (2.0 * dx);
        let r = (p.x - c).hypot(p.y);
        let (lo, hi) = (c - r, c + r);
        if dx > 0.0 {
            Geodesic::from_endpoints(lo, hi)
        } else {
            Geodesic::from_endpoints(hi, lo)
        }
    }

    pub fn reversed(&self) -> Geodesic {
        Geodesic { u: self.v, v: self.u }
    }

    pub fn shape(&self) -> GeodesicShape {
        match (self.u, self.v) {
            (IdealPoint::Finite(x), IdealPoint::Infinity) | (IdealPoint::Infinity, IdealPoint::Finite(x)) => {
                GeodesicShape::Vertical { x }
            }
            (IdealPoint::Finite(a), IdealPoint::Finite(b)) => GeodesicShape::HalfCircle {
                center: 0.5 * (a + b),
                radius: 0.5 * (a - b).abs(),
            },
            (IdealPoint::Infinity, IdealPoint::Infinity) => unreachable!("degenerate geodesic"),
        }
    }

    /// Orientation-preserving isometry sending `u → 0` and `v → ∞`.
    pub(crate) fn to_axis(self) -> Isometry {
        match (self.u, self.v) {
            (IdealPoint::Finite(u), IdealPoint::Infinity) => Isometry::raw(1.0, -u, 0.0, 1.0),
            (IdealPoint::Infinity, IdealPoint::Finite(v)) => Isometry::raw(0.0, -1.0, 1.0, -v),
            (IdealPoint::Finite(u), IdealPoint::Finite(v)) => {
                // z ↦ (z - u)/(z - v) has determinant u - v.
                let det = u - v;
                if det > 0.0 {
                    let s = det.sqrt().recip();
                    Isometry::raw(s, -u * s, s, -v * s)
                } else {
                    let s = (-det).sqrt().recip();
                    Isometry::raw(-s, u * s, s, -v * s)
                }
            }
            (IdealPoint::Infinity, IdealPoint::Infinity) => unreachable!("degenerate geodesic"),
        }
    }

    /// Signed distance from `p`: positive on the left of the oriented line.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let z = self.to_axis().apply(p);
        // In the axis frame the left side is x < 0.
        (-z.x / z.y).asinh()
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        self.signed_distance(p).abs()
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.distance_to(p) <= tol
    }

    /// Same unoriented line, endpoints compared within `tol`.
    pub fn same_line(&self, other: &Geodesic, tol: f64) -> bool {
        (self.u.approx_eq(&other.u, tol) && self.v.approx_eq(&other.v, tol))
            || (self.u.approx_eq(&other.v, tol) && self.v.approx_eq(&other.u, tol))
    }

    /// Nearest point of the line to `p`.
    pub fn project(&self, p: Point) -> Point {
        let n = self.to_axis();
        let z = n.apply(p);
        n.inverse().apply(Point { x: 0.0, y: z.abs() })
    }

    /// Transverse intersection point, if any.
    pub fn intersection(&self, other: &Geodesic) -> Option<Point> {
        let n = self.to_axis();
        let g = n.apply_geodesic(other);
        let (s, t) = (g.u.finite()?, g.v.finite()?);
        if s * t >= 0.0 {
            return None;
        }
        Some(n.inverse().apply(Point {
            x: 0.0,
            y: (-s * t).sqrt(),
        }))
    }
}

/// A geodesic segment from `a` to `b` on `carrier`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub carrier: Geodesic,
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        let carrier = Geodesic::through(a, b)?;
        Ok(Segment { carrier, a, b })
    }

    pub fn length(&self) -> f64 {
        dist(self.a, self.b)
    }

    pub fn midpoint(&self) -> Point {
        self.point_at(0.5)
    }

    /// Point at fraction `s ∈ [0, 1]` of the arclength from `a`.
    pub fn point_at(&self, s: f64) -> Point {
        let n = frame(&self.carrier, self.a);
        let len = self.length();
        n.inverse().apply(Point {
            x: 0.0,
            y: (s * len).exp(),
        })
    }
}

/// Orientation-preserving isometry `z ↦ (az + b)/(cz + d)` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Trace classification of an isometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsometryKind {
    Hyperbolic,
    Parabolic,
    Elliptic,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Checked constructor: requires `|ad - bc - 1| ≤ 1e-12`.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det - 1.0).abs().le(&1e-12) {
            return Err(Error::InvalidIsometry { det });
        }
        Ok(Isometry { a, b, c, d })
    }

    /// Rescales a positive-determinant matrix to determinant 1.
    pub fn normalized(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0 && det.is_finite()) {
            return Err(Error::InvalidIsometry { det });
        }
        let s = det.sqrt().recip();
        Ok(Isometry::raw(a * s, b * s, c * s, d * s))
    }

    pub(crate) const fn raw(a: f64, b: f64, c: f64, d: f64) -> Self {
        Isometry { a, b, c, d }
    }

    pub fn diagonal(lambda: f64) -> Self {
        Isometry::raw(lambda, 0.0, 0.0, lambda.recip())
    }

    /// Elliptic rotation fixing `i`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Isometry::raw(c, s, -s, c)
    }

    /// Affine map sending `i` to `p`.
    pub fn affine_to(p: Point) -> Self {
        let r = p.y.sqrt();
        Isometry::raw(r, p.x / r, 0.0, r.recip())
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Isometry::raw(self.d, -self.b, -self.c, self.a)
    }

    pub fn kind(&self) -> IsometryKind {
        let t = self.trace().abs();
        if t > 2.0 + TOL {
            IsometryKind::Hyperbolic
        } else if t < 2.0 - TOL {
            IsometryKind::Elliptic
        } else {
            IsometryKind::Parabolic
        }
    }

    /// `2 arccosh(|tr|/2)`; zero for non-hyperbolic elements.
    pub fn translation_length(&self) -> f64 {
        let t = 0.5 * self.trace().abs();
        if t <= 1.0 {
            0.0
        } else {
            2.0 * t.acosh()
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let den_x = self.c * p.x + self.d;
        let den_y = self.c * p.y;
        let den = den_x * den_x + den_y * den_y;
        let num_x = self.a * p.x + self.b;
        let num_y = self.a * p.y;
        Point {
            x: (num_x * den_x + num_y * den_y) / den,
            y: p.y / den,
        }
    }

    pub fn apply_ideal(&self, z: IdealPoint) -> IdealPoint {
        match z {
            IdealPoint::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite((self.a * x + self.b) / den)
                }
            }
            IdealPoint::Infinity => {
                if self.c == 0.0 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Finite(self.a / self.c)
                }
            }
        }
    }

    pub fn apply_geodesic(&self, g: &Geodesic) -> Geodesic {
        Geodesic {
            u: self.apply_ideal(g.u),
            v: self.apply_ideal(g.v),
        }
    }

    pub fn apply_segment(&self, s: &Segment) -> Segment {
        Segment {
            carrier: self.apply_geodesic(&s.carrier),
            a: self.apply(s.a),
            b: self.apply(s.b),
        }
    }

    /// `self ∘ other ∘ self⁻¹`.
    pub fn conjugate(&self, other: &Isometry) -> Isometry {
        *self * *other * self.inverse()
    }

    /// Entrywise agreement up to the global sign.
    pub fn approx_eq(&self, other: &Isometry, tol: f64) -> bool {
        let close = |s: f64| {
            (self.a - s * other.a).abs() <= tol
                && (self.b - s * other.b).abs() <= tol
                && (self.c - s * other.c).abs() <= tol
                && (self.d - s * other.d).abs() <= tol
        };
        close(1.0) || close(-1.0)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }
}

impl Mul for Isometry {
    type Output = Isometry;

    fn mul(self, o: Isometry) -> Isometry {
        Isometry::raw(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// Invariant axis (oriented from repelling to attracting fixed point) and
/// translation length of a hyperbolic isometry.
pub fn axis_of(m: &Isometry) -> Result<(Geodesic, f64)> {
    let tr = m.trace();
    if tr.abs() <= 2.0 + TOL {
        return Err(Error::NotHyperbolic { trace: tr });
    }
    let len = m.translation_length();
    let scale = m.max_abs_entry();
    // Fixed points solve c z² + (d - a) z - b = 0.
    let (qa, qb, qc) = (m.c, m.d - m.a, -m.b);
    let disc = (tr * tr - 4.0).sqrt();
    let fixed: [IdealPoint; 2] = if qa.abs() <= 1e-15 * scale {
        // Upper triangular: ∞ and b/(d - a).
        [IdealPoint::Infinity, IdealPoint::Finite(m.b / (m.d - m.a))]
    } else {
        let sgn = if qb >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (qb + sgn * disc);
        let r1 = q / qa;
        let r2 = if q != 0.0 { qc / q } else { -r1 };
        [IdealPoint::Finite(r1), IdealPoint::Finite(r2)]
    };
    // Attracting fixed point z has |cz + d| > 1 (derivative 1/(cz+d)² < 1).
    let attracting = |z: IdealPoint| match z {
        IdealPoint::Finite(x) => (m.c * x + m.d).abs() > 1.0,
        IdealPoint::Infinity => m.a.abs() > m.d.abs(),
    };
    let (u, v) = if attracting(fixed[1]) {
        (fixed[0], fixed[1])
    } else {
        (fixed[1], fixed[0])
    };
    Ok((Geodesic::new(u, v)?, len))
}

/// Normalized frame: isometry sending `g` to the upward imaginary axis and
/// `p` (assumed on `g`) to `i`.
pub fn frame(g: &Geodesic, p: Point) -> Isometry {
    let n = g.to_axis();
    let r = n.apply(p).abs();
    Isometry::diagonal(r.sqrt().recip()) * n
}

/// Translation of length `t` along `l`, in the direction `u → v` for `t > 0`.
pub fn translation_along(l: &Geodesic, t: f64) -> Isometry {
    if t == 0.0 {
        return Isometry::IDENTITY;
    }
    let n = l.to_axis();
    n.inverse() * Isometry::diagonal((0.5 * t).exp()) * n
}

/// Unique common perpendicular of two hyperparallel geodesics, from `g1` to `g2`.
pub fn common_perpendicular(g1: &Geodesic, g2: &Geodesic) -> Result<Segment> {
    let n = g1.to_axis();
    let h = n.apply_geodesic(g2);
    let (s, t) = match (h.u.finite(), h.v.finite()) {
        (Some(s), Some(t)) => (s, t),
        _ => return Err(Error::NotHyperparallel),
    };
    if s * t <= 0.0 {
        return Err(Error::NotHyperparallel);
    }
    let r = (s * t).sqrt().copysign(s);
    let c = 0.5 * (s + t);
    let x = s * t / c;
    let y2 = s * t - x * x;
    if y2 <= 0.0 {
        return Err(Error::NotHyperparallel);
    }
    let a = Point { x: 0.0, y: r.abs() };
    let b = Point { x, y: y2.sqrt() };
    if dist(a, b) < TOL {
        return Err(Error::NotHyperparallel);
    }
    let ninv = n.inverse();
    Segment::new(ninv.apply(a), ninv.apply(b))
}

/// Projection onto `g0` along the curves equidistant from `l`.
///
/// `g0` must cross `l` perpendicularly. In the frame where `l` is the imaginary
/// axis and `g0` the unit half-circle the map is `z ↦ z/|z|`.
pub fn equidistant_project(l: &Geodesic, g0: &Geodesic, p: Point) -> Result<Point> {
    let n = perpendicular_frame(l, g0)?;
    let z = n.apply(p);
    Ok(n.inverse().apply(z.scaled(z.abs().recip())))
}

/// Whether `p` and `q` lie on one geodesic perpendicular to `l`: the
/// equality case of the equidistant projection.
pub fn on_common_leaf(l: &Geodesic, p: Point, q: Point, tol: f64) -> bool {
    dist(l.project(p), l.project(q)) <= tol
}

/// Frame with `l` as the imaginary axis and `g0` as the unit half-circle.
pub fn perpendicular_frame(l: &Geodesic, g0: &Geodesic) -> Result<Isometry> {
    let cross = l.intersection(g0).ok_or(Error::NotPerpendicular)?;
    let n = frame(l, cross);
    let g = n.apply_geodesic(g0);
    let ok = match (g.u.finite(), g.v.finite()) {
        (Some(s), Some(t)) => (s + t).abs() <= INCIDENCE_TOL && ((s * t) + 1.0).abs() <= INCIDENCE_TOL,
        _ => false,
    };
    if !ok {
        return Err(Error::NotPerpendicular);
    }
    Ok(n)
}

/// Which side of a strip a point lies on, in the strip's normalized frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `|z| < e^{-ε/2}`: beyond the first bounding geodesic.
    Near,
    /// Within tolerance of a bounding geodesic.
    Boundary,
    /// Strictly between the bounding geodesics.
    Inside,
    /// `|z| > e^{ε/2}`.
    Far,
}

/// Relation of a segment or geodesic to a strip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crossing {
    Disjoint,
    /// Meets both open complementary sides of the strip.
    Crosses,
    /// Touches a bounding geodesic within tolerance without crossing.
    Tangent,
    /// Enters the strip but does not cross it (ends inside, or lies inside).
    Partial,
}

/// An ε-strip: the region between the two geodesics perpendicular to `axis`
/// at signed distances `∓ε/2` from `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    axis: Geodesic,
    center: Point,
    width: f64,
    #[serde(skip_serializing)]
    frame: Isometry,
}

impl Strip {
    pub fn new(axis: Geodesic, center: Point, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::NonPositiveWidth { eps: width });
        }
        if !axis.contains(center, INCIDENCE_TOL) {
            return Err(Error::OffAxis);
        }
        Ok(Strip {
            axis,
            center,
            width,
            frame: frame(&axis, center),
        })
    }

    /// The strip whose normalized frame is `frame`.
    pub(crate) fn from_frame(frame: Isometry, width: f64) -> Strip {
        let inv = frame.inverse();
        Strip {
            axis: inv.apply_geodesic(&Geodesic::IMAGINARY_AXIS),
            center: inv.apply(Point::I),
            width,
            frame,
        }
    }

    /// The strip `e^{-ε/2} ≤ |z| ≤ e^{ε/2}` around the imaginary axis.
    pub fn normalized(width: f64) -> Result<Self> {
        Strip::new(Geodesic::IMAGINARY_AXIS, Point::I, width)
    }

    pub fn axis(&self) -> &Geodesic {
        &self.axis
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Isometry into the normalized frame.
    pub fn frame(&self) -> &Isometry {
        &self.frame
    }

    /// The bounding geodesics `(h1, h2)`; `h1` is on the `u` side of the axis.
    pub fn bounding(&self) -> (Geodesic, Geodesic) {
        let inv = self.frame.inverse();
        let half = 0.5 * self.width;
        (
            inv.apply_geodesic(&Geodesic::circle((-half).exp())),
            inv.apply_geodesic(&Geodesic::circle(half.exp())),
        )
    }

    /// The orthogonal leaf through the center.
    pub fn middle_leaf(&self) -> Geodesic {
        self.frame.inverse().apply_geodesic(&Geodesic::circle(1.0))
    }

    /// Sub-segment of the axis between the bounding geodesics.
    pub fn core(&self) -> Segment {
        let inv = self.frame.inverse();
        let half = 0.5 * self.width;
        Segment {
            carrier: self.axis,
            a: inv.apply(Point {
                x: 0.0,
                y: (-half).exp(),
            }),
            b: inv.apply(Point { x: 0.0, y: half.exp() }),
        }
    }

    /// Translation of length ε along the axis: the leaf-preserving
    /// identification of the bounding geodesics.
    pub fn twist(&self) -> Isometry {
        translation_along(&self.axis, self.width)
    }

    pub fn transformed(&self, m: &Isometry) -> Strip {
        Strip {
            axis: m.apply_geodesic(&self.axis),
            center: m.apply(self.center),
            width: self.width,
            frame: self.frame * m.inverse(),
        }
    }

    /// `ln|z|` of the point in the normalized frame: signed position along the
    /// axis of the orthogonal leaf through `p`.
    pub fn leaf_coordinate(&self, p: Point) -> f64 {
        self.frame.apply(p).abs().ln()
    }

    pub fn side(&self, p: Point, tol: f64) -> Side {
        classify_coordinate(self.leaf_coordinate(p), 0.5 * self.width, tol)
    }

    pub fn contains(&self, p: Point) -> bool {
        matches!(self.side(p, 0.0), Side::Inside | Side::Boundary)
    }

    /// The collapse map: the near side is fixed, the far side is translated
    /// back by ε, and each equidistant arc inside the strip is sent to its
    /// endpoint on `h1`.
    pub fn collapse(&self, p: Point) -> Point {
        let z = self.frame.apply(p);
        let r = z.abs();
        let lo = (-0.5 * self.width).exp();
        let hi = (0.5 * self.width).exp();
        let w = if r <= lo {
            z
        } else if r >= hi {
            z.scaled((-self.width).exp())
        } else {
            z.scaled(lo / r)
        };
        self.frame.inverse().apply(w)
    }

    /// Range of the leaf coordinate over a segment.
    fn segment_range(&self, s: &Segment) -> (f64, f64) {
        let (p, q) = (self.leaf_coordinate(s.a), self.leaf_coordinate(s.b));
        (p.min(q), p.max(q))
    }

    fn geodesic_range(&self, g: &Geodesic) -> (f64, f64) {
        let h = self.frame.apply_geodesic(g);
        if let (Some(s), Some(t)) = (h.u.finite(), h.v.finite()) {
            if s * t < 0.0 && ((s + t) / (s.abs() + t.abs())).abs() <= 1e-14 {
                let r = s.abs().ln();
                return (r, r);
            }
        }
        let (p, q) = (h.u.modulus().ln(), h.v.modulus().ln());
        (p.min(q), p.max(q))
    }

    pub fn crossing_segment(&self, s: &Segment) -> Crossing {
        classify_range(self.segment_range(s), 0.5 * self.width, INCIDENCE_TOL)
    }

    pub fn crossing_geodesic(&self, g: &Geodesic) -> Crossing {
        classify_range(self.geodesic_range(g), 0.5 * self.width, INCIDENCE_TOL)
    }

    /// Closed strips share no point.
    pub fn disjoint_from(&self, other: &Strip) -> bool {
        let half = 0.5 * self.width;
        let (lo, hi) = ((-half).exp(), half.exp());
        let (g1, g2) = other.bounding();
        let mut inner = 0;
        let mut outer = 0;
        for g in [g1, g2] {
            let h = self.frame.apply_geodesic(&g);
            for e in [h.u, h.v] {
                let m = e.modulus();
                if m < lo * (1.0 - INCIDENCE_TOL) {
                    inner += 1;
                } else if m > hi * (1.0 + INCIDENCE_TOL) {
                    outer += 1;
                }
            }
        }
        if inner != 4 && outer != 4 {
            return false;
        }
        // Both bounding lines of `other` sit in one complementary half-plane;
        // `other` is then either inside it or wraps around `self`.
        !other.contains(self.center)
    }
}

fn classify_coordinate(s: f64, half: f64, tol: f64) -> Side {
    if s < -half - tol {
        Side::Near
    } else if s > half + tol {
        Side::Far
    } else if (s + half).abs() <= tol || (s - half).abs() <= tol {
        Side::Boundary
    } else {
        Side::Inside
    }
}

fn classify_range((lo, hi): (f64, f64), half: f64, tol: f64) -> Crossing {
    if lo < -half - tol && hi > half + tol {
        return Crossing::Crosses;
    }
    if hi < -half - tol || lo > half + tol {
        return Crossing::Disjoint;
    }
    let touches = |x: f64| (x + half).abs() <= tol || (x - half).abs() <= tol;
    if touches(lo) || touches(hi) {
        Crossing::Tangent
    } else {
        Crossing::Partial
    }
}

/// Strip of width `eps` whose axis meets `alpha` perpendicularly at its
/// midpoint, so that `alpha`'s carrier is the middle orthogonal leaf.
pub fn strip_around(alpha: &Segment, eps: f64) -> Result<Strip> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::NonPositiveWidth { eps });
    }
    let m = alpha.midpoint();
    // Frame with alpha's carrier upward through i; the axis is the unit circle.
    let n = frame(&Geodesic::through(alpha.a, alpha.b)?, m);
    let ninv = n.inverse();
    let axis = ninv.apply_geodesic(&Geodesic::circle(1.0));
    Strip::new(axis, m, eps)
}

/// Free functional form of [`Strip::collapse`].
pub fn strip_collapse(b: &Strip, p: Point) -> Point {
    b.collapse(p)
}

/// Object tested against a strip.
#[derive(Clone, Copy, Debug)]
pub enum Crossable<'a> {
    Segment(&'a Segment),
    Geodesic(&'a Geodesic),
}

pub fn crossing(b: &Strip, s: Crossable<'_>) -> Crossing {
    match s {
        Crossable::Segment(seg) => b.crossing_segment(seg),
        Crossable::Geodesic(g) => b.crossing_geodesic(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y).unwrap()
    }

    /// Length of the geodesic through `p`, `q` by midpoint-rule integration of
    /// `|dz| / y` along the Euclidean arc.
    fn integrated_length(p: Point, q: Point) -> f64 {
        let g = Geodesic::through(p, q).unwrap();
        let steps = 200_000;
        match g.shape() {
            GeodesicShape::Vertical { .. } => {
                let h = (q.y - p.y) / steps as f64;
                (0..steps).map(|k| h.abs() / (p.y + (k as f64 + 0.5) * h)).sum()
            }
            GeodesicShape::HalfCircle { center, radius } => {
                let t0 = (p.y).atan2(p.x - center);
                let t1 = (q.y).atan2(q.x - center);
                let h = (t1 - t0) / steps as f64;
                (0..steps)
                    .map(|k| {
                        let t = t0 + (k as f64 + 0.5) * h;
                        radius * h.abs() / (radius * t.sin())
                    })
                    .sum()
            }
        }
    }

    #[test]
    fn dist_examples() {
        assert_abs_diff_eq!(dist(pt(0.0, 1.0), pt(0.0, 1f64.exp())), 1.0, epsilon = 1e-14);
        assert_eq!(dist(pt(0.3, 2.0), pt(0.3, 2.0)), 0.0);
        let d = dist(pt(0.0, 1.0), pt(1.0, 1.0));
        assert_abs_diff_eq!(d, integrated_length(pt(0.0, 1.0), pt(1.0, 1.0)), epsilon = 1e-8);
        assert_abs_diff_eq!(d, 1.5f64.acosh(), epsilon = 1e-14);
    }

    #[test]
    fn point_rejects_lower_half_plane() {
        assert!(Point::new(0.0, 0.0).is_err());
        assert!(Point::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn apply_examples() {
        let p = pt(0.4, 0.7);
        assert_eq!(Isometry::IDENTITY.apply(p), p);
        let t = Isometry::diagonal(0.5f64.exp());
        let q = t.apply(Point::I);
        assert_abs_diff_eq!(q.x, 0.0);
        assert_abs_diff_eq!(q.y, 1f64.exp(), epsilon = 1e-14);
        let r = Isometry::rotation(0.83).apply(Point::I);
        assert_abs_diff_eq!(r.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.y, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn isometry_constructor_checks_determinant() {
        assert!(Isometry::new(2.0, 0.0, 0.0, 1.0).is_err());
        assert!(Isometry::new(2.0, 0.0, 0.0, 0.5).is_ok());
    }

    #[test]
    fn axis_of_diagonal_is_vertical() {
        let (g, len) = axis_of(&Isometry::diagonal(0.5f64.exp())).unwrap();
        assert_abs_diff_eq!(len, 1.0, epsilon = 1e-12);
        assert_eq!(g, Geodesic::IMAGINARY_AXIS);
        let (g, _) = axis_of(&Isometry::diagonal((-0.5f64).exp())).unwrap();
        assert_eq!(g, Geodesic::IMAGINARY_AXIS.reversed());
    }

    #[test]
    fn axis_of_rejects_elliptic() {
        assert!(matches!(
            axis_of(&Isometry::rotation(0.4)),
            Err(Error::NotHyperbolic { .. })
        ));
    }

    #[test]
    fn axis_of_conjugate_recovers_conjugated_axis() {
        let m = Isometry::affine_to(pt(0.7, 1.9)) * Isometry::rotation(1.1);
        let h = m.conjugate(&Isometry::diagonal(1f64.exp()));
        let (g, len) = axis_of(&h).unwrap();
        assert_abs_diff_eq!(len, 2.0, epsilon = 1e-10);
        let expected = m.apply_geodesic(&Geodesic::IMAGINARY_AXIS);
        assert!(g.u.approx_eq(&expected.u, 1e-10) && g.v.approx_eq(&expected.v, 1e-10));
        let p = g.project(pt(0.2, 3.0));
        assert_abs_diff_eq!(dist(p, h.apply(p)), 2.0, epsilon = 1e-9);
    }

    #[test]
    fn common_perpendicular_of_concentric_circles() {
        let s = common_perpendicular(&Geodesic::circle(1.0), &Geodesic::circle(3.0)).unwrap();
        assert_abs_diff_eq!(s.a.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.a.y, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.b.y, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.length(), 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn common_perpendicular_rejects_bad_pairs() {
        let g = Geodesic::circle(1.0);
        assert!(common_perpendicular(&g, &g).is_err());
        let crossing = Geodesic::from_endpoints(0.0, 5.0).unwrap();
        assert!(common_perpendicular(&g, &crossing).is_err());
        let asymptotic = Geodesic::from_endpoints(1.0, 4.0).unwrap();
        assert!(common_perpendicular(&g, &asymptotic).is_err());
    }

    #[test]
    fn common_perpendicular_matches_brute_force_minimum() {
        let g1 = Geodesic::from_endpoints(-2.0, -1.0).unwrap();
        let g2 = Geodesic::from_endpoints(1.0, 2.0).unwrap();
        let s = common_perpendicular(&g1, &g2).unwrap();
        // Oracle: minimize dist over a grid of the two arcs, then refine.
        let point = |c: f64, t: f64| Point {
            x: c + 0.5 * t.cos(),
            y: 0.5 * t.sin(),
        };
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let n = 800;
        for i in 1..n {
            for j in 1..n {
                let (t1, t2) = (PI * i as f64 / n as f64, PI * j as f64 / n as f64);
                let d = dist(point(-1.5, t1), point(1.5, t2));
                if d < best.0 {
                    best = (d, t1, t2);
                }
            }
        }
        let mut h = PI / n as f64;
        for _ in 0..60 {
            for (di, dj) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                let (t1, t2) = (best.1 + di * h, best.2 + dj * h);
                let d = dist(point(-1.5, t1), point(1.5, t2));
                if d < best.0 {
                    best = (d, t1, t2);
                }
            }
            h *= 0.7;
        }
        assert_abs_diff_eq!(s.length(), best.0, epsilon = 1e-9);
        // Right angles at both ends: the segment is orthogonal to each line,
        // i.e. its endpoints are the nearest points.
        assert!(g1.contains(s.a, 1e-10) && g2.contains(s.b, 1e-10));
        assert_abs_diff_eq!(g2.distance_to(s.a), s.length(), epsilon = 1e-10);
        assert_abs_diff_eq!(g1.distance_to(s.b), s.length(), epsilon = 1e-10);
    }

    #[test]
    fn translation_along_examples() {
        let t = translation_along(&Geodesic::IMAGINARY_AXIS, 0.6);
        assert!(t.approx_eq(&Isometry::diagonal(0.3f64.exp()), 1e-14));
        let l = Geodesic::from_endpoints(-0.4, 2.2).unwrap();
        assert_eq!(translation_along(&l, 0.0), Isometry::IDENTITY);
        let (axis, len) = axis_of(&translation_along(&l, 0.7)).unwrap();
        assert_abs_diff_eq!(len, 0.7, epsilon = 1e-12);
        assert!(axis.u.approx_eq(&l.u, 1e-12) && axis.v.approx_eq(&l.v, 1e-12));
    }

    #[test]
    fn projection_examples() {
        let l = Geodesic::IMAGINARY_AXIS;
        let g0 = Geodesic::circle(1.0);
        let p = equidistant_project(&l, &g0, pt(0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.y, 1.0, epsilon = 1e-14);

        let (a, b) = (Point::from_polar(1.7, 0.4), Point::from_polar(1.7, 2.1));
        let (pa, pb) = (
            equidistant_project(&l, &g0, a).unwrap(),
            equidistant_project(&l, &g0, b).unwrap(),
        );
        assert_abs_diff_eq!(dist(pa, pb), dist(a, b), epsilon = 1e-12);

        let (a, b) = (pt(0.0, 1.0), Point::from_polar(2.0, PI / 4.0));
        let (pa, pb) = (
            equidistant_project(&l, &g0, a).unwrap(),
            equidistant_project(&l, &g0, b).unwrap(),
        );
        assert!(dist(pa, pb) < dist(a, b) - 1e-3);
    }

    #[test]
    fn projection_requires_perpendicular_target() {
        let g = Geodesic::from_endpoints(-1.0, 2.0).unwrap();
        assert!(matches!(
            equidistant_project(&Geodesic::IMAGINARY_AXIS, &g, Point::I),
            Err(Error::NotPerpendicular)
        ));
    }

    #[test]
    fn strip_around_normalized_arc() {
        let alpha = Segment::new(Point::from_polar(1.0, 1.2), Point::from_polar(1.0, PI - 1.2)).unwrap();
        let s = strip_around(&alpha, 0.4).unwrap();
        assert!(s.axis().same_line(&Geodesic::IMAGINARY_AXIS, 1e-12));
        let (h1, h2) = s.bounding();
        let radii = |g: Geodesic| g.u.finite().unwrap().abs();
        let mut r = [radii(h1), radii(h2)];
        r.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(r[0], (-0.2f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 0.2f64.exp(), epsilon = 1e-12);
        assert!(strip_around(&alpha, 0.0).is_err());
    }

    #[test]
    fn strip_around_round_trips_width() {
        let alpha = Segment::new(pt(-0.3, 0.8), pt(1.4, 2.3)).unwrap();
        let s = strip_around(&alpha, 0.3).unwrap();
        let (h1, h2) = s.bounding();
        assert_abs_diff_eq!(common_perpendicular(&h1, &h2).unwrap().length(), 0.3, epsilon = 1e-10);
        assert!(s.middle_leaf().same_line(&alpha.carrier, 1e-10));
        assert_abs_diff_eq!(s.core().length(), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn collapse_examples() {
        let s = Strip::normalized(0.2).unwrap();
        let near = pt(0.0, (-1f64).exp());
        let c = s.collapse(near);
        assert_abs_diff_eq!(c.y, near.y, epsilon = 1e-15);
        let c = s.collapse(pt(0.0, 2.0));
        assert_abs_diff_eq!(c.y, 2.0 * (-0.2f64).exp(), epsilon = 1e-14);
        let c = s.collapse(Point::from_polar(1.0, PI / 4.0));
        assert_abs_diff_eq!(c.abs(), (-0.1f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(c.arg(), PI / 4.0, epsilon = 1e-14);
    }

    #[test]
    fn crossing_examples() {
        let s = Strip::normalized(0.2).unwrap();
        let e = 1f64.exp();
        let seg = Segment::new(pt(0.0, e), pt(0.0, e * e)).unwrap();
        assert_eq!(crossing(&s, Crossable::Segment(&seg)), Crossing::Disjoint);
        let seg = Segment::new(pt(0.0, 1.0 / e), pt(0.0, e)).unwrap();
        assert_eq!(crossing(&s, Crossable::Segment(&seg)), Crossing::Crosses);
        let r = (-0.1f64).exp();
        let seg = Segment::new(Point::from_polar(r, 0.5), Point::from_polar(r, 2.0)).unwrap();
        assert_eq!(crossing(&s, Crossable::Segment(&seg)), Crossing::Tangent);
        let seg = Segment::new(pt(0.0, 0.5), pt(0.0, 1.0)).unwrap();
        assert_eq!(crossing(&s, Crossable::Segment(&seg)), Crossing::Partial);
        assert_eq!(
            crossing(&s, Crossable::Geodesic(&Geodesic::IMAGINARY_AXIS)),
            Crossing::Crosses
        );
        assert_eq!(
            crossing(&s, Crossable::Geodesic(&Geodesic::circle(3.0))),
            Crossing::Disjoint
        );
    }

    #[test]
    fn strip_disjointness() {
        let s = Strip::normalized(0.2).unwrap();
        let far = Strip::normalized(0.2).unwrap().transformed(&Isometry::diagonal(2.0));
        assert!(s.disjoint_from(&far));
        let overlapping = s.transformed(&Isometry::diagonal(1.02));
        assert!(!s.disjoint_from(&overlapping));
        // Bounding lines both inside |z| < e^{-0.1}, but the strip between them
        // contains ∞ and hence all of `s`.
        let perp = common_perpendicular(
            &Geodesic::from_endpoints(-0.5, -0.4).unwrap(),
            &Geodesic::from_endpoints(0.4, 0.5).unwrap(),
        )
        .unwrap();
        let wrap = Strip::new(perp.carrier, perp.midpoint(), perp.length()).unwrap();
        assert!(!s.disjoint_from(&wrap));
        assert!(!wrap.disjoint_from(&s));
    }

    #[test]
    fn intersection_of_axes() {
        let p = Geodesic::IMAGINARY_AXIS.intersection(&Geodesic::circle(2.0)).unwrap();
        assert_abs_diff_eq!(p.y, 2.0, epsilon = 1e-14);
        assert!(Geodesic::circle(1.0).intersection(&Geodesic::circle(2.0)).is_none());
    }
}
