//! Marked hyperbolic structures with geodesic boundary, given by holonomy
//! representations of the free fundamental group.
//!
//! The holonomy of `X` also determines its Nielsen extension (the funnels add
//! no parameters), so a surface is stored as generator matrices only.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::enumerate::Slope;
use crate::error::{Error, Result};
use crate::h2::{axis_of, common_perpendicular, IdealPoint, Isometry, IsometryKind, Point, Segment, TOL};
use crate::word::{reduced_words, w, GroupWord, Letter};

/// Word length up to which no element may be elliptic.
pub const DISCRETENESS_RADIUS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    pub genus: u32,
    pub boundary_count: u32,
}

impl Topology {
    pub const PANTS: Topology = Topology {
        genus: 0,
        boundary_count: 3,
    };
    pub const ONE_HOLED_TORUS: Topology = Topology {
        genus: 1,
        boundary_count: 1,
    };

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundary_count as i64
    }

    /// Rank of the (free) fundamental group.
    pub fn rank(&self) -> usize {
        (1 - self.euler_characteristic()) as usize
    }

    pub fn is_supported(&self) -> bool {
        *self == Topology::PANTS || *self == Topology::ONE_HOLED_TORUS
    }

    pub fn ensure_supported(&self) -> Result<()> {
        if self.is_supported() {
            Ok(())
        } else {
            Err(Error::UnsupportedTopology {
                genus: self.genus,
                boundary: self.boundary_count,
            })
        }
    }

    /// Boundary words of the standard presentation.
    pub fn boundary_words(&self) -> Result<Vec<GroupWord>> {
        self.ensure_supported()?;
        Ok(if *self == Topology::PANTS {
            vec![w("a"), w("b"), w("BA")]
        } else {
            vec![GroupWord::commutator(&w("a"), &w("b"))]
        })
    }

    pub fn name(&self) -> &'static str {
        match *self {
            Topology::PANTS => "pants",
            Topology::ONE_HOLED_TORUS => "torus",
            _ => "unsupported",
        }
    }
}

/// A marked hyperbolic structure: generator holonomy plus the boundary words.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedSurface {
    topology: Topology,
    generators: Vec<String>,
    boundary_words: Vec<GroupWord>,
    holonomy: Vec<Isometry>,
    basepoint: Point,
    label: String,
}

impl MarkedSurface {
    /// Validates boundary hyperbolicity and the discreteness proxy.
    pub fn from_holonomy(
        topology: Topology,
        holonomy: Vec<Isometry>,
        basepoint: Point,
        label: impl Into<String>,
    ) -> Result<Self> {
        let boundary_words = topology.boundary_words()?;
        if holonomy.len() != topology.rank() {
            return Err(Error::UnknownGenerator(holonomy.len()));
        }
        let generators = (0..topology.rank())
            .map(|g| ((b'a' + g as u8) as char).to_string())
            .collect();
        let s = MarkedSurface {
            topology,
            generators,
            boundary_words,
            holonomy,
            basepoint,
            label: label.into(),
        };
        for bw in &s.boundary_words {
            let m = s.holonomy(bw)?;
            if m.kind() != IsometryKind::Hyperbolic {
                return Err(Error::BoundaryNotHyperbolic { kappa: m.trace() });
            }
        }
        s.check_discreteness(DISCRETENESS_RADIUS)?;
        Ok(s)
    }

    /// No nontrivial reduced word of length `≤ radius` is elliptic.
    pub fn check_discreteness(&self, radius: usize) -> Result<()> {
        for word in reduced_words(self.topology.rank(), radius) {
            let m = self.holonomy(&word)?;
            if m.kind() == IsometryKind::Elliptic {
                return Err(Error::NotDiscrete {
                    word: word.to_string(),
                    trace: m.trace(),
                });
            }
        }
        Ok(())
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn boundary_words(&self) -> &[GroupWord] {
        &self.boundary_words
    }

    pub fn generator_holonomy(&self) -> &[Isometry] {
        &self.holonomy
    }

    pub fn basepoint(&self) -> Point {
        self.basepoint
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub(crate) fn with_basepoint(mut self, p: Point) -> Self {
        self.basepoint = p;
        self
    }

    pub(crate) fn relabeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Same generators, boundary words and basepoint.
    pub fn same_schema(&self, other: &MarkedSurface) -> bool {
        self.topology == other.topology
            && self.generators == other.generators
            && self.boundary_words == other.boundary_words
    }

    /// Holonomy of a word, multiplied left to right.
    pub fn holonomy(&self, word: &GroupWord) -> Result<Isometry> {
        word.letters()
            .iter()
            .try_fold(Isometry::IDENTITY, |m, &l| Ok(m * self.letter_holonomy(l)?))
    }

    fn letter_holonomy(&self, l: Letter) -> Result<Isometry> {
        let g = self
            .holonomy
            .get(l.generator as usize)
            .ok_or(Error::UnknownGenerator(l.generator as usize))?;
        Ok(if l.inverse { g.inverse() } else { *g })
    }

    /// `ρ(word)·p`, applied one letter at a time from the right. Unlike the
    /// matrix product this stays accurate for long words.
    pub fn act(&self, word: &GroupWord, p: Point) -> Result<Point> {
        word.letters()
            .iter()
            .rev()
            .try_fold(p, |z, &l| Ok(self.letter_holonomy(l)?.apply(z)))
    }

    pub fn act_ideal(&self, word: &GroupWord, z: IdealPoint) -> Result<IdealPoint> {
        word.letters()
            .iter()
            .rev()
            .try_fold(z, |z, &l| Ok(self.letter_holonomy(l)?.apply_ideal(z)))
    }

    /// `2 arccosh(|tr|/2)` of the class's holonomy.
    pub fn word_length(&self, word: &GroupWord) -> Result<f64> {
        let m = self.holonomy(word)?;
        if m.kind() != IsometryKind::Hyperbolic {
            return Err(Error::NotHyperbolic { trace: m.trace() });
        }
        Ok(m.translation_length())
    }

    pub fn curve_length(&self, c: &CurveClass) -> Result<f64> {
        self.word_length(&c.word)
    }

    /// Orthogeodesic realizing an arc: the common perpendicular of the two
    /// carrier axes.
    pub fn arc_geodesic(&self, arc: &ArcClass) -> Result<(Segment, f64)> {
        let (g1, _) = axis_of(&self.holonomy(&arc.carrier1)?)?;
        let (g2, _) = axis_of(&self.holonomy(&arc.carrier2)?)?;
        if g1.same_line(&g2, 1e-10) {
            return Err(Error::NotHyperparallel);
        }
        let seg = common_perpendicular(&g1, &g2)?;
        let len = seg.length();
        Ok((seg, len))
    }

    /// Length of the arc from traces: for carriers `A`, `B` with half
    /// translation lengths `α`, `β` and hyperparallel axes at distance `d`,
    /// `tr(AB) - tr(AB⁻¹) = ±4 sinh α sinh β cosh d`. Every trace is taken on a
    /// cyclically reduced word, which keeps long carriers accurate.
    pub fn arc_length(&self, arc: &ArcClass) -> Result<f64> {
        let half_sinh = |g: &GroupWord| -> Result<f64> {
            let t = self.holonomy(&g.canonical_cyclic())?.trace().abs();
            if t <= 2.0 + TOL {
                return Err(Error::NotHyperbolic { trace: t });
            }
            Ok((0.25 * t * t - 1.0).sqrt())
        };
        let (c1, c2) = (&arc.carrier1, &arc.carrier2);
        let denom = 4.0 * half_sinh(c1)? * half_sinh(c2)?;
        let plus = self.holonomy(&(c1 * c2).canonical_cyclic())?.trace();
        let minus = self.holonomy(&(c1 * &c2.inverse()).canonical_cyclic())?.trace();
        let cosh_d = (plus - minus).abs() / denom;
        if !(cosh_d > 1.0 + 1e-12) {
            return Err(Error::NotHyperparallel);
        }
        Ok(cosh_d.acosh())
    }

    pub fn multicurve_length(&self, m: &WeightedMulticurve) -> Result<f64> {
        m.components.iter().map(|(c, wt)| Ok(wt * self.curve_length(c)?)).sum()
    }

    pub fn boundary_lengths(&self) -> Result<Vec<f64>> {
        self.boundary_words.iter().map(|bw| self.word_length(bw)).collect()
    }

    /// Replaces the holonomy by its conjugate under `m`.
    pub fn conjugated(&self, m: &Isometry) -> Result<Self> {
        MarkedSurface::from_holonomy(
            self.topology,
            self.holonomy.iter().map(|g| m.conjugate(g)).collect(),
            m.apply(self.basepoint),
            self.label.clone(),
        )
    }

    /// Parameters from which the surface can be rebuilt up to conjugation.
    pub fn parameters(&self) -> Result<SurfaceParams> {
        if self.topology == Topology::PANTS {
            let l = self.boundary_lengths()?;
            Ok(SurfaceParams::Pants {
                lengths: [l[0], l[1], l[2]],
            })
        } else {
            let tr = |s: &str| -> Result<f64> { Ok(self.holonomy(&w(s))?.trace()) };
            Ok(SurfaceParams::Torus {
                traces: [tr("a")?, tr("b")?, tr("ab")?],
            })
        }
    }
}

impl fmt::Display for MarkedSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.label, self.topology.name())
    }
}

/// Construction parameters: pants boundary lengths or torus Fricke traces
/// `(tr a, tr b, tr ab)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "lowercase", deny_unknown_fields)]
pub enum SurfaceParams {
    Pants { lengths: [f64; 3] },
    Torus { traces: [f64; 3] },
}

impl SurfaceParams {
    pub fn build(&self) -> Result<MarkedSurface> {
        match *self {
            SurfaceParams::Pants { lengths: [a, b, c] } => pants_from_lengths(a, b, c),
            SurfaceParams::Torus { traces: [x, y, z] } => torus_from_traces(x, y, z),
        }
    }
}

/// Distance between boundaries `i` and `j` across a right-angled hexagon with
/// alternate sides `l_i/2, l_j/2, l_k/2`.
pub fn hexagon_seam(li: f64, lj: f64, lk: f64) -> f64 {
    let (hi, hj, hk) = (0.5 * li, 0.5 * lj, 0.5 * lk);
    ((hk.cosh() + hi.cosh() * hj.cosh()) / (hi.sinh() * hj.sinh())).acosh()
}

/// Pair of pants with boundary lengths `(l1, l2, l3)` for the words
/// `a, b, (ab)⁻¹`.
///
/// `ρ(a)` translates along the imaginary axis; the seam to boundary 2 is the
/// unit half-circle, and `ρ(b)` translates along the geodesic perpendicular to
/// it at distance `d12` from `i`. Of the two orientations of `ρ(b)` the one
/// with `|tr ρ(ab)| = 2 cosh(l3/2)` is kept.
pub fn pants_from_lengths(l1: f64, l2: f64, l3: f64) -> Result<MarkedSurface> {
    let ls = [l1, l2, l3];
    if ls.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::NonPositiveLength(ls.to_vec()));
    }
    let d12 = hexagon_seam(l1, l2, l3);
    let a = Isometry::diagonal((0.5 * l1).exp());
    let (c, s) = ((0.5 * d12).cosh(), (0.5 * d12).sinh());
    let shift = Isometry::raw(c, s, s, c);
    let target = 2.0 * (0.5 * l3).cosh();
    let b = [1.0, -1.0]
        .into_iter()
        .map(|o: f64| shift.conjugate(&Isometry::diagonal((o * 0.5 * l2).exp())))
        .min_by(|x, y| {
            let ex = ((a * *x).trace().abs() - target).abs();
            let ey = ((a * *y).trace().abs() - target).abs();
            ex.total_cmp(&ey)
        })
        .expect("two candidates");
    MarkedSurface::from_holonomy(Topology::PANTS, vec![a, b], Point::I, format!("pants({l1},{l2},{l3})"))
}

/// Commutator trace `x² + y² + z² - xyz - 2` of a pair with traces
/// `(tr a, tr b, tr ab) = (x, y, z)`.
pub fn commutator_trace(x: f64, y: f64, z: f64) -> f64 {
    x * x + y * y + z * z - x * y * z - 2.0
}

/// One-holed torus with Fricke traces `(tr a, tr b, tr ab) = (x, y, z)`.
pub fn torus_from_traces(x: f64, y: f64, z: f64) -> Result<MarkedSurface> {
    let kappa = commutator_trace(x, y, z);
    if !(kappa.abs() > 2.0 + TOL) || !kappa.is_finite() {
        return Err(Error::BoundaryNotHyperbolic { kappa });
    }
    if !(x.abs() > 2.0 + TOL) {
        return Err(Error::NotDiscrete {
            word: "a".into(),
            trace: x,
        });
    }
    let lambda = 0.5 * (x + x.signum() * (x * x - 4.0).sqrt());
    let a = Isometry::diagonal(lambda);
    let p = (z - y / lambda) / (lambda - lambda.recip());
    let s = y - p;
    let qr = p * s - 1.0;
    let (q, r) = if qr >= 0.0 {
        (qr.sqrt(), qr.sqrt())
    } else {
        ((-qr).sqrt(), -(-qr).sqrt())
    };
    let b = Isometry::raw(p, q, r, s);
    MarkedSurface::from_holonomy(
        Topology::ONE_HOLED_TORUS,
        vec![a, b],
        Point::I,
        format!("torus({x},{y},{z})"),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Boundary,
    Interior,
}

/// Conjugacy class (up to inversion) of a primitive cyclically reduced word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CurveClass {
    pub word: GroupWord,
    pub kind: CurveKind,
    /// Slope index on the one-holed torus.
    pub slope: Option<Slope>,
    /// Stable identifier used in tables.
    pub id: String,
}

impl CurveClass {
    pub fn new(word: &GroupWord, kind: CurveKind, id: impl Into<String>) -> Self {
        CurveClass {
            word: word.canonical_cyclic(),
            kind,
            slope: None,
            id: id.into(),
        }
    }

    pub fn with_slope(mut self, slope: Slope) -> Self {
        self.slope = Some(slope);
        self
    }
}

/// Topological label of an arc class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArcTag {
    /// Pants arc between boundaries `i ≤ j` (1-based); `i == j` is a self-arc.
    Pair(u8, u8),
    /// One-holed torus arc disjoint from the curve of the same slope.
    Slope(Slope),
}

impl fmt::Display for ArcTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArcTag::Pair(i, j) => write!(f, "{i}{j}"),
            ArcTag::Slope(s) => write!(f, "{s}"),
        }
    }
}

/// Orthogeodesic arc class, realized as the common perpendicular of the axes
/// of two boundary-conjugate elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArcClass {
    pub carrier1: GroupWord,
    pub carrier2: GroupWord,
    pub tag: ArcTag,
}

impl ArcClass {
    pub fn id(&self) -> String {
        format!("arc:{}", self.tag)
    }
}

/// Finite sum of distinct curve classes with positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedMulticurve {
    components: Vec<(CurveClass, f64)>,
}

impl WeightedMulticurve {
    pub fn new(components: Vec<(CurveClass, f64)>) -> Result<Self> {
        for (i, (c, wt)) in components.iter().enumerate() {
            if !(*wt > 0.0 && wt.is_finite()) {
                return Err(Error::Config(format!("weight {wt} of {} must be positive", c.id)));
            }
            if components[..i].iter().any(|(d, _)| d.word == c.word) {
                return Err(Error::Config(format!("class {} repeated", c.id)));
            }
        }
        Ok(WeightedMulticurve { components })
    }

    pub fn components(&self) -> &[(CurveClass, f64)] {
        &self.components
    }
}
