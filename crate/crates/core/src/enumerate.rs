//! Simple closed curves and orthogeodesic arcs up to a complexity bound.
//!
//! On a pair of pants the only simple closed geodesics are the three
//! boundary curves and there are six arc classes. On the one-holed torus
//! simple curves and simple self-arcs are both indexed by slopes in
//! `Q ∪ {∞}`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::{ArcClass, ArcTag, CurveClass, CurveKind, Topology};
use crate::word::{w, GroupWord, Letter};

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// A reduced slope `p/q`: `p` counts `a` letters and `q` counts `b` letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Slope {
    p: i64,
    q: i64,
}

impl Slope {
    pub const INFINITY: Slope = Slope { p: 1, q: 0 };
    pub const ZERO: Slope = Slope { p: 0, q: 1 };

    /// Normalizes the sign so that `q ≥ 0`, and `p = 1` when `q = 0`.
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if (p, q) == (0, 0) || gcd(p, q) != 1 {
            return Err(Error::InvalidSlope { p, q });
        }
        Ok(if q == 0 {
            Slope::INFINITY
        } else if q < 0 {
            Slope { p: -p, q: -q }
        } else {
            Slope { p, q }
        })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// `max(|p|, q)`.
    pub fn complexity(&self) -> i64 {
        self.p.abs().max(self.q)
    }

    /// Algebraic intersection number `|p s - q r|` with another slope.
    pub fn intersection(&self, other: &Slope) -> i64 {
        (self.p * other.q - self.q * other.p).abs()
    }

    /// Lower Christoffel word; negative slopes replace `b` by `b⁻¹`.
    pub fn christoffel(&self) -> GroupWord {
        let (p, q) = (self.p.abs(), self.q);
        let n = p + q;
        let b = Letter::new(1, self.p < 0);
        let a = Letter::new(0, false);
        GroupWord::from_letters((1..=n).map(|k| {
            if (k * q).div_euclid(n) > ((k - 1) * q).div_euclid(n) {
                b
            } else {
                a
            }
        }))
    }

    /// Stern–Brocot parents `(right, left)` of `|p|/q`, whose Christoffel
    /// words multiply to that slope's: `C(s) = C(right)·C(left)`.
    fn parents(&self) -> Option<(Slope, Slope)> {
        let (p, q) = (self.p.abs(), self.q);
        if p == 0 || q == 0 {
            return None;
        }
        let (mut left, mut right) = ((0i64, 1i64), (1i64, 0i64));
        loop {
            let m = (left.0 + right.0, left.1 + right.1);
            match (p * m.1).cmp(&(m.0 * q)) {
                Ordering::Equal => break,
                Ordering::Less => right = m,
                Ordering::Greater => left = m,
            }
        }
        Some((Slope::new(right.0, right.1).ok()?, Slope::new(left.0, left.1).ok()?))
    }

    /// A word `w'` such that `(C(self), w')` is a free basis with commutator
    /// conjugate to the boundary word or its inverse.
    pub fn partner_word(&self) -> GroupWord {
        let partner = match self.parents() {
            Some((_, left)) => left.christoffel(),
            None if self.q == 0 => w("b"),
            None => w("a"),
        };
        if self.p < 0 {
            reflect(&partner)
        } else {
            partner
        }
    }

    fn value_cmp(&self, other: &Slope) -> Ordering {
        match (self.q == 0, other.q == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            (false, false) => (self.p * other.q).cmp(&(other.p * self.q)),
        }
    }
}

/// The substitution `b ↦ b⁻¹`.
fn reflect(word: &GroupWord) -> GroupWord {
    word.substitute(|l| GroupWord::from_letters([if l.generator == 1 { l.inv() } else { l }]))
}

/// By value, `∞` last.
impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value_cmp(other)
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(Slope::INFINITY);
        }
        let bad = || Error::Config(format!("cannot parse slope {s:?}"));
        let (p, q) = t.split_once('/').unwrap_or((t, "1"));
        let p = p.trim().parse().map_err(|_| bad())?;
        let q = q.trim().parse().map_err(|_| bad())?;
        Slope::new(p, q)
    }
}

impl From<Slope> for String {
    fn from(s: Slope) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Slope {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Truncation of the class sets: slopes with `max(|p|, q) ≤ N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnumerationBound(u32);

impl EnumerationBound {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("enumeration bound must be at least 1".into()));
        }
        Ok(EnumerationBound(n))
    }

    pub fn get(&self) -> u32 {
        self.0
    }
}

impl fmt::Display for EnumerationBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={}", self.0)
    }
}

/// All slopes of complexity `≤ N`, in slope order.
pub fn slopes(bound: EnumerationBound) -> Vec<Slope> {
    let n = bound.get() as i64;
    let mut out: Vec<Slope> = (1..=n)
        .flat_map(|q| (-n..=n).map(move |p| (p, q)))
        .filter(|&(p, q)| gcd(p, q) == 1)
        .map(|(p, q)| Slope { p, q })
        .collect();
    out.push(Slope::INFINITY);
    out.sort();
    out
}

fn pants_boundary() -> Vec<CurveClass> {
    ["a", "b", "BA"]
        .iter()
        .enumerate()
        .map(|(i, s)| CurveClass::new(&w(s), CurveKind::Boundary, format!("boundary:{}", i + 1)))
        .collect()
}

fn torus_boundary() -> CurveClass {
    CurveClass::new(&w("abAB"), CurveKind::Boundary, "boundary")
}

/// Curve of slope `s` on the one-holed torus.
pub fn slope_curve(s: Slope) -> CurveClass {
    CurveClass::new(&s.christoffel(), CurveKind::Interior, format!("slope:{s}")).with_slope(s)
}

/// Boundary classes first, then slopes in order.
pub fn enumerate_scc(t: Topology, bound: EnumerationBound) -> Result<Vec<CurveClass>> {
    t.ensure_supported()?;
    if t == Topology::PANTS {
        return Ok(pants_boundary());
    }
    let mut out = vec![torus_boundary()];
    out.extend(slopes(bound).into_iter().map(slope_curve));
    Ok(out)
}

/// Arc between pants boundaries `i ≤ j`.
pub fn pants_arc(i: u8, j: u8) -> Result<ArcClass> {
    let (c1, c2) = match (i.min(j), i.max(j)) {
        (1, 2) => ("a", "b"),
        (1, 3) => ("a", "BA"),
        (2, 3) => ("b", "BA"),
        (1, 1) => ("a", "baB"),
        (2, 2) => ("b", "BAbab"),
        (3, 3) => ("BA", "aBAA"),
        _ => return Err(Error::Config(format!("no pants boundary pair {i}{j}"))),
    };
    Ok(ArcClass {
        carrier1: w(c1),
        carrier2: w(c2),
        tag: ArcTag::Pair(i.min(j), i.max(j)),
    })
}

/// Self-arc of the one-holed torus disjoint from the curve of slope `s`.
///
/// With `w = C(s)` and `K = [w, w']` the arc is the common perpendicular of
/// the axes of `K` and `w K w⁻¹`. Conjugating the pair so that `K` becomes the
/// boundary word `δ` gives carriers `(δ, u δ u⁻¹)` with `u = g⁻¹ w g`.
pub fn slope_arc(s: Slope) -> ArcClass {
    let c = s.christoffel();
    let k = GroupWord::commutator(&c, &s.partner_word());
    let g = k.conjugator_to(&w("abAB")).expect("Christoffel pairs are bases");
    let u = &(&g.inverse() * &c) * &g;
    let delta = w("abAB");
    ArcClass {
        carrier2: delta.conjugated_by(&u),
        carrier1: delta,
        tag: ArcTag::Slope(s),
    }
}

pub fn enumerate_arcs(t: Topology, bound: EnumerationBound) -> Result<Vec<ArcClass>> {
    t.ensure_supported()?;
    if t == Topology::PANTS {
        return [(1, 2), (1, 3), (2, 3), (1, 1), (2, 2), (3, 3)]
            .into_iter()
            .map(|(i, j)| pants_arc(i, j))
            .collect();
    }
    Ok(slopes(bound).into_iter().map(slope_arc).collect())
}

/// Arcs meeting every simple closed geodesic.
pub fn filling_arc_family(t: Topology) -> Result<Vec<ArcClass>> {
    t.ensure_supported()?;
    if t == Topology::PANTS {
        Ok(vec![pants_arc(1, 2)?, pants_arc(1, 3)?])
    } else {
        Ok(vec![slope_arc(Slope::INFINITY), slope_arc(Slope::ZERO)])
    }
}

/// Word used for a curve class in reports: the slope on the torus, the word
/// otherwise.
pub fn class_label(c: &CurveClass) -> String {
    match c.slope {
        Some(s) => s.to_string(),
        None => c.word.to_string(),
    }
}
