//! Truncated suprema of length ratios between two marked structures.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::enumerate::{class_label, enumerate_arcs, enumerate_scc, EnumerationBound};
use crate::error::{Error, Result};
use crate::h2::TOL;
use crate::par;
use crate::surface::{ArcClass, ArcTag, CurveClass, CurveKind, MarkedSurface};

/// Which functional: the class set and the ratio orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    /// `k`: closed curves, `l_Y / l_X`.
    #[serde(rename = "k")]
    SmallK,
    /// `K`: boundary curves and arcs, `l_Y / l_X`.
    #[serde(rename = "K")]
    BigK,
    /// `d`: curves and arcs, `l_X / l_Y`.
    #[serde(rename = "d")]
    D,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::SmallK, MetricKind::BigK, MetricKind::D];

    pub fn tag(&self) -> &'static str {
        match self {
            MetricKind::SmallK => "k",
            MetricKind::BigK => "K",
            MetricKind::D => "d",
        }
    }

    fn inverted(&self) -> bool {
        *self == MetricKind::D
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" => Ok(MetricKind::SmallK),
            "K" => Ok(MetricKind::BigK),
            "d" => Ok(MetricKind::D),
            _ => Err(Error::Config(format!("unknown metric {s:?} (expected k, K or d)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Curve,
    Arc,
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowKind::Curve => "curve",
            RowKind::Arc => "arc",
        })
    }
}

/// A measured class: either a closed curve or an arc.
#[derive(Clone, Debug, PartialEq)]
pub enum Measured {
    Curve(CurveClass),
    Arc(ArcClass),
}

impl Measured {
    pub fn id(&self) -> String {
        match self {
            Measured::Curve(c) => c.id.clone(),
            Measured::Arc(a) => a.id(),
        }
    }

    pub fn row_kind(&self) -> RowKind {
        match self {
            Measured::Curve(_) => RowKind::Curve,
            Measured::Arc(_) => RowKind::Arc,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Measured::Curve(c) => class_label(c),
            Measured::Arc(a) => a.tag.to_string(),
        }
    }

    /// Slope complexity; 0 for classes present at every bound.
    pub fn complexity(&self) -> u32 {
        let slope = match self {
            Measured::Curve(c) => c.slope,
            Measured::Arc(a) => match a.tag {
                ArcTag::Slope(s) => Some(s),
                ArcTag::Pair(..) => None,
            },
        };
        slope.map_or(0, |s| s.complexity() as u32)
    }

    pub fn length(&self, s: &MarkedSurface) -> Result<f64> {
        match self {
            Measured::Curve(c) => s.curve_length(c),
            Measured::Arc(a) => s.arc_length(a),
        }
    }
}

/// Classes of a functional in deterministic order: boundary curves, then
/// interior curves by slope, then arcs.
pub fn class_set(s: &MarkedSurface, kind: MetricKind, bound: EnumerationBound) -> Result<Vec<Measured>> {
    let t = s.topology();
    let curves = enumerate_scc(t, bound)?;
    let arcs = enumerate_arcs(t, bound)?;
    let mut out: Vec<Measured> = match kind {
        MetricKind::SmallK | MetricKind::D => curves.into_iter().map(Measured::Curve).collect(),
        MetricKind::BigK => curves
            .into_iter()
            .filter(|c| c.kind == CurveKind::Boundary)
            .map(Measured::Curve)
            .collect(),
    };
    if kind != MetricKind::SmallK {
        out.extend(arcs.into_iter().map(Measured::Arc));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub class_id: String,
    pub kind: RowKind,
    pub word_or_slope: String,
    pub complexity: u32,
    pub l_x: f64,
    pub l_y: f64,
    pub ratio: f64,
}

fn check_pair(x: &MarkedSurface, y: &MarkedSurface) -> Result<()> {
    if x.same_schema(y) {
        Ok(())
    } else {
        Err(Error::TopologyMismatch)
    }
}

/// Lengths of `classes` on both structures.
pub fn rows_for(x: &MarkedSurface, y: &MarkedSurface, classes: &[Measured], inverted: bool) -> Result<Vec<RatioRow>> {
    check_pair(x, y)?;
    par::map(classes, |c| {
        let (l_x, l_y) = (c.length(x)?, c.length(y)?);
        Ok(RatioRow {
            class_id: c.id(),
            kind: c.row_kind(),
            word_or_slope: c.label(),
            complexity: c.complexity(),
            l_x,
            l_y,
            ratio: if inverted { l_x / l_y } else { l_y / l_x },
        })
    })
    .into_iter()
    .collect()
}

pub fn ratio_table(
    x: &MarkedSurface,
    y: &MarkedSurface,
    kind: MetricKind,
    bound: EnumerationBound,
) -> Result<Vec<RatioRow>> {
    check_pair(x, y)?;
    rows_for(x, y, &class_set(x, kind, bound)?, kind.inverted())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stabilization {
    pub bound: u32,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub kind: MetricKind,
    /// `log` of the largest ratio.
    pub value: f64,
    pub max_ratio: f64,
    pub argmax: String,
    pub bound: EnumerationBound,
    pub tolerance: f64,
    pub stabilization: Vec<Stabilization>,
    /// Difference between the values at the two largest bounds.
    pub last_increment: f64,
    /// `1 - max ratio`, for `k` only.
    pub gap: Option<f64>,
}

/// First row within relative `TOL` of the largest ratio, so that ties up to
/// rounding resolve to the earliest class.
fn argmax(rows: &[&RatioRow]) -> Option<usize> {
    let max = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    rows.iter().position(|r| r.ratio >= max - TOL * max.abs())
}

/// Bounds at which the truncated supremum is reported.
pub fn stabilization_bounds(x: &MarkedSurface, bound: EnumerationBound) -> Vec<u32> {
    let n = bound.get();
    if x.topology() == crate::surface::Topology::PANTS {
        return vec![n];
    }
    let mut v: Vec<u32> = [n / 2, 3 * n / 4, n].into_iter().filter(|&m| m >= 1).collect();
    v.dedup();
    v
}

/// Report over an already computed table.
pub fn report_from_rows(
    x: &MarkedSurface,
    rows: &[RatioRow],
    kind: MetricKind,
    bound: EnumerationBound,
) -> Result<MetricReport> {
    let all: Vec<&RatioRow> = rows.iter().collect();
    let best = argmax(&all).ok_or(Error::EmptyClassSet)?;
    let max_ratio = all.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let stabilization: Vec<Stabilization> = stabilization_bounds(x, bound)
        .into_iter()
        .filter_map(|m| {
            let sub: Vec<&RatioRow> = rows.iter().filter(|r| r.complexity <= m).collect();
            argmax(&sub).map(|_| Stabilization {
                bound: m,
                value: sub.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max).ln(),
            })
        })
        .collect();
    let last_increment = match stabilization.as_slice() {
        [.., a, b] => b.value - a.value,
        _ => 0.0,
    };
    Ok(MetricReport {
        kind,
        value: max_ratio.ln(),
        max_ratio,
        argmax: all[best].class_id.clone(),
        bound,
        tolerance: TOL,
        stabilization,
        last_increment,
        gap: (kind == MetricKind::SmallK).then_some(1.0 - max_ratio),
    })
}

pub fn weak_metric(
    x: &MarkedSurface,
    y: &MarkedSurface,
    kind: MetricKind,
    bound: EnumerationBound,
) -> Result<MetricReport> {
    let rows = ratio_table(x, y, kind, bound)?;
    report_from_rows(x, &rows, kind, bound)
}

/// `1 - max l_Y/l_X` over enumerated closed curves.
pub fn uniform_gap(x: &MarkedSurface, y: &MarkedSurface, bound: EnumerationBound) -> Result<f64> {
    let r = weak_metric(x, y, MetricKind::SmallK, bound)?;
    Ok(1.0 - r.max_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{pants_from_lengths, torus_from_traces};
    use approx::assert_abs_diff_eq;

    fn bound(n: u32) -> EnumerationBound {
        EnumerationBound::new(n).unwrap()
    }

    #[test]
    fn identical_structures_have_unit_ratios() {
        let x = torus_from_traces(4.0, 4.5, 5.1).unwrap();
        for kind in MetricKind::ALL {
            let rows = ratio_table(&x, &x, kind, bound(3)).unwrap();
            assert!(rows.iter().all(|r| (r.ratio - 1.0).abs() < 1e-12));
        }
        let r = weak_metric(&x, &x, MetricKind::SmallK, bound(3)).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(uniform_gap(&x, &x, bound(3)).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn scaled_pants() {
        let x = pants_from_lengths(2.0, 2.0, 2.0).unwrap();
        let y = pants_from_lengths(1.8, 1.8, 1.8).unwrap();
        let rows = ratio_table(&x, &y, MetricKind::SmallK, bound(5)).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert_abs_diff_eq!(r.ratio, 0.9, epsilon = 1e-9);
        }
        let r = weak_metric(&x, &y, MetricKind::SmallK, bound(5)).unwrap();
        assert_abs_diff_eq!(r.value, 0.9f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(r.value, -0.1053605, epsilon = 1e-7);
        assert_eq!(r.argmax, "boundary:1");
        assert_eq!(r.stabilization.len(), 1);
        assert_abs_diff_eq!(uniform_gap(&x, &y, bound(5)).unwrap(), 0.1, epsilon = 1e-9);
    }

    #[test]
    fn mismatched_topologies_are_rejected() {
        let x = pants_from_lengths(2.0, 2.0, 2.0).unwrap();
        let y = torus_from_traces(4.0, 4.0, 4.0).unwrap();
        assert_eq!(
            ratio_table(&x, &y, MetricKind::SmallK, bound(2)),
            Err(Error::TopologyMismatch)
        );
    }

    #[test]
    fn ratio_orientation_and_class_sets() {
        let x = torus_from_traces(4.0, 4.0, 4.0).unwrap();
        let y = torus_from_traces(4.2, 4.0, 4.1).unwrap();
        let k = ratio_table(&x, &y, MetricKind::SmallK, bound(2)).unwrap();
        let d = ratio_table(&x, &y, MetricKind::D, bound(2)).unwrap();
        let big = ratio_table(&x, &y, MetricKind::BigK, bound(2)).unwrap();
        assert_eq!(k.len(), 9);
        assert_eq!(d.len(), 9 + 8);
        assert_eq!(big.len(), 1 + 8);
        for (a, b) in k.iter().zip(&d) {
            assert_eq!(a.class_id, b.class_id);
            assert_abs_diff_eq!(a.ratio * b.ratio, 1.0, epsilon = 1e-12);
        }
        assert!(big.iter().all(|r| (r.ratio - r.l_y / r.l_x).abs() < 1e-12));
    }

    /// `k(X, Y) = -min log(l_X / l_Y)` on the same table.
    #[test]
    fn antisymmetry_bookkeeping() {
        let x = torus_from_traces(4.0, 4.5, 5.1).unwrap();
        let y = torus_from_traces(4.1, 4.4, 5.0).unwrap();
        let k = weak_metric(&x, &y, MetricKind::SmallK, bound(6)).unwrap();
        let rows = ratio_table(&x, &y, MetricKind::SmallK, bound(6)).unwrap();
        let min_inv = rows.iter().map(|r| (r.l_x / r.l_y).ln()).fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(k.value, -min_inv, epsilon = 1e-12);
    }

    #[test]
    fn stabilization_is_monotone() {
        let x = torus_from_traces(4.0, 4.5, 5.1).unwrap();
        let y = torus_from_traces(4.3, 4.4, 5.4).unwrap();
        let r = weak_metric(&x, &y, MetricKind::SmallK, bound(8)).unwrap();
        let bounds: Vec<u32> = r.stabilization.iter().map(|s| s.bound).collect();
        assert_eq!(bounds, [4, 6, 8]);
        assert!(r.stabilization.windows(2).all(|p| p[0].value <= p[1].value));
        assert_abs_diff_eq!(r.stabilization.last().unwrap().value, r.value);
    }
}
