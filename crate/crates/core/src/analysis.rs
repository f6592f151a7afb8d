//! Peel a structure along an arc family and compare every enumerated class
//! before and after.

use std::collections::HashMap;

use log::warn;
use serde::Serialize;

use crate::enumerate::{enumerate_arcs, enumerate_scc, EnumerationBound};
use crate::error::Result;
use crate::metrics::{class_set, report_from_rows, Measured, MetricKind, MetricReport, RatioRow, RowKind};
use crate::par;
use crate::peel::{arc_meets_strip, curve_crossings, peel, PeelConfig, PeelOutcome};
use crate::surface::{ArcClass, ArcTag, CurveClass, MarkedSurface};

/// Slack allowed on length identities for classes missing every strip.
pub const PRESERVED_TOL: f64 = 1e-6;

/// One class in the before/after table; `ratio` is `l_Y / l_X`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub class_id: String,
    pub kind: RowKind,
    pub word_or_slope: String,
    pub complexity: u32,
    pub l_x: f64,
    pub l_y: f64,
    pub ratio: f64,
    pub crossed_strip: bool,
}

/// Length change of one curve across one peel step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingCheck {
    pub step: usize,
    pub arc: ArcTag,
    pub class_id: String,
    /// Strip crossings along the closed geodesic.
    pub crossings: usize,
    /// Largest collapsed chord `M` over those crossings.
    pub max_chord: f64,
    /// `l_before - l_after`.
    pub decrease: f64,
    /// `n log(1 + e^{-M} ε²)` for a crossing class, 0 otherwise.
    pub bound: f64,
    pub saturated: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeelAnalysis {
    pub bound: EnumerationBound,
    pub eps: f64,
    pub outcome: PeelOutcome,
    #[serde(skip)]
    pub source: MarkedSurface,
    pub rows: Vec<SpectrumRow>,
    pub checks: Vec<CrossingCheck>,
    pub reports: Vec<MetricReport>,
}

impl PeelAnalysis {
    pub fn peeled(&self) -> &MarkedSurface {
        &self.outcome.surface
    }

    pub fn report(&self, kind: MetricKind) -> Option<&MetricReport> {
        self.reports.iter().find(|r| r.kind == kind)
    }

    pub fn row(&self, class_id: &str) -> Option<&SpectrumRow> {
        self.rows.iter().find(|r| r.class_id == class_id)
    }

    /// Whether some peeled strip is met by the class.
    pub fn crossed(&self, class_id: &str) -> bool {
        self.row(class_id).is_some_and(|r| r.crossed_strip)
    }
}

struct CurveResult {
    row: SpectrumRow,
    checks: Vec<CrossingCheck>,
}

fn analyze_curve(outcome: &PeelOutcome, x: &MarkedSurface, c: &CurveClass, cfg: &PeelConfig) -> Result<CurveResult> {
    let m = Measured::Curve(c.clone());
    let mut checks = Vec::with_capacity(outcome.steps.len());
    for (i, step) in outcome.steps.iter().enumerate() {
        let cc = curve_crossings(&step.source, &step.strip, &c.word, cfg.crossing_radius)?;
        if !cc.saturated {
            warn!("crossing search for {} at step {i} did not saturate", c.id);
        }
        let decrease = step.source.curve_length(c)? - step.result.curve_length(c)?;
        let max_chord = cc.max_collapsed_chord();
        let (bound, holds) = if cc.count == 0 {
            (0.0, decrease.abs() <= PRESERVED_TOL)
        } else {
            let b = cc.count as f64 * (-max_chord).exp().mul_add(step.eps * step.eps, 1.0).ln();
            (b, decrease >= b - PRESERVED_TOL)
        };
        checks.push(CrossingCheck {
            step: i,
            arc: step.arc,
            class_id: c.id.clone(),
            crossings: cc.count,
            max_chord,
            decrease,
            bound,
            saturated: cc.saturated,
            holds,
        });
    }
    let (l_x, l_y) = (m.length(x)?, m.length(&outcome.surface)?);
    Ok(CurveResult {
        row: SpectrumRow {
            class_id: m.id(),
            kind: RowKind::Curve,
            word_or_slope: m.label(),
            complexity: m.complexity(),
            l_x,
            l_y,
            ratio: l_y / l_x,
            crossed_strip: checks.iter().any(|k| k.crossings > 0),
        },
        checks,
    })
}

fn analyze_arc(outcome: &PeelOutcome, x: &MarkedSurface, a: &ArcClass, cfg: &PeelConfig) -> Result<SpectrumRow> {
    let m = Measured::Arc(a.clone());
    let mut crossed = false;
    for step in &outcome.steps {
        if step.arc == a.tag || arc_meets_strip(&step.source, &step.strip, a, cfg.crossing_radius)? {
            crossed = true;
            break;
        }
    }
    let (l_x, l_y) = (m.length(x)?, m.length(&outcome.surface)?);
    Ok(SpectrumRow {
        class_id: m.id(),
        kind: RowKind::Arc,
        word_or_slope: m.label(),
        complexity: m.complexity(),
        l_x,
        l_y,
        ratio: l_y / l_x,
        crossed_strip: crossed,
    })
}

/// Peels `x` along `arcs` and tabulates curves and arcs up to `bound`, with
/// reports for `kinds`.
pub fn analyze(
    x: &MarkedSurface,
    arcs: &[ArcClass],
    cfg: &PeelConfig,
    bound: EnumerationBound,
    kinds: &[MetricKind],
) -> Result<PeelAnalysis> {
    let outcome = peel(x, arcs, cfg)?;
    let t = x.topology();
    let curves = enumerate_scc(t, bound)?;
    let all_arcs = enumerate_arcs(t, bound)?;
    let curve_results = par::map(&curves, |c| analyze_curve(&outcome, x, c, cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let arc_rows = par::map(&all_arcs, |a| analyze_arc(&outcome, x, a, cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(curve_results.len() + arc_rows.len());
    let mut checks = Vec::new();
    for r in curve_results {
        rows.push(r.row);
        checks.extend(r.checks);
    }
    rows.extend(arc_rows);

    let lengths: HashMap<&str, &SpectrumRow> = rows.iter().map(|r| (r.class_id.as_str(), r)).collect();
    let mut reports = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let table: Vec<RatioRow> = class_set(x, kind, bound)?
            .iter()
            .map(|m| {
                let r = lengths[m.id().as_str()];
                RatioRow {
                    class_id: r.class_id.clone(),
                    kind: r.kind,
                    word_or_slope: r.word_or_slope.clone(),
                    complexity: r.complexity,
                    l_x: r.l_x,
                    l_y: r.l_y,
                    ratio: if kind == MetricKind::D {
                        r.l_x / r.l_y
                    } else {
                        r.l_y / r.l_x
                    },
                }
            })
            .collect();
        reports.push(report_from_rows(x, &table, kind, bound)?);
    }
    Ok(PeelAnalysis {
        bound,
        eps: cfg.eps,
        outcome,
        source: x.clone(),
        rows,
        checks,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{pants_arc, slope_arc, Slope};
    use crate::surface::{pants_from_lengths, torus_from_traces};

    fn cfg() -> PeelConfig {
        PeelConfig {
            embed_check_radius: 6,
            ..PeelConfig::with_eps(0.1)
        }
    }

    #[test]
    fn seam_peel_table() {
        let x = pants_from_lengths(2.0, 2.0, 2.0).unwrap();
        let a = analyze(
            &x,
            &[pants_arc(1, 2).unwrap()],
            &cfg(),
            EnumerationBound::new(3).unwrap(),
            &MetricKind::ALL,
        )
        .unwrap();
        assert!(a.crossed("boundary:1") && a.crossed("boundary:2"));
        assert!(!a.crossed("boundary:3"));
        assert!((a.row("boundary:3").unwrap().ratio - 1.0).abs() < 1e-6);
        assert!(a.checks.iter().all(|c| c.holds && c.saturated));
        assert!(a.crossed("arc:12"));
        let big = a.report(MetricKind::BigK).unwrap();
        assert!(big.value > 0.0);
        assert_eq!(big.argmax, "arc:12");
        assert!(a.report(MetricKind::D).unwrap().value > 0.0);
        assert!(a.report(MetricKind::SmallK).unwrap().value <= 1e-9);
    }

    #[test]
    fn single_torus_peel_separates_crossing_classes() {
        let x = torus_from_traces(4.0, 4.0, 4.0).unwrap();
        let a = analyze(
            &x,
            &[slope_arc(Slope::INFINITY)],
            &cfg(),
            EnumerationBound::new(4).unwrap(),
            &MetricKind::ALL,
        )
        .unwrap();
        for r in a.rows.iter().filter(|r| r.kind == RowKind::Curve) {
            if r.crossed_strip {
                assert!(r.ratio < 1.0 - 1e-4, "{}", r.class_id);
            } else {
                assert!((r.ratio - 1.0).abs() < 1e-6, "{}", r.class_id);
            }
        }
        assert!(!a.crossed("slope:1/0"));
        assert!(a.crossed("slope:0/1") && a.crossed("boundary"));
        assert!(a.checks.iter().all(|c| c.holds));
        assert_eq!(a.report(MetricKind::BigK).unwrap().argmax, "arc:1/0");
    }
}
