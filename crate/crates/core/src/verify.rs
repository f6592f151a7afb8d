//! Seeded invariant suites over the kernel, the peel and the metrics.
//!
//! Every random case draws from its own ChaCha8 stream, so results do not
//! depend on evaluation order or thread count.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, PeelAnalysis, PRESERVED_TOL};
use crate::enumerate::{enumerate_scc, EnumerationBound};
use crate::error::{Error, Result};
use crate::h2::{
    dist, equidistant_project, on_common_leaf, perpendicular_frame, translation_along, Geodesic, Isometry, Point, Strip,
};
use crate::metrics::{MetricKind, RowKind};
use crate::par;
use crate::peel::{peel, PeelConfig};
use crate::surface::{ArcClass, CurveKind, MarkedSurface, Topology, WeightedMulticurve};

/// Slack for distance inequalities.
pub const LEMMA_TOL: f64 = 1e-9;
/// Relative slack for the right-triangle identity.
pub const TRIANGLE_TOL: f64 = 1e-10;
/// Largest allowed change when the wall radius grows by 4.
pub const STABILITY_TOL: f64 = 1e-8;
/// Largest allowed change of a truncated supremum between the last two bounds.
pub const STABILIZATION_TOL: f64 = 1e-6;
/// Margin by which a peeled arc must grow.
pub const ARC_GROWTH_MARGIN: f64 = 1e-4;
/// Widths used by the collapse suite.
pub const COLLAPSE_WIDTHS: [f64; 3] = [0.05, 0.1, 0.3];
/// Failing cases described in a report.
const MAX_NOTES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma,
    Triangle,
    Collapse,
    Peel,
    Theorem,
    Remark,
    Multicurve,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Lemma,
        Suite::Triangle,
        Suite::Collapse,
        Suite::Peel,
        Suite::Theorem,
        Suite::Remark,
        Suite::Multicurve,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Lemma => "lemma",
            Suite::Triangle => "triangle",
            Suite::Collapse => "collapse",
            Suite::Peel => "peel",
            Suite::Theorem => "theorem",
            Suite::Remark => "remark",
            Suite::Multicurve => "multicurve",
        }
    }

    /// Whether the suite needs a peeled pair.
    pub fn needs_peel(&self) -> bool {
        matches!(self, Suite::Peel | Suite::Theorem | Suite::Remark | Suite::Multicurve)
    }

    fn stream(&self) -> u64 {
        (*self as u64 + 1) << 40
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

/// Sample counts for the randomized suites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSizes {
    /// Random configurations for the lemma, triangle and collapse suites.
    pub pairs: usize,
    /// Constructed equality cases for the lemma suite.
    pub equality: usize,
    /// Crossing chords for the collapse suite.
    pub chords: usize,
    pub multicurves: usize,
}

impl Default for SampleSizes {
    fn default() -> Self {
        SampleSizes {
            pairs: 10_000,
            equality: 1_000,
            chords: 1_000,
            multicurves: 100,
        }
    }
}

/// A named scalar criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            threshold,
            passed: value < threshold,
        }
    }

    fn above(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            threshold,
            passed: value > threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub failures: usize,
    pub checks: Vec<Check>,
    /// The first few failing cases.
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Accumulates per-case outcomes.
#[derive(Default)]
struct Tally {
    cases: usize,
    failures: usize,
    notes: Vec<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, note: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.notes.len() < MAX_NOTES {
                self.notes.push(note());
            }
        }
    }

    fn report(self, suite: Suite, checks: Vec<Check>) -> SuiteReport {
        SuiteReport {
            suite,
            cases: self.cases,
            failures: self.failures,
            checks,
            notes: self.notes,
        }
    }
}

/// Generator for case `case` of `suite`.
pub fn case_rng(seed: u64, suite: Suite, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite.stream() | case);
    rng
}

fn random_isometry(rng: &mut impl Rng) -> Isometry {
    let p = Point {
        x: rng.gen_range(-3.0..3.0),
        y: rng.gen_range(-2.0f64..2.0).exp(),
    };
    Isometry::affine_to(p) * Isometry::rotation(rng.gen_range(0.0..2.0 * PI))
}

/// A point at hyperbolic distance below `radius` from `i`.
fn random_point(rng: &mut impl Rng, radius: f64) -> Point {
    let r: f64 = rng.gen_range(0.0..radius);
    Isometry::rotation(rng.gen_range(0.0..2.0 * PI)).apply(Point { x: 0.0, y: r.exp() })
}

fn polar(r: f64, theta: f64) -> Point {
    Point {
        x: r * theta.cos(),
        y: r * theta.sin(),
    }
}

/// Projection to `g0` along the equidistants of `l` is 1-Lipschitz, and two
/// points have the same image exactly when they share an orthogonal leaf.
pub fn lemma_suite(seed: u64, samples: &SampleSizes) -> SuiteReport {
    let l0 = Geodesic::IMAGINARY_AXIS;
    let g00 = Geodesic::circle(1.0);
    let lipschitz = par::map_range(samples.pairs, |k| {
        let mut rng = case_rng(seed, Suite::Lemma, k as u64);
        let m = random_isometry(&mut rng);
        let (l, g0) = (m.apply_geodesic(&l0), m.apply_geodesic(&g00));
        let (p, q) = (
            m.apply(random_point(&mut rng, 4.0)),
            m.apply(random_point(&mut rng, 4.0)),
        );
        let pp = equidistant_project(&l, &g0, p)?;
        let pq = equidistant_project(&l, &g0, q)?;
        Ok::<f64, Error>(dist(pp, pq) - dist(p, q))
    });
    let equality = par::map_range(samples.equality, |k| {
        let mut rng = case_rng(seed, Suite::Lemma, (1 << 32) | k as u64);
        let m = random_isometry(&mut rng);
        let (l, g0) = (m.apply_geodesic(&l0), m.apply_geodesic(&g00));
        let r1 = rng.gen_range(-2.0f64..2.0).exp();
        let same = k.is_multiple_of(2);
        let r2 = if same {
            r1
        } else {
            let step: f64 = rng.gen_range(1e-3..1.0);
            r1 * if rng.gen::<bool>() { step.exp() } else { (-step).exp() }
        };
        let p = m.apply(polar(r1, rng.gen_range(0.05..PI - 0.05)));
        let q = m.apply(polar(r2, rng.gen_range(0.05..PI - 0.05)));
        let n = perpendicular_frame(&l, &g0)?;
        let oracle = (n.apply(p).abs().ln() - n.apply(q).abs().ln()).abs() <= LEMMA_TOL;
        let detected = on_common_leaf(&l, p, q, 1e-7);
        Ok::<(bool, bool, bool), Error>((same, oracle, detected))
    });
    let mut t = Tally::default();
    let mut worst = f64::NEG_INFINITY;
    for (k, r) in lipschitz.into_iter().enumerate() {
        match r {
            Ok(v) => {
                worst = worst.max(v);
                t.record(v <= LEMMA_TOL, || format!("case {k}: excess {v:e}"));
            }
            Err(e) => t.record(false, || format!("case {k}: {e}")),
        }
    }
    let mut agree = 0usize;
    for (k, r) in equality.into_iter().enumerate() {
        match r {
            Ok((same, oracle, detected)) => {
                let ok = same == oracle && oracle == detected;
                agree += ok as usize;
                t.record(ok, || {
                    format!("equality case {k}: constructed {same}, oracle {oracle}, detected {detected}")
                });
            }
            Err(e) => t.record(false, || format!("equality case {k}: {e}")),
        }
    }
    let rate = if samples.equality == 0 {
        1.0
    } else {
        agree as f64 / samples.equality as f64
    };
    t.report(
        Suite::Lemma,
        vec![
            Check::below("max_excess", worst, LEMMA_TOL),
            Check::above("equality_agreement", rate, 1.0 - 1e-12),
        ],
    )
}

/// `cosh c = cosh a cosh b` for right triangles with hypotenuse `c`.
pub fn triangle_suite(seed: u64, samples: &SampleSizes) -> SuiteReport {
    let circle = Geodesic::circle(1.0);
    let errors = par::map_range(samples.pairs, |k| {
        let mut rng = case_rng(seed, Suite::Triangle, k as u64);
        let m = random_isometry(&mut rng);
        let (a, b) = (rng.gen_range(0.05..4.0), rng.gen_range(0.05..4.0));
        let c = m.apply(Point::I);
        let pa = m.apply(Point { x: 0.0, y: f64::exp(a) });
        let pb = m.apply(translation_along(&circle, b).apply(Point::I));
        let hyp = dist(pa, pb).cosh();
        (hyp - dist(pb, c).cosh() * dist(pa, c).cosh()).abs() / hyp
    });
    let mut t = Tally::default();
    let mut worst: f64 = 0.0;
    for (k, e) in errors.into_iter().enumerate() {
        worst = worst.max(e);
        t.record(e <= TRIANGLE_TOL, || format!("case {k}: relative error {e:e}"));
    }
    t.report(
        Suite::Triangle,
        vec![Check::below("max_relative_error", worst, TRIANGLE_TOL)],
    )
}

/// The strip collapse is 1-Lipschitz and shortens every crossing chord by at
/// least `log(1 + e^{-AC} ε²)`.
pub fn collapse_suite(seed: u64, samples: &SampleSizes) -> SuiteReport {
    let lipschitz = par::map_range(samples.pairs, |k| {
        let mut rng = case_rng(seed, Suite::Collapse, k as u64);
        let eps = COLLAPSE_WIDTHS[k % COLLAPSE_WIDTHS.len()];
        let m = random_isometry(&mut rng);
        let strip = Strip::normalized(eps)?.transformed(&m);
        let (p, q) = (
            m.apply(random_point(&mut rng, 3.0)),
            m.apply(random_point(&mut rng, 3.0)),
        );
        Ok::<f64, Error>(dist(strip.collapse(p), strip.collapse(q)) - dist(p, q))
    });
    let chords = par::map_range(samples.chords, |k| {
        let mut rng = case_rng(seed, Suite::Collapse, (1 << 32) | k as u64);
        let eps = COLLAPSE_WIDTHS[k % COLLAPSE_WIDTHS.len()];
        let m = random_isometry(&mut rng);
        let strip = Strip::normalized(eps)?.transformed(&m);
        let (mut t1, mut t2) = (
            rng.gen_range(0.02..PI / 2.0 - 0.02),
            rng.gen_range(0.02..PI / 2.0 - 0.02),
        );
        if rng.gen::<bool>() {
            t1 = PI - t1;
            t2 = PI - t2;
        }
        let a = m.apply(polar((-0.5 * eps).exp(), t1));
        let b = m.apply(polar((0.5 * eps).exp(), t2));
        let ac = dist(a, strip.collapse(b));
        let margin = dist(a, b) - ac - (-ac).exp().mul_add(eps * eps, 1.0).ln();
        Ok::<f64, Error>(margin)
    });
    let mut t = Tally::default();
    let mut worst = f64::NEG_INFINITY;
    for (k, r) in lipschitz.into_iter().enumerate() {
        match r {
            Ok(v) => {
                worst = worst.max(v);
                t.record(v <= LEMMA_TOL, || format!("pair {k}: excess {v:e}"));
            }
            Err(e) => t.record(false, || format!("pair {k}: {e}")),
        }
    }
    let mut min_margin = f64::INFINITY;
    for (k, r) in chords.into_iter().enumerate() {
        match r {
            Ok(v) => {
                min_margin = min_margin.min(v);
                t.record(v >= -LEMMA_TOL, || format!("chord {k}: margin {v:e}"));
            }
            Err(e) => t.record(false, || format!("chord {k}: {e}")),
        }
    }
    t.report(
        Suite::Collapse,
        vec![
            Check::below("max_excess", worst, LEMMA_TOL),
            Check::above("min_chord_margin", min_margin, -LEMMA_TOL),
        ],
    )
}

/// A surface, the arcs to peel and the enumeration bound.
#[derive(Clone, Debug)]
pub struct PeelSetup {
    pub surface: MarkedSurface,
    pub arcs: Vec<ArcClass>,
    pub cfg: PeelConfig,
    pub bound: EnumerationBound,
}

impl PeelSetup {
    pub fn analyze(&self) -> Result<PeelAnalysis> {
        analyze(&self.surface, &self.arcs, &self.cfg, self.bound, &MetricKind::ALL)
    }
}

/// Disjoint classes keep their length, crossing classes shrink by at least the
/// chord bound, wall searches saturate, and a wall radius larger by 4 changes
/// nothing.
pub fn peel_suite(setup: &PeelSetup, a: &PeelAnalysis) -> Result<SuiteReport> {
    let mut t = Tally::default();
    for step in &a.outcome.steps {
        for g in &step.generators {
            t.record(g.saturated, || {
                format!("walls for {} at arc {} did not saturate", g.generator, step.arc)
            });
        }
    }
    for c in &a.checks {
        t.record(c.holds && c.saturated, || {
            format!(
                "{} at step {}: decrease {:e}, bound {:e}, crossings {}, saturated {}",
                c.class_id, c.step, c.decrease, c.bound, c.crossings, c.saturated
            )
        });
    }
    let mut min_decrease = f64::INFINITY;
    let mut max_preserved: f64 = 0.0;
    for r in a.rows.iter().filter(|r| r.kind == RowKind::Curve) {
        let change = r.l_x - r.l_y;
        if r.crossed_strip {
            min_decrease = min_decrease.min(change);
            t.record(change > PRESERVED_TOL, || {
                format!("{} crosses a strip but changed by {change:e}", r.class_id)
            });
        } else {
            max_preserved = max_preserved.max(change.abs());
            t.record(change.abs() <= PRESERVED_TOL, || {
                format!("{} misses every strip but changed by {change:e}", r.class_id)
            });
        }
    }
    let wider = PeelConfig {
        wall_radius: setup.cfg.wall_radius + 4,
        ..setup.cfg
    };
    let y2 = peel(&setup.surface, &setup.arcs, &wider)?.surface;
    let mut drift: f64 = 0.0;
    for c in enumerate_scc(setup.surface.topology(), setup.bound)? {
        drift = drift.max((a.peeled().curve_length(&c)? - y2.curve_length(&c)?).abs());
    }
    let mut checks = vec![
        Check::below("radius_drift", drift, STABILITY_TOL),
        Check::below("max_preserved_change", max_preserved, PRESERVED_TOL + f64::EPSILON),
    ];
    if min_decrease.is_finite() {
        checks.push(Check::above("min_crossing_decrease", min_decrease, PRESERVED_TOL));
    }
    Ok(t.report(Suite::Peel, checks))
}

/// Every enumerated curve shrinks, so `k < 0`, the supremum has settled, and
/// the uniform gap is positive. Shrinking means by more than [`PRESERVED_TOL`]
/// so that rounding noise on an untouched class does not count.
pub fn theorem_suite(a: &PeelAnalysis) -> Result<SuiteReport> {
    let mut t = Tally::default();
    for r in a.rows.iter().filter(|r| r.kind == RowKind::Curve) {
        t.record(r.ratio < 1.0 - PRESERVED_TOL, || {
            format!("{} has ratio {}", r.class_id, r.ratio)
        });
    }
    let k = a.report(MetricKind::SmallK).ok_or(Error::EmptyClassSet)?;
    let settle = match k.stabilization.as_slice() {
        [.., p, q] => (q.value - p.value).abs(),
        _ => 0.0,
    };
    let gap = k.gap.unwrap_or(0.0);
    Ok(t.report(
        Suite::Theorem,
        vec![
            Check::below("k", k.value, -PRESERVED_TOL),
            Check::below("k_last_increment", settle, STABILIZATION_TOL),
            Check::above("uniform_gap", gap, PRESERVED_TOL),
        ],
    ))
}

/// The peeled arcs grow, `K > 0` is attained on a peeled arc, and `d > 0`.
pub fn remark_suite(a: &PeelAnalysis) -> Result<SuiteReport> {
    let mut t = Tally::default();
    let peeled: Vec<String> = a.outcome.steps.iter().map(|s| format!("arc:{}", s.arc)).collect();
    let mut min_growth = f64::INFINITY;
    for id in &peeled {
        let r = a
            .row(id)
            .ok_or_else(|| Error::Config(format!("{id} is not enumerated at {}", a.bound)))?;
        let growth = r.l_y - r.l_x;
        min_growth = min_growth.min(growth);
        t.record(growth > ARC_GROWTH_MARGIN, || format!("{id} grew by {growth:e}"));
    }
    let big = a.report(MetricKind::BigK).ok_or(Error::EmptyClassSet)?;
    t.record(peeled.contains(&big.argmax), || format!("K attained on {}", big.argmax));
    let d = a.report(MetricKind::D).ok_or(Error::EmptyClassSet)?;
    Ok(t.report(
        Suite::Remark,
        vec![
            Check::above("min_arc_growth", min_growth, ARC_GROWTH_MARGIN),
            Check::above("K", big.value, 0.0),
            Check::above("d", d.value, 0.0),
        ],
    ))
}

/// Random weighted multicurve: one interior class with the boundary on the
/// torus, a subset of the boundary on pants.
fn random_multicurve(a: &PeelAnalysis, rng: &mut impl Rng) -> Result<WeightedMulticurve> {
    let curves = enumerate_scc(a.source.topology(), a.bound)?;
    let (boundary, interior): (Vec<_>, Vec<_>) = curves.into_iter().partition(|c| c.kind == CurveKind::Boundary);
    let mut parts = Vec::new();
    if a.source.topology() == Topology::PANTS || interior.is_empty() {
        for c in &boundary {
            if parts.is_empty() || rng.gen::<bool>() {
                parts.push((c.clone(), rng.gen_range(0.1..5.0)));
            }
        }
    } else {
        let c = &interior[rng.gen_range(0..interior.len())];
        parts.push((c.clone(), rng.gen_range(0.1..5.0)));
        if rng.gen::<bool>() {
            parts.push((boundary[0].clone(), rng.gen_range(0.1..5.0)));
        }
    }
    WeightedMulticurve::new(parts)
}

/// A weighted multicurve shrinks when some component crosses a strip and keeps
/// its length otherwise.
pub fn multicurve_suite(a: &PeelAnalysis, seed: u64, samples: &SampleSizes) -> Result<SuiteReport> {
    let mut t = Tally::default();
    let mut crossing = 0usize;
    for k in 0..samples.multicurves {
        let mut rng = case_rng(seed, Suite::Multicurve, k as u64);
        let m = random_multicurve(a, &mut rng)?;
        let (lx, ly) = (a.source.multicurve_length(&m)?, a.peeled().multicurve_length(&m)?);
        let crosses = m.components().iter().any(|(c, _)| a.crossed(&c.id));
        crossing += crosses as usize;
        let ok = if crosses {
            ly < lx - PRESERVED_TOL
        } else {
            (ly - lx).abs() <= PRESERVED_TOL
        };
        t.record(ok, || {
            let ids: Vec<&str> = m.components().iter().map(|(c, _)| c.id.as_str()).collect();
            format!("{ids:?}: {lx} -> {ly}, crossing {crosses}")
        });
    }
    Ok(t.report(
        Suite::Multicurve,
        vec![Check {
            name: "crossing_fraction".to_string(),
            value: crossing as f64 / samples.multicurves.max(1) as f64,
            threshold: 0.0,
            passed: true,
        }],
    ))
}

/// Runs `suites` in order; the peel is computed once when some suite needs it.
pub fn run_suites(
    suites: &[Suite],
    seed: u64,
    samples: &SampleSizes,
    setup: Option<&PeelSetup>,
) -> Result<Vec<SuiteReport>> {
    let analysis = match (suites.iter().any(Suite::needs_peel), setup) {
        (true, Some(s)) => Some(s.analyze()?),
        (true, None) => return Err(Error::Config("peel suites need a surface and arcs".into())),
        (false, _) => None,
    };
    let peeled = || analysis.as_ref().expect("analysis computed above");
    suites
        .iter()
        .map(|suite| match suite {
            Suite::Lemma => Ok(lemma_suite(seed, samples)),
            Suite::Triangle => Ok(triangle_suite(seed, samples)),
            Suite::Collapse => Ok(collapse_suite(seed, samples)),
            Suite::Peel => peel_suite(setup.expect("checked above"), peeled()),
            Suite::Theorem => theorem_suite(peeled()),
            Suite::Remark => remark_suite(peeled()),
            Suite::Multicurve => multicurve_suite(peeled(), seed, samples),
        })
        .collect()
}
