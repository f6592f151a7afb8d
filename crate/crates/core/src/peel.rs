//! Peeling an ε-strip around an orthogeodesic arc.
//!
//! The collapse of every lift of the strip is an equivariant map from `X̂` to
//! `Ŷ_B` which is an isometry on each complementary region of the lifts. Fixing
//! the region of the basepoint, the new holonomy of a generator `g` is
//! `ρ'(g) = τ_{W1}^{∓1} ⋯ τ_{Wn}^{∓1} ρ(g)`, where `W1, …, Wn` are the lifts
//! ("walls") crossed by the segment from the basepoint to its `ρ(g)`-image and
//! `τ_W` is the translation by ε along the axis of `W`.

use std::collections::HashMap;

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::h2::{axis_of, dist, strip_around, translation_along, Geodesic, Isometry, Point, Strip, INCIDENCE_TOL};
use crate::par;
use crate::surface::{ArcClass, ArcTag, MarkedSurface};
use crate::word::{GroupWord, Letter};

/// Offset beyond a wall boundary used when moving the basepoint out of a wall.
pub const BASEPOINT_OFFSET: f64 = 1e-4;
/// Basepoint moves attempted before giving up.
pub const BASEPOINT_RETRIES: usize = 5;
/// Width increment applied after a tangency.
pub const TANGENT_NUDGE: f64 = 1e-6;
const TANGENT_RETRIES: usize = 3;
/// Depth of the cheap search for walls containing the basepoint.
const BASEPOINT_SCAN_DEPTH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeelConfig {
    pub eps: f64,
    /// Word-length bound of the wall search for generators.
    pub wall_radius: usize,
    pub embed_check_radius: usize,
    pub tolerance: f64,
    /// Search depth around each prefix when locating walls along a closed
    /// geodesic.
    pub crossing_radius: usize,
}

impl Default for PeelConfig {
    fn default() -> Self {
        PeelConfig {
            eps: 0.1,
            wall_radius: 12,
            embed_check_radius: 10,
            tolerance: 1e-9,
            crossing_radius: 6,
        }
    }
}

impl PeelConfig {
    pub fn with_eps(eps: f64) -> Self {
        PeelConfig {
            eps,
            ..PeelConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::NonPositiveWidth { eps: self.eps });
        }
        if self.wall_radius < 1 || self.embed_check_radius < 1 || self.crossing_radius < 1 {
            return Err(Error::Config("search radii must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// A lift `h·B0` of the base strip.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Wall {
    pub coset: GroupWord,
    pub strip: Strip,
    /// `ρ(h) T0 ρ(h)⁻¹`.
    pub twist: Isometry,
}

/// A wall met by a segment, with the distance from the segment start to the
/// wall's middle leaf and the direction of travel (`+1` when the leaf
/// coordinate increases).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossedWall {
    pub wall: Wall,
    pub position: f64,
    pub direction: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WallSearch {
    pub walls: Vec<CrossedWall>,
    /// No wall was found at the two largest word lengths searched.
    pub saturated: bool,
    pub radius: usize,
}

/// `|M z|²`.
#[inline]
fn image_norm_sqr(m: &Isometry, p: Point) -> f64 {
    let (nx, ny) = (m.a * p.x + m.b, m.a * p.y);
    let (dx, dy) = (m.c * p.x + m.d, m.c * p.y);
    (nx * nx + ny * ny) / (dx * dx + dy * dy)
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Band {
    Near,
    Touch,
    Far,
}

/// Thresholds on `|z|²` in a wall frame.
#[derive(Clone, Copy, Debug)]
struct Bands {
    lo: f64,
    hi: f64,
}

impl Bands {
    fn new(eps: f64) -> Self {
        Bands {
            lo: (-eps - 2.0 * INCIDENCE_TOL).exp(),
            hi: (eps + 2.0 * INCIDENCE_TOL).exp(),
        }
    }

    #[inline]
    fn classify(&self, r2: f64) -> Band {
        if r2 < self.lo {
            Band::Near
        } else if r2 > self.hi {
            Band::Far
        } else {
            Band::Touch
        }
    }
}

struct Hit<T> {
    word: GroupWord,
    depth: usize,
    value: T,
}

/// Depth-first enumeration of wall frames `Q_h = N ρ(h)⁻¹` over reduced words
/// `h`, updated by `Q_{hx} = (N ρ(x)⁻¹ N⁻¹) Q_h`.
struct Scanner {
    n: Isometry,
    steps: Vec<(Letter, Isometry)>,
}

impl Scanner {
    fn new(s: &MarkedSurface, n: Isometry) -> Result<Self> {
        let ninv = n.inverse();
        let steps = Letter::all(s.topology().rank())
            .into_iter()
            .map(|x| {
                let m = s.holonomy(&GroupWord::from_letters([x]))?;
                Ok((x, n * m.inverse() * ninv))
            })
            .collect::<Result<_>>()?;
        Ok(Scanner { n, steps })
    }

    fn frame_of(&self, s: &MarkedSurface, h: &GroupWord) -> Result<Isometry> {
        Ok(self.n * s.holonomy(h)?.inverse())
    }

    /// Visits `root·v` for reduced extensions with `|v| ≤ depth`; hits are
    /// returned in shortlex order of the full word.
    fn scan<T, F>(&self, root: &GroupWord, q_root: Isometry, depth: usize, visit: &F) -> Vec<Hit<T>>
    where
        T: Send,
        F: Fn(&Isometry) -> Option<T> + Sync,
    {
        let split = depth.min(2);
        let mut hits = Vec::new();
        let mut frontier = vec![(root.letters().to_vec(), q_root)];
        for d in 0..split {
            let mut next = Vec::new();
            for (word, q) in &frontier {
                if let Some(value) = visit(q) {
                    hits.push(Hit {
                        word: GroupWord::from_letters(word.iter().copied()),
                        depth: d,
                        value,
                    });
                }
                next.extend(self.children(word, q));
            }
            frontier = next;
        }
        let deeper = par::map(&frontier, |(word, q)| {
            let mut out = Vec::new();
            let mut stack = word.clone();
            self.dfs(&mut stack, *q, split, depth, visit, &mut out);
            out
        });
        hits.extend(deeper.into_iter().flatten());
        hits.sort_by(|x, y| x.word.cmp(&y.word));
        hits
    }

    fn children(&self, word: &[Letter], q: &Isometry) -> Vec<(Vec<Letter>, Isometry)> {
        self.steps
            .iter()
            .filter(|(x, _)| !word.last().is_some_and(|l| l.cancels(*x)))
            .map(|(x, k)| {
                let mut w = word.to_vec();
                w.push(*x);
                (w, *k * *q)
            })
            .collect()
    }

    fn dfs<T, F>(&self, stack: &mut Vec<Letter>, q: Isometry, d: usize, depth: usize, visit: &F, out: &mut Vec<Hit<T>>)
    where
        F: Fn(&Isometry) -> Option<T>,
    {
        if let Some(value) = visit(&q) {
            out.push(Hit {
                word: GroupWord::from_letters(stack.iter().copied()),
                depth: d,
                value,
            });
        }
        if d == depth {
            return;
        }
        for (x, k) in &self.steps {
            if stack.last().is_some_and(|l| l.cancels(*x)) {
                continue;
            }
            stack.push(*x);
            self.dfs(stack, *k * q, d + 1, depth, visit, out);
            stack.pop();
        }
    }
}

/// Strip of width `eps` around the realization of `arc`.
pub fn base_strip(s: &MarkedSurface, arc: &ArcClass, eps: f64) -> Result<Strip> {
    let (seg, _) = s.arc_geodesic(arc)?;
    strip_around(&seg, eps)
}

/// Every translate `ρ(g)·B0` with `1 ≤ |g| ≤ radius` is disjoint from `B0`.
pub fn check_embedded(s: &MarkedSurface, b0: &Strip, radius: usize) -> bool {
    if radius == 0 {
        warn!("embedding check with radius 0 is vacuous");
        return true;
    }
    let scanner = match Scanner::new(s, *b0.frame()) {
        Ok(sc) => sc,
        Err(_) => return false,
    };
    let eps = b0.width();
    let hits = scanner.scan(&GroupWord::identity(), *b0.frame(), radius, &|q: &Isometry| {
        let t = Strip::from_frame(*q, eps);
        if t.axis().same_line(b0.axis(), INCIDENCE_TOL) {
            return None;
        }
        (!b0.disjoint_from(&t)).then_some(())
    });
    match hits.iter().find(|h| h.depth > 0) {
        Some(h) => {
            debug!("strip translate by {} meets the base strip", h.word);
            false
        }
        None => true,
    }
}

/// Reasons a wall search cannot proceed at the current basepoint or width.
#[derive(Clone, Debug, PartialEq)]
enum Obstruction {
    /// The basepoint lies inside the wall with this coset.
    Inside(GroupWord),
    Tangent(GroupWord),
}

impl Obstruction {
    fn into_error(self) -> Error {
        match self {
            Obstruction::Inside(h) => Error::BasepointInWall { coset: h.to_string() },
            Obstruction::Tangent(h) => Error::TangentWall { coset: h.to_string() },
        }
    }
}

fn touch_kind(q: &Isometry, p: Point, eps: f64, coset: GroupWord) -> Obstruction {
    let c = 0.5 * image_norm_sqr(q, p).ln();
    if (c.abs() - 0.5 * eps).abs() <= INCIDENCE_TOL {
        Obstruction::Tangent(coset)
    } else {
        Obstruction::Inside(coset)
    }
}

/// Walls within `radius` containing or touching the basepoint.
fn basepoint_obstruction(s: &MarkedSurface, scanner: &Scanner, b0: &Strip, radius: usize) -> Option<Obstruction> {
    let x0 = s.basepoint();
    let bands = Bands::new(b0.width());
    let hits = scanner.scan(&GroupWord::identity(), *b0.frame(), radius, &|q: &Isometry| {
        (bands.classify(image_norm_sqr(q, x0)) == Band::Touch).then_some(*q)
    });
    hits.into_iter()
        .next()
        .map(|h| touch_kind(&h.value, x0, b0.width(), h.word))
}

fn make_wall(s: &MarkedSurface, b0: &Strip, t0: &Isometry, coset: GroupWord) -> Result<Wall> {
    let m = s.holonomy(&coset)?;
    Ok(Wall {
        strip: b0.transformed(&m),
        twist: m.conjugate(t0),
        coset,
    })
}

fn dedup_walls(walls: &mut Vec<CrossedWall>) {
    let mut kept: Vec<CrossedWall> = Vec::with_capacity(walls.len());
    for w in walls.drain(..) {
        let dup = kept
            .iter()
            .any(|k| k.wall.strip.axis().same_line(w.wall.strip.axis(), INCIDENCE_TOL));
        if !dup {
            kept.push(w);
        }
    }
    *walls = kept;
}

fn search_segment(
    s: &MarkedSurface,
    scanner: &Scanner,
    b0: &Strip,
    t0: &Isometry,
    g: &GroupWord,
    radius: usize,
) -> std::result::Result<Result<WallSearch>, Obstruction> {
    let x0 = s.basepoint();
    let m = match s.holonomy(g) {
        Ok(m) => m,
        Err(e) => return Ok(Err(e)),
    };
    let x1 = m.apply(x0);
    let bands = Bands::new(b0.width());
    let hits = scanner.scan(&GroupWord::identity(), *b0.frame(), radius, &|q: &Isometry| {
        let (r0, r1) = (image_norm_sqr(q, x0), image_norm_sqr(q, x1));
        match (bands.classify(r0), bands.classify(r1)) {
            (Band::Touch, _) => Some((0u8, *q)),
            (_, Band::Touch) => Some((1u8, *q)),
            (Band::Near, Band::Far) | (Band::Far, Band::Near) => Some((2u8, *q)),
            _ => None,
        }
    });
    let mut walls = Vec::new();
    let mut deepest = 0;
    for hit in hits {
        let (which, q) = hit.value;
        match which {
            0 => return Err(touch_kind(&q, x0, b0.width(), hit.word)),
            1 => {
                let coset = &g.inverse() * &hit.word;
                return Err(touch_kind(&q, x1, b0.width(), coset));
            }
            _ => {}
        }
        deepest = deepest.max(hit.depth);
        let wall = match make_wall(s, b0, t0, hit.word) {
            Ok(w) => w,
            Err(e) => return Ok(Err(e)),
        };
        let carrier = match Geodesic::through(x0, x1) {
            Ok(c) => c,
            Err(e) => return Ok(Err(e)),
        };
        let position = carrier
            .intersection(&wall.strip.middle_leaf())
            .map(|p| dist(x0, p))
            .unwrap_or(f64::NAN);
        let direction = if image_norm_sqr(&q, x1) > image_norm_sqr(&q, x0) {
            1
        } else {
            -1
        };
        walls.push(CrossedWall {
            wall,
            position,
            direction,
        });
    }
    dedup_walls(&mut walls);
    walls.sort_by(|a, b| a.position.total_cmp(&b.position));
    let saturated = walls.is_empty() || deepest + 2 <= radius;
    Ok(Ok(WallSearch {
        walls,
        saturated,
        radius,
    }))
}

/// Walls crossed by the segment from the basepoint to its `ρ(g)`-image,
/// ordered from the basepoint, over cosets `h` with `|h| ≤ radius`.
pub fn walls_crossed(s: &MarkedSurface, b0: &Strip, t0: &Isometry, g: &GroupWord, radius: usize) -> Result<WallSearch> {
    if g.is_empty() {
        return Ok(WallSearch {
            walls: Vec::new(),
            saturated: true,
            radius,
        });
    }
    let scanner = Scanner::new(s, *b0.frame())?;
    match search_segment(s, &scanner, b0, t0, g, radius) {
        Ok(r) => r,
        Err(o) => Err(o.into_error()),
    }
}

/// Moves `x` radially (in the frame of wall `h`) just outside that wall.
fn push_out(s: &MarkedSurface, scanner: &Scanner, eps: f64, h: &GroupWord, x: Point) -> Result<Point> {
    let q = scanner.frame_of(s, h)?;
    let z = q.apply(x);
    let c = z.abs().ln();
    let target = if c >= 0.0 {
        0.5 * eps + BASEPOINT_OFFSET
    } else {
        -0.5 * eps - BASEPOINT_OFFSET
    };
    Ok(q.inverse().apply(z.scaled((target - c).exp())))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorWalls {
    pub generator: String,
    pub walls: Vec<WallRecord>,
    pub saturated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WallRecord {
    pub coset: GroupWord,
    pub position: f64,
    pub direction: i8,
}

/// One arc's surgery.
#[derive(Clone, Debug, Serialize)]
pub struct PeelStep {
    pub arc: ArcTag,
    pub arc_length: f64,
    /// Width actually used (nudged after tangencies).
    pub eps: f64,
    pub strip: Strip,
    pub basepoint: Point,
    pub sigma: i8,
    pub generators: Vec<GeneratorWalls>,
    #[serde(skip)]
    pub source: MarkedSurface,
    #[serde(skip)]
    pub result: MarkedSurface,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeelOutcome {
    #[serde(skip)]
    pub surface: MarkedSurface,
    pub steps: Vec<PeelStep>,
}

fn apply_cocycle(
    s: &MarkedSurface,
    searches: &[WallSearch],
    sigma: i8,
    basepoint: Point,
    label: String,
) -> Result<MarkedSurface> {
    let holonomy = s
        .generator_holonomy()
        .iter()
        .zip(searches)
        .map(|(g, search)| {
            let c = search.walls.iter().fold(Isometry::IDENTITY, |acc, w| {
                let t = if sigma * w.direction > 0 {
                    w.wall.twist.inverse()
                } else {
                    w.wall.twist
                };
                acc * t
            });
            c * *g
        })
        .collect();
    MarkedSurface::from_holonomy(s.topology(), holonomy, basepoint, label)
}

/// Peels a single arc from `s`.
pub fn peel_arc(s: &MarkedSurface, arc: &ArcClass, cfg: &PeelConfig) -> Result<PeelStep> {
    cfg.validate()?;
    let (seg, arc_length) = s.arc_geodesic(arc)?;
    let mut eps = cfg.eps;
    let mut last_err = None;
    for _ in 0..=TANGENT_RETRIES {
        let b0 = strip_around(&seg, eps)?;
        if !check_embedded(s, &b0, cfg.embed_check_radius) {
            return Err(Error::StripNotEmbedded {
                arc: arc.tag.to_string(),
                eps,
            });
        }
        match peel_with_strip(s, arc, &b0, arc_length, cfg) {
            Err(Error::TangentWall { coset }) => {
                warn!("tangent wall {coset}; widening strip by {TANGENT_NUDGE}");
                last_err = Some(Error::TangentWall { coset });
                eps += TANGENT_NUDGE;
            }
            other => return other,
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn peel_with_strip(
    s: &MarkedSurface,
    arc: &ArcClass,
    b0: &Strip,
    arc_length: f64,
    cfg: &PeelConfig,
) -> Result<PeelStep> {
    let eps = b0.width();
    let t0 = b0.twist();
    let scanner = Scanner::new(s, *b0.frame())?;
    let gens: Vec<GroupWord> = (0..s.topology().rank() as u8).map(GroupWord::generator).collect();
    let mut x = s.basepoint();
    let mut moves = 0;
    let mut current = s.clone().with_basepoint(x);
    let pre_depth = cfg.wall_radius.min(BASEPOINT_SCAN_DEPTH);
    let searches = loop {
        let obstruction = match basepoint_obstruction(&current, &scanner, b0, pre_depth) {
            Some(o) => Some(o),
            None => {
                let results: Vec<_> = gens
                    .iter()
                    .map(|g| search_segment(&current, &scanner, b0, &t0, g, cfg.wall_radius))
                    .collect();
                match results.iter().position(|r| r.is_err()) {
                    Some(i) => results.into_iter().nth(i).and_then(|r| r.err()),
                    None => {
                        break results
                            .into_iter()
                            .map(|r| r.expect("no obstruction"))
                            .collect::<Result<Vec<_>>>()?;
                    }
                }
            }
        };
        match obstruction {
            Some(Obstruction::Inside(h)) if moves < BASEPOINT_RETRIES => {
                moves += 1;
                x = push_out(s, &scanner, eps, &h, x)?;
                debug!("basepoint inside wall {h}; moved to {x}");
                current = s.clone().with_basepoint(x);
            }
            Some(o) => return Err(o.into_error()),
            None => unreachable!("loop breaks when unobstructed"),
        }
    };
    for (g, search) in gens.iter().zip(&searches) {
        if !search.saturated {
            return Err(Error::NonConvergedWalls {
                word: g.to_string(),
                radius: cfg.wall_radius,
            });
        }
    }
    let label = format!("{}|peel({},{})", s.label(), arc.tag, eps);
    let probe_len = s.word_length(&arc.carrier1)?;
    let mut sigma = 1i8;
    let mut y = apply_cocycle(&current, &searches, sigma, x, label.clone())?;
    if y.word_length(&arc.carrier1)? > probe_len + cfg.tolerance {
        sigma = -1;
        y = apply_cocycle(&current, &searches, sigma, x, label)?;
    }
    info!(
        "peeled arc {} (eps {eps}, sigma {sigma}, walls {:?})",
        arc.tag,
        searches.iter().map(|s| s.walls.len()).collect::<Vec<_>>()
    );
    let generators = s
        .generators()
        .iter()
        .zip(&searches)
        .map(|(name, search)| GeneratorWalls {
            generator: name.clone(),
            walls: search
                .walls
                .iter()
                .map(|w| WallRecord {
                    coset: w.wall.coset.clone(),
                    position: w.position,
                    direction: w.direction,
                })
                .collect(),
            saturated: search.saturated,
        })
        .collect();
    Ok(PeelStep {
        arc: arc.tag,
        arc_length,
        eps,
        strip: *b0,
        basepoint: x,
        sigma,
        generators,
        source: current,
        result: y,
    })
}

/// Peels the arcs one after the other; each strip is built on the surface
/// produced by the previous step.
pub fn peel(s: &MarkedSurface, arcs: &[ArcClass], cfg: &PeelConfig) -> Result<PeelOutcome> {
    cfg.validate()?;
    let mut current = s.clone();
    let mut steps = Vec::with_capacity(arcs.len());
    for arc in arcs {
        let step = peel_arc(&current, arc, cfg)?;
        current = step.result.clone();
        steps.push(step);
    }
    Ok(PeelOutcome {
        surface: current.relabeled(format!("{}|peeled", s.label())),
        steps,
    })
}

/// Crossing of one lift of a strip by the axis of a closed geodesic: `A` and
/// `B` are the points on `h1` and `h2`, and `AC` is the length of the chord
/// after collapsing that lift.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Chord {
    pub coset: GroupWord,
    pub ab: f64,
    pub ac: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveCrossing {
    /// Number of times the closed geodesic crosses the strip.
    pub count: usize,
    pub chords: Vec<Chord>,
    pub saturated: bool,
}

impl CurveCrossing {
    /// Largest collapsed chord, or 0 without crossings.
    pub fn max_collapsed_chord(&self) -> f64 {
        self.chords.iter().map(|c| c.ac).fold(0.0, f64::max)
    }
}

/// A lifted path seen from the frame of the prefix `root`: its endpoints
/// pulled back by `ρ(root)⁻¹`.
struct LocalView {
    root: GroupWord,
    a: Point,
    b: Point,
}

/// Views of the segment from `p` to `ρ(g)·q` from every prefix of `g`.
/// Points are moved one letter at a time, so far endpoints stay accurate.
fn prefix_views(s: &MarkedSurface, g: &GroupWord, p: Point, q: Point) -> Result<Vec<LocalView>> {
    let letters = g.letters();
    (0..=letters.len())
        .map(|k| {
            let head = GroupWord::from_letters(letters[..k].iter().copied());
            let tail = GroupWord::from_letters(letters[k..].iter().copied());
            Ok(LocalView {
                a: s.act(&head.inverse(), p)?,
                b: s.act(&tail, q)?,
                root: head,
            })
        })
        .collect()
}

/// Walls `root·v` with `|v| ≤ depth` over all views. A hit's depth is its
/// shortest `v`; hits are returned in shortlex order.
fn scan_views<T, F>(scanner: &Scanner, views: &[LocalView], depth: usize, visit: &F) -> Vec<Hit<T>>
where
    T: Send,
    F: Fn(usize, &Isometry) -> Option<T> + Sync,
{
    let mut index: HashMap<GroupWord, usize> = HashMap::new();
    let mut out: Vec<Hit<T>> = Vec::new();
    for (k, view) in views.iter().enumerate() {
        for hit in scanner.scan(&view.root, scanner.n, depth, &|q: &Isometry| visit(k, q)) {
            match index.get(&hit.word) {
                Some(&i) => out[i].depth = out[i].depth.min(hit.depth),
                None => {
                    index.insert(hit.word.clone(), out.len());
                    out.push(hit);
                }
            }
        }
    }
    out.sort_by(|x, y| x.word.cmp(&y.word));
    out
}

/// How often the closed geodesic of `word` crosses the strip whose lift is
/// `b0`, with the chord lengths of each crossing.
pub fn curve_crossings(s: &MarkedSurface, b0: &Strip, word: &GroupWord, depth: usize) -> Result<CurveCrossing> {
    let w = word.cyclically_reduced();
    let (axis, len) = axis_of(&s.holonomy(&w)?)?;
    let scanner = Scanner::new(s, *b0.frame())?;
    let bands = Bands::new(b0.width());
    let p0 = axis.project(s.basepoint());
    let mut start = None;
    for k in 0..7 {
        let p = translation_along(&axis, len.min(1.0) * k as f64 / 7.0).apply(p0);
        let touching = scanner.scan(&GroupWord::identity(), scanner.n, depth, &|q: &Isometry| {
            (bands.classify(image_norm_sqr(q, p)) == Band::Touch).then_some(())
        });
        if touching.is_empty() {
            start = Some(p);
            break;
        }
    }
    let p = start.ok_or_else(|| Error::BasepointInWall { coset: w.to_string() })?;
    let views = prefix_views(s, &w, p, p)?;
    let hits = scan_views(&scanner, &views, depth, &|k, q: &Isometry| {
        let (v0, v1) = (&views[k].a, &views[k].b);
        let (b0, b1) = (
            bands.classify(image_norm_sqr(q, *v0)),
            bands.classify(image_norm_sqr(q, *v1)),
        );
        matches!((b0, b1), (Band::Near, Band::Far) | (Band::Far, Band::Near)).then_some((k, *q))
    });
    let saturated = hits.iter().all(|h| h.depth < depth);
    let mut chords = Vec::with_capacity(hits.len());
    for hit in hits {
        let (k, q) = hit.value;
        let (local_axis, _) = axis_of(&s.holonomy(&w.rotated(k))?)?;
        let wall = Strip::from_frame(q, b0.width());
        let (h1, h2) = wall.bounding();
        let (a, b) = match (local_axis.intersection(&h1), local_axis.intersection(&h2)) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        chords.push(Chord {
            coset: hit.word,
            ab: dist(a, b),
            ac: dist(a, wall.collapse(b)),
        });
    }
    Ok(CurveCrossing {
        count: chords.len(),
        chords,
        saturated,
    })
}

/// A lift of an arc's realization running from `a` to `ρ(path)·b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcLift {
    pub path: GroupWord,
    pub a: Point,
    pub b: Point,
}

/// Foot on `axis` of the perpendicular to `ρ(g)·axis`. Only the product of the
/// far endpoints enters, which stays accurate when that geodesic is tiny.
fn foot_toward(s: &MarkedSurface, axis: &Geodesic, g: &GroupWord) -> Result<Point> {
    let n = axis.to_axis();
    let far = |z| -> Result<f64> {
        n.apply_ideal(s.act_ideal(g, z)?)
            .finite()
            .ok_or(Error::NotHyperparallel)
    };
    let st = far(axis.u)? * far(axis.v)?;
    if !(st > 0.0) {
        return Err(Error::NotHyperparallel);
    }
    Ok(n.inverse().apply(Point { x: 0.0, y: st.sqrt() }))
}

/// Lift of the realization of `arc`. When the second carrier is a conjugate
/// `g c g⁻¹` of the first, both feet are found on the axis of `c`, which keeps
/// long arcs accurate; otherwise the common perpendicular is used directly.
pub fn arc_lift(s: &MarkedSurface, arc: &ArcClass) -> Result<ArcLift> {
    let c = &arc.carrier1;
    if c.is_cyclically_reduced() {
        if let Some(g) = arc.carrier2.conjugator_to(c) {
            let (axis, _) = axis_of(&s.holonomy(c)?)?;
            return Ok(ArcLift {
                a: foot_toward(s, &axis, &g)?,
                b: foot_toward(s, &axis, &g.inverse())?,
                path: g,
            });
        }
    }
    let (seg, _) = s.arc_geodesic(arc)?;
    Ok(ArcLift {
        path: GroupWord::identity(),
        a: seg.a,
        b: seg.b,
    })
}

impl ArcLift {
    /// Length of the lift, measured between points pulled back to the middle
    /// of the path.
    pub fn length(&self, s: &MarkedSurface) -> Result<f64> {
        let letters = self.path.letters();
        let mid = letters.len() / 2;
        let head = GroupWord::from_letters(letters[..mid].iter().copied());
        let tail = GroupWord::from_letters(letters[mid..].iter().copied());
        Ok(dist(s.act(&head.inverse(), self.a)?, s.act(&tail, self.b)?))
    }
}

/// Whether the realization of `arc` meets the strip whose lift is `b0`.
pub fn arc_meets_strip(s: &MarkedSurface, b0: &Strip, arc: &ArcClass, depth: usize) -> Result<bool> {
    let lift = arc_lift(s, arc)?;
    let scanner = Scanner::new(s, *b0.frame())?;
    let bands = Bands::new(b0.width());
    let views = prefix_views(s, &lift.path, lift.a, lift.b)?;
    let hits = scan_views(&scanner, &views, depth, &|k, q: &Isometry| {
        let (x, y) = (
            bands.classify(image_norm_sqr(q, views[k].a)),
            bands.classify(image_norm_sqr(q, views[k].b)),
        );
        let apart = (x == Band::Near && y == Band::Near) || (x == Band::Far && y == Band::Far);
        (!apart).then_some(())
    });
    Ok(!hits.is_empty())
}
