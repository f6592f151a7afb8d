//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use peelkit::analysis::PeelAnalysis;
use peelkit::enumerate::{pants_arc, slope_arc, EnumerationBound, Slope};
use peelkit::error::Result;
use peelkit::harness::{self, ArcSpec, Command, ExperimentConfig};
use peelkit::metrics::{MetricKind, RowKind};
use peelkit::peel::{peel, PeelConfig};
use peelkit::surface::{pants_from_lengths, torus_from_traces, SurfaceParams};
use peelkit::verify::{self, PeelSetup, SampleSizes, SuiteReport};

const SEED: u64 = 42;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn from_report(r: &SuiteReport) -> Outcome {
        let mut detail = format!("{} cases, {} failures", r.cases, r.failures);
        for c in &r.checks {
            detail.push_str(&format!(", {}={:.3e}", c.name, c.value));
        }
        if let Some(n) = r.notes.first() {
            detail.push_str(&format!(", first failure: {n}"));
        }
        Outcome {
            passed: r.passed(),
            detail,
        }
    }
}

struct Runner {
    failed: usize,
}

impl Runner {
    fn run(&mut self, id: &str, limit: Duration, f: impl FnOnce() -> Result<Outcome>) {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && took <= limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            self.failed += 1;
        }
        let verdict = if passed { "PASS" } else { "FAIL" };
        println!("{verdict} {id} [{took:.2?} / {limit:?}] {detail}");
    }
}

fn check(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn theorem_torus_setup() -> Result<PeelSetup> {
    Ok(PeelSetup {
        surface: torus_from_traces(4.0, 4.0, 4.0)?,
        arcs: vec![slope_arc(Slope::INFINITY), slope_arc(Slope::ZERO)],
        cfg: PeelConfig::with_eps(0.1),
        bound: EnumerationBound::new(20)?,
    })
}

fn seam_peel() -> Result<Outcome> {
    let x = pants_from_lengths(2.0, 2.0, 2.0)?;
    let arcs = [pants_arc(1, 2)?];
    let cfg = PeelConfig::with_eps(0.1);
    let y = peel(&x, &arcs, &cfg)?.surface.boundary_lengths()?;
    let wider = PeelConfig { wall_radius: 16, ..cfg };
    let y16 = peel(&x, &arcs, &wider)?.surface.boundary_lengths()?;
    let drift = y.iter().zip(&y16).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(
        y[0] < 2.0 - 1e-3 && y[1] < 2.0 - 1e-3 && (y[2] - 2.0).abs() <= 1e-6 && drift < 1e-8,
        format!("l' = {:.9?}, radius drift {drift:.2e}", y),
    )
}

fn theorem_pants() -> Result<Outcome> {
    let x = pants_from_lengths(2.0, 2.3, 2.7)?;
    let setup = PeelSetup {
        surface: x,
        arcs: vec![pants_arc(1, 2)?, pants_arc(1, 3)?],
        cfg: PeelConfig::with_eps(0.1),
        bound: EnumerationBound::new(10)?,
    };
    let a = setup.analyze()?;
    let max_ratio = curve_rows(&a).map(|r| r.ratio).fold(f64::MIN, f64::max);
    let k = a.report(MetricKind::SmallK).map_or(f64::NAN, |r| r.value);
    check(
        max_ratio < 1.0 && k < 0.0,
        format!("max ratio {max_ratio:.6}, k = {k:.7}"),
    )
}

fn curve_rows(a: &PeelAnalysis) -> impl Iterator<Item = &peelkit::analysis::SpectrumRow> {
    a.rows.iter().filter(|r| r.kind == RowKind::Curve)
}

fn single_peels() -> Result<Outcome> {
    let cases = [
        (pants_from_lengths(2.0, 2.0, 2.0)?, pants_arc(1, 2)?),
        (torus_from_traces(4.0, 4.0, 4.0)?, slope_arc(Slope::INFINITY)),
    ];
    let mut passed = true;
    let mut detail = Vec::new();
    for (x, arc) in cases {
        let setup = PeelSetup {
            surface: x,
            arcs: vec![arc],
            cfg: PeelConfig::with_eps(0.1),
            bound: EnumerationBound::new(10)?,
        };
        let r = verify::remark_suite(&setup.analyze()?)?;
        passed &= r.passed();
        detail.push(format!(
            "{}: {}",
            setup.surface.topology().name(),
            Outcome::from_report(&r).detail
        ));
    }
    check(passed, detail.join("; "))
}

fn determinism() -> Result<Outcome> {
    let mut cfg = ExperimentConfig::new(SurfaceParams::Torus { traces: [4.0; 3] });
    cfg.arcs = ArcSpec::Slopes(vec![Slope::INFINITY, Slope::ZERO]);
    cfg.bound = EnumerationBound::new(20)?;
    cfg.seed = SEED;
    let dirs = [tempfile::tempdir()?, tempfile::tempdir()?];
    let mut files = Vec::new();
    for d in &dirs {
        let bundle = harness::run(Command::Peel, &cfg)?;
        harness::write_outputs(&bundle, d.path())?;
        files.push([
            std::fs::read(d.path().join(harness::SPECTRUM_FILE))?,
            std::fs::read(d.path().join(harness::METRIC_FILE))?,
        ]);
    }
    check(
        files[0] == files[1],
        format!("{} CSV bytes, {} JSON bytes", files[0][0].len(), files[0][1].len()),
    )
}

fn main() -> ExitCode {
    let samples = SampleSizes::default();
    let mut runner = Runner { failed: 0 };
    runner.run("1 lemma", Duration::from_secs(5), || {
        Ok(Outcome::from_report(&verify::lemma_suite(SEED, &samples)))
    });
    runner.run("2 right-triangles", Duration::from_secs(2), || {
        Ok(Outcome::from_report(&verify::triangle_suite(SEED, &samples)))
    });
    runner.run("3 collapse", Duration::from_secs(10), || {
        Ok(Outcome::from_report(&verify::collapse_suite(SEED, &samples)))
    });
    runner.run("4 seam-peel", Duration::from_secs(30), seam_peel);
    let mut torus = None;
    runner.run("5 theorem", Duration::from_secs(300), || {
        let a = theorem_pants()?;
        let setup = theorem_torus_setup()?;
        let analysis = setup.analyze()?;
        let r = verify::theorem_suite(&analysis)?;
        let b = Outcome::from_report(&r);
        torus = Some(analysis);
        check(a.passed && b.passed, format!("(a) {}; (b) {}", a.detail, b.detail))
    });
    runner.run("6 single-peel", Duration::from_secs(60), single_peels);
    runner.run("7 multicurves", Duration::from_secs(60), || {
        let a = match torus.take() {
            Some(a) => a,
            None => theorem_torus_setup()?.analyze()?,
        };
        let filling = Outcome::from_report(&verify::multicurve_suite(&a, SEED, &samples)?);
        let single = PeelSetup {
            surface: torus_from_traces(4.0, 4.0, 4.0)?,
            arcs: vec![slope_arc(Slope::INFINITY)],
            cfg: PeelConfig::with_eps(0.1),
            bound: EnumerationBound::new(2)?,
        };
        let single = Outcome::from_report(&verify::multicurve_suite(&single.analyze()?, SEED, &samples)?);
        check(
            filling.passed && single.passed,
            format!("filling pair: {}; single arc: {}", filling.detail, single.detail),
        )
    });
    runner.run("8 determinism", Duration::from_secs(60), determinism);
    if runner.failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", runner.failed);
        ExitCode::FAILURE
    }
}
