//! Configuration-driven experiments: build, spectrum, peel, metric and verify.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use log::info;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{analyze, PeelAnalysis, SpectrumRow};
use crate::enumerate::{
    enumerate_arcs, enumerate_scc, filling_arc_family, pants_arc, slope_arc, EnumerationBound, Slope,
};
use crate::error::{Error, Result};
use crate::h2::TOL;
use crate::metrics::{weak_metric, Measured, MetricKind, MetricReport, RowKind};
use crate::peel::{peel, PeelConfig, PeelStep};
use crate::surface::{ArcClass, MarkedSurface, SurfaceParams, Topology};
use crate::verify::{run_suites, PeelSetup, SampleSizes, Suite, SuiteReport};

pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const METRIC_FILE: &str = "metric.json";
pub const VERIFY_FILE: &str = "verify.json";
pub const BUNDLE_FILE: &str = "bundle.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Build,
    Spectrum,
    Peel,
    Metric,
    Verify,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Build,
        Command::Spectrum,
        Command::Peel,
        Command::Metric,
        Command::Verify,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Spectrum => "spectrum",
            Command::Peel => "peel",
            Command::Metric => "metric",
            Command::Verify => "verify",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcFamily {
    /// Two arcs meeting every simple closed curve.
    Filling,
}

/// Which arcs to peel, in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ArcSpec {
    Family(ArcFamily),
    /// Pants arcs `α_ij` by boundary indices.
    Pairs(Vec<(u8, u8)>),
    /// Torus arcs by slope.
    Slopes(Vec<Slope>),
}

impl Default for ArcSpec {
    fn default() -> Self {
        ArcSpec::Family(ArcFamily::Filling)
    }
}

impl ArcSpec {
    pub fn resolve(&self, t: Topology) -> Result<Vec<ArcClass>> {
        let arcs = match self {
            ArcSpec::Family(ArcFamily::Filling) => filling_arc_family(t)?,
            ArcSpec::Pairs(pairs) => {
                if t != Topology::PANTS {
                    return Err(Error::Config("arc pairs apply to pants only".into()));
                }
                pairs.iter().map(|&(i, j)| pants_arc(i, j)).collect::<Result<_>>()?
            }
            ArcSpec::Slopes(slopes) => {
                if t != Topology::ONE_HOLED_TORUS {
                    return Err(Error::Config("arc slopes apply to the one-holed torus only".into()));
                }
                slopes.iter().map(|&s| slope_arc(s)).collect()
            }
        };
        if arcs.is_empty() {
            return Err(Error::Config("arc list is empty".into()));
        }
        Ok(arcs)
    }
}

fn default_bound() -> EnumerationBound {
    EnumerationBound::new(10).expect("positive bound")
}

fn default_metrics() -> Vec<MetricKind> {
    MetricKind::ALL.to_vec()
}

fn default_suites() -> Vec<Suite> {
    vec![Suite::Lemma, Suite::Collapse, Suite::Peel, Suite::Theorem]
}

/// One experiment, read from a single JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub surface: SurfaceParams,
    /// Second structure for `metric` and `spectrum`; defaults to the peeled
    /// surface.
    #[serde(default)]
    pub target: Option<SurfaceParams>,
    #[serde(default)]
    pub arcs: ArcSpec,
    #[serde(default)]
    pub peel: PeelConfig,
    #[serde(default = "default_bound")]
    pub bound: EnumerationBound,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricKind>,
    #[serde(default = "default_suites")]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub samples: SampleSizes,
    /// Not echoed into outputs, so results do not depend on where they land.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(surface: SurfaceParams) -> Self {
        ExperimentConfig {
            surface,
            target: None,
            arcs: ArcSpec::default(),
            peel: PeelConfig::default(),
            bound: default_bound(),
            metrics: default_metrics(),
            suites: default_suites(),
            samples: SampleSizes::default(),
            output_dir: None,
            seed: 0,
        }
    }

    /// Parses and validates; parse errors name the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.peel.validate()?;
        if self.metrics.is_empty() {
            return Err(Error::Config("metrics must not be empty".into()));
        }
        Ok(())
    }

    fn setup(&self, x: &MarkedSurface) -> Result<PeelSetup> {
        Ok(PeelSetup {
            surface: x.clone(),
            arcs: self.arcs.resolve(x.topology())?,
            cfg: self.peel,
            bound: self.bound,
        })
    }
}

/// What a structure looks like from outside: enough to rebuild it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurfaceSummary {
    pub label: String,
    pub topology: String,
    pub params: SurfaceParams,
    pub boundary_lengths: Vec<f64>,
}

impl SurfaceSummary {
    pub fn of(s: &MarkedSurface) -> Result<Self> {
        Ok(SurfaceSummary {
            label: s.label().to_string(),
            topology: s.topology().name().to_string(),
            params: s.parameters()?,
            boundary_lengths: s.boundary_lengths()?,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultBundle {
    pub command: Command,
    pub config: ExperimentConfig,
    pub surfaces: Vec<SurfaceSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub peel_steps: Vec<PeelStep>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<MetricReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub verification: Vec<SuiteReport>,
    #[serde(skip)]
    pub spectrum: Vec<SpectrumRow>,
    /// Wall-clock time per phase; kept out of written files so that outputs
    /// are reproducible byte for byte.
    #[serde(skip)]
    pub timing: Vec<(String, Duration)>,
}

impl ResultBundle {
    fn new(command: Command, config: &ExperimentConfig) -> Self {
        ResultBundle {
            command,
            config: config.clone(),
            surfaces: Vec::new(),
            peel_steps: Vec::new(),
            metrics: Vec::new(),
            verification: Vec::new(),
            spectrum: Vec::new(),
            timing: Vec::new(),
        }
    }

    /// False when some verification suite failed.
    pub fn passed(&self) -> bool {
        self.verification.iter().all(SuiteReport::passed)
    }
}

struct Timer(Instant);

impl Timer {
    fn start() -> Self {
        Timer(Instant::now())
    }

    fn lap(&mut self, bundle: &mut ResultBundle, phase: &str) {
        let now = Instant::now();
        info!("{phase}: {:.3?}", now - self.0);
        bundle.timing.push((phase.to_string(), now - self.0));
        self.0 = now;
    }
}

fn spectrum_between(x: &MarkedSurface, y: &MarkedSurface, bound: EnumerationBound) -> Result<Vec<SpectrumRow>> {
    let t = x.topology();
    let classes: Vec<Measured> = enumerate_scc(t, bound)?
        .into_iter()
        .map(Measured::Curve)
        .chain(enumerate_arcs(t, bound)?.into_iter().map(Measured::Arc))
        .collect();
    crate::par::map(&classes, |m| {
        let (l_x, l_y) = (m.length(x)?, m.length(y)?);
        Ok(SpectrumRow {
            class_id: m.id(),
            kind: m.row_kind(),
            word_or_slope: m.label(),
            complexity: m.complexity(),
            l_x,
            l_y,
            ratio: l_y / l_x,
            crossed_strip: false,
        })
    })
    .into_iter()
    .collect()
}

fn run_peel_analysis(cfg: &ExperimentConfig, x: &MarkedSurface) -> Result<PeelAnalysis> {
    let arcs = cfg.arcs.resolve(x.topology())?;
    analyze(x, &arcs, &cfg.peel, cfg.bound, &cfg.metrics)
}

/// Runs `command`; verification failures are reported through
/// [`ResultBundle::passed`], not as errors.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<ResultBundle> {
    cfg.validate()?;
    let mut bundle = ResultBundle::new(command, cfg);
    let mut timer = Timer::start();
    let x = cfg.surface.build()?.relabeled("X");
    bundle.surfaces.push(SurfaceSummary::of(&x)?);
    timer.lap(&mut bundle, "build");
    match command {
        Command::Build => {}
        Command::Spectrum => {
            bundle.spectrum = match &cfg.target {
                Some(t) => {
                    let y = t.build()?.relabeled("Y");
                    if !x.same_schema(&y) {
                        return Err(Error::TopologyMismatch);
                    }
                    bundle.surfaces.push(SurfaceSummary::of(&y)?);
                    spectrum_between(&x, &y, cfg.bound)?
                }
                None => spectrum_between(&x, &x, cfg.bound)?,
            };
            timer.lap(&mut bundle, "spectrum");
        }
        Command::Peel => {
            let a = run_peel_analysis(cfg, &x)?;
            bundle.surfaces.push(SurfaceSummary::of(a.peeled())?);
            bundle.peel_steps = a.outcome.steps;
            bundle.metrics = a.reports;
            bundle.spectrum = a.rows;
            timer.lap(&mut bundle, "peel");
        }
        Command::Metric => {
            let y = match &cfg.target {
                Some(t) => t.build()?.relabeled("Y"),
                None => peel(&x, &cfg.arcs.resolve(x.topology())?, &cfg.peel)?.surface,
            };
            bundle.surfaces.push(SurfaceSummary::of(&y)?);
            bundle.metrics = cfg
                .metrics
                .iter()
                .map(|&k| weak_metric(&x, &y, k, cfg.bound))
                .collect::<Result<_>>()?;
            timer.lap(&mut bundle, "metric");
        }
        Command::Verify => {
            let setup = if cfg.suites.iter().any(Suite::needs_peel) {
                Some(cfg.setup(&x)?)
            } else {
                None
            };
            bundle.verification = run_suites(&cfg.suites, cfg.seed, &cfg.samples, setup.as_ref())?;
            timer.lap(&mut bundle, "verify");
        }
    }
    Ok(bundle)
}

/// `%.15g`: 15 significant digits, trailing zeros dropped.
pub fn fmt_sig15(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds every float in a JSON tree to 15 significant digits.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r: f64 = fmt_sig15(n.as_f64().expect("f64 number"))
                .parse()
                .expect("formatted float");
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with 15-digit floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&round_floats(v)).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub const SPECTRUM_HEADER: [&str; 9] = [
    "class_id",
    "kind",
    "word_or_slope",
    "l_X",
    "l_Y",
    "ratio",
    "crossed_strip",
    "bound",
    "tolerance",
];

pub fn spectrum_csv(rows: &[SpectrumRow], bound: EnumerationBound) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(SPECTRUM_HEADER).map_err(io)?;
    for r in rows {
        let kind = match r.kind {
            RowKind::Curve => "curve",
            RowKind::Arc => "arc",
        };
        w.write_record([
            r.class_id.clone(),
            kind.to_string(),
            r.word_or_slope.clone(),
            fmt_sig15(r.l_x),
            fmt_sig15(r.l_y),
            fmt_sig15(r.ratio),
            r.crossed_strip.to_string(),
            bound.get().to_string(),
            fmt_sig15(TOL),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Serialize)]
struct MetricFile<'a> {
    x: &'a str,
    y: &'a str,
    bound: EnumerationBound,
    reports: &'a [MetricReport],
}

/// Writes the command's files into `dir` and returns their paths.
pub fn write_outputs(bundle: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    if matches!(bundle.command, Command::Spectrum | Command::Peel) {
        put(SPECTRUM_FILE, spectrum_csv(&bundle.spectrum, bundle.config.bound)?)?;
    }
    if !bundle.metrics.is_empty() {
        let label = |i: usize| bundle.surfaces.get(i).map_or("", |s| s.label.as_str());
        put(
            METRIC_FILE,
            to_json(&MetricFile {
                x: label(0),
                y: label(1),
                bound: bundle.config.bound,
                reports: &bundle.metrics,
            })?,
        )?;
    }
    if bundle.command == Command::Verify {
        put(VERIFY_FILE, to_json(&bundle.verification)?)?;
    }
    put(BUNDLE_FILE, to_json(bundle)?)?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig15_formatting() {
        assert_eq!(fmt_sig15(0.0), "0");
        assert_eq!(fmt_sig15(0.9f64.ln()), "-0.105360515657826");
        assert_eq!(fmt_sig15(2.0), "2");
        assert_eq!(fmt_sig15(1e-9), "1e-9");
        assert_eq!(fmt_sig15(123456.789), "123456.789");
        assert_eq!(fmt_sig15(9.999999999999999999), "10");
        assert_eq!(fmt_sig15(1.5e20), "1.5e20");
        assert_eq!(fmt_sig15(std::f64::consts::PI), "3.14159265358979");
    }

    #[test]
    fn json_floats_are_rounded() {
        let v = serde_json::json!({"a": [std::f64::consts::E, 1], "b": "x"});
        assert_eq!(round_floats(v).to_string(), r#"{"a":[2.71828182845905,1],"b":"x"}"#);
    }

    #[test]
    fn config_defaults_and_errors() {
        let cfg = ExperimentConfig::from_json(r#"{"surface": {"topology": "pants", "lengths": [2, 2, 2]}}"#).unwrap();
        assert_eq!(cfg.bound.get(), 10);
        assert_eq!(cfg.arcs, ArcSpec::Family(ArcFamily::Filling));
        assert_eq!(cfg.peel, PeelConfig::default());
        let e = ExperimentConfig::from_json(
            "{\n \"surface\": {\"topology\": \"pants\", \"lengths\": [2, 2, 2]},\n \"bogus\": 1}",
        )
        .unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = ExperimentConfig::from_json(
            r#"{"surface": {"topology": "pants", "lengths": [2, 2, 2]}, "peel": {"eps": -1}}"#,
        )
        .unwrap_err();
        assert_eq!(e, Error::NonPositiveWidth { eps: -1.0 });
        let cfg = ExperimentConfig::from_json(
            r#"{"surface": {"topology": "torus", "traces": [4, 4, 4]}, "arcs": {"slopes": ["1/0", "0/1"]}, "metrics": ["k"], "bound": 5}"#,
        )
        .unwrap();
        assert_eq!(cfg.arcs, ArcSpec::Slopes(vec![Slope::INFINITY, Slope::ZERO]));
        assert!(cfg.arcs.resolve(Topology::PANTS).is_err());
    }

    #[test]
    fn scaled_pants_metric() {
        let mut cfg = ExperimentConfig::new(SurfaceParams::Pants { lengths: [2.0; 3] });
        cfg.target = Some(SurfaceParams::Pants { lengths: [1.8; 3] });
        cfg.metrics = vec![MetricKind::SmallK];
        let b = run(Command::Metric, &cfg).unwrap();
        assert!((b.metrics[0].value - (-0.1053605)).abs() < 1e-7);
        let json = to_json(&b.metrics).unwrap();
        assert!(json.contains("\"value\": -0.1053605"), "{json}");
    }

    #[test]
    fn summary_round_trips_through_build() {
        let cfg = ExperimentConfig::new(SurfaceParams::Torus {
            traces: [4.0, 4.5, 5.1],
        });
        let b = run(Command::Build, &cfg).unwrap();
        let s = &b.surfaces[0];
        let again = run(Command::Build, &ExperimentConfig::new(s.params)).unwrap();
        for (p, q) in s.boundary_lengths.iter().zip(&again.surfaces[0].boundary_lengths) {
            assert!((p - q).abs() <= 1e-9);
        }
    }

    #[test]
    fn wide_strip_is_an_input_error() {
        let mut cfg = ExperimentConfig::new(SurfaceParams::Pants { lengths: [2.0; 3] });
        cfg.peel.eps = 10.0;
        assert!(matches!(run(Command::Peel, &cfg), Err(Error::StripNotEmbedded { .. })));
    }

    #[test]
    fn outputs_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::new(SurfaceParams::Pants {
            lengths: [2.0, 2.3, 2.7],
        });
        cfg.bound = EnumerationBound::new(2).unwrap();
        let b = run(Command::Peel, &cfg).unwrap();
        let files = write_outputs(&b, dir.path()).unwrap();
        let names: Vec<_> = files
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
            .collect();
        assert_eq!(names, [SPECTRUM_FILE, METRIC_FILE, BUNDLE_FILE]);
        let csv = fs::read_to_string(dir.path().join(SPECTRUM_FILE)).unwrap();
        assert!(csv.starts_with("class_id,kind,word_or_slope,l_X,l_Y,ratio,crossed_strip,bound,tolerance\n"));
        assert_eq!(csv.lines().count(), 1 + 3 + 6);
    }
}
