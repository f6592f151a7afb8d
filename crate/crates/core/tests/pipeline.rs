use peelkit::enumerate::{enumerate_arcs, enumerate_scc, slope_arc, EnumerationBound, Slope};
use peelkit::harness::{self, ArcSpec, Command, ExperimentConfig};
use peelkit::metrics::{weak_metric, MetricKind};
use peelkit::peel::{peel, PeelConfig};
use peelkit::surface::{pants_from_lengths, torus_from_traces, SurfaceParams};
use proptest::prelude::*;

fn small() -> EnumerationBound {
    EnumerationBound::new(4).unwrap()
}

#[test]
fn identical_structures_are_at_distance_zero() {
    let x = torus_from_traces(4.0, 4.5, 5.1).unwrap();
    for kind in MetricKind::ALL {
        let r = weak_metric(&x, &x, kind, small()).unwrap();
        assert!(r.value.abs() < 1e-9, "{kind:?}: {}", r.value);
    }
}

#[test]
fn peeling_twice_shrinks_further() {
    let x = torus_from_traces(4.0, 4.0, 4.0).unwrap();
    let arc = [slope_arc(Slope::ZERO)];
    let cfg = PeelConfig::with_eps(0.05);
    let y1 = peel(&x, &arc, &cfg).unwrap().surface;
    let y2 = peel(&y1, &arc, &cfg).unwrap().surface;
    let b = |s: &peelkit::surface::MarkedSurface| s.boundary_lengths().unwrap()[0];
    assert!(b(&y2) < b(&y1) && b(&y1) < b(&x));
}

#[test]
fn peel_bundle_is_reproducible() {
    let mut cfg = ExperimentConfig::new(SurfaceParams::Pants {
        lengths: [2.0, 2.3, 2.7],
    });
    cfg.bound = small();
    let a = harness::run(Command::Peel, &cfg).unwrap();
    let b = harness::run(Command::Peel, &cfg).unwrap();
    assert_eq!(harness::to_json(&a).unwrap(), harness::to_json(&b).unwrap());
    assert_eq!(
        harness::spectrum_csv(&a.spectrum, cfg.bound).unwrap(),
        harness::spectrum_csv(&b.spectrum, cfg.bound).unwrap()
    );
}

#[test]
fn spectrum_without_target_has_unit_ratios() {
    let mut cfg = ExperimentConfig::new(SurfaceParams::Torus {
        traces: [4.0, 4.5, 5.1],
    });
    cfg.bound = small();
    let b = harness::run(Command::Spectrum, &cfg).unwrap();
    let t = peelkit::surface::Topology::ONE_HOLED_TORUS;
    assert_eq!(
        b.spectrum.len(),
        enumerate_scc(t, small()).unwrap().len() + enumerate_arcs(t, small()).unwrap().len()
    );
    assert!(b.spectrum.iter().all(|r| r.ratio == 1.0 && !r.crossed_strip));
}

#[test]
fn mismatched_target_is_rejected() {
    let mut cfg = ExperimentConfig::new(SurfaceParams::Pants { lengths: [2.0; 3] });
    cfg.target = Some(SurfaceParams::Torus { traces: [4.0; 3] });
    assert_eq!(
        harness::run(Command::Spectrum, &cfg).unwrap_err(),
        peelkit::error::Error::TopologyMismatch
    );
}

#[test]
fn verify_reports_failure_without_erroring() {
    let mut cfg = ExperimentConfig::new(SurfaceParams::Pants { lengths: [2.0; 3] });
    cfg.arcs = ArcSpec::Pairs(vec![(1, 2)]);
    cfg.suites = vec![peelkit::verify::Suite::Theorem];
    cfg.bound = small();
    let b = harness::run(Command::Verify, &cfg).unwrap();
    assert!(!b.passed(), "a single seam leaves boundary 3 unchanged, so k = 0");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn summaries_rebuild_the_same_boundary(l1 in 0.5f64..4.0, l2 in 0.5f64..4.0, l3 in 0.5f64..4.0) {
        let x = pants_from_lengths(l1, l2, l3).unwrap();
        let s = harness::SurfaceSummary::of(&x).unwrap();
        let json = serde_json::to_string(&s.params).unwrap();
        let again: SurfaceParams = serde_json::from_str(&json).unwrap();
        let y = again.build().unwrap();
        for (p, q) in s.boundary_lengths.iter().zip(y.boundary_lengths().unwrap()) {
            prop_assert!((p - q).abs() <= 1e-9);
        }
    }

    #[test]
    fn peeled_pants_boundaries_never_grow(l1 in 1.0f64..3.0, l2 in 1.0f64..3.0, l3 in 1.0f64..3.0, eps in 0.02f64..0.2) {
        let x = pants_from_lengths(l1, l2, l3).unwrap();
        let arcs = peelkit::enumerate::filling_arc_family(x.topology()).unwrap();
        let y = peel(&x, &arcs, &PeelConfig { embed_check_radius: 6, ..PeelConfig::with_eps(eps) }).unwrap().surface;
        for (a, b) in x.boundary_lengths().unwrap().iter().zip(y.boundary_lengths().unwrap()) {
            prop_assert!(b < *a);
        }
    }
}
