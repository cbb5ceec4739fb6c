use std::path::Path;

use holopush_core::config::{InterpPoint, RunConfig};
use holopush_core::fourier::circle_nodes;
use holopush_core::pipeline::{run_pipeline, verify_theorem, ProperMap, RunOutput, RunStatus, Status};
use holopush_core::{Exec, C64};

fn load(rel: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(rel);
    let text = std::fs::read_to_string(&path).unwrap();
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => RunConfig::from_toml_str(&text).unwrap(),
        _ => RunConfig::from_json_str(&text).unwrap(),
    }
}

fn run(cfg: &RunConfig) -> RunOutput {
    run_pipeline(cfg, Exec::default()).unwrap_or_else(|f| panic!("{f}"))
}

fn assert_max_principle(out: &RunOutput) {
    let pm = out.report.proper_map.as_ref().unwrap();
    assert!(pm.zeta_interior_max <= pm.zeta_boundary_max + 1e-10);
    assert!(pm.interior_negativity <= pm.boundary_max_rho + 1e-10);
    assert!(pm.interior_negativity < 0.0);
}

#[test]
fn ball_without_interpolation_matches_closed_form() {
    let cfg = RunConfig::ball_example(0.9);
    let out = run(&cfg);
    let pm = out.report.proper_map.as_ref().unwrap();
    assert!(pm.boundary_residual <= 1e-9);
    // f = (0.9x, ζ) with |ζ| = sqrt(1 − 0.81) on the circle
    for x in circle_nodes(64, 1.0) {
        let f = out.map.eval(x);
        assert!((f[0] - x * 0.9).norm() <= 1e-9);
        assert!((f[1].norm() - 0.19f64.sqrt()).abs() <= 1e-9);
    }
    assert_eq!(out.report.status, RunStatus::Pass);
}

#[test]
fn ball_with_jet_interpolation_passes_every_clause() {
    let cfg = load("../../configs/ball.json");
    let out = run(&cfg);
    let pm = out.report.proper_map.as_ref().unwrap();
    assert!(pm.all_pass(), "{:?}", pm.clauses);
    assert!(pm.boundary_residual <= 1e-6);
    assert!(pm.approx_error.unwrap() < 0.05);
    assert!(pm.hopf_margin > 0.0);
    assert!(pm.jet_errors.iter().all(|j| j.error <= 1e-6));
    let d = &out.report.diagnostics;
    let order = d.divisor.as_ref().unwrap().order_at(C64::new(0.0, 0.0));
    assert!(order >= d.predicted_order.unwrap());
    assert!(order >= 3);
    assert!(d.rh.as_ref().unwrap().holomorphy_defect.unwrap() <= 1e-8);
    assert_max_principle(&out);
}

#[test]
fn matching_first_order_jet_is_reproduced() {
    let mut cfg = RunConfig::ball_example(0.9);
    cfg.interp = vec![InterpPoint {
        point: [0.0, 0.0],
        order: 1,
        jet: Some(vec![vec![[0.0, 0.0], [0.0, 0.0]], vec![[0.9, 0.0], [0.0, 0.0]]]),
    }];
    let out = run(&cfg);
    let pm = out.report.proper_map.as_ref().unwrap();
    assert_eq!(pm.jet_errors.len(), 1);
    assert!(pm.jet_errors[0].error <= 1e-8, "jet error {}", pm.jet_errors[0].error);
}

#[test]
fn immersion_margin_bounded_by_zeta_derivative() {
    let out = run(&RunConfig::ball_example(0.9));
    let pm = out.report.proper_map.as_ref().unwrap();
    let mut max_dz: f64 = 0.0;
    for i in 0..=16 {
        for x in circle_nodes(64, i as f64 / 16.0) {
            max_dz = max_dz.max(out.map.zeta.derivative(x).norm());
        }
    }
    assert!(pm.immersion_margin >= 0.9 - max_dz - 1e-12);
    assert!(pm.immersion_margin > 0.0);
}

#[test]
fn four_dimensional_run_is_injective_on_the_grid() {
    let out = run(&load("../../configs/ball4_perturbed.json"));
    let pm = out.report.proper_map.as_ref().unwrap();
    assert!(pm.injectivity_audit > 0.0);
    assert_eq!(pm.clause("injectivity").unwrap().status, Status::Pass);
    assert_max_principle(&out);
}

#[test]
fn non_trivial_domains_pass() {
    for rel in ["../../configs/ellipsoid.toml", "../../configs/ball_quadratic.json", "../../configs/cubic.json"] {
        let out = run(&load(rel));
        assert_eq!(out.report.status, RunStatus::Pass, "{rel}");
        assert!(out.report.diagnostics.rh.as_ref().unwrap().holomorphy_defect.unwrap() <= 1e-8);
        assert_max_principle(&out);
    }
}

#[test]
fn verification_of_a_reloaded_map_is_identical() {
    let cfg = load("../../configs/ball.json");
    let out = run(&cfg);
    let json = serde_json::to_string(&out.map.dump()).unwrap();
    let reloaded = ProperMap::from_dump(&serde_json::from_str(&json).unwrap(), cfg.grid.k).unwrap();
    let again = verify_theorem(&reloaded, &cfg, Exec::Sequential).unwrap();
    assert_eq!(Some(again), out.report.proper_map);
}

#[test]
fn scaled_zeta_is_not_proper() {
    let cfg = load("../../configs/ball.json");
    let out = run(&cfg);
    let mut dump = out.map.dump();
    dump.zeta = dump.zeta.scaled(1.5);
    let scaled = ProperMap::from_dump(&dump, cfg.grid.k).unwrap();
    let rep = verify_theorem(&scaled, &cfg, Exec::default()).unwrap();
    assert_eq!(rep.clause("proper").unwrap().status, Status::Fail);
    assert!(!rep.all_pass());
}

#[test]
fn parallel_and_sequential_reports_agree() {
    let cfg = load("../../configs/ball_quadratic.json");
    let a = run_pipeline(&cfg, Exec::Sequential).unwrap();
    let b = run_pipeline(&cfg, Exec::Parallel).unwrap();
    assert_eq!(a.report.to_json_pretty(), b.report.to_json_pretty());
}

#[test]
fn golden_failures_name_their_errors() {
    for (fixture, stage, kind) in [
        ("collar_violation", "pipeline.collar", "collar-violation"),
        ("tangency", "disc_family.scale", "tangency"),
        ("rh_nonconvergence", "rh_solver", "rh-nonconvergence"),
    ] {
        let cfg = load(&format!("tests/fixtures/{fixture}.json"));
        let failure = run_pipeline(&cfg, Exec::default()).unwrap_err();
        assert_eq!(failure.error.stage, stage, "{fixture}");
        assert_eq!(failure.error.error.kind(), kind, "{fixture}");
        let err = failure.report.error.as_ref().unwrap();
        assert_eq!((err.stage.as_str(), err.kind.as_str()), (stage, kind));
        assert_eq!(failure.report.status, RunStatus::StageError);
    }
}

#[cfg(feature = "annulus")]
#[test]
fn annulus_run_satisfies_the_period_condition() {
    let out = run(&load("../../configs/annulus.json"));
    let rh = out.report.diagnostics.rh.as_ref().unwrap();
    assert!(rh.period_residual.unwrap() <= 1e-6);
    assert_eq!(out.report.status, RunStatus::Pass);
    let pm = out.report.proper_map.as_ref().unwrap();
    assert_eq!(pm.clause("approximation").unwrap().status, Status::NotApplicable);
}
