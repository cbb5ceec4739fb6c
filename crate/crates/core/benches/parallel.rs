use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holopush_core::center::{fit_surrogate, sample_h, LaurentMap, SurfaceKind, SurfaceSpec};
use holopush_core::config::RunConfig;
use holopush_core::curves::detect_curves;
use holopush_core::disc::build_frame;
use holopush_core::geometry::PolynomialRho;
use holopush_core::pipeline::{run_pipeline, verify_theorem};
use holopush_core::{CxPoint, Exec, C64};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn stages(c: &mut Criterion) {
    let df = PolynomialRho::cubic_perturbed_ball(2, 0.1);
    let f1 = LaurentMap::polynomial(vec![
        vec![C64::new(0.0, 0.0), C64::new(0.85, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
    ]);
    let comps = SurfaceSpec::new(SurfaceKind::Disc, 256).unwrap().components();
    let loop_points: Vec<CxPoint> = comps[0].nodes.iter().map(|&x| CxPoint(f1.eval(x))).collect();
    let frames = vec![build_frame(&df, &loop_points).unwrap()];
    let samples = sample_h(&df, None, &frames, &f1, &comps, 0.8, 24, Exec::Parallel).unwrap();
    let fitted = fit_surrogate(&samples, 12, (0, 64), false, Exec::Parallel).unwrap();

    let mut group = c.benchmark_group("stages");
    group.sample_size(20);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new("sample_h", name), &exec, |b, &exec| {
            b.iter(|| sample_h(&df, None, &frames, &f1, &comps, 0.8, 24, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fit_surrogate", name), &exec, |b, &exec| {
            b.iter(|| fit_surrogate(&samples, 12, (0, 64), false, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("detect_curves", name), &exec, |b, &exec| {
            b.iter(|| detect_curves(&fitted, &df, 64, exec).unwrap())
        });
    }
    group.finish();
}

fn verification(c: &mut Criterion) {
    let cfg = RunConfig::from_json_str(include_str!("../../../configs/ball_quadratic.json")).unwrap();
    let out = run_pipeline(&cfg, Exec::Parallel).unwrap();
    let mut group = c.benchmark_group("verify_theorem");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| verify_theorem(&out.map, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, stages, verification);
criterion_main!(benches);
