use holopush_core::center::{fit_surrogate, sample_h, LaurentMap, SurfaceKind, SurfaceSpec};
use holopush_core::disc::{build_disc, build_frame};
use holopush_core::geometry::PolynomialRho;
use holopush_core::{CxPoint, DefiningFunction, Exec, C64};

const C: f64 = 0.8;

fn setup(k: usize) -> (PolynomialRho, LaurentMap, SurfaceSpec) {
    let df = PolynomialRho::cubic_perturbed_ball(2, 0.1);
    let f1 = LaurentMap::polynomial(vec![
        vec![C64::new(0.0, 0.0), C64::new(0.9, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
    ]);
    (df, f1, SurfaceSpec::new(SurfaceKind::Disc, k).unwrap())
}

/// `τ(s)` on the graph `w = s v + τ u` of the holomorphic quadric, by the
/// quadratic formula on the branch with `τ(0) = 0`.
fn tau_closed_form(df: &dyn DefiningFunction, z: &[C64], v: &[C64], u: &[C64], s: C64) -> C64 {
    let g = df.grad(z);
    let q = df.hess_holo(z);
    let bil = |a: &[C64], b: &[C64]| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..a.len() {
            for j in 0..b.len() {
                acc += q[(i, j)] * a[i] * b[j];
            }
        }
        acc
    };
    let gu: C64 = g.iter().zip(u).map(|(a, b)| a * b).sum();
    let a = bil(u, u);
    let b = gu * 2.0 + s * bil(u, v) * 2.0;
    let c = s * s * bil(v, v);
    let root = (C64::new(1.0, 0.0) - a * c * 4.0 / (b * b)).sqrt();
    -c * 2.0 / (b * (C64::new(1.0, 0.0) + root))
}

#[test]
fn second_coefficient_matches_cauchy_average() {
    let (df, f1, surface) = setup(64);
    let comps = surface.components();
    let loop_points: Vec<CxPoint> = comps[0].nodes.iter().map(|&x| CxPoint(f1.eval(x))).collect();
    let frame = build_frame(&df, &loop_points).unwrap();
    let cf = sample_h(&df, None, std::slice::from_ref(&frame), &f1, &comps, C, 6, Exec::Sequential).unwrap();
    let m = 32;
    let r = 0.5;
    for k in (0..64).step_by(5) {
        let z = &loop_points[k].0;
        let v = &frame.vectors[k];
        let u = build_disc(&df, None, &loop_points[k], v, C).unwrap().transverse_dir;
        let mut coef = C64::new(0.0, 0.0);
        for l in 0..m {
            let w = C64::from_polar(1.0, std::f64::consts::TAU * l as f64 / m as f64);
            let tau = tau_closed_form(&df, z, v, &u, w * r * C);
            coef += tau * w.powi(-2);
        }
        coef /= m as f64 * r * r;
        for (got, ui) in cf.components[0].h[k][2].iter().zip(&u) {
            assert!((got - coef * ui).norm() <= 1e-10, "node {k}");
        }
    }
}

#[test]
fn surrogate_reproduces_samples_within_fit_error() {
    let (df, f1, surface) = setup(128);
    let comps = surface.components();
    let loop_points: Vec<CxPoint> = comps[0].nodes.iter().map(|&x| CxPoint(f1.eval(x))).collect();
    let frame = build_frame(&df, &loop_points).unwrap();
    let cf = sample_h(&df, None, &[frame], &f1, &comps, C, 16, Exec::Parallel).unwrap();
    let fitted = fit_surrogate(&cf, 12, (0, 32), false, Exec::Parallel).unwrap();
    assert!(fitted.fit_error < 1e-6, "fit error {}", fitted.fit_error);
    for (k, &x) in comps[0].nodes.iter().enumerate() {
        for a in 0..8 {
            let zeta = C64::from_polar(0.5, a as f64 * 0.785);
            let sampled: Vec<C64> = (0..2)
                .map(|i| {
                    cf.components[0].h[k]
                        .iter()
                        .enumerate()
                        .map(|(j, hj)| hj[i] * zeta.powi(j as i32))
                        .sum()
                })
                .collect();
            let surrogate = fitted.eval_h(x, zeta);
            let d: f64 = surrogate.iter().zip(&sampled).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
            assert!(d <= fitted.fit_error + 1e-15);
        }
    }
}

#[test]
fn sequential_and_parallel_sampling_agree() {
    let (df, f1, surface) = setup(64);
    let comps = surface.components();
    let loop_points: Vec<CxPoint> = comps[0].nodes.iter().map(|&x| CxPoint(f1.eval(x))).collect();
    let frame = build_frame(&df, &loop_points).unwrap();
    let a = sample_h(&df, None, std::slice::from_ref(&frame), &f1, &comps, C, 8, Exec::Sequential).unwrap();
    let b = sample_h(&df, None, &[frame], &f1, &comps, C, 8, Exec::Parallel).unwrap();
    assert_eq!(a.components, b.components);
}
