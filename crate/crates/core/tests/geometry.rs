use holopush_core::geometry::{levi_form, taylor_model, Ellipsoid, Monomial, PolynomialRho};
use holopush_core::{DefiningFunction, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-4;

fn shift(z: &[C64], w: &[C64], lambda: C64) -> Vec<C64> {
    z.iter().zip(w).map(|(a, b)| a + lambda * b).collect()
}

/// `φ(λ) = ρ(z + λw)` and its real partials at `λ = 0` by central differences.
struct Restriction<'a> {
    df: &'a dyn DefiningFunction,
    z: Vec<C64>,
    w: Vec<C64>,
}

impl Restriction<'_> {
    fn phi(&self, s: f64, t: f64) -> f64 {
        self.df.rho(&shift(&self.z, &self.w, C64::new(s, t)))
    }
    fn ds(&self) -> f64 {
        (self.phi(H, 0.0) - self.phi(-H, 0.0)) / (2.0 * H)
    }
    fn dt(&self) -> f64 {
        (self.phi(0.0, H) - self.phi(0.0, -H)) / (2.0 * H)
    }
    fn dss(&self) -> f64 {
        (self.phi(H, 0.0) - 2.0 * self.phi(0.0, 0.0) + self.phi(-H, 0.0)) / (H * H)
    }
    fn dtt(&self) -> f64 {
        (self.phi(0.0, H) - 2.0 * self.phi(0.0, 0.0) + self.phi(0.0, -H)) / (H * H)
    }
    fn dst(&self) -> f64 {
        (self.phi(H, H) - self.phi(H, -H) - self.phi(-H, H) + self.phi(-H, -H)) / (4.0 * H * H)
    }
}

fn random_c(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    C64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> PolynomialRho {
    let mut terms = Vec::new();
    for _ in 0..8 {
        let mut zp = vec![0u32; n];
        let mut zb = vec![0u32; n];
        let deg = rng.gen_range(1..=3);
        for _ in 0..deg {
            if rng.gen_bool(0.5) {
                zp[rng.gen_range(0..n)] += 1;
            } else {
                zb[rng.gen_range(0..n)] += 1;
            }
        }
        terms.push(Monomial {
            z_pow: zp,
            zbar_pow: zb,
            coeff: random_c(rng, 1.0),
        });
    }
    PolynomialRho::new(n, terms).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn ball_levi_form_is_squared_norm() {
    let df = Ellipsoid::ball(3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let z: Vec<C64> = (0..3).map(|_| random_c(&mut rng, 0.5)).collect();
        let w: Vec<C64> = (0..3).map(|_| random_c(&mut rng, 2.0)).collect();
        let expect: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        assert!((levi_form(&df, &z, &w).unwrap() - expect).abs() <= 1e-12);
    }
}

#[test]
fn random_polynomial_derivatives_match_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..40 {
        let n = 2 + trial % 2;
        let df = random_poly(&mut rng, n);
        let z: Vec<C64> = (0..n).map(|_| random_c(&mut rng, 0.7)).collect();
        let w: Vec<C64> = (0..n).map(|_| random_c(&mut rng, 1.0)).collect();
        let r = Restriction {
            df: &df,
            z: z.clone(),
            w: w.clone(),
        };

        // Levi form: the λ-Laplacian of φ is 4·L(z, w).
        let levi_fd = (r.dss() + r.dtt()) / 4.0;
        let levi = levi_form(&df, &z, &w).unwrap();
        assert!(rel(levi, levi_fd) <= 1e-6, "levi {levi} vs {levi_fd}");

        // ∂φ/∂λ = Σ ρ_j w_j.
        let g = df.grad(&z);
        let dl: C64 = g.iter().zip(&w).map(|(a, b)| a * b).sum();
        let dl_fd = C64::new(r.ds(), -r.dt()) / 2.0;
        assert!((dl - dl_fd).norm() <= 1e-6 * dl_fd.norm().max(1.0));

        // ∂²φ/∂λ² = Σ ρ_jk w_j w_k.
        let hh = df.hess_holo(&z);
        let mut d2 = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                d2 += hh[(i, j)] * w[i] * w[j];
            }
        }
        let d2_fd = C64::new(r.dss() - r.dtt(), -2.0 * r.dst()) / 4.0;
        assert!((d2 - d2_fd).norm() <= 1e-6 * d2_fd.norm().max(1.0), "{d2} vs {d2_fd}");

        // The mixed Hessian reproduces the Levi form.
        let hm = df.hess_mixed(&z);
        let mut lm = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                lm += hm[(i, j)] * w[i] * w[j].conj();
            }
        }
        assert!(lm.im.abs() <= 1e-12 * lm.norm().max(1.0));
        assert!(rel(lm.re, levi_fd) <= 1e-6);
    }
}

#[test]
fn taylor_model_exact_for_quadratics() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = 3;
        let mut terms = Vec::new();
        for _ in 0..6 {
            let mut zp = vec![0u32; n];
            let mut zb = vec![0u32; n];
            for _ in 0..2 {
                if rng.gen_bool(0.5) {
                    zp[rng.gen_range(0..n)] += 1;
                } else {
                    zb[rng.gen_range(0..n)] += 1;
                }
            }
            terms.push(Monomial {
                z_pow: zp,
                zbar_pow: zb,
                coeff: random_c(&mut rng, 1.0),
            });
        }
        let df = PolynomialRho::new(n, terms).unwrap();
        let z: Vec<C64> = (0..n).map(|_| random_c(&mut rng, 1.0)).collect();
        let w: Vec<C64> = (0..n).map(|_| random_c(&mut rng, 1.0)).collect();
        let direct = df.rho(&shift(&z, &w, C64::new(1.0, 0.0)));
        assert!((taylor_model(&df, &z, &w).unwrap() - direct).abs() <= 1e-12);
    }
}

#[test]
fn taylor_model_error_is_cubic() {
    let eps = 0.1;
    let df = PolynomialRho::cubic_perturbed_ball(2, eps);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let z: Vec<C64> = (0..2).map(|_| random_c(&mut rng, 0.6)).collect();
        let dir: Vec<C64> = (0..2).map(|_| random_c(&mut rng, 1.0)).collect();
        let len = dir.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let w: Vec<C64> = dir.iter().map(|c| c * (1e-3 / len)).collect();
        let direct = df.rho(&shift(&z, &w, C64::new(1.0, 0.0)));
        let err = (taylor_model(&df, &z, &w).unwrap() - direct).abs();
        // remainder is exactly eps·Re(w₁³)
        assert!(err <= eps * 1e-9 + 1e-15, "err {err}");
    }
}

#[test]
fn ellipsoid_hessians_match_differences() {
    let df = Ellipsoid::from_radii(&[1.0, 0.5, 2.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let z: Vec<C64> = (0..3).map(|_| random_c(&mut rng, 0.4)).collect();
        let w: Vec<C64> = (0..3).map(|_| random_c(&mut rng, 1.0)).collect();
        let r = Restriction {
            df: &df,
            z: z.clone(),
            w: w.clone(),
        };
        let levi_fd = (r.dss() + r.dtt()) / 4.0;
        assert!(rel(levi_form(&df, &z, &w).unwrap(), levi_fd) <= 1e-6);
    }
}
