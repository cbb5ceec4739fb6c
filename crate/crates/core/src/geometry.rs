//! Defining functions of the target domain and their complex derivatives.
//!
//! All derivatives are Wirtinger derivatives: `∂/∂z = (∂/∂x − i∂/∂y)/2`.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

pub type CMatrix = DMatrix<C64>;

/// A point of `Cⁿ`, `n ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CxPoint(pub Vec<C64>);

impl CxPoint {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Argument(format!(
                "points need at least two coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Argument("non-finite coordinate".into()));
        }
        Ok(CxPoint(coords))
    }

    pub fn from_re(coords: &[f64]) -> Self {
        CxPoint(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }
}

impl Deref for CxPoint {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Bilinear pairing `Σ a_j b_j` (no conjugation).
pub fn pair(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn fmt_point(z: &[C64]) -> String {
    let parts: Vec<String> = z.iter().map(|c| format!("{:.6}{:+.6}i", c.re, c.im)).collect();
    format!("({})", parts.join(", "))
}

/// A real defining function `ρ` with `Ω = {ρ < 0}`.
pub trait DefiningFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn rho(&self, z: &[C64]) -> f64;
    /// `∂ρ/∂z_j`.
    fn grad(&self, z: &[C64]) -> Vec<C64>;
    /// `∂²ρ/∂z_j∂z_k`, complex symmetric.
    fn hess_holo(&self, z: &[C64]) -> CMatrix;
    /// `∂²ρ/∂z_i∂z̄_j`, Hermitian.
    fn hess_mixed(&self, z: &[C64]) -> CMatrix;
    /// Half-width of the coordinate box on which `ρ` is defined.
    fn box_radius(&self) -> f64 {
        10.0
    }

    fn contains(&self, z: &[C64]) -> bool {
        let r = self.box_radius();
        z.len() == self.dim()
            && z.iter()
                .all(|c| c.re.is_finite() && c.im.is_finite() && c.re.abs() <= r && c.im.abs() <= r)
    }
}

fn check_box(df: &dyn DefiningFunction, z: &[C64]) -> Result<()> {
    if df.contains(z) {
        Ok(())
    } else {
        Err(Error::Domain { point: fmt_point(z) })
    }
}

/// `ρ = Σ a_j |z_j|² − 1`; the unit ball when every weight is one.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub weights: Vec<f64>,
}

impl Ellipsoid {
    pub fn ball(n: usize) -> Self {
        Ellipsoid {
            weights: vec![1.0; n],
        }
    }

    /// Semi-axes `r_j`, i.e. weights `1/r_j²`.
    pub fn from_radii(radii: &[f64]) -> Result<Self> {
        if radii.len() < 2 || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Argument("ellipsoid radii must be ≥ 2 positive numbers".into()));
        }
        Ok(Ellipsoid {
            weights: radii.iter().map(|r| 1.0 / (r * r)).collect(),
        })
    }
}

impl DefiningFunction for Ellipsoid {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn rho(&self, z: &[C64]) -> f64 {
        self.weights.iter().zip(z).map(|(a, c)| a * c.norm_sqr()).sum::<f64>() - 1.0
    }

    fn grad(&self, z: &[C64]) -> Vec<C64> {
        self.weights.iter().zip(z).map(|(a, c)| c.conj() * *a).collect()
    }

    fn hess_holo(&self, _z: &[C64]) -> CMatrix {
        CMatrix::zeros(self.dim(), self.dim())
    }

    fn hess_mixed(&self, _z: &[C64]) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.weights.iter().map(|&a| C64::new(a, 0.0)),
        ))
    }
}

/// One term `c · z^α · z̄^β`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub z_pow: Vec<u32>,
    pub zbar_pow: Vec<u32>,
    pub coeff: C64,
}

/// `ρ = Re Σ c z^α z̄^β`.
///
/// Taking the real part symmetrizes any non-Hermitian coefficient list, so
/// every coefficient list defines a real function.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialRho {
    pub dim: usize,
    pub terms: Vec<Monomial>,
}

fn falling(p: u32, d: u32) -> f64 {
    (0..d).map(|i| (p - i) as f64).product()
}

impl PolynomialRho {
    pub fn new(dim: usize, terms: Vec<Monomial>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Argument("polynomial ρ needs n ≥ 2".into()));
        }
        for t in &terms {
            if t.z_pow.len() != dim || t.zbar_pow.len() != dim {
                return Err(Error::Argument("monomial multi-index has the wrong length".into()));
            }
        }
        Ok(PolynomialRho { dim, terms })
    }

    /// `|z|² − 1` plus `eps · Re(z₁³)`.
    pub fn cubic_perturbed_ball(n: usize, eps: f64) -> Self {
        let mut terms: Vec<Monomial> = (0..n)
            .map(|j| {
                let mut e = vec![0; n];
                e[j] = 1;
                Monomial {
                    z_pow: e.clone(),
                    zbar_pow: e,
                    coeff: C64::new(1.0, 0.0),
                }
            })
            .collect();
        terms.push(Monomial {
            z_pow: vec![0; n],
            zbar_pow: vec![0; n],
            coeff: C64::new(-1.0, 0.0),
        });
        let mut cube = vec![0; n];
        cube[0] = 3;
        terms.push(Monomial {
            z_pow: cube,
            zbar_pow: vec![0; n],
            coeff: C64::new(eps, 0.0),
        });
        PolynomialRho { dim: n, terms }
    }

    /// Partial derivative `∂^{|dz|+|dzb|} P / ∂z^{dz} ∂z̄^{dzb}` of the
    /// unsymmetrized sum `P = Σ c z^α z̄^β`.
    fn partial(&self, z: &[C64], dz: &[u32], dzb: &[u32]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        'terms: for t in &self.terms {
            let mut v = t.coeff;
            for j in 0..self.dim {
                if t.z_pow[j] < dz[j] || t.zbar_pow[j] < dzb[j] {
                    continue 'terms;
                }
                v *= falling(t.z_pow[j], dz[j]) * falling(t.zbar_pow[j], dzb[j]);
                v *= z[j].powu(t.z_pow[j] - dz[j]) * z[j].conj().powu(t.zbar_pow[j] - dzb[j]);
            }
            acc += v;
        }
        acc
    }

    fn unit(&self, i: usize) -> Vec<u32> {
        let mut e = vec![0; self.dim];
        e[i] = 1;
        e
    }

    fn pair_index(&self, i: usize, j: usize) -> Vec<u32> {
        let mut e = vec![0; self.dim];
        e[i] += 1;
        e[j] += 1;
        e
    }
}

impl DefiningFunction for PolynomialRho {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rho(&self, z: &[C64]) -> f64 {
        let zero = vec![0; self.dim];
        self.partial(z, &zero, &zero).re
    }

    fn grad(&self, z: &[C64]) -> Vec<C64> {
        let zero = vec![0; self.dim];
        (0..self.dim)
            .map(|j| {
                let e = self.unit(j);
                (self.partial(z, &e, &zero) + self.partial(z, &zero, &e).conj()) * 0.5
            })
            .collect()
    }

    fn hess_holo(&self, z: &[C64]) -> CMatrix {
        let zero = vec![0; self.dim];
        CMatrix::from_fn(self.dim, self.dim, |j, k| {
            let e = self.pair_index(j, k);
            (self.partial(z, &e, &zero) + self.partial(z, &zero, &e).conj()) * 0.5
        })
    }

    fn hess_mixed(&self, z: &[C64]) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let (ei, ej) = (self.unit(i), self.unit(j));
            (self.partial(z, &ei, &ej) + self.partial(z, &ej, &ei).conj()) * 0.5
        })
    }
}

type RhoFn = dyn Fn(&[C64]) -> f64 + Send + Sync;

/// Black-box `ρ` with central finite-difference derivatives.
pub struct FiniteDifference {
    dim: usize,
    f: Box<RhoFn>,
    pub step: f64,
    pub box_radius: f64,
}

impl FiniteDifference {
    pub fn new(dim: usize, f: impl Fn(&[C64]) -> f64 + Send + Sync + 'static) -> Self {
        FiniteDifference {
            dim,
            f: Box::new(f),
            step: 1e-5,
            box_radius: 10.0,
        }
    }

    /// Shift along real coordinate `a` (`2j` is `Re z_j`, `2j+1` is `Im z_j`).
    fn shifted(&self, z: &[C64], moves: &[(usize, f64)]) -> f64 {
        let mut p = z.to_vec();
        for &(a, h) in moves {
            if a % 2 == 0 {
                p[a / 2].re += h;
            } else {
                p[a / 2].im += h;
            }
        }
        (self.f)(&p)
    }

    fn d1(&self, z: &[C64], a: usize) -> f64 {
        let h = self.step;
        (self.shifted(z, &[(a, h)]) - self.shifted(z, &[(a, -h)])) / (2.0 * h)
    }

    fn d2(&self, z: &[C64], a: usize, b: usize) -> f64 {
        let h = self.step;
        if a == b {
            (self.shifted(z, &[(a, h)]) - 2.0 * (self.f)(z) + self.shifted(z, &[(a, -h)])) / (h * h)
        } else {
            (self.shifted(z, &[(a, h), (b, h)]) - self.shifted(z, &[(a, h), (b, -h)])
                - self.shifted(z, &[(a, -h), (b, h)])
                + self.shifted(z, &[(a, -h), (b, -h)]))
                / (4.0 * h * h)
        }
    }
}

impl DefiningFunction for FiniteDifference {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rho(&self, z: &[C64]) -> f64 {
        (self.f)(z)
    }

    fn grad(&self, z: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|j| C64::new(self.d1(z, 2 * j), -self.d1(z, 2 * j + 1)) * 0.5)
            .collect()
    }

    fn hess_holo(&self, z: &[C64]) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |j, k| {
            let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            C64::new(
                self.d2(z, xj, xk) - self.d2(z, yj, yk),
                -(self.d2(z, xj, yk) + self.d2(z, yj, xk)),
            ) * 0.25
        })
    }

    fn hess_mixed(&self, z: &[C64]) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let (xi, yi, xj, yj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
            C64::new(
                self.d2(z, xi, xj) + self.d2(z, yi, yj),
                self.d2(z, xi, yj) - self.d2(z, yi, xj),
            ) * 0.25
        })
    }

    fn box_radius(&self) -> f64 {
        self.box_radius
    }
}

/// The strip `{rho_lo ≤ ρ ≤ rho_hi}` inside `Ω` where discs are attached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarBand {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub lambda_min: f64,
}

impl CollarBand {
    pub fn new(rho_lo: f64, rho_hi: f64, lambda_min: f64) -> Result<Self> {
        if !(rho_lo < rho_hi && rho_hi < 0.0) {
            return Err(Error::Argument(format!(
                "collar band needs rho_lo < rho_hi < 0, got [{rho_lo}, {rho_hi}]"
            )));
        }
        if !(lambda_min > 0.0) {
            return Err(Error::Argument(format!("lambda_min must be positive, got {lambda_min}")));
        }
        Ok(CollarBand {
            rho_lo,
            rho_hi,
            lambda_min,
        })
    }

    /// Default band `[−0.25·scale, −0.02·scale]`.
    pub fn from_scale(scale: f64, lambda_min: f64) -> Result<Self> {
        CollarBand::new(-0.25 * scale, -0.02 * scale, lambda_min)
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.rho_lo && rho <= self.rho_hi
    }
}

pub fn levi_form(df: &dyn DefiningFunction, z: &[C64], w: &[C64]) -> Result<f64> {
    check_box(df, z)?;
    let h = df.hess_mixed(z);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..w.len() {
        for j in 0..w.len() {
            acc += h[(i, j)] * w[i] * w[j].conj();
        }
    }
    let scale = 1.0 + acc.re.abs();
    if acc.im.abs() > 1e-8 * scale {
        return Err(Error::InconsistentHessian { residue: acc.im });
    }
    Ok(acc.re)
}

/// Second-order model `ρ(z) + Re(2∂ρ·w + wᵀ(∂²ρ)w) + L_ρ(z,w)`.
pub fn taylor_model(df: &dyn DefiningFunction, z: &[C64], w: &[C64]) -> Result<f64> {
    let levi = levi_form(df, z, w)?;
    let g = df.grad(z);
    let q = df.hess_holo(z);
    let mut holo = pair(&g, w) * 2.0;
    for j in 0..w.len() {
        for k in 0..w.len() {
            holo += q[(j, k)] * w[j] * w[k];
        }
    }
    Ok(df.rho(z) + holo.re + levi)
}

/// Real eigenvalues of the Levi matrix at `z`, ascending.
pub fn levi_eigenvalues(df: &dyn DefiningFunction, z: &[C64]) -> Vec<f64> {
    let h = df.hess_mixed(z);
    let herm = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AdmissibilityMode {
    /// Positive definite Levi form.
    #[default]
    Strict,
    /// At least two positive Levi eigenvalues.
    #[serde(alias = "remark22")]
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub mode: AdmissibilityMode,
    pub passed: bool,
    pub samples: usize,
    pub min_eigenvalue: f64,
    pub min_positive_count: usize,
    pub min_grad_norm: f64,
    pub failures: usize,
}

pub fn check_admissible(
    df: &dyn DefiningFunction,
    band: &CollarBand,
    samples: &[CxPoint],
    mode: AdmissibilityMode,
) -> Result<AdmissibilityReport> {
    if samples.is_empty() {
        return Err(Error::Argument("admissibility needs at least one sample".into()));
    }
    let mut min_eig = f64::INFINITY;
    let mut min_pos = usize::MAX;
    let mut min_grad = f64::INFINITY;
    let mut failures = 0;
    for z in samples {
        check_box(df, z)?;
        let r = df.rho(z);
        if !band.contains(r) {
            return Err(Error::Domain {
                point: format!("{} (ρ = {r:.6} outside the collar band)", fmt_point(z)),
            });
        }
        let ev = levi_eigenvalues(df, z);
        let positive = ev.iter().filter(|&&e| e > 0.0).count();
        let gn = norm(&df.grad(z));
        let ok_levi = match mode {
            AdmissibilityMode::Strict => ev[0] > 0.0,
            AdmissibilityMode::Relaxed => positive >= 2,
        };
        if !ok_levi || gn < 1e-12 {
            failures += 1;
        }
        min_eig = min_eig.min(ev[0]);
        min_pos = min_pos.min(positive);
        min_grad = min_grad.min(gn);
    }
    Ok(AdmissibilityReport {
        mode,
        passed: failures == 0,
        samples: samples.len(),
        min_eigenvalue: min_eig,
        min_positive_count: min_pos,
        min_grad_norm: min_grad,
        failures,
    })
}

/// Orthogonal projector onto `ker ∂ρ(z) = {w : Σ ∂ρ/∂z_j w_j = 0}`.
pub fn complex_tangent_projector(df: &dyn DefiningFunction, z: &[C64]) -> Result<CMatrix> {
    let g = df.grad(z);
    let gn = norm(&g);
    if gn < 1e-12 {
        return Err(Error::DegenerateGradient { norm: gn });
    }
    // ker ∂ρ is the Hermitian complement of conj(∂ρ).
    let nvec = DVector::from_iterator(g.len(), g.iter().map(|c| c.conj() / gn));
    Ok(CMatrix::identity(g.len(), g.len()) - &nvec * nvec.adjoint())
}

pub fn apply(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (m * DVector::from_column_slice(v)).iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn ball_levi_is_one() {
        let ball = Ellipsoid::ball(2);
        let v = levi_form(&ball, &[c(0.5, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn ellipsoid_levi() {
        let e = Ellipsoid { weights: vec![1.0, 4.0] };
        let v = levi_form(&e, &[c(0.1, 0.2), c(-0.3, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(v, 4.0);
    }

    #[test]
    fn radii_map_to_weights() {
        let e = Ellipsoid::from_radii(&[1.0, 0.5]).unwrap();
        assert_eq!(e.weights, vec![1.0, 4.0]);
    }

    #[test]
    fn ball_taylor_example() {
        let ball = Ellipsoid::ball(2);
        let z = [c(0.5, 0.0), c(0.0, 0.0)];
        let w = [c(0.1, 0.0), c(0.2, 0.0)];
        let t = taylor_model(&ball, &z, &w).unwrap();
        assert!((t - (-0.60)).abs() < 1e-15);
        let zw = [z[0] + w[0], z[1] + w[1]];
        assert!((t - ball.rho(&zw)).abs() < 1e-15);
        assert_eq!(taylor_model(&ball, &z, &[c(0.0, 0.0); 2]).unwrap(), ball.rho(&z));
    }

    #[test]
    fn outside_box_is_domain_error() {
        let ball = Ellipsoid::ball(2);
        let err = levi_form(&ball, &[c(20.0, 0.0), c(0.0, 0.0)], &[c(1.0, 0.0); 2]).unwrap_err();
        assert_eq!(err.kind(), "domain");
    }

    #[test]
    fn non_hermitian_hessian_detected() {
        struct Broken;
        impl DefiningFunction for Broken {
            fn dim(&self) -> usize {
                2
            }
            fn rho(&self, _z: &[C64]) -> f64 {
                0.0
            }
            fn grad(&self, _z: &[C64]) -> Vec<C64> {
                vec![c(1.0, 0.0); 2]
            }
            fn hess_holo(&self, _z: &[C64]) -> CMatrix {
                CMatrix::zeros(2, 2)
            }
            fn hess_mixed(&self, _z: &[C64]) -> CMatrix {
                CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)])
            }
        }
        let err = levi_form(&Broken, &[c(0.0, 0.0); 2], &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap_err();
        assert_eq!(err.kind(), "inconsistent-hessian");
    }

    #[test]
    fn admissibility_cases() {
        let band = CollarBand::new(-0.5, -0.01, 0.5).unwrap();
        let pts = vec![CxPoint::from_re(&[0.9, 0.0]), CxPoint::from_re(&[0.0, 0.95])];
        let ball = Ellipsoid::ball(2);
        let r = check_admissible(&ball, &band, &pts, AdmissibilityMode::Strict).unwrap();
        assert!(r.passed);
        assert_eq!(r.min_eigenvalue, 1.0);

        let ell = Ellipsoid { weights: vec![1.0, 4.0] };
        let pts_e = vec![CxPoint::from_re(&[0.9, 0.0])];
        let r = check_admissible(&ell, &band, &pts_e, AdmissibilityMode::Strict).unwrap();
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-14);

        // |z1|² − |z2|² − 1
        let hyper = Ellipsoid { weights: vec![1.0, -1.0] };
        let pts_h = vec![CxPoint::from_re(&[0.9, 0.3])];
        let r = check_admissible(&hyper, &band, &pts_h, AdmissibilityMode::Strict).unwrap();
        assert!(!r.passed);
        let r = check_admissible(&hyper, &band, &pts_h, AdmissibilityMode::Relaxed).unwrap();
        assert!(!r.passed);
        assert_eq!(r.min_positive_count, 1);

        assert_eq!(
            check_admissible(&ball, &band, &[], AdmissibilityMode::Strict).unwrap_err().kind(),
            "argument"
        );
    }

    #[test]
    fn projector_examples() {
        let ball = Ellipsoid::ball(2);
        let p = complex_tangent_projector(&ball, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let expect = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
        assert!((p - expect).norm() < 1e-15);

        let p = complex_tangent_projector(&ball, &[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let t = DVector::from_vec(vec![c(-0.8, 0.0), c(0.6, 0.0)]);
        let expect = &t * t.adjoint();
        assert!((p - expect).norm() < 1e-15);

        let err = complex_tangent_projector(&ball, &[c(0.0, 0.0); 2]).unwrap_err();
        assert_eq!(err.kind(), "degenerate-gradient");
    }

    #[test]
    fn polynomial_matches_ellipsoid() {
        let p = PolynomialRho::cubic_perturbed_ball(2, 0.0);
        let b = Ellipsoid::ball(2);
        let z = [c(0.3, -0.2), c(0.1, 0.5)];
        assert!((p.rho(&z) - b.rho(&z)).abs() < 1e-15);
        assert!((p.hess_mixed(&z) - b.hess_mixed(&z)).norm() < 1e-15);
        let g: Vec<C64> = p.grad(&z).iter().zip(b.grad(&z)).map(|(x, y)| x - y).collect();
        assert!(norm(&g) < 1e-15);
    }

    fn probe_point() -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-0.8f64..0.8, -0.8f64..0.8), 2).prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
    }

    proptest! {
        #[test]
        fn levi_scales_with_modulus(z in probe_point(), w in probe_point(), lr in -2.0f64..2.0, li in -2.0f64..2.0) {
            let rho = PolynomialRho::cubic_perturbed_ball(2, 0.3);
            let l = c(lr, li);
            let lw: Vec<C64> = w.iter().map(|x| x * l).collect();
            let a = levi_form(&rho, &z, &lw).unwrap();
            let b = l.norm_sqr() * levi_form(&rho, &z, &w).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }

        #[test]
        fn projector_is_idempotent_and_kills_gradient(z in probe_point()) {
            prop_assume!(norm(&z) > 0.05);
            let rho = PolynomialRho::cubic_perturbed_ball(2, 0.3);
            let p = complex_tangent_projector(&rho, &z).unwrap();
            prop_assert!((&p * &p - &p).norm() < 1e-12);
            prop_assert!((&p - p.adjoint()).norm() < 1e-12);
            let g = rho.grad(&z);
            let gd: Vec<C64> = g.iter().map(|x| x.conj()).collect();
            prop_assert!(norm(&apply(&p, &gd)) < 1e-10);
            // tangent vectors are fixed
            let t = vec![-g[1], g[0]];
            prop_assert!(pair(&g, &t).norm() < 1e-12);
            let pt = apply(&p, &t);
            let diff: Vec<C64> = pt.iter().zip(&t).map(|(a, b)| a - b).collect();
            prop_assert!(norm(&diff) < 1e-10);
        }

        #[test]
        fn quadratic_taylor_is_exact(z in probe_point(), w in probe_point()) {
            let rho = Ellipsoid { weights: vec![1.0, 2.5] };
            let zw: Vec<C64> = z.iter().zip(&w).map(|(a, b)| a + b).collect();
            let t = taylor_model(&rho, &z, &w).unwrap();
            prop_assert!((t - rho.rho(&zw)).abs() < 1e-12);
        }
    }
}
