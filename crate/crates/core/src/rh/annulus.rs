//! Riemann-Hilbert problem on the annulus `r < |x| < 1`.
//!
//! `ζ = x^m (x − a)^ε exp(Φ)` with `Φ` a Laurent series, `ε ∈ {0, 1}` and
//! `a ∈ (r, 1)`. The real period condition on `log|ζ|` is absorbed by the
//! monomial exponent `m` and the modulus of the extra zero.

use serde::{Deserialize, Serialize};

use super::{discrete_winding, RhOptions, StepKind, TraceRow};
use crate::center::{eval_laurent, eval_laurent_derivative};
use crate::curves::CurveFamily;
use crate::error::{Error, Result};
use crate::fourier::{circle_nodes, dft_real, is_power_of_two};
use crate::C64;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusZeta {
    pub monomial: i32,
    /// Extra zero on the positive axis, if any.
    pub zero: Option<f64>,
    pub log_min_exp: i32,
    pub log_coeffs: Vec<C64>,
}

impl AnnulusZeta {
    pub fn eval(&self, x: C64) -> C64 {
        let phi = eval_laurent(&self.log_coeffs, self.log_min_exp, x);
        let z = self.zero.map_or(C64::new(1.0, 0.0), |a| x - a);
        x.powi(self.monomial) * z * phi.exp()
    }

    pub fn derivative(&self, x: C64) -> C64 {
        let phi = eval_laurent(&self.log_coeffs, self.log_min_exp, x);
        let dphi = eval_laurent_derivative(&self.log_coeffs, self.log_min_exp, x);
        let log_d = self.monomial as f64 / x + dphi;
        let xm = x.powi(self.monomial) * phi.exp();
        match self.zero {
            Some(a) => xm * (1.0 + (x - a) * log_d),
            None => xm * log_d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusSolution {
    pub zeta: AnnulusZeta,
    pub theta_outer: Vec<f64>,
    pub theta_inner: Vec<f64>,
    /// Mismatch of the mean of `Re Φ` between the two circles.
    pub period_residual: f64,
    pub residual: f64,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
}

/// Zero, Laurent coefficients, outer and inner targets, period mismatch.
type Targets = (Option<f64>, Vec<C64>, Vec<f64>, Vec<f64>, f64);

struct Setup<'a> {
    curves: &'a CurveFamily,
    r: f64,
    m: i32,
    zero: Option<f64>,
    s: Vec<f64>,
    min_exp: i32,
}

impl Setup<'_> {
    fn mean_log(&self, comp: usize, theta: &[f64]) -> f64 {
        theta
            .iter()
            .enumerate()
            .map(|(k, &t)| self.curves.log_radius(comp, k, t))
            .sum::<f64>()
            / theta.len() as f64
    }

    /// Re-solves for `Φ` and returns the updated zero, coefficients and targets.
    fn targets(&self, to: &[f64], ti: &[f64]) -> Result<Targets> {
        let k = to.len();
        let ln_r = self.r.ln();
        let zero = match self.zero {
            Some(_) => {
                let a = (self.mean_log(1, ti) - self.mean_log(0, to) - self.m as f64 * ln_r).exp();
                if !(a > self.r && a < 1.0) {
                    return Err(Error::Configuration(format!(
                        "annulus zero modulus {a:.6} left ({}, 1)",
                        self.r
                    )));
                }
                Some(a)
            }
            None => None,
        };
        let outer = circle_nodes(k, 1.0);
        let inner = circle_nodes(k, self.r);
        let u1: Vec<f64> = (0..k)
            .map(|i| self.curves.log_radius(0, i, to[i]) - zero.map_or(0.0, |a| (outer[i] - a).norm().ln()))
            .collect();
        let u2: Vec<f64> = (0..k)
            .map(|i| {
                self.curves.log_radius(1, i, ti[i])
                    - self.m as f64 * ln_r
                    - zero.map_or(0.0, |a| (inner[i] - a).norm().ln())
            })
            .collect();
        let a = dft_real(&u1);
        let b = dft_real(&u2);
        let period = (a[0].re - b[0].re).abs();
        let nmax = (-self.min_exp) as usize;
        let mut coeffs = vec![C64::new(0.0, 0.0); 2 * nmax + 1];
        coeffs[nmax] = C64::new(a[0].re, 0.0);
        for n in 1..=nmax {
            let rn = self.r.powi(n as i32);
            let p = (b[n] * rn - a[n]) * 2.0 / (rn * rn - 1.0);
            let q = (a[n] * rn - b[n]) * 2.0 * rn / (rn * rn - 1.0);
            coeffs[nmax + n] = p;
            coeffs[nmax - n] = q.conj();
        }
        let im_out: Vec<f64> = outer.iter().map(|&x| eval_laurent(&coeffs, self.min_exp, x).im).collect();
        let im_in: Vec<f64> = inner.iter().map(|&x| eval_laurent(&coeffs, self.min_exp, x).im).collect();
        let mut t_out: Vec<f64> = (0..k)
            .map(|i| {
                let s = self.s[i];
                let base = match zero {
                    Some(a) => (self.m + 1) as f64 * s + (1.0 - a * outer[i].conj()).arg(),
                    None => self.m as f64 * s,
                };
                base + im_out[i]
            })
            .collect();
        let gauge = (0..k).map(|i| to[i] - t_out[i]).sum::<f64>() / k as f64;
        coeffs[nmax].im = gauge;
        for t in &mut t_out {
            *t += gauge;
        }
        let t_in: Vec<f64> = (0..k)
            .map(|i| {
                let s = self.s[i];
                let base = match zero {
                    Some(a) => {
                        self.m as f64 * s
                            + std::f64::consts::PI
                            + (1.0 - (self.r / a) * C64::from_polar(1.0, s)).arg()
                    }
                    None => self.m as f64 * s,
                };
                base + im_in[i] + gauge
            })
            .collect();
        Ok((zero, coeffs, t_out, t_in, period))
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Damped fixed-point solve on both boundary circles.
pub fn solve_rh_annulus(curves: &CurveFamily, inner_radius: f64, opts: &RhOptions) -> Result<AnnulusSolution> {
    if curves.components.len() != 2 {
        return Err(Error::Argument("annulus curves need two boundary components".into()));
    }
    let k = curves.k();
    if !is_power_of_two(k) {
        return Err(Error::Argument(format!("boundary grid size {k} is not a power of two")));
    }
    let r = inner_radius;
    let ln_r = r.ln();
    let mean_mode0 = |c: usize| {
        curves.components[c].log_radius.iter().map(|t| t.coeffs[0].re).sum::<f64>() / k as f64
    };
    let l = mean_mode0(1) - mean_mode0(0);
    let q = l / ln_r;
    let (m, zero) = if (q - q.round()).abs() < 1e-9 {
        (q.round() as i32, None)
    } else {
        let m = q.floor() as i32;
        (m, Some((l - m as f64 * ln_r).exp()))
    };
    // Laurent modes are capped so that r^{-n} stays representable.
    let cap = (250.0 / -ln_r.log10().min(-1e-3)).floor().max(1.0) as usize;
    let nmax = (k / 2 - 1).min(cap);
    let s: Vec<f64> = (0..k).map(|i| TAU * i as f64 / k as f64).collect();
    let setup = Setup {
        curves,
        r,
        m,
        zero,
        s: s.clone(),
        min_exp: -(nmax as i32),
    };
    let w_out = m + zero.is_some() as i32;
    let mut to: Vec<f64> = s.iter().map(|x| w_out as f64 * x).collect();
    let mut ti: Vec<f64> = s
        .iter()
        .map(|x| m as f64 * x + if zero.is_some() { std::f64::consts::PI } else { 0.0 })
        .collect();

    let eval = |to: &[f64], ti: &[f64]| -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let (_, _, t_out, t_in, _) = setup.targets(to, ti)?;
        Ok((sup_diff(to, &t_out).max(sup_diff(ti, &t_in)), t_out, t_in))
    };
    let (mut sup, mut t_out, mut t_in) = eval(&to, &ti)?;
    let mut lambda = opts.lambda0;
    let mut trace = vec![TraceRow {
        iteration: 0,
        sup_defect: sup,
        lambda,
        step: StepKind::Initial,
    }];
    let mut iter = 0;
    while !(sup < opts.tol) {
        if iter >= opts.max_iter {
            return Err(Error::Nonconvergence {
                iterations: iter,
                last_defect: sup,
                history: trace.iter().map(|t| t.sup_defect).collect(),
            });
        }
        iter += 1;
        let (co, ci, next) = loop {
            let co: Vec<f64> = to.iter().zip(&t_out).map(|(t, g)| t + lambda * (g - t)).collect();
            let ci: Vec<f64> = ti.iter().zip(&t_in).map(|(t, g)| t + lambda * (g - t)).collect();
            let next = eval(&co, &ci)?;
            if next.0 > sup && lambda > opts.lambda_floor {
                lambda = (lambda * 0.5).max(opts.lambda_floor);
                continue;
            }
            break (co, ci, next);
        };
        let wo = discrete_winding(&co);
        if wo != w_out as i64 {
            return Err(Error::Reindexing {
                expected: w_out as i64,
                found: wo,
            });
        }
        to = co;
        ti = ci;
        (sup, t_out, t_in) = next;
        trace.push(TraceRow {
            iteration: iter,
            sup_defect: sup,
            lambda,
            step: StepKind::Picard,
        });
    }

    let (zero, coeffs, _, _, period) = setup.targets(&to, &ti)?;
    let zeta = AnnulusZeta {
        monomial: m,
        zero,
        log_min_exp: setup.min_exp,
        log_coeffs: coeffs,
    };
    let mut residual: f64 = 0.0;
    for (c, radius) in [(0usize, 1.0), (1, r)] {
        for (i, x) in circle_nodes(k, radius).into_iter().enumerate() {
            let z = zeta.eval(x);
            let target = curves.log_radius(c, i, z.arg()).exp();
            residual = residual.max((z.norm() - target).abs());
        }
    }
    Ok(AnnulusSolution {
        zeta,
        theta_outer: to,
        theta_inner: ti,
        period_residual: period,
        residual,
        iterations: iter,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(outer: f64, inner: f64, k: usize) -> CurveFamily {
        CurveFamily::from_radii(vec![vec![vec![outer; 32]; k], vec![vec![inner; 32]; k]], 4).unwrap()
    }

    #[test]
    fn equal_circles_give_constant() {
        let fam = constant(0.4, 0.4, 64);
        let sol = solve_rh_annulus(&fam, 0.5, &RhOptions::default()).unwrap();
        assert_eq!(sol.zeta.monomial, 0);
        assert!(sol.zeta.zero.is_none());
        assert!(sol.period_residual < 1e-12);
        assert!(sol.residual < 1e-9);
    }

    #[test]
    fn different_circles_need_a_zero() {
        let fam = constant(0.5, 0.3, 256);
        let sol = solve_rh_annulus(&fam, 0.5, &RhOptions::default()).unwrap();
        assert_eq!(sol.zeta.monomial, 0);
        let a = sol.zeta.zero.unwrap();
        assert!(a > 0.5 && a < 1.0);
        assert!(sol.period_residual <= 1e-6);
        assert!(sol.residual < 1e-8, "residual {}", sol.residual);
    }

    #[test]
    fn monomial_when_ratio_is_a_power() {
        // R_in / R_out = r^2
        let fam = constant(0.8, 0.8 * 0.25, 64);
        let sol = solve_rh_annulus(&fam, 0.5, &RhOptions::default()).unwrap();
        assert_eq!(sol.zeta.monomial, 2);
        assert!(sol.zeta.zero.is_none());
        let x = C64::new(0.6, 0.3);
        assert!((sol.zeta.eval(x).norm() - 0.8 * x.norm_sqr()).abs() < 1e-9);
    }

    #[test]
    fn derivative_matches_difference() {
        let fam = constant(0.5, 0.3, 64);
        let z = solve_rh_annulus(&fam, 0.5, &RhOptions::default()).unwrap().zeta;
        let x = C64::new(0.1, 0.7);
        let h = 1e-6;
        let fd = (z.eval(x + h) - z.eval(x - h)) / (2.0 * h);
        assert!((fd - z.derivative(x)).norm() < 1e-7);
    }
}
