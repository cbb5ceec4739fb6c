//! Nonlinear Riemann-Hilbert problem with closed restriction curves:
//! find `ζ` holomorphic on the disc with `ζ(x) ∈ γ_x` on the boundary and
//! prescribed zeros.
//!
//! `ζ = B·exp(Φ)` with `B` the Blaschke product of the divisor. On the unit
//! circle `|B| = 1`, so `Re Φ = log R(θ)` and `Im Φ = θ − arg B`. The unknown
//! is the boundary angle `θ(s)`, written `θ = arg B + ψ` with `ψ` periodic;
//! holomorphy of `Φ` is the fixed-point condition
//! `ψ = H[log R(θ)] + mean(ψ)` where `H` is harmonic conjugation.

#[cfg(feature = "annulus")]
pub mod annulus;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curves::CurveFamily;
use crate::error::{Error, Result};
use crate::fourier::{circle_nodes, dft, dft_real, idft, is_power_of_two, signed_mode};
use crate::C64;

const TAU: f64 = std::f64::consts::TAU;

/// Divisor points must stay within this radius on the disc.
pub const MAX_ZERO_RADIUS: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivisorPoint {
    pub location: C64,
    pub order: u32,
}

/// Effective divisor `Σ m_i [a_i]` on the disc.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Divisor {
    pub points: Vec<DivisorPoint>,
}

impl Divisor {
    pub fn new(points: impl IntoIterator<Item = (C64, u32)>) -> Result<Self> {
        let mut d = Divisor::default();
        for (loc, order) in points {
            d.add(loc, order)?;
        }
        Ok(d)
    }

    /// `order · [0]`.
    pub fn at_origin(order: u32) -> Self {
        Divisor {
            points: vec![DivisorPoint {
                location: C64::new(0.0, 0.0),
                order,
            }],
        }
    }

    /// Adds `order · [loc]`, merging with an existing point at the same spot.
    pub fn add(&mut self, loc: C64, order: u32) -> Result<()> {
        if order == 0 {
            return Ok(());
        }
        if !(loc.norm() <= MAX_ZERO_RADIUS) {
            return Err(Error::Divisor(format!(
                "zero at {loc} lies outside |x| ≤ {MAX_ZERO_RADIUS}"
            )));
        }
        match self.points.iter_mut().find(|p| (p.location - loc).norm() < 1e-14) {
            Some(p) => p.order += order,
            None => self.points.push(DivisorPoint { location: loc, order }),
        }
        Ok(())
    }

    /// Raises the order at `loc` to at least `order`.
    pub fn raise_to(&mut self, loc: C64, order: u32) -> Result<()> {
        let current = self.order_at(loc);
        if order > current {
            self.add(loc, order - current)?;
        }
        Ok(())
    }

    pub fn order_at(&self, loc: C64) -> u32 {
        self.points
            .iter()
            .filter(|p| (p.location - loc).norm() < 1e-14)
            .map(|p| p.order)
            .sum()
    }

    pub fn total_degree(&self) -> u32 {
        self.points.iter().map(|p| p.order).sum()
    }

    fn check_inside(&self) -> Result<()> {
        for p in &self.points {
            if p.location.norm() >= 1.0 - 1e-12 {
                return Err(Error::Divisor(format!("zero at {} lies on or outside the boundary", p.location)));
            }
        }
        Ok(())
    }
}

/// `B(x) = Π ((x − a)/(1 − ā x))^m`.
pub fn blaschke(div: &Divisor, x: C64) -> C64 {
    div.points.iter().fold(C64::new(1.0, 0.0), |acc, p| {
        let a = p.location;
        acc * ((x - a) / (1.0 - a.conj() * x)).powu(p.order)
    })
}

/// `B'(x)` by the product rule (regular at the zeros).
pub fn blaschke_derivative(div: &Divisor, x: C64) -> C64 {
    let factors: Vec<(C64, C64, u32)> = div
        .points
        .iter()
        .map(|p| {
            let a = p.location;
            let den = 1.0 - a.conj() * x;
            ((x - a) / den, (1.0 - a.norm_sqr()) / (den * den), p.order)
        })
        .collect();
    let mut acc = C64::new(0.0, 0.0);
    for (i, &(b, db, m)) in factors.iter().enumerate() {
        let mut term = db * m as f64 * b.powu(m - 1);
        for (l, &(bl, _, ml)) in factors.iter().enumerate() {
            if l != i {
                term *= bl.powu(ml);
            }
        }
        acc += term;
    }
    acc
}

/// Continuous lift of `arg B(e^{is})` with `arg B(1)` taken in `(−π, π]`
/// per factor, so the lift increases by `2π·w` over one turn.
pub fn blaschke_arg(div: &Divisor, s: f64) -> f64 {
    let e = C64::from_polar(1.0, s);
    div.points
        .iter()
        .map(|p| {
            let a = p.location;
            // arg(e^{is} − a) = s + arg(1 − a e^{−is}), both principal values continuous.
            p.order as f64 * (s + (1.0 - a * e.conj()).arg() - (1.0 - a.conj() * e).arg())
        })
        .sum()
}

/// Boundary values of the Blaschke factor on the `k`-point grid and its winding.
pub fn blaschke_boundary(div: &Divisor, k: usize) -> Result<(Vec<C64>, i64)> {
    div.check_inside()?;
    let values = circle_nodes(k, 1.0).iter().map(|&x| blaschke(div, x)).collect::<Vec<_>>();
    let args: Vec<f64> = values.iter().map(|v| v.arg()).collect();
    Ok((values, discrete_winding(&args)))
}

fn wrap(a: f64) -> f64 {
    let mut r = a % TAU;
    if r > std::f64::consts::PI {
        r -= TAU;
    } else if r <= -std::f64::consts::PI {
        r += TAU;
    }
    r
}

/// Winding number of the closed polygon `e^{iθ_k}`.
pub fn discrete_winding(theta: &[f64]) -> i64 {
    let k = theta.len();
    let total: f64 = (0..k).map(|i| wrap(theta[(i + 1) % k] - theta[i])).sum();
    (total / TAU).round() as i64
}

/// Harmonic conjugate of a real periodic signal: Fourier multiplier
/// `−i·sign(m)`, with the mean and the Nyquist mode sent to zero.
pub fn harmonic_conjugate(u: &[f64]) -> Vec<f64> {
    let k = u.len();
    let mut c = dft_real(u);
    for (j, cj) in c.iter_mut().enumerate() {
        let m = signed_mode(j, k);
        *cj = if m == 0 || 2 * m.unsigned_abs() as usize == k {
            C64::new(0.0, 0.0)
        } else {
            *cj * C64::new(0.0, -(m.signum() as f64))
        };
    }
    idft(&c).iter().map(|v| v.re).collect()
}

/// `ζ = B·exp(Φ)` on the disc with `Φ(x) = Σ_m log_coeffs[m] x^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscZeta {
    pub divisor: Divisor,
    pub log_coeffs: Vec<C64>,
}

impl DiscZeta {
    fn log_part(&self, x: C64) -> (C64, C64) {
        let mut v = C64::new(0.0, 0.0);
        let mut dv = C64::new(0.0, 0.0);
        for c in self.log_coeffs.iter().rev() {
            dv = dv * x + v;
            v = v * x + c;
        }
        (v, dv)
    }

    pub fn eval(&self, x: C64) -> C64 {
        blaschke(&self.divisor, x) * self.log_part(x).0.exp()
    }

    pub fn derivative(&self, x: C64) -> C64 {
        let (phi, dphi) = self.log_part(x);
        let e = phi.exp();
        blaschke_derivative(&self.divisor, x) * e + blaschke(&self.divisor, x) * e * dphi
    }

    /// Taylor coefficients from `m` samples on the unit circle.
    pub fn taylor_coeffs(&self, m: usize) -> Vec<C64> {
        let vals: Vec<C64> = circle_nodes(m, 1.0).iter().map(|&x| self.eval(x)).collect();
        dft(&vals)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub lambda0: f64,
    pub lambda_floor: f64,
    /// Newton steps are tried once the sup-defect drops below this value.
    pub newton_threshold: f64,
    pub newton: bool,
}

impl Default for RhOptions {
    fn default() -> Self {
        RhOptions {
            tol: 1e-10,
            max_iter: 200,
            lambda0: 0.5,
            lambda_floor: 1.0 / 64.0,
            newton_threshold: 0.1,
            newton: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Initial,
    Picard,
    Newton,
    Restart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub sup_defect: f64,
    pub lambda: f64,
    pub step: StepKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RHSolution {
    /// Boundary angle at the grid nodes.
    pub theta: Vec<f64>,
    pub zeta: DiscZeta,
    /// Largest radial distance of the boundary trace to the curves.
    pub residual: f64,
    pub winding_defect: i64,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    /// Largest negative-index Fourier coefficient of the trace divided by `B`.
    pub holomorphy_defect: f64,
    pub interior_max: f64,
    pub boundary_max: f64,
}

struct Problem<'a> {
    curves: &'a CurveFamily,
    component: usize,
    arg_b: Vec<f64>,
}

impl Problem<'_> {
    fn k(&self) -> usize {
        self.arg_b.len()
    }

    fn theta(&self, psi: &[f64]) -> Vec<f64> {
        self.arg_b.iter().zip(psi).map(|(a, p)| a + p).collect()
    }

    fn log_r(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .enumerate()
            .map(|(k, &t)| self.curves.log_radius(self.component, k, t))
            .collect()
    }

    /// `d = ψ − H[log R(θ)] − mean ψ`.
    fn defect(&self, psi: &[f64]) -> (Vec<f64>, f64) {
        let u = self.log_r(&self.theta(psi));
        let hu = harmonic_conjugate(&u);
        let mean = psi.iter().sum::<f64>() / psi.len() as f64;
        let d: Vec<f64> = psi.iter().zip(&hu).map(|(p, h)| p - h - mean).collect();
        let sup = d.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        (d, sup)
    }

    fn newton_step(&self, psi: &[f64], d: &[f64]) -> Option<Vec<f64>> {
        let k = self.k();
        let theta = self.theta(psi);
        let gp: Vec<f64> = theta
            .iter()
            .enumerate()
            .map(|(i, &t)| self.curves.log_radius_derivative(self.component, i, t))
            .collect();
        let mut e0 = vec![0.0; k];
        e0[0] = 1.0;
        let hcol = harmonic_conjugate(&e0);
        // Bordered system [J 1; 1ᵀ/K 0] keeps mean(δ) = 0.
        let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
        for i in 0..k {
            for j in 0..k {
                let h = hcol[(i + k - j) % k];
                m[(i, j)] = if i == j { 1.0 } else { 0.0 } - h * gp[j] - 1.0 / k as f64;
            }
            m[(i, k)] = 1.0;
            m[(k, i)] = 1.0 / k as f64;
        }
        let mut rhs = DVector::<f64>::zeros(k + 1);
        for i in 0..k {
            rhs[i] = -d[i];
        }
        let sol = m.lu().solve(&rhs)?;
        Some(psi.iter().enumerate().map(|(i, p)| p + sol[i]).collect())
    }
}

const NEWTON_MAX_K: usize = 1024;

/// Solves the Riemann-Hilbert problem on the disc for the curves over
/// boundary component `component` of `curves`.
pub fn solve_rh(curves: &CurveFamily, component: usize, div: &Divisor, opts: &RhOptions) -> Result<RHSolution> {
    let k = curves.k();
    if !is_power_of_two(k) {
        return Err(Error::Argument(format!("boundary grid size {k} is not a power of two")));
    }
    let w = div.total_degree() as i64;
    if w < 1 {
        return Err(Error::Divisor("divisor must have total degree ≥ 1".into()));
    }
    div.check_inside()?;
    let s: Vec<f64> = (0..k).map(|i| TAU * i as f64 / k as f64).collect();
    let arg_b: Vec<f64> = s.iter().map(|&si| blaschke_arg(div, si)).collect();
    let prob = Problem {
        curves,
        component,
        arg_b,
    };
    // θ₀ = w·s, gauge mean(θ − w s) = 0 kept by mean-free updates.
    let psi0: Vec<f64> = s.iter().zip(&prob.arg_b).map(|(si, a)| w as f64 * si - a).collect();

    let mut psi = psi0.clone();
    let (mut d, mut sup) = prob.defect(&psi);
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

        if opts.newton && sup < opts.newton_threshold && k <= NEWTON_MAX_K {
            if let Some(cand) = prob.newton_step(&psi, &d) {
                if discrete_winding(&prob.theta(&cand)) == w {
                    let (dc, sc) = prob.defect(&cand);
                    if sc < sup {
                        psi = cand;
                        d = dc;
                        sup = sc;
                        trace.push(TraceRow {
                            iteration: iter,
                            sup_defect: sup,
                            lambda,
                            step: StepKind::Newton,
                        });
                        continue;
                    }
                }
            }
        }

        let (cand, dc, sc) = loop {
            let cand: Vec<f64> = psi.iter().zip(&d).map(|(p, x)| p - lambda * x).collect();
            let (dc, sc) = prob.defect(&cand);
            if sc > sup && lambda > opts.lambda_floor {
                lambda = (lambda * 0.5).max(opts.lambda_floor);
                continue;
            }
            break (cand, dc, sc);
        };
        let found = discrete_winding(&prob.theta(&cand));
        if found != w {
            if lambda > opts.lambda_floor {
                lambda = (lambda * 0.5).max(opts.lambda_floor);
                psi = psi0.clone();
                (d, sup) = prob.defect(&psi);
                trace.push(TraceRow {
                    iteration: iter,
                    sup_defect: sup,
                    lambda,
                    step: StepKind::Restart,
                });
                continue;
            }
            return Err(Error::Reindexing { expected: w, found });
        }
        psi = cand;
        d = dc;
        sup = sc;
        trace.push(TraceRow {
            iteration: iter,
            sup_defect: sup,
            lambda,
            step: StepKind::Picard,
        });
    }

    let theta = prob.theta(&psi);
    let u = prob.log_r(&theta);
    let mean_psi = psi.iter().sum::<f64>() / k as f64;
    let uh = dft_real(&u);
    let half = k / 2;
    let mut log_coeffs = Vec::with_capacity(half + 1);
    log_coeffs.push(C64::new(uh[0].re, mean_psi));
    for c in &uh[1..half] {
        log_coeffs.push(c * 2.0);
    }
    log_coeffs.push(C64::new(uh[half].re, 0.0));
    let zeta = DiscZeta {
        divisor: div.clone(),
        log_coeffs,
    };
    Ok(finish(curves, component, theta, zeta, w, iter, trace))
}

fn finish(
    curves: &CurveFamily,
    component: usize,
    theta: Vec<f64>,
    zeta: DiscZeta,
    w: i64,
    iterations: usize,
    trace: Vec<TraceRow>,
) -> RHSolution {
    let k = theta.len();
    let nodes = circle_nodes(k, 1.0);
    let mut residual: f64 = 0.0;
    let mut trace_over_b = Vec::with_capacity(k);
    for (i, &x) in nodes.iter().enumerate() {
        let z = zeta.eval(x);
        let r = curves.log_radius(component, i, z.arg()).exp();
        residual = residual.max((z.norm() - r).abs());
        let on_curve = curves.curve_point(component, i, theta[i]);
        trace_over_b.push(on_curve / blaschke(&zeta.divisor, x));
    }
    let coeffs = dft(&trace_over_b);
    let holomorphy_defect = coeffs
        .iter()
        .enumerate()
        .filter(|(j, _)| signed_mode(*j, k) < 0)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max);
    let (interior_max, boundary_max) = modulus_extremes(&zeta);
    RHSolution {
        winding_defect: discrete_winding(&theta) - w,
        theta,
        zeta,
        residual,
        iterations,
        trace,
        holomorphy_defect,
        interior_max,
        boundary_max,
    }
}

pub const INTERIOR_GRID: usize = 64;

/// `(max |ζ|` on the 64×64 interior polar grid, `max |ζ|` on a 1024-point
/// boundary grid`)`.
fn modulus_extremes(zeta: &DiscZeta) -> (f64, f64) {
    let mut interior: f64 = 0.0;
    for i in 0..INTERIOR_GRID {
        let r = i as f64 / INTERIOR_GRID as f64;
        for a in 0..INTERIOR_GRID {
            let x = C64::from_polar(r, TAU * a as f64 / INTERIOR_GRID as f64);
            interior = interior.max(zeta.eval(x).norm());
        }
    }
    let boundary = circle_nodes(1024, 1.0)
        .iter()
        .map(|&x| zeta.eval(x).norm())
        .fold(0.0, f64::max);
    (interior, boundary)
}

/// `sup |ζ|` over a polar grid of the closed disc of radius `radius`.
pub fn sup_on_disc(f: impl Fn(C64) -> f64, radius: f64) -> f64 {
    let mut best = f(C64::new(0.0, 0.0));
    for i in 1..=16 {
        let r = radius * i as f64 / 16.0;
        for a in 0..64 {
            best = best.max(f(C64::from_polar(r, TAU * a as f64 / 64.0)));
        }
    }
    best
}

/// Zero count at the origin predicted by `|ζ(x)| ≤ (max R)·|x|^w`.
pub fn predicted_order(k_compact: f64, eps: f64) -> u32 {
    if k_compact <= 0.0 {
        return 0;
    }
    (eps.ln() / k_compact.ln()).ceil().max(0.0) as u32
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smallness {
    pub divisor: Divisor,
    pub solution: RHSolution,
    pub predicted_order: Option<u32>,
    /// `(order at the origin, measured sup over the compact)` for every solve.
    pub attempts: Vec<(u32, f64)>,
}

/// Adds zeros at the origin until the solved `ζ` is below `eps` on
/// `{|x| ≤ k_compact}`.
pub fn smallness_by_zeros(
    curves: &CurveFamily,
    base: &Divisor,
    k_compact: f64,
    eps: f64,
    opts: &RhOptions,
) -> Result<Smallness> {
    if !(0.0..1.0).contains(&k_compact) {
        return Err(Error::Argument(format!("compact radius must lie in [0, 1), got {k_compact}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("eps must be positive, got {eps}")));
    }
    let origin = C64::new(0.0, 0.0);
    let mut div = base.clone();
    let mut predicted = None;
    if eps < curves.max_radius() {
        let w = predicted_order(k_compact, eps);
        predicted = Some(w);
        div.raise_to(origin, w)?;
    }
    if div.total_degree() == 0 {
        div.add(origin, 1)?;
    }
    let mut attempts = Vec::new();
    for _ in 0..64 {
        let sol = solve_rh(curves, 0, &div, opts)?;
        let sup = sup_on_disc(|x| sol.zeta.eval(x).norm(), k_compact);
        attempts.push((div.order_at(origin), sup));
        if sup < eps {
            return Ok(Smallness {
                divisor: div,
                solution: sol,
                predicted_order: predicted,
                attempts,
            });
        }
        div.add(origin, 1)?;
    }
    Err(Error::Configuration(format!("no zero count up to 64 brings ζ below {eps} on the compact")))
}
