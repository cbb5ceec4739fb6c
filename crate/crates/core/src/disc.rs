//! Holomorphic discs attached along the complex tangent directions.
//!
//! At a collar point `z` with unit `v ∈ ker ∂ρ(z)`, the disc lives in the
//! quadric `W_z = z + Σ_z`, `Σ_z = {w : 2∂ρ(z)·w + wᵀ∂²ρ(z)w = 0}`, written as
//! a graph `s ↦ s·v + τ(s)·u` over the tangent line with `u` the normalized
//! conjugate gradient. `τ` is the power series root with `τ(0) = τ'(0) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fourier::{is_power_of_two, truncate_modes};
use crate::geometry::{apply, complex_tangent_projector, norm, pair, CMatrix, CollarBand, CxPoint, DefiningFunction};
use crate::scan;
use crate::C64;

/// Highest retained power of the graph series `τ`.
pub const TAU_DEGREE: usize = 16;
const RESIDUAL_RADII: usize = 64;
const RESIDUAL_ANGLES: usize = 8;
const CROSSING_SCAN: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadricDisc {
    pub center: CxPoint,
    pub direction: Vec<C64>,
    pub transverse_dir: Vec<C64>,
    pub scale: f64,
    /// `tau_coeffs[m]` is the coefficient of `s^m`; entries 0 and 1 vanish.
    pub tau_coeffs: Vec<C64>,
    /// Distance from `s = 0` to the nearest branch point of the quadric root.
    pub branch_radius: f64,
    grad: Vec<C64>,
    hess_holo: CMatrix,
}

impl QuadricDisc {
    fn tau(&self, s: C64) -> (C64, C64) {
        let mut t = C64::new(0.0, 0.0);
        let mut dt = C64::new(0.0, 0.0);
        for m in (0..self.tau_coeffs.len()).rev() {
            dt = dt * s + t;
            t = t * s + self.tau_coeffs[m];
        }
        (t, dt)
    }

    pub fn eval(&self, zeta: C64) -> Vec<C64> {
        let s = zeta * self.scale;
        let (t, _) = self.tau(s);
        (0..self.center.len())
            .map(|i| self.center[i] + s * self.direction[i] + t * self.transverse_dir[i])
            .collect()
    }

    /// `d g / d ζ`.
    pub fn derivative(&self, zeta: C64) -> Vec<C64> {
        let s = zeta * self.scale;
        let (_, dt) = self.tau(s);
        (0..self.center.len())
            .map(|i| (self.direction[i] + dt * self.transverse_dir[i]) * self.scale)
            .collect()
    }

    /// Vector Taylor coefficients in `ζ` up to and including `j_max`.
    pub fn zeta_coeffs(&self, j_max: usize) -> Vec<Vec<C64>> {
        let n = self.center.len();
        (0..=j_max)
            .map(|j| match j {
                0 => self.center.0.clone(),
                1 => self.direction.iter().map(|v| v * self.scale).collect(),
                _ => {
                    let tj = self.tau_coeffs.get(j).copied().unwrap_or_default() * self.scale.powi(j as i32);
                    (0..n).map(|i| tj * self.transverse_dir[i]).collect()
                }
            })
            .collect()
    }

    /// `|2∂ρ(z)·w + wᵀQw|` for `w = g(ζ) − z`.
    pub fn quadric_residual(&self, zeta: C64) -> f64 {
        let g = self.eval(zeta);
        let w: Vec<C64> = g.iter().zip(self.center.iter()).map(|(a, b)| a - b).collect();
        let mut q = pair(&self.grad, &w) * 2.0;
        for j in 0..w.len() {
            for k in 0..w.len() {
                q += self.hess_holo[(j, k)] * w[j] * w[k];
            }
        }
        q.norm()
    }

    pub fn max_quadric_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..RESIDUAL_RADII {
            let t = i as f64 / (RESIDUAL_RADII - 1) as f64;
            for a in 0..RESIDUAL_ANGLES {
                let th = std::f64::consts::TAU * a as f64 / RESIDUAL_ANGLES as f64;
                worst = worst.max(self.quadric_residual(C64::from_polar(t, th)));
            }
        }
        worst
    }
}

/// Smallest modulus of a root of the quadratic discriminant of the graph
/// equation; `f64::INFINITY` if it has none.
fn branch_radius(a: f64, q_vv: C64, q_uv: C64, q_uu: C64) -> f64 {
    // (2a + 2 s q_uv)² − 4 q_uu q_vv s² = A s² + B s + C
    let qa = (q_uv * q_uv - q_uu * q_vv) * 4.0;
    let qb = q_uv * (8.0 * a);
    let qc = C64::new(4.0 * a * a, 0.0);
    let tiny = 1e-300;
    if qa.norm() < tiny {
        if qb.norm() < tiny {
            return f64::INFINITY;
        }
        return (qc / qb).norm();
    }
    let disc = (qb * qb - qa * qc * 4.0).sqrt();
    let r1 = (-qb + disc) / (qa * 2.0);
    let r2 = (-qb - disc) / (qa * 2.0);
    r1.norm().min(r2.norm())
}

pub fn build_disc(
    df: &dyn DefiningFunction,
    band: Option<&CollarBand>,
    z: &CxPoint,
    v: &[C64],
    c: f64,
) -> Result<QuadricDisc> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Argument(format!("disc scale must be positive, got {c}")));
    }
    if !df.contains(z) {
        return Err(Error::Domain { point: format!("{:?}", z.0) });
    }
    if let Some(band) = band {
        let r = df.rho(z);
        if !band.contains(r) {
            return Err(Error::Domain {
                point: format!("disc center with ρ = {r:.6} outside the collar band"),
            });
        }
    }
    let g = df.grad(z);
    let gn = norm(&g);
    if gn < 1e-12 {
        return Err(Error::DegenerateGradient { norm: gn });
    }
    if (norm(v) - 1.0).abs() > 1e-10 {
        return Err(Error::Argument(format!("direction must be a unit vector, |v| = {}", norm(v))));
    }
    let tangency = pair(&g, v).norm();
    if tangency > 1e-10 * gn.max(1.0) {
        return Err(Error::Argument(format!("direction is not complex tangent: |∂ρ·v| = {tangency:e}")));
    }
    let u: Vec<C64> = g.iter().map(|x| x.conj() / gn).collect();
    let q = df.hess_holo(z);
    let bil = |x: &[C64], y: &[C64]| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..x.len() {
            for k in 0..y.len() {
                acc += q[(j, k)] * x[j] * y[k];
            }
        }
        acc
    };
    let a = gn; // ∂ρ·u = |∂ρ|
    let (q_vv, q_uv, q_uu) = (bil(v, v), bil(&u, v), bil(&u, &u));

    // 2a τ + s² q_vv + 2 s τ q_uv + τ² q_uu = 0, coefficient by coefficient.
    let mut tau = vec![C64::new(0.0, 0.0); TAU_DEGREE + 1];
    for m in 2..=TAU_DEGREE {
        let mut rhs = if m == 2 { q_vv } else { C64::new(0.0, 0.0) };
        rhs += q_uv * tau[m - 1] * 2.0;
        let mut conv = C64::new(0.0, 0.0);
        for i in 2..=m - 2 {
            conv += tau[i] * tau[m - i];
        }
        rhs += q_uu * conv;
        tau[m] = -rhs / (2.0 * a);
    }

    let radius = branch_radius(a, q_vv, q_uv, q_uu);
    if radius <= c {
        return Err(Error::BranchDegeneracy { radius, scale: c });
    }
    let disc = QuadricDisc {
        center: z.clone(),
        direction: v.to_vec(),
        transverse_dir: u,
        scale: c,
        tau_coeffs: tau,
        branch_radius: radius,
        grad: g,
        hess_holo: q,
    };
    let zn: f64 = norm(z);
    if disc.max_quadric_residual() > 1e-9 * (1.0 + zn) {
        // Series truncation is too coarse at this radius.
        return Err(Error::BranchDegeneracy { radius, scale: c });
    }
    Ok(disc)
}

/// Radial derivative `d/dt ρ(g(t e^{iθ}))`.
pub fn radial_derivative(df: &dyn DefiningFunction, disc: &QuadricDisc, t: f64, theta: f64) -> f64 {
    let e = C64::from_polar(1.0, theta);
    let zeta = e * t;
    let p = disc.eval(zeta);
    let dg = disc.derivative(zeta);
    let gr = df.grad(&p);
    2.0 * (pair(&gr, &dg) * e).re
}

/// First `t ∈ (0, 1]` with `ρ(g(t e^{iθ})) = 0`.
pub fn crossing_radius(df: &dyn DefiningFunction, disc: &QuadricDisc, theta: f64) -> Result<f64> {
    let e = C64::from_polar(1.0, theta);
    let f = |t: f64| df.rho(&disc.eval(e * t));
    let t = scan::first_crossing(f, 1.0, CROSSING_SCAN, 1e-12).ok_or(Error::DiscTooSmall { theta })?;
    let d = radial_derivative(df, disc, t, theta);
    if d <= 1e-10 {
        return Err(Error::Tangency {
            location: format!("disc crossing at t = {t:.12}, θ = {theta:.6}"),
            derivative: d,
        });
    }
    Ok(t)
}

pub const SCALE_WINDOW: (f64, f64) = (0.2, 0.8);
const SCALE_ANGLES: usize = 8;

/// Picks one disc scale `c` for which every sampled disc crosses `bΩ`
/// at a radius inside [`SCALE_WINDOW`].
///
/// Starts from `c₀ = 2·sqrt(|rho_lo|/lambda_min)` and doubles or halves until
/// all crossings fit, then recentres so the geometric mean of the extreme
/// crossings sits at 0.5.
pub fn choose_scale(
    df: &dyn DefiningFunction,
    points: &[CxPoint],
    directions: &[Vec<C64>],
    band: &CollarBand,
    exec: Exec,
) -> Result<f64> {
    if points.is_empty() || points.len() != directions.len() {
        return Err(Error::Argument("choose_scale needs matching non-empty points and directions".into()));
    }
    for p in points {
        let r = df.rho(p);
        if !band.contains(r) {
            return Err(Error::CollarViolation(format!(
                "point with ρ = {r:.6} outside the band [{}, {}]",
                band.rho_lo, band.rho_hi
            )));
        }
    }
    let (lo, hi) = SCALE_WINDOW;
    let crossings = |c: f64| -> Result<(f64, f64)> {
        let per_point = exec.try_map(points.len(), |i| -> Result<(f64, f64)> {
            let disc = build_disc(df, Some(band), &points[i], &directions[i], c)?;
            let mut mn = f64::INFINITY;
            let mut mx: f64 = 0.0;
            for a in 0..SCALE_ANGLES {
                let th = std::f64::consts::TAU * a as f64 / SCALE_ANGLES as f64;
                let t = crossing_radius(df, &disc, th)?;
                mn = mn.min(t);
                mx = mx.max(t);
            }
            Ok((mn, mx))
        })?;
        Ok(per_point
            .into_iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), (x, y)| (a.min(x), b.max(y))))
    };

    let mut c = 2.0 * (band.rho_lo.abs() / band.lambda_min).sqrt();
    let mut grew = false;
    let mut shrank = false;
    for _ in 0..64 {
        match crossings(c) {
            Err(Error::DiscTooSmall { .. }) => {
                if shrank {
                    break;
                }
                grew = true;
                c *= 2.0;
            }
            Err(Error::BranchDegeneracy { .. }) => {
                if grew {
                    break;
                }
                shrank = true;
                c *= 0.5;
            }
            Err(e) => return Err(e),
            Ok((tmin, tmax)) => {
                if tmax / tmin > hi / lo {
                    break;
                }
                if tmax > hi {
                    grew = true;
                    c *= 2.0;
                } else if tmin < lo {
                    shrank = true;
                    c *= 0.5;
                } else {
                    let gm = (tmin * tmax).sqrt();
                    if (gm - 0.5).abs() < 1e-9 {
                        return Ok(c);
                    }
                    let centred = c * gm / 0.5;
                    return match crossings(centred) {
                        Ok((a, b)) if a >= lo && b <= hi => Ok(centred),
                        _ => Ok(c),
                    };
                }
            }
        }
    }
    Err(Error::Configuration(
        "no disc scale puts every crossing in [0.2, 0.8]; use a thinner collar band".into(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFrame {
    pub params: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    /// Largest discrete second difference `|v_{k+1} − 2v_k + v_{k−1}|`.
    pub smoothness: f64,
    /// Largest step `|v_{k+1} − v_k|` around the loop.
    pub max_gap: f64,
    /// `|v_K − v_0|` where `v_K` continues the frame rule past the last sample.
    pub closure: f64,
}

fn normalize(v: &[C64]) -> Vec<C64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

fn candidate_basis(n: usize) -> Vec<Vec<C64>> {
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        out.push(e);
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..n {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(r, 0.0);
        e[(j + 1) % n] = C64::new(0.0, r);
        out.push(e);
    }
    out
}

/// Continuous unit section of `ker ∂ρ` along a sampled closed loop.
pub fn build_frame(df: &dyn DefiningFunction, loop_points: &[CxPoint]) -> Result<BoundaryFrame> {
    let k = loop_points.len();
    if !is_power_of_two(k) || k < 64 {
        return Err(Error::Argument(format!("frame grid size must be a power of two ≥ 64, got {k}")));
    }
    let n = df.dim();
    let projectors = loop_points
        .iter()
        .map(|p| complex_tangent_projector(df, p))
        .collect::<Result<Vec<_>>>()?;

    // Reference vector with the best worst-case projection.
    let mut best: Option<(f64, Vec<C64>)> = None;
    for e in candidate_basis(n) {
        let worst = projectors
            .iter()
            .map(|p| norm(&apply(p, &e)))
            .fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|(b, _)| worst > *b) {
            best = Some((worst, e));
        }
    }
    let (worst, e) = best.expect("candidate basis is non-empty");
    let first = apply(&projectors[0], &e);
    if norm(&first) < 1e-12 {
        return Err(Error::Frame("projection collapses for every reference vector".into()));
    }

    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(k);
    let closure = if worst >= 0.1 {
        vectors.extend(projectors.iter().map(|p| normalize(&apply(p, &e))));
        0.0
    } else {
        vectors.push(normalize(&first));
        for p in &projectors[1..] {
            let direct = apply(p, &e);
            let prev = vectors.last().expect("seeded");
            let next = if norm(&direct) >= 0.1 {
                // Align the phase of the direct projection with the transported one.
                let d = normalize(&direct);
                let ip: C64 = d.iter().zip(prev).map(|(a, b)| b * a.conj()).sum();
                let ph = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::new(1.0, 0.0) };
                let transported = normalize(&apply(p, prev));
                if norm(&d.iter().map(|x| x * ph).zip(&transported).map(|(a, b)| a - b).collect::<Vec<_>>()) < 0.5 {
                    d.iter().map(|x| x * ph).collect()
                } else {
                    transported
                }
            } else {
                normalize(&apply(p, prev))
            };
            vectors.push(next);
        }
        // Spread the closing phase holonomy evenly along the loop.
        let transported_end = normalize(&apply(&projectors[0], &vectors[k - 1]));
        let ip: C64 = transported_end.iter().zip(&vectors[0]).map(|(a, b)| b * a.conj()).sum();
        let phi = ip.arg();
        for (i, v) in vectors.iter_mut().enumerate() {
            let ph = C64::from_polar(1.0, phi * i as f64 / k as f64);
            v.iter_mut().for_each(|x| *x *= ph);
        }
        let end: Vec<C64> = normalize(&apply(&projectors[0], &vectors[k - 1]));
        let end: Vec<C64> = end.iter().map(|x| x * C64::from_polar(1.0, phi / k as f64)).collect();
        norm(&end.iter().zip(&vectors[0]).map(|(a, b)| a - b).collect::<Vec<_>>())
    };

    let params: Vec<f64> = (0..k).map(|i| std::f64::consts::TAU * i as f64 / k as f64).collect();
    Ok(finish_frame(params, vectors, closure))
}

fn finish_frame(params: Vec<f64>, vectors: Vec<Vec<C64>>, closure: f64) -> BoundaryFrame {
    let k = vectors.len();
    let n = vectors[0].len();
    let mut smooth: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for i in 0..k {
        let (a, b, c) = (&vectors[(i + k - 1) % k], &vectors[i], &vectors[(i + 1) % k]);
        let d2: Vec<C64> = (0..n).map(|j| c[j] - b[j] * 2.0 + a[j]).collect();
        smooth = smooth.max(norm(&d2));
        let d: Vec<C64> = (0..n).map(|j| c[j] - b[j]).collect();
        gap = gap.max(norm(&d));
    }
    BoundaryFrame {
        params,
        vectors,
        smoothness: smooth,
        max_gap: gap,
        closure,
    }
}

impl BoundaryFrame {
    /// Fourier truncation to `max_mode`, followed by re-projection onto
    /// `ker ∂ρ` at the loop points and renormalization.
    pub fn smoothed(&self, df: &dyn DefiningFunction, loop_points: &[CxPoint], max_mode: usize) -> Result<Self> {
        let k = self.vectors.len();
        let n = self.vectors[0].len();
        let mut cols: Vec<Vec<C64>> = (0..n)
            .map(|j| truncate_modes(&self.vectors.iter().map(|v| v[j]).collect::<Vec<_>>(), max_mode))
            .collect();
        let mut vectors = Vec::with_capacity(k);
        for i in 0..k {
            let raw: Vec<C64> = cols.iter_mut().map(|c| c[i]).collect();
            let p = complex_tangent_projector(df, &loop_points[i])?;
            let proj = apply(&p, &raw);
            if norm(&proj) < 1e-8 {
                return Err(Error::Frame("smoothing collapsed the frame".into()));
            }
            vectors.push(normalize(&proj));
        }
        Ok(finish_frame(self.params.clone(), vectors, self.closure))
    }

    pub fn max_tangency(&self, df: &dyn DefiningFunction, loop_points: &[CxPoint]) -> f64 {
        self.vectors
            .iter()
            .zip(loop_points)
            .map(|(v, p)| pair(&df.grad(p), v).norm())
            .fold(0.0, f64::max)
    }
}
