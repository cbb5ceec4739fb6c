//! The family of attached discs along the boundary, `h(x, ζ)`, and its
//! surrogate `H(x, ζ) = f₁(x) + Σ_{j=1}^N H_j(x) ζ^j` with coefficients that
//! are holomorphic in the surface variable.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::disc::{build_disc, BoundaryFrame};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fourier::{circle_nodes, is_power_of_two};
use crate::geometry::{CollarBand, CxPoint, DefiningFunction};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SurfaceKind {
    Disc,
    Annulus { inner_radius: f64 },
}

/// The bordered surface `M` together with its boundary sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSpec {
    pub kind: SurfaceKind,
    /// Samples per boundary component.
    pub k: usize,
}

/// One boundary circle `|x| = radius`, sampled at `e^{2πik/K}` angles.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryComponent {
    pub radius: f64,
    pub nodes: Vec<C64>,
}

impl SurfaceSpec {
    pub fn new(kind: SurfaceKind, k: usize) -> Result<Self> {
        if !is_power_of_two(k) || k < 64 {
            return Err(Error::schema("grid.k", format!("must be a power of two ≥ 64, got {k}")));
        }
        if let SurfaceKind::Annulus { inner_radius } = kind {
            if !(0.1..=0.9).contains(&inner_radius) {
                return Err(Error::schema(
                    "surface.inner_radius",
                    format!("must lie in [0.1, 0.9], got {inner_radius}"),
                ));
            }
        }
        Ok(SurfaceSpec { kind, k })
    }

    pub fn components(&self) -> Vec<BoundaryComponent> {
        let mut out = vec![BoundaryComponent {
            radius: 1.0,
            nodes: circle_nodes(self.k, 1.0),
        }];
        if let SurfaceKind::Annulus { inner_radius } = self.kind {
            out.push(BoundaryComponent {
                radius: inner_radius,
                nodes: circle_nodes(self.k, inner_radius),
            });
        }
        out
    }

    pub fn inner_radius(&self) -> f64 {
        match self.kind {
            SurfaceKind::Disc => 0.0,
            SurfaceKind::Annulus { inner_radius } => inner_radius,
        }
    }

    pub fn is_annulus(&self) -> bool {
        matches!(self.kind, SurfaceKind::Annulus { .. })
    }

    /// True for points of the open surface.
    pub fn contains(&self, x: C64) -> bool {
        let r = x.norm();
        r < 1.0 && r > self.inner_radius()
    }
}

/// A `Cⁿ`-valued Laurent polynomial `Σ_{e=min_exp}^{max_exp} c_e x^e`.
///
/// On the disc `min_exp = 0` and this is an ordinary polynomial map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentMap {
    pub min_exp: i32,
    /// `coeffs[coordinate][e − min_exp]`.
    pub coeffs: Vec<Vec<C64>>,
}

impl LaurentMap {
    pub fn zero(dim: usize, min_exp: i32, max_exp: i32) -> Self {
        LaurentMap {
            min_exp,
            coeffs: vec![vec![C64::new(0.0, 0.0); (max_exp - min_exp + 1).max(0) as usize]; dim],
        }
    }

    pub fn polynomial(coeffs: Vec<Vec<C64>>) -> Self {
        LaurentMap { min_exp: 0, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn max_exp(&self) -> i32 {
        self.min_exp + self.coeffs.first().map_or(0, |c| c.len() as i32) - 1
    }

    pub fn eval(&self, x: C64) -> Vec<C64> {
        self.coeffs.iter().map(|c| eval_laurent(c, self.min_exp, x)).collect()
    }

    pub fn derivative(&self, x: C64) -> Vec<C64> {
        self.coeffs.iter().map(|c| eval_laurent_derivative(c, self.min_exp, x)).collect()
    }

    /// Largest coefficient modulus; zero for the zero map.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn eval_laurent(c: &[C64], min_exp: i32, x: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for v in c.iter().rev() {
        acc = acc * x + v;
    }
    if min_exp == 0 {
        acc
    } else {
        acc * x.powi(min_exp)
    }
}

pub(crate) fn eval_laurent_derivative(c: &[C64], min_exp: i32, x: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (i, v) in c.iter().enumerate() {
        let e = min_exp + i as i32;
        if e != 0 {
            acc += v * e as f64 * x.powi(e - 1);
        }
    }
    acc
}

/// `h` sampled on one boundary component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSamples {
    pub nodes: Vec<C64>,
    /// `h[k][j]`: ζ-coefficient `j` of the disc at node `k`.
    pub h: Vec<Vec<Vec<C64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterFamily {
    pub f1: LaurentMap,
    pub scale: f64,
    pub components: Vec<ComponentSamples>,
    /// `surrogate[j − 1]` is `H_j`.
    pub surrogate: Vec<LaurentMap>,
    pub fit_error: f64,
    pub report_radius: f64,
    pub degrees: (usize, usize),
    pub condition: f64,
}

pub const DEFAULT_J: usize = 24;
const PERTURB_MODES: usize = 5;
pub const DEFAULT_REPORT_RADIUS: f64 = 0.9;

/// Samples the ζ-coefficients `h_j(x_k)` of the attached discs, `j ≤ j_max`.
pub fn sample_h(
    df: &dyn DefiningFunction,
    band: Option<&CollarBand>,
    frames: &[BoundaryFrame],
    f1: &LaurentMap,
    components: &[BoundaryComponent],
    c: f64,
    j_max: usize,
    exec: Exec,
) -> Result<CenterFamily> {
    if frames.len() != components.len() {
        return Err(Error::Argument("one frame per boundary component is required".into()));
    }
    let mut out = Vec::with_capacity(components.len());
    for (frame, comp) in frames.iter().zip(components) {
        if frame.vectors.len() != comp.nodes.len() {
            return Err(Error::Argument("frame and boundary grid sizes differ".into()));
        }
        let h = exec.try_map(comp.nodes.len(), |k| -> Result<Vec<Vec<C64>>> {
            let z = CxPoint(f1.eval(comp.nodes[k]));
            let disc = build_disc(df, band, &z, &frame.vectors[k], c)?;
            let mut coeffs = disc.zeta_coeffs(j_max);
            coeffs[0] = z.0;
            Ok(coeffs)
        })?;
        out.push(ComponentSamples {
            nodes: comp.nodes.clone(),
            h,
        });
    }
    Ok(CenterFamily {
        f1: f1.clone(),
        scale: c,
        components: out,
        surrogate: Vec::new(),
        fit_error: f64::NAN,
        report_radius: DEFAULT_REPORT_RADIUS,
        degrees: (0, 0),
        condition: f64::NAN,
    })
}

impl CenterFamily {
    pub fn dim(&self) -> usize {
        self.f1.dim()
    }

    pub fn j_max(&self) -> usize {
        self.components[0].h[0].len() - 1
    }

    pub fn n_terms(&self) -> usize {
        self.surrogate.len()
    }

    /// Seeded perturbation of the coefficients `h_j`, `2 ≤ j ≤ max_j`, by a random
    /// polynomial `Σ_{m ≤ 4} c_m x^m` with `|Re c_m|, |Im c_m| ≤ size/5`, so
    /// the perturbation is smooth along `bM` and bounded by `√2·size`.
    /// `h(·, 0)` and `h_1` are left untouched.
    pub fn perturb(&mut self, size: f64, seed: u64, max_j: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim();
        let amp = size / PERTURB_MODES as f64;
        let polys: Vec<Vec<Vec<C64>>> = (2..=max_j.min(self.j_max()))
            .map(|_| {
                (0..n)
                    .map(|_| {
                        (0..PERTURB_MODES)
                            .map(|_| C64::new(rng.gen_range(-amp..=amp), rng.gen_range(-amp..=amp)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        for comp in &mut self.components {
            for (x, row) in comp.nodes.iter().zip(comp.h.iter_mut()) {
                for (coeff, poly) in row.iter_mut().skip(2).zip(&polys) {
                    for (v, p) in coeff.iter_mut().zip(poly) {
                        *v += eval_laurent(p, 0, *x);
                    }
                }
            }
        }
    }

    /// `H(x, ζ)`.
    pub fn eval_h(&self, x: C64, zeta: C64) -> Vec<C64> {
        let mut acc = vec![C64::new(0.0, 0.0); self.dim()];
        for hj in self.surrogate.iter().rev() {
            let v = hj.eval(x);
            for i in 0..acc.len() {
                acc[i] = (acc[i] + v[i]) * zeta;
            }
        }
        let base = self.f1.eval(x);
        acc.iter().zip(base).map(|(a, b)| a + b).collect()
    }

    /// `∂H/∂ζ(x, ζ)`.
    pub fn eval_h_dzeta(&self, x: C64, zeta: C64) -> Vec<C64> {
        let mut acc = vec![C64::new(0.0, 0.0); self.dim()];
        for (j, hj) in self.surrogate.iter().enumerate().rev() {
            let v = hj.eval(x);
            for i in 0..acc.len() {
                acc[i] = acc[i] * zeta + v[i] * (j + 1) as f64;
            }
        }
        acc
    }

    /// `ζ ↦ H(x, ζ)` with the `x`-dependence evaluated once.
    pub fn fiber(&self, x: C64) -> Fiber {
        let mut coeffs = Vec::with_capacity(self.surrogate.len() + 1);
        coeffs.push(self.f1.eval(x));
        coeffs.extend(self.surrogate.iter().map(|m| m.eval(x)));
        Fiber { coeffs }
    }

    /// `sup_k Σ_j |H_j(x_k) − h_j(x_k)| r^j` over every boundary node.
    pub fn measure_fit_error(&self, r: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for comp in &self.components {
            for (x, row) in comp.nodes.iter().zip(&comp.h) {
                let mut acc = 0.0;
                for (j, hj) in row.iter().enumerate().skip(1) {
                    let fitted = self
                        .surrogate
                        .get(j - 1)
                        .map(|m| m.eval(*x))
                        .unwrap_or_else(|| vec![C64::new(0.0, 0.0); hj.len()]);
                    let d: f64 = fitted.iter().zip(hj).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                    acc += d * r.powi(j as i32);
                }
                worst = worst.max(acc);
            }
        }
        worst
    }

    /// Flat dump of `f₁` (as `j = 0`) and every `H_j`.
    pub fn dump(&self) -> Vec<SurrogateEntry> {
        let mut out = Vec::new();
        let maps = std::iter::once(&self.f1).chain(self.surrogate.iter());
        for (j, m) in maps.enumerate() {
            for (coord, cs) in m.coeffs.iter().enumerate() {
                for (i, c) in cs.iter().enumerate() {
                    out.push(SurrogateEntry {
                        j,
                        coordinate: coord,
                        exponent: m.min_exp + i as i32,
                        re: c.re,
                        im: c.im,
                    });
                }
            }
        }
        out
    }
}

/// Polynomial `Σ_j c_j ζ^j` with `Cⁿ`-valued coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    pub coeffs: Vec<Vec<C64>>,
}

impl Fiber {
    pub fn eval(&self, zeta: C64) -> Vec<C64> {
        let n = self.coeffs[0].len();
        let mut acc = vec![C64::new(0.0, 0.0); n];
        for c in self.coeffs.iter().rev() {
            for i in 0..n {
                acc[i] = acc[i] * zeta + c[i];
            }
        }
        acc
    }

    pub fn eval_dzeta(&self, zeta: C64) -> Vec<C64> {
        let n = self.coeffs[0].len();
        let mut acc = vec![C64::new(0.0, 0.0); n];
        for (j, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            for i in 0..n {
                acc[i] = acc[i] * zeta + c[i] * j as f64;
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateEntry {
    pub j: usize,
    pub coordinate: usize,
    pub exponent: i32,
    pub re: f64,
    pub im: f64,
}

/// Rebuilds `(f₁, [H_1, …, H_N])` from a dump.
pub fn maps_from_dump(entries: &[SurrogateEntry], dim: usize) -> Result<(LaurentMap, Vec<LaurentMap>)> {
    if entries.is_empty() {
        return Err(Error::Argument("empty surrogate dump".into()));
    }
    let n_maps = entries.iter().map(|e| e.j).max().unwrap_or(0) + 1;
    let mut maps = Vec::with_capacity(n_maps);
    for j in 0..n_maps {
        let mine: Vec<&SurrogateEntry> = entries.iter().filter(|e| e.j == j).collect();
        if mine.is_empty() {
            maps.push(LaurentMap::zero(dim, 0, 0));
            continue;
        }
        if let Some(bad) = mine.iter().find(|e| e.coordinate >= dim) {
            return Err(Error::Argument(format!(
                "dump coordinate {} exceeds dimension {dim}",
                bad.coordinate
            )));
        }
        let lo = mine.iter().map(|e| e.exponent).min().unwrap_or(0);
        let hi = mine.iter().map(|e| e.exponent).max().unwrap_or(0);
        let mut m = LaurentMap::zero(dim, lo, hi);
        for e in mine {
            m.coeffs[e.coordinate][(e.exponent - lo) as usize] = C64::new(e.re, e.im);
        }
        maps.push(m);
    }
    let f1 = maps.remove(0);
    Ok((f1, maps))
}

const MAX_CONDITION: f64 = 1e12;

fn exponents(annulus: bool, degrees: (usize, usize)) -> Vec<i32> {
    let lo = if annulus { -(degrees.0 as i32) } else { 0 };
    (lo..=degrees.1 as i32).collect()
}

struct NormalSystem {
    nodes: Vec<C64>,
    exps: Vec<i32>,
    chol: nalgebra::Cholesky<C64, nalgebra::Dyn>,
    condition: f64,
}

fn normal_system(nodes: Vec<C64>, exps: Vec<i32>) -> Option<NormalSystem> {
    let a = DMatrix::from_fn(nodes.len(), exps.len(), |r, c| nodes[r].powi(exps[c]));
    let g = a.adjoint() * &a;
    let ev = g.clone().symmetric_eigenvalues();
    let (mn, mx) = ev.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));
    let condition = if mn > 0.0 { mx / mn } else { f64::INFINITY };
    let chol = g.cholesky()?;
    Some(NormalSystem {
        nodes,
        exps,
        chol,
        condition,
    })
}

impl NormalSystem {
    fn solve(&self, values: &[C64]) -> Vec<C64> {
        let rhs = DVector::from_iterator(
            self.exps.len(),
            self.exps.iter().map(|&e| {
                self.nodes
                    .iter()
                    .zip(values)
                    .map(|(x, v)| x.powi(e).conj() * v)
                    .sum::<C64>()
            }),
        );
        self.chol.solve(&rhs).iter().copied().collect()
    }
}

/// Least-squares fit of each `h_j`, `1 ≤ j ≤ n_terms`, in the monomial basis
/// `x^0..x^{d⁺}` (disc) or `x^{−d⁻}..x^{d⁺}` (annulus).
///
/// The basis is halved when the normal matrix has condition above `1e12`;
/// after three reductions the fit fails.
pub fn fit_surrogate(cf: &CenterFamily, n_terms: usize, degrees: (usize, usize), annulus: bool, exec: Exec) -> Result<CenterFamily> {
    if n_terms == 0 || n_terms > cf.j_max() {
        return Err(Error::Argument(format!(
            "number of surrogate terms must lie in 1..={}, got {n_terms}",
            cf.j_max()
        )));
    }
    let nodes: Vec<C64> = cf.components.iter().flat_map(|c| c.nodes.iter().copied()).collect();
    let mut deg = degrees;
    let mut system = None;
    for _ in 0..4 {
        match normal_system(nodes.clone(), exponents(annulus, deg)) {
            Some(s) if s.condition <= MAX_CONDITION => {
                system = Some(s);
                break;
            }
            _ => deg = (deg.0 / 2, deg.1 / 2),
        }
    }
    let system = system.ok_or_else(|| Error::Fit(format!("normal equations ill-conditioned down to degrees {deg:?}")))?;

    let dim = cf.dim();
    let min_exp = system.exps[0];
    let surrogate: Vec<LaurentMap> = exec.map(n_terms, |jm1| {
        let j = jm1 + 1;
        let coeffs = (0..dim)
            .map(|coord| {
                let values: Vec<C64> = cf
                    .components
                    .iter()
                    .flat_map(|c| c.h.iter().map(move |row| row[j][coord]))
                    .collect();
                system.solve(&values)
            })
            .collect();
        LaurentMap { min_exp, coeffs }
    });

    let mut out = cf.clone();
    out.surrogate = surrogate;
    out.degrees = deg;
    out.condition = system.condition;
    out.fit_error = out.measure_fit_error(out.report_radius);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::build_frame;
    use crate::geometry::Ellipsoid;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ball_family(k: usize, scale: f64) -> CenterFamily {
        let ball = Ellipsoid::ball(2);
        let surface = SurfaceSpec::new(SurfaceKind::Disc, k).unwrap();
        let comps = surface.components();
        let f1 = LaurentMap::polynomial(vec![vec![c(0.0, 0.0), c(0.9, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]);
        let pts: Vec<CxPoint> = comps[0].nodes.iter().map(|&x| CxPoint(f1.eval(x))).collect();
        let frame = build_frame(&ball, &pts).unwrap();
        sample_h(&ball, None, &[frame], &f1, &comps, scale, DEFAULT_J, Exec::Sequential).unwrap()
    }

    #[test]
    fn ball_samples_are_linear_discs() {
        let cf = ball_family(64, 0.8);
        for (x, row) in cf.components[0].nodes.iter().zip(&cf.components[0].h) {
            assert_eq!(row[0], vec![*x * 0.9, c(0.0, 0.0)]);
            assert_eq!(row[1], vec![c(0.0, 0.0), c(0.8, 0.0)]);
            assert!(row[2..].iter().flatten().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn ball_surrogate_is_constant() {
        let cf = fit_surrogate(&ball_family(64, 0.8), 12, (0, 16), false, Exec::Sequential).unwrap();
        assert!(cf.fit_error < 1e-14);
        let h1 = &cf.surrogate[0];
        assert!((h1.coeffs[1][0] - c(0.8, 0.0)).norm() < 1e-14);
        assert!(h1.coeffs[1][1..].iter().all(|v| v.norm() < 1e-14));
        let x = cf.components[0].nodes[5];
        let p = cf.eval_h(x, c(0.3, 0.0));
        assert!((p[0] - x * 0.9).norm() < 1e-14);
        assert!((p[1] - c(0.24, 0.0)).norm() < 1e-14);
        assert_eq!(cf.eval_h(x, c(0.0, 0.0)), cf.f1.eval(x));
    }

    #[test]
    fn polynomial_samples_recovered() {
        let mut cf = ball_family(64, 0.8);
        for (x, row) in cf.components[0].nodes.clone().iter().zip(cf.components[0].h.iter_mut()) {
            row[3] = vec![x * x * 0.1 + 0.2, x.powi(5) * c(0.0, 0.3)];
        }
        let fit = fit_surrogate(&cf, 12, (0, 16), false, Exec::Sequential).unwrap();
        let h3 = &fit.surrogate[2];
        assert!((h3.coeffs[0][0] - 0.2).norm() < 1e-12);
        assert!((h3.coeffs[0][2] - 0.1).norm() < 1e-12);
        assert!((h3.coeffs[1][5] - c(0.0, 0.3)).norm() < 1e-12);
        assert!(fit.fit_error < 1e-12);
    }

    #[test]
    fn single_mode_frame_fit() {
        let mut cf = ball_family(64, 0.8);
        for (x, row) in cf.components[0].nodes.clone().iter().zip(cf.components[0].h.iter_mut()) {
            row[1] = vec![c(0.0, 0.0), x * 0.8];
        }
        let fit = fit_surrogate(&cf, 12, (0, 16), false, Exec::Sequential).unwrap();
        assert!(fit.fit_error <= 1e-12);
        assert!((fit.surrogate[0].coeffs[1][1] - c(0.8, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn terms_must_not_exceed_samples() {
        let cf = ball_family(64, 0.8);
        assert_eq!(fit_surrogate(&cf, 30, (0, 16), false, Exec::Sequential).unwrap_err().kind(), "argument");
    }

    #[test]
    fn dump_round_trip() {
        let cf = fit_surrogate(&ball_family(64, 0.8), 4, (0, 8), false, Exec::Sequential).unwrap();
        let (f1, hs) = maps_from_dump(&cf.dump(), 2).unwrap();
        assert_eq!(f1, cf.f1);
        assert_eq!(hs, cf.surrogate);
        assert!(maps_from_dump(&[], 2).is_err());
    }

    #[test]
    fn annulus_laurent_fit_on_both_circles() {
        let surface = SurfaceSpec::new(SurfaceKind::Annulus { inner_radius: 0.5 }, 64).unwrap();
        let comps = surface.components();
        let f = |x: C64| vec![x * 0.3 + x.inv() * 0.1, c(0.2, 0.0)];
        let components = comps
            .iter()
            .map(|comp| ComponentSamples {
                nodes: comp.nodes.clone(),
                h: comp.nodes.iter().map(|&x| vec![f(x), f(x), vec![c(0.0, 0.0); 2]]).collect(),
            })
            .collect();
        let cf = CenterFamily {
            f1: LaurentMap::zero(2, 0, 0),
            scale: 1.0,
            components,
            surrogate: vec![],
            fit_error: f64::NAN,
            report_radius: 0.9,
            degrees: (0, 0),
            condition: f64::NAN,
        };
        let fit = fit_surrogate(&cf, 2, (4, 4), true, Exec::Sequential).unwrap();
        assert!(fit.fit_error < 1e-12, "{}", fit.fit_error);
        let h1 = &fit.surrogate[0];
        assert_eq!(h1.min_exp, -4);
        assert!((h1.coeffs[0][3] - c(0.1, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ill_conditioned_annulus_fit_reduces_degree() {
        let surface = SurfaceSpec::new(SurfaceKind::Annulus { inner_radius: 0.1 }, 64).unwrap();
        let comps = surface.components();
        let components = comps
            .iter()
            .map(|comp| ComponentSamples {
                nodes: comp.nodes.clone(),
                h: comp.nodes.iter().map(|_| vec![vec![c(0.0, 0.0); 2]; 2]).collect(),
            })
            .collect();
        let cf = CenterFamily {
            f1: LaurentMap::zero(2, 0, 0),
            scale: 1.0,
            components,
            surrogate: vec![],
            fit_error: f64::NAN,
            report_radius: 0.9,
            degrees: (0, 0),
            condition: f64::NAN,
        };
        let fit = fit_surrogate(&cf, 1, (16, 16), true, Exec::Sequential).unwrap();
        assert!(fit.degrees.0 < 16);
        assert!(fit.condition <= MAX_CONDITION);
    }
}
