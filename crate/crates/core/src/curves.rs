//! Jordan curves `γ_x` in the ζ-disc where `H(x, ·)` meets `bΩ`, stored as
//! radial graphs `R(k, θ)` around `ζ = 0`.

use serde::{Deserialize, Serialize};

use crate::center::{CenterFamily, Fiber};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fourier::TrigSeries;
use crate::geometry::{pair, DefiningFunction};
use crate::scan;
use crate::C64;

pub const T_MAX: f64 = 0.95;
const SCAN_STEPS: usize = 380;
const REENTRY_STEPS: usize = 64;
pub const DEFAULT_ANGLES: usize = 256;

/// Curves over one boundary component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentCurves {
    /// `radii[k][a]`, raw bisection roots.
    pub radii: Vec<Vec<f64>>,
    /// Band-limited `log R` per boundary sample.
    pub log_radius: Vec<TrigSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reentry {
    pub component: usize,
    pub k: usize,
    pub a: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveFamily {
    pub angles: usize,
    pub components: Vec<ComponentCurves>,
    pub transversality_margin: f64,
    pub starlike_cert: bool,
    /// Largest `|R(k, a+1) − R(k, a)| · A / 2π`.
    pub angular_lipschitz: f64,
    /// Largest gap between raw radii and the smoothed series at the grid angles.
    pub smoothing_error: f64,
    pub reentries: Vec<Reentry>,
}

impl CurveFamily {
    /// Builds a family from given radii (bypassing detection), smoothing
    /// `log R` per row with at most `max_mode` modes.
    pub fn from_radii(components: Vec<Vec<Vec<f64>>>, max_mode: usize) -> Result<Self> {
        let angles = components
            .first()
            .and_then(|c| c.first())
            .map(|r| r.len())
            .ok_or_else(|| Error::Argument("empty curve family".into()))?;
        let mut comps = Vec::with_capacity(components.len());
        let mut lip: f64 = 0.0;
        let mut smooth_err: f64 = 0.0;
        for radii in components {
            for row in &radii {
                if row.len() != angles {
                    return Err(Error::Argument("ragged curve family".into()));
                }
                if let Some(bad) = row.iter().find(|r| !(**r > 0.05 && **r < T_MAX)) {
                    return Err(Error::CollarViolation(format!(
                        "curve radius {bad:.6} outside (0.05, {T_MAX})"
                    )));
                }
            }
            let log_radius: Vec<TrigSeries> = radii
                .iter()
                .map(|row| {
                    let logs: Vec<f64> = row.iter().map(|r| r.ln()).collect();
                    TrigSeries::from_samples(&logs, max_mode)
                })
                .collect();
            for (row, series) in radii.iter().zip(&log_radius) {
                for a in 0..angles {
                    let th = std::f64::consts::TAU * a as f64 / angles as f64;
                    smooth_err = smooth_err.max((series.eval(th).exp() - row[a]).abs());
                    let next = row[(a + 1) % angles];
                    lip = lip.max((next - row[a]).abs() * angles as f64 / std::f64::consts::TAU);
                }
            }
            comps.push(ComponentCurves { radii, log_radius });
        }
        Ok(CurveFamily {
            angles,
            components: comps,
            transversality_margin: f64::INFINITY,
            starlike_cert: true,
            angular_lipschitz: lip,
            smoothing_error: smooth_err,
            reentries: Vec::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.components[0].radii.len()
    }

    pub fn log_radius(&self, component: usize, k: usize, theta: f64) -> f64 {
        self.components[component].log_radius[k].eval(theta)
    }

    pub fn log_radius_derivative(&self, component: usize, k: usize, theta: f64) -> f64 {
        self.components[component].log_radius[k].derivative(theta)
    }

    /// `R_k(θ) e^{iθ}` on the smoothed curve.
    pub fn curve_point(&self, component: usize, k: usize, theta: f64) -> C64 {
        C64::from_polar(self.log_radius(component, k, theta).exp(), theta)
    }

    pub fn max_radius(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.radii.iter().flatten())
            .copied()
            .fold(0.0, f64::max)
    }
}

/// `d/dt ρ(H(x, t e^{iθ}))`.
fn radial_derivative(fib: &Fiber, df: &dyn DefiningFunction, t: f64, theta: f64) -> f64 {
    let e = C64::from_polar(1.0, theta);
    let p = fib.eval(e * t);
    let dh = fib.eval_dzeta(e * t);
    2.0 * (pair(&df.grad(&p), &dh) * e).re
}

struct RowResult {
    radii: Vec<f64>,
    margin: f64,
    reentries: Vec<usize>,
}

/// Root-finds `ρ(H(x_k, t e^{iθ_a})) = 0` for every boundary sample and angle.
pub fn detect_curves(cf: &CenterFamily, df: &dyn DefiningFunction, angles: usize, exec: Exec) -> Result<CurveFamily> {
    if angles < 8 {
        return Err(Error::Argument(format!("need at least 8 angles, got {angles}")));
    }
    let mut rows_all = Vec::with_capacity(cf.components.len());
    let mut margin = f64::INFINITY;
    let mut reentries = Vec::new();
    for (ci, comp) in cf.components.iter().enumerate() {
        for (k, x) in comp.nodes.iter().enumerate() {
            let r0 = df.rho(&cf.eval_h(*x, C64::new(0.0, 0.0)));
            if r0 >= 0.0 {
                return Err(Error::CollarViolation(format!(
                    "center H(x_{k}, 0) on component {ci} is not inside the domain (ρ = {r0:.6})"
                )));
            }
        }
        let rows = exec.try_map(comp.nodes.len(), |k| -> Result<RowResult> {
            let fib = cf.fiber(comp.nodes[k]);
            let mut radii = Vec::with_capacity(angles);
            let mut margin = f64::INFINITY;
            let mut re = Vec::new();
            for a in 0..angles {
                let th = std::f64::consts::TAU * a as f64 / angles as f64;
                let e = C64::from_polar(1.0, th);
                let f = |t: f64| df.rho(&fib.eval(e * t));
                let t = scan::first_crossing(f, T_MAX, SCAN_STEPS, 1e-12).ok_or_else(|| {
                    Error::CollarViolation(format!(
                        "no boundary crossing on component {ci} at (k, a) = ({k}, {a}); f₁ too deep or surrogate too loose"
                    ))
                })?;
                let d = radial_derivative(&fib, df, t, th);
                if d <= 1e-10 {
                    return Err(Error::Tangency {
                        location: format!("component {ci}, (k, a) = ({k}, {a}), t = {t:.12}"),
                        derivative: d,
                    });
                }
                if t <= 0.05 {
                    return Err(Error::CollarViolation(format!(
                        "curve radius {t:.6} at (k, a) = ({k}, {a}) is below 0.05; f₁ too close to the boundary"
                    )));
                }
                if scan::reenters(f, t + 1e-9, T_MAX, REENTRY_STEPS) {
                    re.push(a);
                }
                margin = margin.min(d);
                radii.push(t);
            }
            Ok(RowResult {
                radii,
                margin,
                reentries: re,
            })
        })?;
        for (k, row) in rows.iter().enumerate() {
            margin = margin.min(row.margin);
            reentries.extend(row.reentries.iter().map(|&a| Reentry { component: ci, k, a }));
        }
        rows_all.push(rows.into_iter().map(|r| r.radii).collect::<Vec<_>>());
    }
    let mut fam = CurveFamily::from_radii(rows_all, angles / 8)?;
    fam.transversality_margin = margin;
    fam.starlike_cert = margin > 0.0;
    fam.reentries = reentries;
    Ok(fam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::{ComponentSamples, LaurentMap};
    use crate::fourier::circle_nodes;
    use crate::geometry::Ellipsoid;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// `H(x, ζ) = f₁(x) + ζ·e₂` over a 64-point boundary grid.
    fn straight_family(f1: LaurentMap) -> CenterFamily {
        let nodes = circle_nodes(64, 1.0);
        let h = nodes.iter().map(|&x| vec![f1.eval(x), vec![c(0.0, 0.0), c(1.0, 0.0)]]).collect();
        CenterFamily {
            f1,
            scale: 1.0,
            components: vec![ComponentSamples { nodes, h }],
            surrogate: vec![LaurentMap::polynomial(vec![vec![c(0.0, 0.0)], vec![c(1.0, 0.0)]])],
            fit_error: 0.0,
            report_radius: 0.9,
            degrees: (0, 0),
            condition: 1.0,
        }
    }

    #[test]
    fn ball_constant_center() {
        let cf = straight_family(LaurentMap::polynomial(vec![vec![c(0.8, 0.0)], vec![c(0.0, 0.0)]]));
        let fam = detect_curves(&cf, &Ellipsoid::ball(2), 64, Exec::Sequential).unwrap();
        for row in &fam.components[0].radii {
            for r in row {
                assert!((r - 0.6).abs() < 1e-12);
            }
        }
        assert!((fam.transversality_margin - 1.2).abs() < 1e-9);
        assert!(fam.starlike_cert);
        assert!(fam.reentries.is_empty());
    }

    #[test]
    fn ball_moving_center() {
        let cf = straight_family(LaurentMap::polynomial(vec![vec![c(0.0, 0.0), c(0.9, 0.0)], vec![c(0.0, 0.0)]]));
        let fam = detect_curves(&cf, &Ellipsoid::ball(2), 64, Exec::Parallel).unwrap();
        let (mn, mx) = fam.components[0]
            .radii
            .iter()
            .flatten()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!((mn - 0.19f64.sqrt()).abs() < 1e-12);
        assert!(mx - mn <= 1e-12);
    }

    #[test]
    fn ellipsoid_curves() {
        let cf = straight_family(LaurentMap::polynomial(vec![vec![c(0.8, 0.0)], vec![c(0.0, 0.0)]]));
        let ell = Ellipsoid { weights: vec![1.0, 4.0] };
        let fam = detect_curves(&cf, &ell, 32, Exec::Sequential).unwrap();
        assert!(fam.components[0].radii.iter().flatten().all(|r| (r - 0.3).abs() < 1e-12));
    }

    #[test]
    fn center_outside_is_collar_violation() {
        let cf = straight_family(LaurentMap::polynomial(vec![vec![c(1.1, 0.0)], vec![c(0.0, 0.0)]]));
        let err = detect_curves(&cf, &Ellipsoid::ball(2), 32, Exec::Sequential).unwrap_err();
        assert_eq!(err.kind(), "collar-violation");
    }

    #[test]
    fn too_deep_is_collar_violation() {
        let cf = straight_family(LaurentMap::polynomial(vec![vec![c(0.1, 0.0)], vec![c(0.0, 0.0)]]));
        let err = detect_curves(&cf, &Ellipsoid::ball(2), 32, Exec::Sequential).unwrap_err();
        assert_eq!(err.kind(), "collar-violation");
    }

    #[test]
    fn curve_point_examples() {
        let fam = CurveFamily::from_radii(vec![vec![vec![0.6; 64]; 4]], 8).unwrap();
        let p = fam.curve_point(0, 2, std::f64::consts::FRAC_PI_2);
        assert!((p - c(0.0, 0.6)).norm() < 1e-14);

        let row: Vec<f64> = (0..64)
            .map(|a| (0.6f64.ln() + 0.1 * (std::f64::consts::TAU * a as f64 / 64.0).cos()).exp())
            .collect();
        let fam = CurveFamily::from_radii(vec![vec![row.clone(); 4]], 8).unwrap();
        assert!((fam.curve_point(0, 0, 0.0).re - 0.6 * 0.1f64.exp()).abs() < 1e-12);
        assert!((0.6 * 0.1f64.exp() - 0.66310).abs() < 1e-5);
        for (a, r) in row.iter().enumerate() {
            let th = std::f64::consts::TAU * a as f64 / 64.0;
            assert!((fam.curve_point(0, 1, th).norm() - r).abs() < 1e-10);
        }
    }

    #[test]
    fn doubling_angles_is_stable() {
        let f1 = LaurentMap::polynomial(vec![vec![c(0.0, 0.0), c(0.7, 0.0), c(0.1, 0.05)], vec![c(0.05, 0.0)]]);
        let cf = straight_family(f1);
        let ball = Ellipsoid::ball(2);
        let a = detect_curves(&cf, &ball, 32, Exec::Parallel).unwrap();
        let b = detect_curves(&cf, &ball, 64, Exec::Parallel).unwrap();
        for k in 0..64 {
            for i in 0..32 {
                assert!((a.components[0].radii[k][i] - b.components[0].radii[k][2 * i]).abs() <= 1e-10);
            }
        }
    }
}
