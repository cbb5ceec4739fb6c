//! The full construction `f₁ → h → H → γ → ζ → f = H(·, ζ(·))` and the
//! verification report.

use serde::{Deserialize, Serialize};

use crate::center::{
    fit_surrogate, maps_from_dump, sample_h, CenterFamily, LaurentMap, SurfaceKind, SurfaceSpec,
    SurrogateEntry,
};
use crate::config::RunConfig;
use crate::curves::{detect_curves, CurveFamily};
use crate::disc::{build_frame, choose_scale, BoundaryFrame};
use crate::error::{Error, Result, StageError, StageExt};
use crate::exec::Exec;
use crate::fourier::{circle_nodes, dft};
use crate::geometry::{check_admissible, levi_eigenvalues, AdmissibilityReport, CollarBand, CxPoint, DefiningFunction};
use crate::rh::{smallness_by_zeros, solve_rh, sup_on_disc, DiscZeta, Divisor, RhOptions, TraceRow};
#[cfg(feature = "annulus")]
use crate::rh::annulus::{solve_rh_annulus, AnnulusZeta};
use crate::C64;

const TAU: f64 = std::f64::consts::TAU;

/// `ζ` in factored form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ZetaFactor {
    Disc(DiscZeta),
    #[cfg(feature = "annulus")]
    Annulus(AnnulusZeta),
}

impl ZetaFactor {
    pub fn eval(&self, x: C64) -> C64 {
        match self {
            ZetaFactor::Disc(z) => z.eval(x),
            #[cfg(feature = "annulus")]
            ZetaFactor::Annulus(z) => z.eval(x),
        }
    }

    pub fn derivative(&self, x: C64) -> C64 {
        match self {
            ZetaFactor::Disc(z) => z.derivative(x),
            #[cfg(feature = "annulus")]
            ZetaFactor::Annulus(z) => z.derivative(x),
        }
    }

    /// Multiplies `ζ` by a positive constant.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ZetaFactor::Disc(z) => z.log_coeffs[0] += factor.ln(),
            #[cfg(feature = "annulus")]
            ZetaFactor::Annulus(z) => {
                let i = (-z.log_min_exp) as usize;
                z.log_coeffs[i] += factor.ln();
            }
        }
        out
    }
}

/// Stored map: the surrogate `H` plus the factorization of `ζ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDump {
    pub dim: usize,
    pub surface: SurfaceKind,
    pub surrogate: Vec<SurrogateEntry>,
    pub zeta: ZetaFactor,
}

/// `f = H(·, ζ(·))`; on the disc also as polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ProperMap {
    pub surface: SurfaceKind,
    pub f1: LaurentMap,
    pub h: Vec<LaurentMap>,
    pub zeta: ZetaFactor,
    pub composed: Option<LaurentMap>,
    /// Largest `|f − H(·, ζ(·))|` over the check grid.
    pub composition_error: f64,
}

fn eval_h(f1: &LaurentMap, h: &[LaurentMap], x: C64, zeta: C64) -> Vec<C64> {
    let mut acc = vec![C64::new(0.0, 0.0); f1.dim()];
    for hj in h.iter().rev() {
        let v = hj.eval(x);
        for i in 0..acc.len() {
            acc[i] = (acc[i] + v[i]) * zeta;
        }
    }
    acc.iter().zip(f1.eval(x)).map(|(a, b)| a + b).collect()
}

fn eval_h_partials(f1: &LaurentMap, h: &[LaurentMap], x: C64, zeta: C64) -> (Vec<C64>, Vec<C64>) {
    let n = f1.dim();
    let mut dx = f1.derivative(x);
    let mut dz = vec![C64::new(0.0, 0.0); n];
    let mut zp = C64::new(1.0, 0.0);
    for (j, hj) in h.iter().enumerate() {
        let v = hj.eval(x);
        let dv = hj.derivative(x);
        for i in 0..n {
            dz[i] += v[i] * (j + 1) as f64 * zp;
        }
        zp *= zeta;
        for i in 0..n {
            dx[i] += dv[i] * zp;
        }
    }
    (dx, dz)
}

impl ProperMap {
    pub fn new(surface: SurfaceKind, f1: LaurentMap, h: Vec<LaurentMap>, zeta: ZetaFactor, k: usize) -> Self {
        let mut map = ProperMap {
            surface,
            f1,
            h,
            zeta,
            composed: None,
            composition_error: 0.0,
        };
        if matches!(surface, SurfaceKind::Disc) {
            map.compose_disc(k);
        }
        map
    }

    /// `f` from its definition, bypassing the composed coefficients.
    pub fn eval_direct(&self, x: C64) -> Vec<C64> {
        eval_h(&self.f1, &self.h, x, self.zeta.eval(x))
    }

    pub fn eval(&self, x: C64) -> Vec<C64> {
        match &self.composed {
            Some(p) => p.eval(x),
            None => self.eval_direct(x),
        }
    }

    pub fn derivative(&self, x: C64) -> Vec<C64> {
        match &self.composed {
            Some(p) => p.derivative(x),
            None => {
                let z = self.zeta.eval(x);
                let (dx, dz) = eval_h_partials(&self.f1, &self.h, x, z);
                let dzeta = self.zeta.derivative(x);
                dx.iter().zip(&dz).map(|(a, b)| a + b * dzeta).collect()
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.f1.dim()
    }

    fn compose_disc(&mut self, k: usize) {
        let m = (8 * k).max(1024);
        let nodes = circle_nodes(m, 1.0);
        let values: Vec<Vec<C64>> = nodes.iter().map(|&x| self.eval_direct(x)).collect();
        let n = self.dim();
        let mut coeffs: Vec<Vec<C64>> = (0..n)
            .map(|i| {
                let col: Vec<C64> = values.iter().map(|v| v[i]).collect();
                dft(&col)[..m / 2].to_vec()
            })
            .collect();
        let scale = coeffs.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
        let keep = (0..m / 2)
            .rev()
            .find(|&j| coeffs.iter().any(|c| c[j].norm() > 1e-17 * scale))
            .map_or(1, |j| j + 1);
        coeffs.iter_mut().for_each(|c| c.truncate(keep));
        let poly = LaurentMap::polynomial(coeffs);
        let mut err: f64 = 0.0;
        for r in [1.0, 0.75, 0.5, 0.0] {
            for x in circle_nodes(k, r) {
                let a = poly.eval(x);
                let b = self.eval_direct(x);
                err = err.max(a.iter().zip(&b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt());
            }
        }
        self.composed = Some(poly);
        self.composition_error = err;
    }

    pub fn dump(&self) -> MapDump {
        let cf_like = CenterFamily {
            f1: self.f1.clone(),
            scale: 0.0,
            components: Vec::new(),
            surrogate: self.h.clone(),
            fit_error: 0.0,
            report_radius: 0.0,
            degrees: (0, 0),
            condition: 0.0,
        };
        MapDump {
            dim: self.dim(),
            surface: self.surface,
            surrogate: cf_like.dump(),
            zeta: self.zeta.clone(),
        }
    }

    pub fn from_dump(dump: &MapDump, k: usize) -> Result<Self> {
        let (f1, h) = maps_from_dump(&dump.surrogate, dump.dim)?;
        Ok(ProperMap::new(dump.surface, f1, h, dump.zeta.clone(), k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
    Flagged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetError {
    pub point: [f64; 2],
    pub order: u32,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProperMapReport {
    /// `sup_k |ρ(f(x_k))|` over the boundary nodes.
    pub boundary_residual: f64,
    /// Largest `ρ∘f` on the boundary nodes.
    pub boundary_max_rho: f64,
    /// Largest `ρ∘f` on the interior grid.
    pub interior_negativity: f64,
    pub zeta_interior_max: f64,
    pub zeta_boundary_max: f64,
    /// `sup |f − f₁|` over the compact; absent on the annulus.
    pub approx_error: Option<f64>,
    pub jet_errors: Vec<JetError>,
    /// Smallest analytic outward derivative of `ρ∘f` over the boundary nodes.
    pub hopf_margin: f64,
    /// Largest one-sided inward difference quotient of `ρ∘f`.
    pub hopf_inward_difference: f64,
    pub hopf_floor: f64,
    pub immersion_margin: f64,
    pub injectivity_audit: f64,
    pub clauses: Vec<Clause>,
    pub recommendations: Vec<String>,
}

impl ProperMapReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.status != Status::Fail)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

pub const MAX_PRINCIPLE_SLACK: f64 = 1e-10;
pub const JET_TOL: f64 = 1e-6;
const HOPF_STEP: f64 = 1e-4;
const JET_RADIUS: f64 = 0.02;
const JET_NODES: usize = 32;

fn radii(surface: SurfaceKind, count: usize, include_outer: bool) -> Vec<f64> {
    match surface {
        SurfaceKind::Disc => {
            let top = if include_outer { count + 1 } else { count };
            (0..top).map(|i| i as f64 / count as f64).collect()
        }
        SurfaceKind::Annulus { inner_radius } => {
            let r = inner_radius;
            if include_outer {
                (0..=count).map(|i| r + (1.0 - r) * i as f64 / count as f64).collect()
            } else {
                (0..count).map(|i| r + (1.0 - r) * (i + 1) as f64 / (count + 1) as f64).collect()
            }
        }
    }
}

fn polar_grid(radii: &[f64], angles: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(radii.len() * angles);
    for &r in radii {
        if r == 0.0 {
            out.push(C64::new(0.0, 0.0));
            continue;
        }
        for a in 0..angles {
            out.push(C64::from_polar(r, TAU * a as f64 / angles as f64));
        }
    }
    out
}

fn vdist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt()
}

fn vnorm(a: &[C64]) -> f64 {
    a.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt()
}

/// Smallest Levi eigenvalue (smallest positive one when some are not) over
/// the boundary image of `f₁`.
fn lambda_min(df: &dyn DefiningFunction, f1: &LaurentMap, surface: &SurfaceSpec) -> f64 {
    surface
        .components()
        .iter()
        .flat_map(|c| c.nodes.clone())
        .map(|x| {
            let ev = levi_eigenvalues(df, &f1.eval(x));
            ev.into_iter().find(|e| *e > 0.0).unwrap_or(0.0)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Checks every clause on the composed map.
pub fn verify_theorem(map: &ProperMap, cfg: &RunConfig, exec: Exec) -> Result<ProperMapReport> {
    let df = cfg.domain.build()?;
    let surface = cfg.surface_spec()?;
    if map.dim() != df.dim() {
        return Err(Error::Argument(format!(
            "map dimension {} does not match domain dimension {}",
            map.dim(),
            df.dim()
        )));
    }
    let df = df.as_ref();
    let n = df.dim();
    let comps = surface.components();

    // boundary: residual, Hopf
    let mut boundary_residual: f64 = 0.0;
    let mut boundary_max = f64::NEG_INFINITY;
    let mut zeta_boundary_max: f64 = 0.0;
    let mut hopf_margin = f64::INFINITY;
    let mut hopf_fd = f64::NEG_INFINITY;
    for (ci, comp) in comps.iter().enumerate() {
        let rows = exec.map(comp.nodes.len(), |k| {
            let x = comp.nodes[k];
            let outward = if ci == 0 { x / x.norm() } else { -x / x.norm() };
            let fx = map.eval(x);
            let r = df.rho(&fx);
            let d = map.derivative(x);
            let g = df.grad(&fx);
            let analytic = 2.0 * (crate::geometry::pair(&g, &d) * outward).re;
            let inner = df.rho(&map.eval(x - outward * HOPF_STEP));
            (r, analytic, (inner - r) / HOPF_STEP, map.zeta.eval(x).norm())
        });
        for (r, a, fd, z) in rows {
            boundary_residual = boundary_residual.max(r.abs());
            boundary_max = boundary_max.max(r);
            hopf_margin = hopf_margin.min(a);
            hopf_fd = hopf_fd.max(fd);
            zeta_boundary_max = zeta_boundary_max.max(z);
        }
    }

    // interior
    let interior = polar_grid(&radii(cfg.surface, 64, false), 64);
    let vals = exec.map(interior.len(), |i| {
        let x = interior[i];
        (df.rho(&map.eval(x)), map.zeta.eval(x).norm())
    });
    let interior_negativity = vals.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    let zeta_interior_max = vals.iter().map(|v| v.1).fold(0.0, f64::max);

    // approximation on the compact
    let approx_error = match cfg.surface {
        SurfaceKind::Disc => Some(sup_on_disc(
            |x| vdist(&map.eval(x), &map.f1.eval(x)),
            cfg.compact_k,
        )),
        SurfaceKind::Annulus { .. } => None,
    };

    // jets
    let jet_errors: Vec<JetError> = cfg
        .interp
        .iter()
        .map(|p| {
            let c = C64::new(p.point[0], p.point[1]);
            let ring: Vec<C64> = circle_nodes(JET_NODES, JET_RADIUS).iter().map(|d| c + d).collect();
            let mut err: f64 = 0.0;
            for i in 0..n {
                let diff: Vec<C64> = ring.iter().map(|&x| map.eval(x)[i] - map.f1.eval(x)[i]).collect();
                let fv: Vec<C64> = ring.iter().map(|&x| map.eval(x)[i]).collect();
                let cd = dft(&diff);
                let cf = dft(&fv);
                let mut fact = 1.0;
                for j in 0..=p.order as usize {
                    if j > 0 {
                        fact *= j as f64;
                    }
                    let scale = fact / JET_RADIUS.powi(j as i32);
                    err = err.max(cd[j].norm() * scale);
                    if let Some(target) = p.jet.as_ref().and_then(|jet| jet.get(j)) {
                        let t = C64::new(target[i][0], target[i][1]);
                        err = err.max((cf[j] * scale - t).norm());
                    }
                }
            }
            JetError {
                point: p.point,
                order: p.order,
                error: err,
            }
        })
        .collect();

    // immersion
    let closed = polar_grid(&radii(cfg.surface, 16, true), 64);
    let immersion_margin = exec
        .map(closed.len(), |i| vnorm(&map.derivative(closed[i])))
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    // injectivity
    let mut ring_radii: Vec<f64> = match cfg.surface {
        SurfaceKind::Disc => (1..=8).map(|i| i as f64 / 8.0).collect(),
        SurfaceKind::Annulus { inner_radius } => {
            (0..8).map(|i| inner_radius + (1.0 - inner_radius) * i as f64 / 7.0).collect()
        }
    };
    if matches!(cfg.surface, SurfaceKind::Disc) {
        ring_radii.insert(0, 0.0);
    }
    let pts = polar_grid(&ring_radii, 64);
    let images: Vec<Vec<C64>> = exec.map(pts.len(), |i| map.eval(pts[i]));
    let sep = 2.0 * TAU / cfg.grid.k as f64;
    let injectivity_audit = exec
        .map(pts.len(), |i| {
            let mut best = f64::INFINITY;
            for j in (i + 1)..pts.len() {
                if (pts[i] - pts[j]).norm() > sep {
                    best = best.min(vdist(&images[i], &images[j]));
                }
            }
            best
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    let hopf_floor = cfg
        .hopf_floor
        .unwrap_or_else(|| 1e-4 * lambda_min(df, &map.f1, &surface));

    let tol_b = cfg.tolerances.tol_boundary;
    let st = |ok: bool| if ok { Status::Pass } else { Status::Fail };
    let mut clauses = vec![
        Clause {
            name: "proper".into(),
            status: st(boundary_residual <= tol_b && interior_negativity < 0.0),
            detail: format!(
                "boundary residual {boundary_residual:.3e} (tol {tol_b:.1e}), interior max ρ∘f {interior_negativity:.3e}"
            ),
        },
        Clause {
            name: "maximum_principle".into(),
            status: st(interior_negativity <= boundary_max + MAX_PRINCIPLE_SLACK
                && zeta_interior_max <= zeta_boundary_max + MAX_PRINCIPLE_SLACK),
            detail: format!(
                "ρ∘f interior {interior_negativity:.3e} vs boundary {boundary_max:.3e}; |ζ| interior {zeta_interior_max:.6} vs boundary {zeta_boundary_max:.6}"
            ),
        },
    ];
    clauses.push(match approx_error {
        Some(e) => Clause {
            name: "approximation".into(),
            status: st(e < cfg.eps),
            detail: format!("sup over |x| ≤ {} of |f − f₁| = {e:.3e} (eps {})", cfg.compact_k, cfg.eps),
        },
        None => Clause {
            name: "approximation".into(),
            status: Status::NotApplicable,
            detail: "no approximation compact on the annulus".into(),
        },
    });
    let worst_jet = jet_errors.iter().map(|j| j.error).fold(0.0, f64::max);
    clauses.push(Clause {
        name: "interpolation".into(),
        status: if jet_errors.is_empty() {
            Status::NotApplicable
        } else {
            st(worst_jet <= JET_TOL)
        },
        detail: format!("{} point(s), worst jet error {worst_jet:.3e}", jet_errors.len()),
    });
    clauses.push(Clause {
        name: "hopf".into(),
        status: st(hopf_margin > 0.0 && hopf_fd <= -hopf_floor),
        detail: format!(
            "min outward derivative {hopf_margin:.3e}; max inward difference {hopf_fd:.3e} vs −{hopf_floor:.1e}"
        ),
    });
    let imm_ok = immersion_margin > 0.0;
    clauses.push(Clause {
        name: "immersion".into(),
        status: match (n >= 3, imm_ok) {
            (true, ok) => st(ok),
            (false, true) => Status::Pass,
            (false, false) => Status::Flagged,
        },
        detail: format!("min |f′| = {immersion_margin:.3e}{}", if n < 3 { " (claimed only for n ≥ 3)" } else { "" }),
    });
    let inj_ok = injectivity_audit > 0.0;
    clauses.push(Clause {
        name: "injectivity".into(),
        status: if n >= 4 { st(inj_ok) } else { Status::NotApplicable },
        detail: format!("min separated image distance {injectivity_audit:.3e}"),
    });

    let mut recommendations = Vec::new();
    if !imm_ok || (n >= 4 && !inj_ok) {
        recommendations.push(format!(
            "perturb h before fitting: set perturb_h = true (pert_h = {}, seed = {}) and rerun",
            cfg.pert_h, cfg.seed
        ));
    }

    Ok(ProperMapReport {
        boundary_residual,
        boundary_max_rho: boundary_max,
        interior_negativity,
        zeta_interior_max,
        zeta_boundary_max,
        approx_error,
        jet_errors,
        hopf_margin,
        hopf_inward_difference: hopf_fd,
        hopf_floor,
        immersion_margin,
        injectivity_audit,
        clauses,
        recommendations,
    })
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameStats {
    pub smoothness: f64,
    pub max_gap: f64,
    pub closure: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitStats {
    pub error: f64,
    pub error_half_degree: Option<f64>,
    pub monotone: bool,
    pub condition: f64,
    pub degrees: (usize, usize),
    pub n_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurveStats {
    pub transversality_margin: f64,
    pub starlike: bool,
    pub angular_lipschitz: f64,
    pub smoothing_error: f64,
    pub reentries: usize,
    pub min_radius: f64,
    pub max_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RhStats {
    pub iterations: usize,
    pub residual: f64,
    pub holomorphy_defect: Option<f64>,
    pub winding_defect: Option<i64>,
    pub period_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxStep {
    pub order: u32,
    pub approx_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub lambda_min: Option<f64>,
    pub band: Option<CollarBand>,
    pub admissibility: Option<AdmissibilityReport>,
    pub frame: Option<FrameStats>,
    pub scale: Option<f64>,
    pub fit: Option<FitStats>,
    pub curves: Option<CurveStats>,
    pub eps_zeta: Option<f64>,
    pub predicted_order: Option<u32>,
    pub divisor: Option<Divisor>,
    pub rh: Option<RhStats>,
    /// `sup_K |f − f₁|` for increasing zero counts at the origin.
    pub approx_sequence: Vec<ApproxStep>,
    pub composition_error: Option<f64>,
    pub composed_terms: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub stage: String,
    pub kind: String,
    pub message: String,
}

impl From<&StageError> for ErrorInfo {
    fn from(e: &StageError) -> Self {
        ErrorInfo {
            stage: e.stage.to_string(),
            kind: e.error.kind().to_string(),
            message: e.error.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Pass,
    ClauseFailure,
    StageError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub status: RunStatus,
    pub error: Option<ErrorInfo>,
    pub diagnostics: Diagnostics,
    pub proper_map: Option<ProperMapReport>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub map: ProperMap,
    pub curves: CurveFamily,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct PipelineFailure {
    pub error: StageError,
    pub report: RunReport,
}

impl std::fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for PipelineFailure {}

struct Built {
    map: ProperMap,
    curves: CurveFamily,
    trace: Vec<TraceRow>,
}

/// Runs every stage; any stage error aborts with a stage-tagged failure that
/// still carries the diagnostics gathered so far.
pub fn run_pipeline(cfg: &RunConfig, exec: Exec) -> std::result::Result<RunOutput, Box<PipelineFailure>> {
    let mut diag = Diagnostics::default();
    let mut warnings = Vec::new();
    let built = build(cfg, exec, &mut diag, &mut warnings).and_then(|b| {
        let report = verify_theorem(&b.map, cfg, exec).stage("pipeline.verify")?;
        Ok((b, report))
    });
    match built {
        Ok((b, pm)) => {
            let status = if pm.all_pass() {
                RunStatus::Pass
            } else {
                RunStatus::ClauseFailure
            };
            Ok(RunOutput {
                report: RunReport {
                    status,
                    error: None,
                    diagnostics: diag,
                    proper_map: Some(pm),
                    warnings,
                },
                map: b.map,
                curves: b.curves,
                trace: b.trace,
            })
        }
        Err(error) => Err(Box::new(PipelineFailure {
            report: RunReport {
                status: RunStatus::StageError,
                error: Some(ErrorInfo::from(&error)),
                diagnostics: diag,
                proper_map: None,
                warnings,
            },
            error,
        })),
    }
}

fn image_samples(f1: &LaurentMap, surface: SurfaceKind) -> Vec<Vec<C64>> {
    polar_grid(&radii(surface, 16, true), 64).into_iter().map(|x| f1.eval(x)).collect()
}

fn build(
    cfg: &RunConfig,
    exec: Exec,
    diag: &mut Diagnostics,
    warnings: &mut Vec<String>,
) -> std::result::Result<Built, StageError> {
    cfg.validate().stage("pipeline.config")?;
    let df_box = cfg.domain.build().stage("pipeline.config")?;
    let df = df_box.as_ref();
    let surface = cfg.surface_spec().stage("pipeline.config")?;
    let comps = surface.components();
    let f1 = cfg.f1.to_map();
    let annulus = surface.is_annulus();

    // collar band
    let lam = lambda_min(df, &f1, &surface);
    diag.lambda_min = Some(lam);
    if !(lam > 0.0) {
        return Err(StageError::new(
            "pipeline.admissibility",
            Error::Configuration("no positive Levi eigenvalue along f₁(bM)".into()),
        ));
    }
    let band = match cfg.band {
        Some(b) => CollarBand::new(b.rho_lo, b.rho_hi, lam),
        None => {
            let scale = image_samples(&f1, cfg.surface)
                .iter()
                .map(|z| df.rho(z).abs())
                .fold(0.0, f64::max);
            CollarBand::from_scale(scale, lam)
        }
    }
    .stage("pipeline.collar")?;
    diag.band = Some(band);

    let loops: Vec<Vec<CxPoint>> = comps
        .iter()
        .map(|c| c.nodes.iter().map(|&x| CxPoint(f1.eval(x))).collect())
        .collect();
    for (ci, pts) in loops.iter().enumerate() {
        for (k, p) in pts.iter().enumerate() {
            if !df.contains(p) {
                return Err(StageError::new("pipeline.collar", Error::Domain { point: format!("f₁(x_{k}) on component {ci}") }));
            }
            let r = df.rho(p);
            if !band.contains(r) {
                return Err(StageError::new(
                    "pipeline.collar",
                    Error::CollarViolation(format!(
                        "ρ(f₁(x_{k})) = {r:.6} on component {ci} lies outside the band [{:.6}, {:.6}]",
                        band.rho_lo, band.rho_hi
                    )),
                ));
            }
        }
    }

    // admissibility on a denser boundary sampling
    let per = (4096 / comps.len()).max(1);
    let samples: Vec<CxPoint> = comps
        .iter()
        .flat_map(|c| circle_nodes(per, c.radius))
        .map(|x| CxPoint(f1.eval(x)))
        .collect();
    let adm = check_admissible(df, &band, &samples, cfg.admissibility).stage("pipeline.admissibility")?;
    let passed = adm.passed;
    diag.admissibility = Some(adm);
    if !passed {
        return Err(StageError::new(
            "pipeline.admissibility",
            Error::Configuration(format!("Levi form fails the {:?} admissibility test", cfg.admissibility)),
        ));
    }

    // frames
    let k = cfg.grid.k;
    let mut frames: Vec<BoundaryFrame> = Vec::with_capacity(comps.len());
    let mut fs = FrameStats::default();
    for pts in &loops {
        let raw = build_frame(df, pts).stage("disc_family.frame")?;
        fs.closure = fs.closure.max(raw.closure);
        let fr = raw.smoothed(df, pts, k / 8).stage("disc_family.frame")?;
        fs.smoothness = fs.smoothness.max(fr.smoothness);
        fs.max_gap = fs.max_gap.max(fr.max_gap);
        frames.push(fr);
    }
    diag.frame = Some(fs);

    let points: Vec<CxPoint> = loops.iter().flatten().cloned().collect();
    let dirs: Vec<Vec<C64>> = frames.iter().flat_map(|f| f.vectors.clone()).collect();
    let c = choose_scale(df, &points, &dirs, &band, exec).stage("disc_family.scale")?;
    diag.scale = Some(c);

    let mut cf = sample_h(df, Some(&band), &frames, &f1, &comps, c, cfg.grid.j, exec).stage("center_family.sample")?;
    if cfg.perturb_h {
        cf.perturb(cfg.pert_h, cfg.seed, cfg.grid.n);
    }
    let dpos = cfg.grid.degree.unwrap_or(k / 4);
    let dneg = if annulus { cfg.grid.degree_neg.unwrap_or(k / 4) } else { 0 };
    let fitted = fit_surrogate(&cf, cfg.grid.n, (dneg, dpos), annulus, exec).stage("center_family.fit")?;
    let half = fit_surrogate(&cf, cfg.grid.n, (dneg / 2, dpos / 2), annulus, exec)
        .ok()
        .map(|h| h.fit_error);
    let monotone = half.is_none_or(|h| fitted.fit_error <= h * (1.0 + 1e-9) + 1e-15);
    if !monotone {
        warnings.push("fit error increased with the fit degree".into());
    }
    if fitted.fit_error > cfg.tolerances.tol_fit {
        warnings.push(format!(
            "surrogate fit error {:.3e} exceeds tol_fit {:.1e}",
            fitted.fit_error, cfg.tolerances.tol_fit
        ));
    }
    diag.fit = Some(FitStats {
        error: fitted.fit_error,
        error_half_degree: half,
        monotone,
        condition: fitted.condition,
        degrees: fitted.degrees,
        n_terms: fitted.n_terms(),
    });

    let curves = detect_curves(&fitted, df, cfg.grid.angles, exec).stage("curve_detect")?;
    let all_r = curves.components.iter().flat_map(|c| c.radii.iter().flatten()).copied();
    let min_radius = all_r.clone().fold(f64::INFINITY, f64::min);
    diag.curves = Some(CurveStats {
        transversality_margin: curves.transversality_margin,
        starlike: curves.starlike_cert,
        angular_lipschitz: curves.angular_lipschitz,
        smoothing_error: curves.smoothing_error,
        reentries: curves.reentries.len(),
        min_radius,
        max_radius: curves.max_radius(),
    });
    if !curves.reentries.is_empty() {
        warnings.push(format!(
            "{} curve ray(s) re-enter the domain before t = 0.95; first crossings kept",
            curves.reentries.len()
        ));
    }

    let opts = RhOptions {
        tol: cfg.tolerances.tol_rh,
        max_iter: cfg.rh.max_iter,
        newton: cfg.rh.newton,
        ..RhOptions::default()
    };

    let (zeta, trace) = if annulus {
        solve_annulus(cfg, &curves, &opts, diag)?
    } else {
        solve_disc(cfg, &fitted, &curves, &opts, diag, warnings)?
    };

    let map = ProperMap::new(cfg.surface, f1, fitted.surrogate.clone(), zeta, k);
    if map.composed.is_some() {
        diag.composition_error = Some(map.composition_error);
        diag.composed_terms = map.composed.as_ref().map(|p| p.coeffs[0].len());
        if map.composition_error > 1e-12 {
            warnings.push(format!(
                "composed coefficients differ from H(x, ζ(x)) by {:.3e}",
                map.composition_error
            ));
        }
    }
    Ok(Built { map, curves, trace })
}

#[cfg(feature = "annulus")]
fn solve_annulus(
    cfg: &RunConfig,
    curves: &CurveFamily,
    opts: &RhOptions,
    diag: &mut Diagnostics,
) -> std::result::Result<(ZetaFactor, Vec<TraceRow>), StageError> {
    let r = match cfg.surface {
        SurfaceKind::Annulus { inner_radius } => inner_radius,
        SurfaceKind::Disc => unreachable!("annulus solve on the disc"),
    };
    let sol = solve_rh_annulus(curves, r, &RhOptions { newton: false, ..*opts }).stage("rh_solver")?;
    diag.rh = Some(RhStats {
        iterations: sol.iterations,
        residual: sol.residual,
        holomorphy_defect: None,
        winding_defect: None,
        period_residual: Some(sol.period_residual),
    });
    Ok((ZetaFactor::Annulus(sol.zeta), sol.trace))
}

#[cfg(not(feature = "annulus"))]
fn solve_annulus(
    _cfg: &RunConfig,
    _curves: &CurveFamily,
    _opts: &RhOptions,
    _diag: &mut Diagnostics,
) -> std::result::Result<(ZetaFactor, Vec<TraceRow>), StageError> {
    Err(StageError::new(
        "rh_solver",
        Error::Configuration("annulus support is disabled in this build".into()),
    ))
}

fn approx_error(cf: &CenterFamily, zeta: &DiscZeta, radius: f64) -> f64 {
    sup_on_disc(
        |x| {
            let f = cf.eval_h(x, zeta.eval(x));
            vdist(&f, &cf.f1.eval(x))
        },
        radius,
    )
}

const MAX_EXTRA_ZEROS: u32 = 16;

fn solve_disc(
    cfg: &RunConfig,
    cf: &CenterFamily,
    curves: &CurveFamily,
    opts: &RhOptions,
    diag: &mut Diagnostics,
    warnings: &mut Vec<String>,
) -> std::result::Result<(ZetaFactor, Vec<TraceRow>), StageError> {
    let mut base = Divisor::default();
    for p in &cfg.interp {
        base.add(C64::new(p.point[0], p.point[1]), p.order + 1).stage("rh_solver.divisor")?;
    }
    for p in &cfg.poles {
        base.add(C64::new(p.point[0], p.point[1]), p.order).stage("rh_solver.divisor")?;
    }
    let h_sup: f64 = cf
        .surrogate
        .iter()
        .map(|m| sup_on_disc(|x| vnorm(&m.eval(x)), cfg.compact_k))
        .sum();
    let eps_zeta = if h_sup > 0.0 { (cfg.eps / h_sup).min(1.0) } else { 1.0 };
    diag.eps_zeta = Some(eps_zeta);

    let small = smallness_by_zeros(curves, &base, cfg.compact_k, eps_zeta, opts).stage("rh_solver")?;
    diag.predicted_order = small.predicted_order;
    let origin = C64::new(0.0, 0.0);
    let mut div = small.divisor;
    let mut sol = small.solution;
    let mut err = approx_error(cf, &sol.zeta, cfg.compact_k);
    let mut bumps = 0;
    while err >= cfg.eps && bumps < MAX_EXTRA_ZEROS {
        div.add(origin, 1).stage("rh_solver.divisor")?;
        sol = solve_rh(curves, 0, &div, opts).stage("rh_solver")?;
        err = approx_error(cf, &sol.zeta, cfg.compact_k);
        bumps += 1;
    }
    if bumps > 0 {
        warnings.push(format!("{bumps} extra zero(s) at the origin were needed beyond the predicted count"));
    }

    // observed approximation sequence over the zero count at the origin
    let top = div.order_at(origin);
    let lo = base.order_at(origin).max(if base.total_degree() == 0 { 1 } else { 0 });
    let mut seq = Vec::new();
    for w in lo.max(top.saturating_sub(15))..top {
        let mut d = base.clone();
        d.raise_to(origin, w).stage("rh_solver.divisor")?;
        if d.total_degree() == 0 {
            continue;
        }
        if let Ok(s) = solve_rh(curves, 0, &d, opts) {
            seq.push(ApproxStep {
                order: w,
                approx_error: approx_error(cf, &s.zeta, cfg.compact_k),
            });
        }
    }
    seq.push(ApproxStep {
        order: top,
        approx_error: err,
    });
    if seq.windows(2).any(|w| w[1].approx_error >= w[0].approx_error) {
        warnings.push("approximation error did not decrease strictly with the zero count".into());
    }
    diag.approx_sequence = seq;
    diag.rh = Some(RhStats {
        iterations: sol.iterations,
        residual: sol.residual,
        holomorphy_defect: Some(sol.holomorphy_defect),
        winding_defect: Some(sol.winding_defect),
        period_residual: None,
    });
    diag.divisor = Some(div);
    Ok((ZetaFactor::Disc(sol.zeta), sol.trace))
}

/// Per-node boundary data of a run: `(component, k, s, ρ(f(x_k)), |ζ(x_k)|, R_k(arg ζ))`.
pub fn boundary_table(map: &ProperMap, cfg: &RunConfig, curves: &CurveFamily) -> Result<Vec<BoundaryRow>> {
    let df = cfg.domain.build()?;
    let surface = cfg.surface_spec()?;
    Ok(surface
        .components()
        .iter()
        .enumerate()
        .flat_map(|(ci, comp)| {
            let df = &df;
            comp.nodes.iter().enumerate().map(move |(k, &x)| {
                let z = map.zeta.eval(x);
                BoundaryRow {
                    component: ci,
                    k,
                    s: TAU * k as f64 / comp.nodes.len() as f64,
                    rho: df.rho(&map.eval(x)),
                    zeta_abs: z.norm(),
                    curve_radius: curves.log_radius(ci, k, z.arg()).exp(),
                }
            })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    pub component: usize,
    pub k: usize,
    pub s: f64,
    pub rho: f64,
    pub zeta_abs: f64,
    pub curve_radius: f64,
}
