//! Run configuration: JSON (or TOML) schema, defaults, validation and
//! dotted-path overrides.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::center::{LaurentMap, SurfaceKind, SurfaceSpec};
use crate::error::{Error, Result};
use crate::geometry::{AdmissibilityMode, DefiningFunction, Ellipsoid, Monomial, PolynomialRho};
use crate::C64;

/// Domain `Ω = {ρ < 0}`: a preset or a polynomial in `z, z̄`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Ellipsoid semi-axes; the ball uses `dim` instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// `[[α₁..αₙ, β₁..βₙ], [re, im]]` for the term `c z^α z̄^β`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<Vec<(Vec<u32>, [f64; 2])>>,
}

impl DomainSpec {
    pub fn ball(dim: usize) -> Self {
        DomainSpec {
            preset: Some("ball".into()),
            radii: None,
            dim: Some(dim),
            poly: None,
        }
    }

    pub fn build(&self) -> Result<Box<dyn DefiningFunction>> {
        match (&self.preset, &self.poly) {
            (Some(_), Some(_)) => Err(Error::schema("domain", "give either `preset` or `poly`, not both")),
            (None, None) => Err(Error::schema("domain", "missing `preset` or `poly`")),
            (Some(p), None) => match p.as_str() {
                "ball" => {
                    let n = self.dim.ok_or_else(|| Error::schema("domain.dim", "required for the ball"))?;
                    if n < 2 {
                        return Err(Error::schema("domain.dim", format!("must be ≥ 2, got {n}")));
                    }
                    Ok(Box::new(Ellipsoid::ball(n)))
                }
                "ellipsoid" => {
                    let radii = self
                        .radii
                        .as_ref()
                        .ok_or_else(|| Error::schema("domain.radii", "required for the ellipsoid"))?;
                    Ellipsoid::from_radii(radii)
                        .map(|e| Box::new(e) as Box<dyn DefiningFunction>)
                        .map_err(|e| Error::schema("domain.radii", e.to_string()))
                }
                other => Err(Error::schema("domain.preset", format!("unknown preset `{other}`"))),
            },
            (None, Some(terms)) => {
                let len = terms
                    .first()
                    .map(|t| t.0.len())
                    .ok_or_else(|| Error::schema("domain.poly", "empty polynomial"))?;
                if len % 2 != 0 || terms.iter().any(|t| t.0.len() != len) {
                    return Err(Error::schema("domain.poly", "multi-indices must all have length 2n"));
                }
                let n = len / 2;
                let monos = terms
                    .iter()
                    .map(|(idx, c)| Monomial {
                        z_pow: idx[..n].to_vec(),
                        zbar_pow: idx[n..].to_vec(),
                        coeff: C64::new(c[0], c[1]),
                    })
                    .collect();
                PolynomialRho::new(n, monos)
                    .map(|p| Box::new(p) as Box<dyn DefiningFunction>)
                    .map_err(|e| Error::schema("domain.poly", e.to_string()))
            }
        }
    }
}

/// `f₁` as `coeffs[coordinate][e − min_exp] = [re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default)]
    pub min_exp: i32,
    pub coeffs: Vec<Vec<[f64; 2]>>,
}

impl MapSpec {
    pub fn to_map(&self) -> LaurentMap {
        LaurentMap {
            min_exp: self.min_exp,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.iter().map(|v| C64::new(v[0], v[1])).collect())
                .collect(),
        }
    }
}

/// Jet interpolation: `f − f₁` vanishes through `order` at `point`;
/// optional `jet[j][i] = [re, im]` is the expected `f^{(j)}_i(point)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpPoint {
    pub point: [f64; 2],
    pub order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jet: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    pub point: [f64; 2],
    pub order: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_fit: f64,
    pub tol_rh: f64,
    pub tol_boundary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_fit: 1e-8,
            tol_rh: 1e-10,
            tol_boundary: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    /// Boundary samples per component.
    pub k: usize,
    /// Curve angles.
    pub angles: usize,
    /// Highest sampled ζ-coefficient.
    pub j: usize,
    /// Surrogate terms.
    pub n: usize,
    /// Positive fit degree; `K/4` when absent.
    pub degree: Option<usize>,
    /// Negative fit degree on the annulus; `K/4` when absent.
    pub degree_neg: Option<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            k: 256,
            angles: 256,
            j: 24,
            n: 12,
            degree: None,
            degree_neg: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub rho_lo: f64,
    pub rho_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RhSettings {
    pub max_iter: usize,
    pub newton: bool,
}

impl Default for RhSettings {
    fn default() -> Self {
        RhSettings {
            max_iter: 200,
            newton: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_surface")]
    pub surface: SurfaceKind,
    pub domain: DomainSpec,
    pub f1: MapSpec,
    #[serde(default = "default_compact")]
    pub compact_k: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub interp: Vec<InterpPoint>,
    #[serde(default)]
    pub poles: Vec<PoleSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub grid: Grid,
    /// Collar band; derived from `f₁` when absent.
    #[serde(default)]
    pub band: Option<BandSpec>,
    /// `1e-4·λ_min` when absent.
    #[serde(default)]
    pub hopf_floor: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub perturb_h: bool,
    #[serde(default = "default_pert")]
    pub pert_h: f64,
    #[serde(default)]
    pub rh: RhSettings,
    #[serde(default)]
    pub admissibility: AdmissibilityMode,
}

fn default_surface() -> SurfaceKind {
    SurfaceKind::Disc
}
fn default_compact() -> f64 {
    0.5
}
fn default_eps() -> f64 {
    0.05
}
fn default_pert() -> f64 {
    1e-3
}

impl RunConfig {
    /// The ball in `C²` with `f₁(x) = (a·x, 0)`.
    pub fn ball_example(a: f64) -> Self {
        RunConfig {
            surface: SurfaceKind::Disc,
            domain: DomainSpec::ball(2),
            f1: MapSpec {
                min_exp: 0,
                coeffs: vec![vec![[0.0, 0.0], [a, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]],
            },
            compact_k: default_compact(),
            eps: default_eps(),
            interp: Vec::new(),
            poles: Vec::new(),
            tolerances: Tolerances::default(),
            grid: Grid::default(),
            band: None,
            hopf_floor: None,
            seed: 0,
            perturb_h: false,
            pert_h: default_pert(),
            rh: RhSettings::default(),
            admissibility: AdmissibilityMode::Strict,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::schema("<root>", e.to_string()))?;
        Self::from_value(v)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let v: Value = toml::from_str(s).map_err(|e| Error::schema("<root>", e.to_string()))?;
        Self::from_value(v)
    }

    /// Parses, materializes defaults and validates.
    pub fn from_value(v: Value) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_value(v).map_err(|e| {
            let msg = e.to_string();
            let field = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "<root>".into());
            Error::schema(&field, msg)
        })?;
        cfg.materialize();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `key=value` overrides (dotted paths, JSON values or bare strings).
    pub fn from_value_with_overrides(mut v: Value, overrides: &[String]) -> Result<Self> {
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| Error::schema(o, "override must look like key=value"))?;
            let val: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut v, key, val)?;
        }
        Self::from_value(v)
    }

    fn materialize(&mut self) {
        let quarter = self.grid.k / 4;
        self.grid.degree.get_or_insert(quarter);
        if matches!(self.surface, SurfaceKind::Annulus { .. }) {
            self.grid.degree_neg.get_or_insert(quarter);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::schema("eps", format!("must be positive, got {}", self.eps)));
        }
        if !(self.compact_k >= 0.0 && self.compact_k < 1.0) {
            return Err(Error::schema("compact_k", format!("must lie in [0, 1), got {}", self.compact_k)));
        }
        let surface = SurfaceSpec::new(self.surface, self.grid.k)?;
        if self.grid.angles < 8 || !crate::fourier::is_power_of_two(self.grid.angles) {
            return Err(Error::schema("grid.angles", "must be a power of two ≥ 8"));
        }
        if self.grid.n == 0 || self.grid.n > self.grid.j {
            return Err(Error::schema("grid.n", format!("must lie in 1..={}", self.grid.j)));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.tol_fit", t.tol_fit),
            ("tolerances.tol_rh", t.tol_rh),
            ("tolerances.tol_boundary", t.tol_boundary),
            ("pert_h", self.pert_h),
        ] {
            if !(v > 0.0) {
                return Err(Error::schema(name, format!("must be positive, got {v}")));
            }
        }
        if let Some(h) = self.hopf_floor {
            if !(h > 0.0) {
                return Err(Error::schema("hopf_floor", format!("must be positive, got {h}")));
            }
        }
        if self.rh.max_iter == 0 {
            return Err(Error::schema("rh.max_iter", "must be ≥ 1"));
        }
        let df = self.domain.build()?;
        let n = df.dim();
        if self.f1.coeffs.len() != n {
            return Err(Error::schema(
                "f1.coeffs",
                format!("has {} coordinates, domain has {n}", self.f1.coeffs.len()),
            ));
        }
        if self.f1.coeffs.iter().any(|c| c.len() != self.f1.coeffs[0].len() || c.is_empty()) {
            return Err(Error::schema("f1.coeffs", "every coordinate needs the same non-zero length"));
        }
        if !surface.is_annulus() && self.f1.min_exp != 0 {
            return Err(Error::schema("f1.min_exp", "must be 0 on the disc"));
        }
        if let Some(b) = self.band {
            if !(b.rho_lo < b.rho_hi && b.rho_hi < 0.0) {
                return Err(Error::schema("band", "needs rho_lo < rho_hi < 0"));
            }
        }
        if surface.is_annulus() && !(self.interp.is_empty() && self.poles.is_empty()) {
            return Err(Error::schema("interp", "interpolation and poles are not supported on the annulus"));
        }
        let mut seen: Vec<C64> = Vec::new();
        for (i, p) in self.interp.iter().cloned().chain(self.poles.iter().map(|p| p.as_interp())).enumerate() {
            let x = C64::new(p.point[0], p.point[1]);
            let field = if i < self.interp.len() { "interp" } else { "poles" };
            let inside = if surface.is_annulus() {
                surface.contains(x)
            } else {
                x.norm() <= crate::rh::MAX_ZERO_RADIUS
            };
            if !inside {
                return Err(Error::schema(field, format!("point {x} is not inside the surface")));
            }
            if i < self.interp.len() {
                if seen.iter().any(|s| (s - x).norm() < 1e-12) {
                    return Err(Error::schema("interp", format!("duplicate point {x}")));
                }
                seen.push(x);
                if let Some(jet) = &p.jet {
                    if jet.len() > p.order as usize + 1 || jet.iter().any(|j| j.len() != n) {
                        return Err(Error::schema("interp.jet", "jet needs ≤ order+1 entries of length n"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn surface_spec(&self) -> Result<SurfaceSpec> {
        SurfaceSpec::new(self.surface, self.grid.k)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

impl PoleSpec {
    fn as_interp(&self) -> InterpPoint {
        InterpPoint {
            point: self.point,
            order: self.order,
            jet: None,
        }
    }
}

fn set_path(v: &mut Value, key: &str, val: Value) -> Result<()> {
    let mut cur = v;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if let Ok(idx) = part.parse::<usize>() {
            let arr = cur
                .as_array_mut()
                .ok_or_else(|| Error::schema(key, format!("`{part}` indexes a non-array")))?;
            let slot = arr
                .get_mut(idx)
                .ok_or_else(|| Error::schema(key, format!("index {idx} out of range")))?;
            if last {
                *slot = val;
                return Ok(());
            }
            cur = slot;
        } else {
            if cur.is_null() {
                *cur = Value::Object(Default::default());
            }
            let obj = cur
                .as_object_mut()
                .ok_or_else(|| Error::schema(key, format!("`{part}` indexes a non-object")))?;
            if last {
                obj.insert(part.to_string(), val);
                return Ok(());
            }
            cur = obj.entry(part.to_string()).or_insert(Value::Null);
        }
    }
    Ok(())
}
