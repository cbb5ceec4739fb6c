//! CSV artifacts of a run and their readers.

use std::path::Path;

use anyhow::{bail, Context, Result};
use holopush_core::config::RunConfig;
use holopush_core::curves::CurveFamily;
use holopush_core::pipeline::{boundary_table, ProperMap};
use holopush_core::rh::TraceRow;
use holopush_core::C64;

const TAU: f64 = std::f64::consts::TAU;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_trace(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["iteration", "sup_defect", "lambda", "step"])?;
    for row in trace {
        let step = serde_json::to_value(row.step)?;
        w.write_record([
            row.iteration.to_string(),
            row.sup_defect.to_string(),
            row.lambda.to_string(),
            step.as_str().unwrap_or_default().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Defect history of a run that failed to converge.
pub fn write_history(path: &Path, history: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["iteration", "sup_defect", "lambda", "step"])?;
    for (i, d) in history.iter().enumerate() {
        w.write_record([i.to_string(), d.to_string(), String::new(), String::new()])?;
    }
    w.flush()?;
    Ok(())
}

/// `R_k(θ)` on a uniform angle grid, one row per sample.
pub fn write_curves(path: &Path, curves: &CurveFamily, angles: usize) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["component", "k", "theta", "radius"])?;
    for c in 0..curves.components.len() {
        for k in 0..curves.k() {
            for a in 0..angles {
                let theta = TAU * a as f64 / angles as f64;
                let r = curves.log_radius(c, k, theta).exp();
                w.write_record([c.to_string(), k.to_string(), theta.to_string(), r.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_boundary(path: &Path, map: &ProperMap, cfg: &RunConfig, curves: &CurveFamily) -> Result<()> {
    let rows = boundary_table(map, cfg, curves)?;
    let surface = cfg.surface_spec()?;
    let comps = surface.components();
    let n = map.dim();
    let mut w = writer(path)?;
    let mut header: Vec<String> = ["component", "k", "s", "rho", "zeta_abs", "curve_radius"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for i in 0..n {
        header.push(format!("f{i}_re"));
        header.push(format!("f{i}_im"));
    }
    w.write_record(&header)?;
    for row in rows {
        let x: C64 = comps[row.component].nodes[row.k];
        let mut rec = vec![
            row.component.to_string(),
            row.k.to_string(),
            row.s.to_string(),
            row.rho.to_string(),
            row.zeta_abs.to_string(),
            row.curve_radius.to_string(),
        ];
        for v in map.eval(x) {
            rec.push(v.re.to_string());
            rec.push(v.im.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// A numeric CSV table.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        if !path.is_file() {
            bail!("missing {}", path.display());
        }
        let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.with_context(|| format!("{}: bad record {i}", path.display()))?;
            let row = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .with_context(|| format!("{}: non-numeric field in record {i}", path.display()))?;
            rows.push(row);
        }
        if rows.is_empty() {
            bail!("{} has no data rows", path.display());
        }
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("column `{name}` missing"))
    }
}
