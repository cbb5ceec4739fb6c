use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use holopush_core::config::RunConfig;
use holopush_core::pipeline::{
    run_pipeline, verify_theorem, Diagnostics, ErrorInfo, MapDump, ProperMap, RunReport, RunStatus,
};
use holopush_core::{Error, Exec, StageError};
use serde_json::Value;

use crate::artifacts;
use crate::svg;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_STAGE: u8 = 1;
pub const EXIT_CLAUSE: u8 = 2;

fn read_config_value(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let value = if is_toml {
        toml::from_str(&text).map_err(|e| Error::Schema {
            field: "<root>".into(),
            message: e.to_string(),
        })?
    } else {
        serde_json::from_str(&text).map_err(|e| Error::Schema {
            field: "<root>".into(),
            message: e.to_string(),
        })?
    };
    Ok(value)
}

fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let value = read_config_value(path)?;
    Ok(RunConfig::from_value_with_overrides(value, overrides)?)
}

fn failure_report(stage: &'static str, error: Error) -> RunReport {
    RunReport {
        status: RunStatus::StageError,
        error: Some(ErrorInfo::from(&StageError::new(stage, error))),
        diagnostics: Diagnostics::default(),
        proper_map: None,
        warnings: Vec::new(),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

pub fn cmd_run(config: &Path, out: &Path, overrides: &[String]) -> u8 {
    if let Err(e) = fs::create_dir_all(out) {
        eprintln!("error: cannot create output directory {}: {e}", out.display());
        return EXIT_STAGE;
    }
    match run(config, out, overrides) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_STAGE
        }
    }
}

fn run(config: &Path, out: &Path, overrides: &[String]) -> Result<u8> {
    let report_path = out.join("report.json");
    let cfg = match load_config(config, overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            let core = e.downcast_ref::<Error>().cloned().unwrap_or_else(|| Error::Io(format!("{e:#}")));
            write(&report_path, &failure_report("pipeline.config", core.clone()).to_json_pretty())?;
            bail!("[pipeline.config] {core}");
        }
    };
    write(&out.join("config.echo.json"), &cfg.to_json_pretty())?;

    let output = match run_pipeline(&cfg, Exec::default()) {
        Ok(o) => o,
        Err(failure) => {
            write(&report_path, &failure.report.to_json_pretty())?;
            if let Error::Nonconvergence { history, .. } = &failure.error.error {
                artifacts::write_history(&out.join("solver_trace.csv"), history)?;
            }
            bail!("{}", failure.error);
        }
    };
    write(&report_path, &output.report.to_json_pretty())?;
    artifacts::write_trace(&out.join("solver_trace.csv"), &output.trace)?;
    artifacts::write_curves(&out.join("curves.csv"), &output.curves, cfg.grid.angles)?;
    artifacts::write_boundary(&out.join("boundary.csv"), &output.map, &cfg, &output.curves)?;
    let dump = serde_json::to_string_pretty(&output.map.dump()).context("serializing map")?;
    write(&out.join("map.json"), &dump)?;
    for w in &output.report.warnings {
        eprintln!("warning: {w}");
    }
    if output.report.status == RunStatus::Pass {
        svg::write_figures(out)?;
        println!("pass: {}", report_path.display());
        Ok(EXIT_PASS)
    } else {
        let failed: Vec<&str> = output
            .report
            .proper_map
            .iter()
            .flat_map(|pm| pm.clauses.iter())
            .filter(|c| c.status == holopush_core::pipeline::Status::Fail)
            .map(|c| c.name.as_str())
            .collect();
        eprintln!("clause failure: {}", failed.join(", "));
        Ok(EXIT_CLAUSE)
    }
}

pub fn cmd_verify(map: &Path, config: &Path) -> u8 {
    match verify(map, config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_STAGE
        }
    }
}

fn verify(map: &Path, config: &Path) -> Result<u8> {
    let cfg = load_config(config, &[])?;
    let text = fs::read_to_string(map).with_context(|| format!("cannot read map dump {}", map.display()))?;
    let dump: MapDump = serde_json::from_str(&text).with_context(|| format!("cannot parse map dump {}", map.display()))?;
    let df = cfg.domain.build()?;
    if dump.dim != df.dim() || dump.dim != cfg.f1.coeffs.len() {
        bail!("map dump has dimension {} but the config domain has dimension {}", dump.dim, df.dim());
    }
    if dump.surface != cfg.surface {
        bail!("map dump surface does not match the config surface");
    }
    let pm = ProperMap::from_dump(&dump, cfg.grid.k)?;
    let report = verify_theorem(&pm, &cfg, Exec::default())?;
    println!("{}", serde_json::to_string_pretty(&report).context("serializing report")?);
    Ok(if report.all_pass() { EXIT_PASS } else { EXIT_CLAUSE })
}

pub fn cmd_figures(dir: &Path) -> u8 {
    match svg::write_figures(dir) {
        Ok(()) => EXIT_PASS,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_STAGE
        }
    }
}
