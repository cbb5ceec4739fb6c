//! Plain SVG figures regenerated from the CSV artifacts of a run.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::artifacts::Table;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const HEAT_CELLS: usize = 64;

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
            self.x0, self.y0, self.w, self.h
        );
        for (v, anchor_x) in [(self.xr.0, self.x0), (self.xr.1, self.x0 + self.w)] {
            let _ = writeln!(
                out,
                r#"<text x="{anchor_x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
                self.y0 + self.h + 16.0,
                tick(v)
            );
        }
        for (v, anchor_y) in [(self.yr.0, self.y0 + self.h), (self.yr.1, self.y0)] {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
                self.x0 - 4.0,
                anchor_y + 4.0,
                tick(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{xlabel}</text>"#,
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 34.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{ylabel}</text>"#,
            self.x0 - 40.0,
            self.y0 + self.h / 2.0,
            self.x0 - 40.0,
            self.y0 + self.h / 2.0
        );
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)], color: &str, closed: bool) {
        let mut d = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, self.px(x), self.py(y));
        }
        if closed {
            d.push('Z');
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
            d.trim_end()
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn document(width: f64, height: f64, title: &str, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.2}\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n{body}</svg>\n",
        width / 2.0
    )
}

fn components(t: &Table) -> Result<Vec<usize>> {
    let c = t.column("component")?;
    let mut ids: Vec<usize> = t.rows.iter().map(|r| r[c] as usize).collect();
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

/// `log10 |ρ(f)|` along each boundary component.
fn boundary_residual(t: &Table) -> Result<String> {
    let (cc, cs, cr) = (t.column("component")?, t.column("s")?, t.column("rho")?);
    let log = |r: &Vec<f64>| r[cr].abs().max(1e-18).log10();
    let frame = Frame {
        x0: MARGIN,
        y0: 36.0,
        w: WIDTH - 1.5 * MARGIN,
        h: HEIGHT - 36.0 - MARGIN,
        xr: (0.0, std::f64::consts::TAU),
        yr: range(t.rows.iter().map(log)),
    };
    let mut body = String::new();
    frame.axes(&mut body, "s", "log10 |rho(f)|");
    for (i, c) in components(t)?.into_iter().enumerate() {
        let pts: Vec<(f64, f64)> = t
            .rows
            .iter()
            .filter(|r| r[cc] as usize == c)
            .map(|r| (r[cs], log(r)))
            .collect();
        frame.polyline(&mut body, &pts, PALETTE[i % PALETTE.len()], false);
    }
    Ok(document(WIDTH, HEIGHT, "Boundary residual", &body))
}

fn heat_color(u: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [68.0, 1.0, 84.0]),
        (0.25, [59.0, 82.0, 139.0]),
        (0.5, [33.0, 145.0, 140.0]),
        (0.75, [94.0, 201.0, 98.0]),
        (1.0, [253.0, 231.0, 37.0]),
    ];
    let u = u.clamp(0.0, 1.0);
    let i = STOPS.iter().rposition(|s| s.0 <= u).unwrap_or(0).min(STOPS.len() - 2);
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let w = (u - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|j| (a.1[j] + w * (b.1[j] - a.1[j])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// `R_k(θ)` per component: boundary node along x, curve angle along y.
fn curves_heatmap(t: &Table) -> Result<String> {
    let (cc, ck, ct, cr) = (t.column("component")?, t.column("k")?, t.column("theta")?, t.column("radius")?);
    let comps = components(t)?;
    let (lo, hi) = t.rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r[cr]), b.max(r[cr])));
    let span = if hi - lo > 1e-15 { hi - lo } else { 1.0 };
    let panel_h = (HEIGHT - 36.0 - MARGIN) / comps.len() as f64;
    let mut body = String::new();
    for (p, &c) in comps.iter().enumerate() {
        let rows: Vec<&Vec<f64>> = t.rows.iter().filter(|r| r[cc] as usize == c).collect();
        let nk = rows.iter().map(|r| r[ck] as usize).max().unwrap_or(0) + 1;
        let na = rows.len() / nk;
        if na == 0 || rows.len() != nk * na {
            bail!("curves table for component {c} is not a full grid");
        }
        let (sk, sa) = (nk.div_ceil(HEAT_CELLS), na.div_ceil(HEAT_CELLS));
        let frame = Frame {
            x0: MARGIN,
            y0: 36.0 + p as f64 * panel_h,
            w: WIDTH - 2.2 * MARGIN,
            h: panel_h - 24.0,
            xr: (0.0, nk as f64),
            yr: (0.0, std::f64::consts::TAU),
        };
        let (cw, ch) = (frame.w / nk.div_ceil(sk) as f64, frame.h / na.div_ceil(sa) as f64);
        for k in (0..nk).step_by(sk) {
            for a in (0..na).step_by(sa) {
                let r = rows[k * na + a];
                let x = frame.px(k as f64);
                let y = frame.py(r[ct]) - ch;
                let _ = writeln!(
                    body,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                    cw + 0.05,
                    ch + 0.05,
                    heat_color((r[cr] - lo) / span)
                );
            }
        }
        frame.axes(&mut body, "boundary node k", "theta");
    }
    let bar_x = WIDTH - MARGIN;
    for i in 0..32 {
        let u = i as f64 / 31.0;
        let _ = writeln!(
            body,
            r#"<rect x="{bar_x:.2}" y="{:.2}" width="14" height="{:.2}" fill="{}"/>"#,
            36.0 + (1.0 - u) * (HEIGHT - 36.0 - MARGIN - 10.0),
            (HEIGHT - 36.0 - MARGIN) / 32.0 + 0.5,
            heat_color(u)
        );
    }
    for (v, y) in [(hi, 44.0), (lo, HEIGHT - MARGIN + 12.0)] {
        let _ = writeln!(
            body,
            r#"<text x="{:.2}" y="{y:.2}" font-size="10" text-anchor="middle">{}</text>"#,
            bar_x + 7.0,
            tick(v)
        );
    }
    Ok(document(WIDTH, HEIGHT, "Curve radii R", &body))
}

/// `f(bM)` projected to each coordinate plane.
fn image_projections(t: &Table) -> Result<String> {
    let cc = t.column("component")?;
    let n = (0..).take_while(|i| t.column(&format!("f{i}_re")).is_ok()).count();
    if n == 0 {
        bail!("boundary table carries no image coordinates");
    }
    let panel = 300.0;
    let width = n as f64 * (panel + MARGIN) + MARGIN;
    let height = panel + 36.0 + MARGIN;
    let comps = components(t)?;
    let mut body = String::new();
    for i in 0..n {
        let (cre, cim) = (t.column(&format!("f{i}_re"))?, t.column(&format!("f{i}_im"))?);
        let xr = range(t.rows.iter().map(|r| r[cre]));
        let yr = range(t.rows.iter().map(|r| r[cim]));
        let half = (xr.1 - xr.0).max(yr.1 - yr.0) / 2.0;
        let (mx, my) = ((xr.0 + xr.1) / 2.0, (yr.0 + yr.1) / 2.0);
        let frame = Frame {
            x0: MARGIN + i as f64 * (panel + MARGIN),
            y0: 36.0,
            w: panel,
            h: panel,
            xr: (mx - half, mx + half),
            yr: (my - half, my + half),
        };
        frame.axes(&mut body, &format!("Re z{}", i + 1), &format!("Im z{}", i + 1));
        for (p, &c) in comps.iter().enumerate() {
            let pts: Vec<(f64, f64)> = t
                .rows
                .iter()
                .filter(|r| r[cc] as usize == c)
                .map(|r| (r[cre], r[cim]))
                .collect();
            frame.polyline(&mut body, &pts, PALETTE[p % PALETTE.len()], true);
        }
    }
    Ok(document(width, height, "Image of the boundary", &body))
}

pub const FIGURES: [&str; 3] = ["boundary_residual.svg", "curves_heatmap.svg", "image_projections.svg"];

pub fn write_figures(dir: &Path) -> Result<()> {
    if !dir.join("report.json").is_file() {
        bail!("{} contains no report.json", dir.display());
    }
    let boundary = Table::read(&dir.join("boundary.csv"))?;
    let curves = Table::read(&dir.join("curves.csv"))?;
    let docs = [
        boundary_residual(&boundary)?,
        curves_heatmap(&curves)?,
        image_projections(&boundary)?,
    ];
    let fig_dir = dir.join("figures");
    std::fs::create_dir_all(&fig_dir).with_context(|| format!("cannot create {}", fig_dir.display()))?;
    for (name, doc) in FIGURES.iter().zip(docs) {
        let path = fig_dir.join(name);
        std::fs::write(&path, doc).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_endpoints() {
        assert_eq!(heat_color(0.0), "#440154");
        assert_eq!(heat_color(1.0), "#fde725");
        assert_eq!(heat_color(2.0), "#fde725");
    }

    #[test]
    fn flat_range_is_widened() {
        assert_eq!(range([1.0, 1.0].into_iter()), (0.5, 1.5));
    }
}
