//! File formats shared with the CLI: CSV tables (17 significant digits),
//! JSON sidecars, raw f64 snapshot dumps, and a minimal deterministic SVG
//! polyline plotter.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::radial::{ProfileKind, RadialGrid, RadialProfile};
use crate::sim2d::Field2D;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

/// Full-precision decimal used across all numeric outputs.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON sidecar of a profile CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSidecar {
    pub params: ModelParams,
    pub grid: RadialGrid,
    pub residual_norm: f64,
    pub interfaces: Vec<f64>,
    pub kind: ProfileKind,
}

/// Write `<base>.csv` (r,u,v) and `<base>.json`.
pub fn write_profile(base: &Path, profile: &RadialProfile) -> Result<()> {
    let mut csv = String::from("r,u,v\n");
    for i in 0..profile.grid.n {
        let _ = writeln!(
            csv,
            "{},{},{}",
            fmt_f64(profile.grid.r(i)),
            fmt_f64(profile.u[i]),
            fmt_f64(profile.v[i])
        );
    }
    std::fs::write(base.with_extension("csv"), csv)?;
    let sidecar = ProfileSidecar {
        params: profile.params,
        grid: profile.grid,
        residual_norm: profile.residual_norm,
        interfaces: profile.interfaces.clone(),
        kind: profile.kind,
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Io(format!("sidecar serialization: {e}")))?;
    std::fs::write(base.with_extension("json"), json)?;
    Ok(())
}

/// Read a profile written by [`write_profile`]; accepts either the .csv or
/// the bare base path.
pub fn read_profile(path: &Path) -> Result<RadialProfile> {
    let base = if path.extension().map_or(false, |e| e == "csv") {
        path.with_extension("")
    } else {
        path.to_path_buf()
    };
    let side: ProfileSidecar = serde_json::from_str(
        &std::fs::read_to_string(base.with_extension("json"))
            .map_err(|e| Error::Io(format!("sidecar read: {e}")))?,
    )
    .map_err(|e| Error::Io(format!("sidecar parse: {e}")))?;
    let file = std::fs::File::open(base.with_extension("csv"))?;
    let mut u = Vec::new();
    let mut v = Vec::new();
    for (ln, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if ln == 0 {
            if line.trim() != "r,u,v" {
                return Err(Error::Io(format!("unexpected profile header: {line}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let _r = it.next();
        let uu: f64 = it
            .next()
            .ok_or_else(|| Error::Io(format!("short row {ln}")))?
            .trim()
            .parse()
            .map_err(|e| Error::Io(format!("row {ln}: {e}")))?;
        let vv: f64 = it
            .next()
            .ok_or_else(|| Error::Io(format!("short row {ln}")))?
            .trim()
            .parse()
            .map_err(|e| Error::Io(format!("row {ln}: {e}")))?;
        u.push(uu);
        v.push(vv);
    }
    if u.len() != side.grid.n {
        return Err(Error::Io(format!(
            "profile row count {} does not match sidecar grid n = {}",
            u.len(),
            side.grid.n
        )));
    }
    Ok(RadialProfile {
        grid: side.grid,
        u,
        v,
        params: side.params,
        interfaces: side.interfaces,
        residual_norm: side.residual_norm,
        kind: side.kind,
    })
}

/// Generic CSV writer: header plus rows of full-precision numbers.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Raw row-major 64-bit little-endian snapshot pair u_<t>.f64 / v_<t>.f64.
pub fn write_snapshot(dir: &Path, state: &Field2D) -> Result<(String, String)> {
    let tag = format!("{:.3}", state.t);
    let write_one = |name: &str, data: &[f64]| -> Result<()> {
        let mut f = std::fs::File::create(dir.join(name))?;
        let mut buf = Vec::with_capacity(data.len() * 8);
        for &x in data {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        f.write_all(&buf)?;
        Ok(())
    };
    let un = format!("u_{tag}.f64");
    let vn = format!("v_{tag}.f64");
    write_one(&un, &state.u)?;
    write_one(&vn, &state.v)?;
    Ok((un, vn))
}

/// Manifest of a simulation run (grid, times, parameters, seed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimManifest {
    pub n: usize,
    pub l: f64,
    pub times: Vec<f64>,
    pub params: ModelParams,
    pub seed: u64,
    pub noise_amp: f64,
}

/// Minimal deterministic SVG polyline plot.
pub struct SvgPlot {
    width: f64,
    height: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
}

impl SvgPlot {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        Self {
            width: 640.0,
            height: 480.0,
            x_range,
            y_range,
            body: String::new(),
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let margin = 50.0;
        let sx = (x - self.x_range.0) / (self.x_range.1 - self.x_range.0);
        let sy = (y - self.y_range.0) / (self.y_range.1 - self.y_range.0);
        (
            margin + sx * (self.width - 2.0 * margin),
            self.height - margin - sy * (self.height - 2.0 * margin),
        )
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], color: &str) {
        let mut d = String::new();
        for &(x, y) in pts {
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let (px, py) = self.map(x, y);
            let _ = write!(d, "{px:.2},{py:.2} ");
        }
        let _ = writeln!(
            self.body,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            d.trim_end()
        );
    }

    pub fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, color: &str) {
        let (px0, py0) = self.map(x0, y1);
        let (px1, py1) = self.map(x1, y0);
        let _ = writeln!(
            self.body,
            "<rect x=\"{px0:.2}\" y=\"{py0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\"/>",
            px1 - px0,
            py1 - py0
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, color: &str) {
        let (px, py) = self.map(x, y);
        let _ = writeln!(
            self.body,
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"2.5\" fill=\"{color}\"/>"
        );
    }

    pub fn save(&self, path: &Path, title: &str) -> Result<()> {
        let (w, h) = (self.width, self.height);
        let margin = 50.0;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
        );
        let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
        // axes
        let _ = writeln!(
            svg,
            "<line x1=\"{margin}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            h - margin,
            w - margin,
            h - margin
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{margin}\" y1=\"{margin}\" x2=\"{margin}\" y2=\"{}\" stroke=\"black\"/>",
            h - margin
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"25\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{title}</text>",
            0.5 * w
        );
        let _ = writeln!(
            svg,
            "<text x=\"{margin}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{} .. {}</text>",
            h - margin + 28.0,
            self.x_range.0,
            self.x_range.1
        );
        let _ = writeln!(
            svg,
            "<text x=\"4\" y=\"{margin}\" font-family=\"monospace\" font-size=\"11\">{} .. {}</text>",
            self.y_range.1, self.y_range.0
        );
        svg.push_str(&self.body);
        svg.push_str("</svg>\n");
        std::fs::write(path, svg)?;
        Ok(())
    }
}
