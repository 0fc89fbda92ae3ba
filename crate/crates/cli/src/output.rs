//! Result files: CSV, JSON, the manifest and the frontier plot.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use nohair::tradeoff::{tradeoff_bound, ScalingFit, ScalingPoint, Verdict};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub pass: usize,
    pub fail: usize,
    pub indeterminate: usize,
}

impl VerdictCounts {
    pub fn total(&self) -> usize {
        self.pass + self.fail + self.indeterminate
    }
}

/// Run metadata. The only non-reproducible fields live here.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: serde_json::Value,
    pub seed: u64,
    pub started_unix_seconds: f64,
    pub duration_seconds: f64,
    pub instances: usize,
    pub stream_ids: Vec<u64>,
    pub verdicts: VerdictCounts,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new<C: Serialize>(
        command: &'static str,
        config: &C,
        seed: u64,
        started: Instant,
        stream_ids: Vec<u64>,
        verdicts: VerdictCounts,
        outputs: Vec<String>,
    ) -> Result<Self, CliError> {
        let duration = started.elapsed();
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        Ok(Self {
            tool: "nohair",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?,
            seed,
            started_unix_seconds: now - duration.as_secs_f64(),
            duration_seconds: duration.as_secs_f64(),
            instances: stream_ids.len(),
            stream_ids,
            verdicts,
            outputs,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_json(&dir.join("manifest.json"), self)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitFile {
    pub family: String,
    pub dim: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
    pub points: Vec<ScalingPoint>,
}

impl From<&ScalingFit> for FitFile {
    fn from(fit: &ScalingFit) -> Self {
        Self {
            family: fit.family.name().to_string(),
            dim: fit.dim,
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            points_used: fit.points.iter().filter(|p| p.fitted).count(),
            points: fit.points.clone(),
        }
    }
}

pub fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e.into()))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::io(path, e.into()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `eps_upper dmax_lower`, one point per line.
pub fn frontier_dat(points: &[(f64, f64, Verdict)]) -> String {
    let mut s = String::new();
    for (e, d, _) in points {
        let _ = writeln!(s, "{e} {d}");
    }
    s
}

/// Scatter of `(ε, D_max)` with the `2√(2ε)` curve.
pub fn frontier_svg(points: &[(f64, f64, Verdict)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 30.0;
    const B: f64 = 55.0;
    let finite = |v: f64| if v.is_finite() { v } else { 0.0 };
    let emax = points.iter().map(|p| finite(p.0)).fold(0.0, f64::max);
    let xmax = if emax > 0.0 { emax * 1.05 } else { 1.0 };
    let dmax = points.iter().map(|p| finite(p.1)).fold(0.0, f64::max);
    let ymax = dmax.max(tradeoff_bound(xmax)).max(1e-12) * 1.05;
    let px = |x: f64| L + (W - L - R) * x / xmax;
    let py = |y: f64| H - B - (H - T - B) * y / ymax;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{L} {T} V{} H{}" fill="none" stroke="black"/>"#,
        H - B,
        W - R
    );
    for k in 0..=4 {
        let x = xmax * k as f64 / 4.0;
        let y = ymax * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(x),
            H - B + 18.0,
            tick(x)
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, L - 6.0, py(y) + 4.0, tick(y));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">epsilon (upper bound)</text>"#,
        (L + W - R) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">D_max (lower bound)</text>"#,
        (T + H - B) / 2.0,
        (T + H - B) / 2.0
    );
    let mut curve = String::new();
    for k in 0..=200 {
        let x = xmax * k as f64 / 200.0;
        let y = tradeoff_bound(x).min(ymax);
        let _ = write!(curve, "{}{:.2} {:.2}", if k == 0 { "M" } else { " L" }, px(x), py(y));
    }
    let _ = writeln!(s, r#"<path d="{curve}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" fill="steelblue">2√(2ε)</text>"#, L + 8.0, T + 12.0);
    for (e, d, v) in points {
        let colour = match v {
            Verdict::Pass => "black",
            Verdict::Fail => "crimson",
            Verdict::Indeterminate => "gray",
        };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{colour}"/>"#,
            px(finite(*e)),
            py(finite(*d))
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}
