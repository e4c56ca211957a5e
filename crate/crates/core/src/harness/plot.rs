use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::consistency::{least_squares, median};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// Median `abs_error` per `n` from a run summary.
    RateLoglog,
    /// Median `l1_cut_error` per `n` from a run summary.
    CutError,
    /// Mean and standard deviation per `n` from a concentration report.
    Concentration,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::RateLoglog => "rate_loglog",
            PlotKind::CutError => "cut_error",
            PlotKind::Concentration => "concentration",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            PlotKind::RateLoglog => &["n", "abs_error"],
            PlotKind::CutError => &["n", "l1_cut_error"],
            PlotKind::Concentration => &["n", "mean", "std"],
        }
    }
}

impl FromStr for PlotKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rate_loglog" => Ok(PlotKind::RateLoglog),
            "cut_error" => Ok(PlotKind::CutError),
            "concentration" => Ok(PlotKind::Concentration),
            other => Err(format!("unknown plot kind `{other}` (expected rate_loglog, cut_error or concentration)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotRow {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotData {
    pub kind: PlotKind,
    pub rows: Vec<PlotRow>,
    /// Log-log least-squares fit over rows with positive `y`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// `y` non-increasing in `x`.
    pub monotone_nonincreasing: bool,
    pub tsv: PathBuf,
    pub svg: PathBuf,
}

/// Column-oriented view of a CSV summary or of the `rows` of a JSON report.
struct Table {
    columns: Vec<String>,
    rows: Vec<BTreeMap<String, f64>>,
}

fn read_table(path: &Path) -> Result<Table, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
        let rows = v.get("rows").and_then(|r| r.as_array()).cloned().unwrap_or_default();
        let columns = rows
            .first()
            .and_then(|r| r.as_object())
            .map(|o| o.keys().cloned().collect())
            .unwrap_or_default();
        let rows = rows
            .iter()
            .filter_map(|r| r.as_object())
            .map(|o| o.iter().filter_map(|(k, v)| v.as_f64().map(|x| (k.clone(), x))).collect())
            .collect();
        return Ok(Table { columns, rows });
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| HarnessError::Runtime(e.to_string()))?.clone();
    let columns: Vec<String> = headers.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| HarnessError::Runtime(e.to_string()))?;
        rows.push(
            columns
                .iter()
                .zip(rec.iter())
                .filter_map(|(k, v)| v.parse::<f64>().ok().map(|x| (k.clone(), x)))
                .collect(),
        );
    }
    Ok(Table { columns, rows })
}

fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Aggregate `input` for `kind` and write `<kind>.tsv` and `<kind>.svg` into `out_dir`.
pub fn emit_plot_data(input: &Path, kind: PlotKind, out_dir: &Path) -> Result<PlotData, HarnessError> {
    let table = read_table(input)?;
    let missing: Vec<String> =
        kind.required().iter().filter(|c| !table.columns.iter().any(|h| h == *c)).map(|c| c.to_string()).collect();
    if !missing.is_empty() {
        return Err(HarnessError::MissingColumns { missing });
    }

    let rows: Vec<PlotRow> = match kind {
        PlotKind::RateLoglog | PlotKind::CutError => {
            let col = kind.required()[1];
            let mut by_n: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
            for r in &table.rows {
                if let (Some(&n), Some(&y)) = (r.get("n"), r.get(col)) {
                    by_n.entry(n as u64).or_default().push(y);
                }
            }
            by_n.into_iter()
                .map(|(n, ys)| PlotRow { x: n as f64, y: median(&ys), sigma: std_dev(&ys), count: ys.len() })
                .collect()
        }
        PlotKind::Concentration => table
            .rows
            .iter()
            .filter_map(|r| {
                Some(PlotRow {
                    x: *r.get("n")?,
                    y: *r.get("mean")?,
                    sigma: *r.get("std")?,
                    count: r.get("trials").map_or(1, |&t| t as usize),
                })
            })
            .collect(),
    };
    if rows.is_empty() {
        return Err(HarnessError::Runtime(format!("{} has no data rows", input.display())));
    }

    let positive: Vec<&PlotRow> = rows.iter().filter(|r| r.x > 0.0 && r.y > 0.0).collect();
    let (slope, intercept) = if positive.len() >= 2 {
        let x: Vec<f64> = positive.iter().map(|r| r.x.ln()).collect();
        let y: Vec<f64> = positive.iter().map(|r| r.y.ln()).collect();
        let (s, i) = least_squares(&x, &y);
        (Some(s), Some(i))
    } else {
        (None, None)
    };
    let monotone_nonincreasing = rows.windows(2).all(|w| w[1].y <= w[0].y);

    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let tsv = out_dir.join(format!("{}.tsv", kind.name()));
    let svg = out_dir.join(format!("{}.svg", kind.name()));
    let mut text = String::new();
    writeln!(text, "# kind\t{}", kind.name()).unwrap();
    writeln!(text, "# source\t{}", input.display()).unwrap();
    if let Some(s) = slope {
        writeln!(text, "# slope\t{s}").unwrap();
    }
    writeln!(text, "# monotone_nonincreasing\t{monotone_nonincreasing}").unwrap();
    writeln!(text, "x\ty\tsigma\tcount").unwrap();
    for r in &rows {
        writeln!(text, "{}\t{}\t{}\t{}", r.x, r.y, r.sigma, r.count).unwrap();
    }
    fs::write(&tsv, text).map_err(|e| HarnessError::io(&tsv, e))?;
    fs::write(&svg, render_svg(kind, &rows, slope.zip(intercept))).map_err(|e| HarnessError::io(&svg, e))?;

    Ok(PlotData { kind, rows, slope, intercept, monotone_nonincreasing, tsv, svg })
}

fn render_svg(kind: PlotKind, rows: &[PlotRow], fit: Option<(f64, f64)>) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 60.0;
    let floor = |v: f64| v.max(f64::MIN_POSITIVE);
    let xs: Vec<f64> = rows.iter().map(|r| floor(r.x).log10()).collect();
    let lows: Vec<f64> = rows.iter().map(|r| floor(r.y - r.sigma).max(r.y * 1e-3).log10()).collect();
    let highs: Vec<f64> = rows.iter().map(|r| floor(r.y + r.sigma).log10()).collect();
    let span = |lo: f64, hi: f64| if hi - lo < 1e-9 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
    let (x0, x1) = span(xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) =
        span(lows.iter().copied().fold(f64::INFINITY, f64::min), highs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    )
    .unwrap();
    writeln!(s, r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">log10 n</text>"#, W / 2.0, H - 15.0).unwrap();
    writeln!(
        s,
        r#"<text x="15" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 15 {})">log10 {}</text>"#,
        H / 2.0,
        H / 2.0,
        kind.name()
    )
    .unwrap();
    for (label, v, horizontal) in [(x0, x0, true), (x1, x1, true), (y0, y0, false), (y1, y1, false)] {
        let (x, y) = if horizontal { (px(v), H - PAD + 18.0) } else { (PAD - 6.0, py(v) + 4.0) };
        let anchor = if horizontal { "middle" } else { "end" };
        writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" font-size="11" text-anchor="{anchor}">{label:.2}</text>"#).unwrap();
    }
    for (i, r) in rows.iter().enumerate() {
        let x = px(xs[i]);
        writeln!(s, r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="gray"/>"#, py(lows[i]), py(highs[i]))
            .unwrap();
        writeln!(s, r#"<circle cx="{x:.1}" cy="{:.1}" r="4" fill="steelblue"/>"#, py(floor(r.y).log10())).unwrap();
    }
    if let Some((slope, intercept)) = fit {
        // natural-log fit drawn in base-10 axes
        let line = |x: f64| (intercept + slope * x * std::f64::consts::LN_10) / std::f64::consts::LN_10;
        writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
            px(x0),
            py(line(x0)),
            px(x1),
            py(line(x1))
        )
        .unwrap();
        writeln!(s, r#"<text x="{}" y="{}" font-size="14" text-anchor="end">slope = {slope:.4}</text>"#, W - PAD - 8.0, PAD + 20.0)
            .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
