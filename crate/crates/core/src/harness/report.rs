//! Experiment reports: CSV tables (the source of truth), verdict rows, and
//! optional SVG figures derived from the tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use super::config::ConfigEntry;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[j].as_f64()).collect()
    }
}

/// One checked claim, the inequality it instantiates and the measured numbers.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub name: String,
    pub claim: String,
    pub reference: String,
    pub measured: Vec<(String, f64)>,
    pub pass: bool,
}

impl Verdict {
    pub fn new(name: &str, claim: &str, reference: &str, pass: bool) -> Self {
        Verdict {
            name: name.to_string(),
            claim: claim.to_string(),
            reference: reference.to_string(),
            measured: Vec::new(),
            pass,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.measured.push((key.to_string(), value));
        self
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: Vec<ConfigEntry>,
    pub metadata: Vec<(String, String)>,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub figures: Vec<(String, String)>,
    /// Kept out of the CSV files so reruns are byte-identical.
    pub wall_clock: Duration,
}

impl ExperimentReport {
    pub fn new(experiment: &str) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            config: Vec::new(),
            metadata: Vec::new(),
            tables: Vec::new(),
            verdicts: Vec::new(),
            figures: Vec::new(),
            wall_clock: Duration::ZERO,
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn header(&self) -> String {
        let mut h = format!("# experiment = {}\n", self.experiment);
        for e in &self.config {
            let _ = writeln!(h, "# {} = {} ({})", e.key, e.value, e.source.label());
        }
        for (k, v) in &self.metadata {
            let _ = writeln!(h, "# {k} = {v}");
        }
        h
    }

    /// Writes `<dir>/<experiment>/…` and returns the files written.
    pub fn write(&self, dir: &Path, svg: bool) -> Result<Vec<PathBuf>, HarnessError> {
        let root = dir.join(&self.experiment);
        fs::create_dir_all(&root).map_err(|e| io_err(&root, e))?;
        let mut files = Vec::new();
        let header = self.header();

        let mut cfg = csv::Writer::from_writer(Vec::new());
        cfg.write_record(["key", "value", "source"]).map_err(csv_err)?;
        for e in &self.config {
            cfg.write_record([e.key.as_str(), e.value.as_str(), e.source.label()]).map_err(csv_err)?;
        }
        for (k, v) in &self.metadata {
            cfg.write_record([k.as_str(), v.as_str(), "metadata"]).map_err(csv_err)?;
        }
        files.push(write_file(&root.join("config.csv"), &finish(cfg)?)?);

        for t in &self.tables {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&t.columns).map_err(csv_err)?;
            for r in &t.rows {
                w.write_record(r.iter().map(Cell::render)).map_err(csv_err)?;
            }
            let body = format!("{header}{}", finish(w)?);
            files.push(write_file(&root.join(format!("{}.csv", t.name)), &body)?);
        }

        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["verdict", "pass", "claim", "reference", "measured"]).map_err(csv_err)?;
        for v in &self.verdicts {
            let measured = v
                .measured
                .iter()
                .map(|(k, x)| format!("{k}={x:e}"))
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                v.name.as_str(),
                if v.pass { "pass" } else { "fail" },
                v.claim.as_str(),
                v.reference.as_str(),
                measured.as_str(),
            ])
            .map_err(csv_err)?;
        }
        files.push(write_file(&root.join("verdicts.csv"), &format!("{header}{}", finish(w)?))?);

        if svg {
            for (name, body) in &self.figures {
                files.push(write_file(&root.join(format!("{name}.svg")), body)?);
            }
        }
        files.push(write_file(
            &root.join("timing.txt"),
            &format!("wall_clock_seconds = {:.3}\n", self.wall_clock.as_secs_f64()),
        )?);
        Ok(files)
    }

    /// One line per verdict for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for v in &self.verdicts {
            let _ = writeln!(
                s,
                "[{}] {} {}: {}",
                if v.pass { "PASS" } else { "FAIL" },
                self.experiment,
                v.name,
                v.claim
            );
        }
        s
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, HarnessError> {
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
}

fn write_file(path: &Path, body: &str) -> Result<PathBuf, HarnessError> {
    fs::write(path, body).map_err(|e| io_err(path, e))?;
    Ok(path.to_path_buf())
}

fn io_err(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Io(e.to_string())
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn svg_open(title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, esc(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(ylabel)
    );
    s
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(vals: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in vals {
            let v = if log { v.log10() } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Axis {
            lo: lo - pad,
            hi: hi + pad,
            log,
        }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn label(&self, u: f64) -> String {
        let v = self.lo + u * (self.hi - self.lo);
        if self.log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3}")
        }
    }
}

/// Line plot of `(x, y)` series; axes optionally logarithmic.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(&str, Vec<(f64, f64)>)], logx: bool, logy: bool) -> String {
    let mut s = svg_open(title, xlabel, ylabel);
    let xa = Axis::fit(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)), logx);
    let ya = Axis::fit(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)), logy);
    let px = |x: f64| MARGIN + xa.unit(x) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - ya.unit(y) * (H - 2.0 * MARGIN);
    frame(&mut s, &xa, &ya);
    let colors = ["#1f4e9c", "#c0392b", "#27804a", "#8e44ad"];
    for (i, (name, pts)) in series.iter().enumerate() {
        let c = colors[i % colors.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|(x, y)| (!logx || *x > 0.0) && (!logy || *y > 0.0))
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for p in &path {
            let (x, y) = p.split_once(',').unwrap();
            let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{c}"/>"#);
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{c}">{}</text>"#,
            W - MARGIN - 150.0,
            MARGIN + 16.0 * (i as f64 + 1.0),
            esc(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn frame(s: &mut String, xa: &Axis, ya: &Axis) {
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for i in 0..=4 {
        let u = i as f64 / 4.0;
        let x = MARGIN + u * (W - 2.0 * MARGIN);
        let y = H - MARGIN - u * (H - 2.0 * MARGIN);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#, H - MARGIN + 16.0, xa.label(u));
        let _ = writeln!(s, r#"<text x="{}" y="{y:.1}" text-anchor="end">{}</text>"#, MARGIN - 4.0, ya.label(u));
    }
}

/// Cell map on a regular `(x, y)` grid: each cell gets the color of its class.
pub fn cell_map(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    cells: &[(f64, f64, usize)],
    palette: &[(&str, &str)],
    curves: &[(&str, Vec<(f64, f64)>)],
) -> String {
    let mut s = svg_open(title, xlabel, ylabel);
    let xs: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let ys: Vec<f64> = cells.iter().map(|c| c.1).collect();
    let step = |v: &[f64]| {
        let mut u = v.to_vec();
        u.sort_by(|a, b| a.total_cmp(b));
        u.dedup();
        u.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min).min(1.0)
    };
    let (dx, dy) = (step(&xs), step(&ys));
    let xa = Axis::fit(xs.iter().cloned().chain([xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + dx]), false);
    let ya = Axis::fit(ys.iter().cloned().chain([ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + dy]), false);
    let px = |x: f64| MARGIN + xa.unit(x) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - ya.unit(y) * (H - 2.0 * MARGIN);
    for &(x, y, class) in cells {
        let (x0, x1) = (px(x - 0.5 * dx), px(x + 0.5 * dx));
        let (y0, y1) = (py(y + 0.5 * dy), py(y - 0.5 * dy));
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            (x1 - x0).max(0.5),
            (y1 - y0).max(0.5),
            palette[class.min(palette.len() - 1)].1
        );
    }
    frame(&mut s, &xa, &ya);
    for (name, pts) in curves {
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="black" stroke-dasharray="4 3" points="{}"><title>{}</title></polyline>"#,
            path.join(" "),
            esc(name)
        );
    }
    for (i, (name, color)) in palette.iter().enumerate() {
        let y = MARGIN + 8.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}" stroke="black"/>"#, W - MARGIN - 140.0, y - 9.0);
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, W - MARGIN - 124.0, esc(name));
    }
    s.push_str("</svg>\n");
    s
}
