//! Minimal SVG plots of the CSV outputs.
//!
//! Every coordinate is printed with a fixed number of decimals and text is
//! placed by anchor only, so the same input always yields the same bytes
//! regardless of installed fonts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;

use crate::error::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// `J` against `α` from jcurve.csv.
    Jcurve,
    /// `σ` against `α` from reduced.csv.
    PhasePortrait,
    /// Mean trajectories in the plane, one curve per input.
    Overlay,
    /// Regime strip over `θ`, one row per value of `a`.
    PhaseDiagram,
}

/// A CSV read as text cells, checked for shape.
#[derive(Debug)]
struct Table {
    source: PathBuf,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let bad = |m: String| CliError::PlotInput(format!("{}: {m}", path.display()));
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(bad("empty file".into()));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        if rows.is_empty() {
            return Err(bad("no data rows".into()));
        }
        Ok(Self {
            source: path.to_path_buf(),
            header,
            rows,
        })
    }

    fn column_index(&self, names: &[&str]) -> Result<usize, CliError> {
        names
            .iter()
            .find_map(|n| self.header.iter().position(|h| h == n))
            .ok_or_else(|| {
                CliError::PlotInput(format!(
                    "{}: expected a column named {} (found {})",
                    self.source.display(),
                    names.join(" or "),
                    self.header.join(",")
                ))
            })
    }

    fn text(&self, names: &[&str]) -> Result<Vec<&str>, CliError> {
        let k = self.column_index(names)?;
        Ok(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    fn numbers(&self, names: &[&str]) -> Result<Vec<f64>, CliError> {
        let k = self.column_index(names)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r[k].parse::<f64>().map_err(|_| {
                    CliError::PlotInput(format!(
                        "{}: row {} column {}: `{}` is not a number",
                        self.source.display(),
                        i + 2,
                        self.header[k],
                        r[k]
                    ))
                })
            })
            .collect()
    }
}

/// Renders `inputs` as an SVG document.
pub fn render(kind: PlotKind, inputs: &[PathBuf], title: Option<&str>) -> Result<String, CliError> {
    if inputs.is_empty() {
        return Err(CliError::PlotInput("no input files".into()));
    }
    if kind != PlotKind::Overlay && inputs.len() > 1 {
        return Err(CliError::PlotInput(
            "only overlay accepts several inputs".into(),
        ));
    }
    let tables: Vec<Table> = inputs
        .iter()
        .map(|p| Table::read(p))
        .collect::<Result<_, _>>()?;
    match kind {
        PlotKind::Jcurve => {
            let t = &tables[0];
            let x = t.numbers(&["alpha"])?;
            let y = t.numbers(&["J"])?;
            let mut fig = Figure::new(title.unwrap_or("J(alpha)"), "alpha", "J", &[(&x, &y)], true);
            fig.curve(&x, &y, PALETTE[0]);
            Ok(fig.finish())
        }
        PlotKind::PhasePortrait => {
            let t = &tables[0];
            let x = t.numbers(&["alpha"])?;
            let y = t.numbers(&["sigma_unwrapped", "sigma"])?;
            let mut fig = Figure::new(
                title.unwrap_or("reduced flow"),
                "alpha",
                "sigma",
                &[(&x, &y)],
                false,
            );
            fig.curve(&x, &y, PALETTE[0]);
            fig.marker(x[0], y[0], PALETTE[1]);
            Ok(fig.finish())
        }
        PlotKind::Overlay => {
            let mut series = Vec::new();
            for t in &tables {
                series.push((
                    t.numbers(&["meanmu_1", "mean_x"])?,
                    t.numbers(&["meanmu_2", "mean_y"])?,
                ));
            }
            let refs: Vec<(&[f64], &[f64])> = series
                .iter()
                .map(|(x, y)| (x.as_slice(), y.as_slice()))
                .collect();
            let mut fig = Figure::new(
                title.unwrap_or("mean trajectories"),
                "m1",
                "m2",
                &refs,
                false,
            );
            for (k, (x, y)) in series.iter().enumerate() {
                fig.curve(x, y, PALETTE[k % PALETTE.len()]);
            }
            Ok(fig.finish())
        }
        PlotKind::PhaseDiagram => phase_strip(&tables[0], title),
    }
}

fn phase_strip(t: &Table, title: Option<&str>) -> Result<String, CliError> {
    let theta = t.numbers(&["theta"])?;
    let regime = t.text(&["regime"])?;
    let a: Vec<String> = match t.column_index(&["a"]) {
        Ok(k) => t.rows.iter().map(|r| r[k].clone()).collect(),
        Err(_) => vec![String::new(); theta.len()],
    };
    let mut rows: Vec<&str> = Vec::new();
    for v in &a {
        if !rows.contains(&v.as_str()) {
            rows.push(v);
        }
    }
    let xs = [0.0, std::f64::consts::TAU];
    let ys = [0.0, rows.len() as f64];
    let mut fig = Figure::new(
        title.unwrap_or("phase diagram"),
        "theta",
        "a",
        &[(&xs, &ys)],
        false,
    );
    fig.y_ticks = false;
    let cell = std::f64::consts::TAU / theta.len().max(1) as f64 * rows.len() as f64;
    for ((th, reg), av) in theta.iter().zip(&regime).zip(&a) {
        let row = rows.iter().position(|r| r == av).expect("collected above") as f64;
        let colour = match *reg {
            "converge_to_gamma" => PALETTE[0],
            "converge_to_random_fixed" => PALETTE[2],
            "circling" => PALETTE[1],
            other => {
                return Err(CliError::PlotInput(format!(
                    "{}: unknown regime `{other}`",
                    t.source.display()
                )))
            }
        };
        fig.rect(th - 0.5 * cell, row, th + 0.5 * cell, row + 1.0, colour);
    }
    for (k, text) in rows.iter().enumerate() {
        let shown = text
            .parse::<f64>()
            .map_or_else(|_| text.to_string(), |v| format!("{v}"));
        fig.y_label(k as f64 + 0.5, &shown);
    }
    Ok(fig.finish())
}

/// Nice tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

struct Figure {
    body: String,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    y_ticks: bool,
    header: String,
}

impl Figure {
    fn new(
        title: &str,
        xlabel: &str,
        ylabel: &str,
        series: &[(&[f64], &[f64])],
        zero_line: bool,
    ) -> Self {
        let (x0, x1) = padded_range(series.iter().flat_map(|s| s.0.iter()));
        let (y0, y1) = padded_range(series.iter().flat_map(|s| s.1.iter()));
        let mut header = String::new();
        writeln!(
            header,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(
            header,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        )
        .unwrap();
        writeln!(
            header,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        )
        .unwrap();
        writeln!(
            header,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
            HEIGHT - 12.0,
            escape(xlabel)
        )
        .unwrap();
        writeln!(
            header,
            r#"<text x="16" y="{0:.2}" text-anchor="middle" transform="rotate(-90 16 {0:.2})">{1}</text>"#,
            TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
            escape(ylabel)
        )
        .unwrap();
        let mut fig = Self {
            body: String::new(),
            x0,
            x1,
            y0,
            y1,
            y_ticks: true,
            header,
        };
        if zero_line && y0 < 0.0 && y1 > 0.0 {
            let (a, y) = fig.to_px(x0, 0.0);
            let (b, _) = fig.to_px(x1, 0.0);
            writeln!(fig.body, r##"<line x1="{a:.2}" y1="{y:.2}" x2="{b:.2}" y2="{y:.2}" stroke="#999" stroke-dasharray="4 3"/>"##).unwrap();
        }
        fig
    }

    fn to_px(&self, x: f64, y: f64) -> (f64, f64) {
        let px = LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT);
        let py = HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM);
        (px, py)
    }

    fn curve(&mut self, x: &[f64], y: &[f64], colour: &str) {
        let mut pts = String::new();
        for (a, b) in x
            .iter()
            .zip(y)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
        {
            let (px, py) = self.to_px(*a, *b);
            if !pts.is_empty() {
                pts.push(' ');
            }
            write!(pts, "{px:.2},{py:.2}").unwrap();
        }
        writeln!(
            self.body,
            r#"<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#
        )
        .unwrap();
    }

    fn marker(&mut self, x: f64, y: f64, colour: &str) {
        let (px, py) = self.to_px(x, y);
        writeln!(
            self.body,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="3.5" fill="{colour}"/>"#
        )
        .unwrap();
    }

    fn rect(&mut self, xa: f64, ya: f64, xb: f64, yb: f64, colour: &str) {
        let (pa, qa) = self.to_px(xa.max(self.x0), yb);
        let (pb, qb) = self.to_px(xb.min(self.x1), ya);
        writeln!(
            self.body,
            r#"<rect x="{pa:.2}" y="{qa:.2}" width="{:.2}" height="{:.2}" fill="{colour}"/>"#,
            pb - pa,
            qb - qa
        )
        .unwrap();
    }

    fn y_label(&mut self, y: f64, text: &str) {
        let (_, py) = self.to_px(self.x0, y);
        writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py + 4.0,
            escape(text)
        )
        .unwrap();
    }

    fn finish(self) -> String {
        let mut axes = String::new();
        let (l, b) = self.to_px(self.x0, self.y0);
        let (r, t) = self.to_px(self.x1, self.y1);
        writeln!(
            axes,
            r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        )
        .unwrap();
        for v in ticks(self.x0, self.x1) {
            let (px, _) = self.to_px(v, self.y0);
            writeln!(
                axes,
                r#"<line x1="{px:.2}" y1="{b:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
                b + 5.0
            )
            .unwrap();
            writeln!(
                axes,
                r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                b + 18.0,
                label(v)
            )
            .unwrap();
        }
        if self.y_ticks {
            for v in ticks(self.y0, self.y1) {
                let (_, py) = self.to_px(self.x0, v);
                writeln!(
                    axes,
                    r#"<line x1="{:.2}" y1="{py:.2}" x2="{l:.2}" y2="{py:.2}" stroke="black"/>"#,
                    l - 5.0
                )
                .unwrap();
                writeln!(
                    axes,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                    l - 8.0,
                    py + 4.0,
                    label(v)
                )
                .unwrap();
            }
        }
        format!("{}{}{axes}</svg>\n", self.header, self.body)
    }
}

/// Finite data range widened by 4% on each side.
fn padded_range<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 * lo.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.04 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
