//! CSV serialization. Floats are written with 17 significant digits, which
//! round-trips every `f64` bit-exactly.

use std::io::{BufRead, BufReader, Read, Write};
use std::sync::Arc;

use super::{GridMeasure2D, ParticleMeasure, PolarGrid};
use crate::error::{Error, Result};

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a header row and numeric rows.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Parse(format!(
                "row has {} values for {} columns",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric table; returns the header and rows. Lines starting with
/// `#` are skipped.
pub fn read_table<R: Read>(input: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn write_particles<W: Write>(out: W, mu: &ParticleMeasure) -> Result<()> {
    let d = mu.points_flat().len() / mu.len();
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.push("weight".into());
    let hdr: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = mu
        .atoms()
        .map(|(x, w)| {
            let mut r = x.to_vec();
            r.push(w);
            r
        })
        .collect();
    write_table(out, &hdr, &rows)
}

pub fn read_particles<R: Read>(input: R) -> Result<ParticleMeasure> {
    let (header, rows) = read_table(input)?;
    if header.len() < 2 || header.last().map(String::as_str) != Some("weight") {
        return Err(Error::Parse(format!("particle header {header:?}")));
    }
    let d = header.len() - 1;
    let mut points = Vec::with_capacity(rows.len() * d);
    let mut weights = Vec::with_capacity(rows.len());
    for row in rows {
        points.extend_from_slice(&row[..d]);
        weights.push(row[d]);
    }
    ParticleMeasure::new(d, points, weights)
}

pub const GRID_HEADER: [&str; 4] = ["rho", "angle", "density", "quad_weight"];

/// Grid measure as `(rho, angle, density, quad_weight)` rows, preceded by a
/// `# z_value=<z>` line when a partition constant is attached.
pub fn write_grid<W: Write>(mut out: W, mu: &GridMeasure2D, z_value: Option<f64>) -> Result<()> {
    if let Some(z) = z_value {
        writeln!(out, "# z_value={}", fmt_f64(z))?;
    }
    let g = mu.grid();
    let na = g.n_angle();
    let rows: Vec<Vec<f64>> = (0..g.len())
        .map(|k| {
            vec![
                g.rho_nodes()[k / na],
                g.angle_nodes()[k % na],
                mu.density()[k],
                g.quad_weights()[k],
            ]
        })
        .collect();
    write_table(out, &GRID_HEADER, &rows)
}

/// Inverse of [`write_grid`].
pub fn read_grid<R: Read>(input: R) -> Result<(GridMeasure2D, Option<f64>)> {
    let mut reader = BufReader::new(input);
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut z_value = None;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# z_value=") {
            z_value = Some(
                rest.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("z_value: {e}")))?,
            );
        }
    }
    let (header, rows) = read_table(text.as_bytes())?;
    if header != GRID_HEADER {
        return Err(Error::Parse(format!("grid header {header:?}")));
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty grid file".into()));
    }
    let mut rho_nodes: Vec<f64> = Vec::new();
    let mut angle_nodes: Vec<f64> = Vec::new();
    for row in &rows {
        if rho_nodes.last() != Some(&row[0]) {
            rho_nodes.push(row[0]);
        }
        if rho_nodes.len() == 1 {
            angle_nodes.push(row[1]);
        }
    }
    let density: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let quad: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    let grid: Arc<PolarGrid> = PolarGrid::from_parts(rho_nodes, angle_nodes, quad)?;
    Ok((GridMeasure2D::new(grid, density)?, z_value))
}

/// First line of a text stream, for quick header sniffing.
pub fn first_line<R: Read>(input: R) -> Result<String> {
    let mut s = String::new();
    BufReader::new(input).read_line(&mut s)?;
    Ok(s.trim_end().to_string())
}
