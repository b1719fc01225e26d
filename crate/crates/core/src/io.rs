//! Text formats: Matrix Market (coordinate or array, real/integer/pattern,
//! general/symmetric/skew-symmetric), whitespace-separated dense matrices,
//! vectors with one value per line, and edge lists.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::distributed::Graph;
use crate::error::{Error, Result};
use crate::operators::{Csr, LinearMap};

fn numbered(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%') && !l.starts_with('#'))
}

fn num<T: std::str::FromStr>(tok: Option<&str>, origin: &str, line: usize, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let tok = tok.ok_or_else(|| Error::parse(format!("{origin}:{line}"), format!("missing {what}")))?;
    tok.parse::<T>()
        .map_err(|e| Error::parse(format!("{origin}:{line}"), format!("bad {what} '{tok}': {e}")))
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

pub fn parse_matrix_market(text: &str, origin: &str) -> Result<LinearMap> {
    let header = text.lines().next().unwrap_or("");
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::parse(format!("{origin}:1"), "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let pattern = match fields[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        other => return Err(Error::parse(format!("{origin}:1"), format!("unsupported field '{other}'"))),
    };
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(Error::parse(format!("{origin}:1"), format!("unsupported symmetry '{other}'"))),
    };
    let mut lines = numbered(text);
    let (ln, size) = lines
        .next()
        .ok_or_else(|| Error::parse(origin.to_string(), "missing size line"))?;
    let mut it = size.split_whitespace();
    let rows: usize = num(it.next(), origin, ln, "row count")?;
    let cols: usize = num(it.next(), origin, ln, "column count")?;
    match fields[2].as_str() {
        "coordinate" => {
            let nnz: usize = num(it.next(), origin, ln, "entry count")?;
            let mut trip = Vec::with_capacity(nnz);
            for (ln, line) in lines.by_ref().take(nnz) {
                let mut it = line.split_whitespace();
                let i: usize = num(it.next(), origin, ln, "row index")?;
                let j: usize = num(it.next(), origin, ln, "column index")?;
                let v: f64 = if pattern { 1.0 } else { num(it.next(), origin, ln, "value")? };
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::parse(format!("{origin}:{ln}"), format!("index ({i}, {j}) out of range")));
                }
                trip.push((i - 1, j - 1, v));
                if i != j {
                    match symmetry {
                        Symmetry::Symmetric => trip.push((j - 1, i - 1, v)),
                        Symmetry::Skew => trip.push((j - 1, i - 1, -v)),
                        Symmetry::General => {}
                    }
                }
            }
            if trip.len() < nnz {
                return Err(Error::parse(origin.to_string(), format!("expected {nnz} entries")));
            }
            LinearMap::sparse(Csr::from_triplets(rows, cols, &trip)?)
        }
        "array" => {
            if pattern {
                return Err(Error::parse(format!("{origin}:1"), "pattern is invalid for array format"));
            }
            let values: Vec<f64> = lines
                .map(|(ln, l)| num(Some(l), origin, ln, "value"))
                .collect::<Result<_>>()?;
            let expected = rows * cols;
            if symmetry != Symmetry::General || values.len() != expected {
                return Err(Error::parse(origin.to_string(), format!("expected {expected} general array entries")));
            }
            // column-major on disk
            let mut data = vec![0.0; expected];
            for (idx, v) in values.into_iter().enumerate() {
                data[(idx % rows) * cols + idx / rows] = v;
            }
            LinearMap::dense(rows, cols, data)
        }
        other => Err(Error::parse(format!("{origin}:1"), format!("unsupported format '{other}'"))),
    }
}

/// Rows of whitespace-separated numbers; all rows must have equal length.
pub fn parse_dense_matrix(text: &str, origin: &str) -> Result<LinearMap> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in numbered(text) {
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| num(Some(t), origin, ln, "value"))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    format!("{origin}:{ln}"),
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(origin.to_string(), "empty matrix"));
    }
    LinearMap::from_rows(&rows)
}

/// Matrix Market if the text starts with the banner, dense text otherwise.
pub fn parse_matrix(text: &str, origin: &str) -> Result<LinearMap> {
    if text.trim_start().to_ascii_lowercase().starts_with("%%matrixmarket") {
        parse_matrix_market(text.trim_start(), origin)
    } else {
        parse_dense_matrix(text, origin)
    }
}

pub fn parse_vector(text: &str, origin: &str) -> Result<Vec<f64>> {
    numbered(text)
        .flat_map(|(ln, l)| l.split_whitespace().map(move |t| (ln, t)))
        .map(|(ln, t)| num(Some(t), origin, ln, "value"))
        .collect()
}

/// First line "n d", then one "i j [w]" line per edge, 0-indexed.
pub fn parse_edge_list(text: &str, origin: &str) -> Result<Graph> {
    let mut lines = numbered(text);
    let (ln, head) = lines
        .next()
        .ok_or_else(|| Error::parse(origin.to_string(), "missing 'n d' header"))?;
    let mut it = head.split_whitespace();
    let n: usize = num(it.next(), origin, ln, "node count")?;
    let d: usize = num(it.next(), origin, ln, "block dimension")?;
    let mut edges = Vec::new();
    for (ln, line) in lines {
        let mut it = line.split_whitespace();
        let i: usize = num(it.next(), origin, ln, "endpoint")?;
        let j: usize = num(it.next(), origin, ln, "endpoint")?;
        let w: f64 = match it.next() {
            Some(t) => num(Some(t), origin, ln, "weight")?,
            None => 1.0,
        };
        edges.push((i, j, w));
    }
    Graph::new(n, d, edges).map_err(|e| Error::parse(origin.to_string(), e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

pub fn read_matrix(path: &Path) -> Result<LinearMap> {
    parse_matrix(&read(path)?, &path.display().to_string())
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector(&read(path)?, &path.display().to_string())
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    parse_edge_list(&read(path)?, &path.display().to_string())
}

pub fn write_vector<W: Write>(v: &[f64], mut w: W) -> Result<()> {
    for x in v {
        writeln!(w, "{x:.16e}")?;
    }
    Ok(())
}

/// Writes a map in Matrix Market coordinate format (general, real).
pub fn write_matrix_market<W: Write>(a: &LinearMap, mut w: W) -> Result<()> {
    let (m, n) = (a.rows(), a.cols());
    let dense = a.to_dense();
    let entries: Vec<(usize, usize, f64)> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, dense[i * n + j]))
        .filter(|e| e.2 != 0.0)
        .collect();
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{m} {n} {}", entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {v:.16e}", i + 1, j + 1)?;
    }
    Ok(())
}
