//! File formats: dense matrices and edge lists, both line-oriented text
//! with `#` comment lines.
//!
//! Matrix files start with a `rows cols` header line followed by one row
//! per line, entries as decimal floats separated by single spaces.
//!
//! Edge-list files hold one `u<TAB>v<TAB>w` edge per line with 0-based
//! vertex ids and a positive decimal weight. The parser canonicalizes
//! u < v and rejects self-loops and duplicate pairs. An optional `# n=N`
//! comment pins the vertex count; otherwise it is inferred as max id + 1.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Result, UgaError};
use crate::graph::WeightedGraph;
use crate::linalg::Mat;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> UgaError {
    UgaError::Parse { path: path.display().to_string(), line, msg: msg.into() }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Mat> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut dims: Option<(usize, usize)> = None;
    let mut data: Vec<f64> = Vec::new();
    let mut rows_seen = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match dims {
            None => {
                let mut it = trimmed.split_whitespace();
                let rows = it
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| parse_err(path, idx + 1, "expected row count"))?;
                let cols = it
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| parse_err(path, idx + 1, "expected column count"))?;
                if it.next().is_some() {
                    return Err(parse_err(path, idx + 1, "header must be exactly `rows cols`"));
                }
                if rows == 0 || cols == 0 {
                    return Err(parse_err(path, idx + 1, "matrix must be nonempty"));
                }
                dims = Some((rows, cols));
                data.reserve(rows * cols);
            }
            Some((rows, cols)) => {
                if rows_seen == rows {
                    return Err(parse_err(path, idx + 1, "more rows than declared"));
                }
                let mut count = 0usize;
                for tok in trimmed.split_whitespace() {
                    let v: f64 = tok
                        .parse()
                        .map_err(|_| parse_err(path, idx + 1, format!("bad float `{tok}`")))?;
                    if !v.is_finite() {
                        return Err(parse_err(path, idx + 1, "non-finite entry"));
                    }
                    data.push(v);
                    count += 1;
                }
                if count != cols {
                    return Err(parse_err(
                        path,
                        idx + 1,
                        format!("expected {cols} entries, found {count}"),
                    ));
                }
                rows_seen += 1;
            }
        }
    }
    let (rows, cols) = dims.ok_or_else(|| parse_err(path, 0, "missing header"))?;
    if rows_seen != rows {
        return Err(parse_err(path, 0, format!("declared {rows} rows, found {rows_seen}")));
    }
    Mat::from_vec(rows, cols, data)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Mat, comments: &[String]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let mut first = true;
        let mut line = String::new();
        for &v in m.row(i) {
            if !first {
                line.push(' ');
            }
            line.push_str(&format!("{v}"));
            first = false;
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut declared_n: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            for tok in comment.split_whitespace() {
                if let Some(v) = tok.strip_prefix("n=") {
                    declared_n = v.parse::<usize>().ok();
                }
            }
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let u = it
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| parse_err(path, idx + 1, "expected vertex id"))?;
        let v = it
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| parse_err(path, idx + 1, "expected vertex id"))?;
        let w: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(path, idx + 1, "expected weight"))?;
        if it.next().is_some() {
            return Err(parse_err(path, idx + 1, "expected exactly `u v w`"));
        }
        if !w.is_finite() || w <= 0.0 {
            return Err(parse_err(path, idx + 1, format!("weight must be positive, got {w}")));
        }
        if u == v {
            return Err(parse_err(path, idx + 1, "self-loop rejected"));
        }
        edges.push((u, v, w));
    }
    let max_id = edges.iter().map(|e| e.0.max(e.1)).max();
    let n = match (declared_n, max_id) {
        (Some(n), Some(max)) => {
            if max >= n {
                return Err(parse_err(path, 0, format!("vertex id {max} exceeds n={n}")));
            }
            n
        }
        (Some(n), None) => n,
        (None, Some(max)) => max + 1,
        (None, None) => return Err(parse_err(path, 0, "empty edge list and no `# n=` header")),
    };
    WeightedGraph::new(n, edges)
}

pub fn write_edge_list(
    path: impl AsRef<Path>,
    g: &WeightedGraph,
    comments: &[String],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# n={}", g.n())?;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    for e in g.edges() {
        writeln!(w, "{}\t{}\t{}", e.u, e.v, e.w)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes raw weighted edges (used for sparsifier output, where weights may
/// be negative and therefore cannot round-trip through `WeightedGraph`).
pub fn write_raw_edges(
    path: impl AsRef<Path>,
    n: usize,
    edges: &[(usize, usize, f64)],
    comments: &[String],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# n={n}")?;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    for (u, v, weight) in edges {
        writeln!(w, "{u}\t{v}\t{weight}")?;
    }
    w.flush()?;
    Ok(())
}
