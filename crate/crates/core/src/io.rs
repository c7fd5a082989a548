//! File formats: whitespace edge lists, feature CSVs, binary PPM/PGM
//! images, and plain-text label files.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{FeatureSet, Graph};
use crate::scalar::Scalar;

fn format_err(path: &Path, msg: impl ToString) -> Error {
    Error::FileFormat {
        path: path.display().to_string(),
        msg: msg.to_string(),
    }
}

/// Parse an edge-list file: one `i j w` triple per line (0-based ids,
/// whitespace separated), `#` comment lines ignored, optional `n=<count>`
/// header. Without a header the node count is the largest id plus one.
pub fn parse_edge_list<T: Scalar>(text: &str, path: &Path) -> Result<(Vec<(usize, usize, T)>, usize)> {
    let mut edges = Vec::new();
    let mut n: Option<usize> = None;
    let mut max_id = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("n=") {
            n = Some(rest.trim().parse().map_err(|e| {
                format_err(path, format!("line {}: bad header: {e}", lineno + 1))
            })?);
            continue;
        }
        let mut it = line.split_whitespace();
        let (i, j, w) = (it.next(), it.next(), it.next());
        let (i, j, w) = match (i, j, w) {
            (Some(i), Some(j), Some(w)) => (i, j, w),
            _ => {
                return Err(format_err(
                    path,
                    format!("line {}: expected 'i j w'", lineno + 1),
                ))
            }
        };
        let i: usize = i
            .parse()
            .map_err(|e| format_err(path, format!("line {}: {e}", lineno + 1)))?;
        let j: usize = j
            .parse()
            .map_err(|e| format_err(path, format!("line {}: {e}", lineno + 1)))?;
        let w: f64 = w
            .parse()
            .map_err(|e| format_err(path, format!("line {}: {e}", lineno + 1)))?;
        max_id = max_id.max(i).max(j);
        edges.push((i, j, T::real(w)));
    }
    if edges.is_empty() {
        return Err(format_err(path, "no edges"));
    }
    Ok((edges, n.unwrap_or(max_id + 1)))
}

pub fn load_edge_list<T: Scalar>(path: impl AsRef<Path>) -> Result<Graph<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let (edges, n) = parse_edge_list(&text, path)?;
    Graph::from_edge_list(&edges, n)
}

/// Write a graph as an edge list: header line, then each undirected edge
/// once with `i <= j`.
pub fn write_edge_list<T: Scalar>(path: impl AsRef<Path>, g: &Graph<T>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("n={}\n", g.n()));
    for i in 0..g.n() {
        let (cols, vals) = g.weights().row(i);
        for (&j, &w) in cols.iter().zip(vals) {
            if i <= j {
                out.push_str(&format!("{i} {j} {}\n", w.as_f64()));
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Labels: one 0-based class id per node line.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        labels.push(line.parse().map_err(|e| {
            format_err(path, format!("line {}: {e}", lineno + 1))
        })?);
    }
    if labels.is_empty() {
        return Err(format_err(path, "no labels"));
    }
    Ok(labels)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for &l in labels {
        out.push_str(&format!("{l}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Feature CSV: one row per node, `d` numeric columns.
pub fn load_features_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<FeatureSet<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut points = Vec::new();
    let mut d: Option<usize> = None;
    let mut n = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format_err(path, format!("line {}: {e}", lineno + 1)))?;
        match d {
            None => d = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(format_err(
                    path,
                    format!("line {}: expected {d} columns, found {}", lineno + 1, row.len()),
                ))
            }
            _ => {}
        }
        points.extend(row.into_iter().map(T::real));
        n += 1;
    }
    let d = d.ok_or_else(|| format_err(path, "no rows"))?;
    FeatureSet::new(n, d, points)
}

/// 8-bit RGB image (binary PPM, magic `P6`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PpmImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples.
    pub data: Vec<u8>,
}

/// 8-bit gray / label image (binary PGM, magic `P5`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl PgmImage {
    /// Label-map convention: 255 marks an unlabeled pixel.
    pub const UNLABELED: u8 = 255;
}

/// Read header tokens (magic, width, height, maxval), skipping whitespace
/// and `#` comments; returns the offset of the first payload byte.
fn parse_netpbm_header<'a>(
    bytes: &'a [u8],
    path: &Path,
) -> Result<(&'a str, usize, usize, usize, usize)> {
    let mut pos = 0usize;
    let mut tokens: Vec<String> = Vec::new();
    while tokens.len() < 4 {
        if pos >= bytes.len() {
            return Err(format_err(path, "truncated header"));
        }
        let b = bytes[pos];
        if b == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else if b.is_ascii_whitespace() {
            pos += 1;
        } else {
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            tokens.push(
                std::str::from_utf8(&bytes[start..pos])
                    .map_err(|_| format_err(path, "non-ascii header"))?
                    .to_string(),
            );
        }
    }
    // exactly one whitespace byte separates the header from the payload
    if pos >= bytes.len() {
        return Err(format_err(path, "missing payload"));
    }
    pos += 1;
    let magic = tokens[0].clone();
    let width: usize = tokens[1]
        .parse()
        .map_err(|e| format_err(path, format!("bad width: {e}")))?;
    let height: usize = tokens[2]
        .parse()
        .map_err(|e| format_err(path, format!("bad height: {e}")))?;
    let maxval: usize = tokens[3]
        .parse()
        .map_err(|e| format_err(path, format!("bad maxval: {e}")))?;
    let magic_static: &str = match magic.as_str() {
        "P6" => "P6",
        "P5" => "P5",
        other => return Err(format_err(path, format!("unsupported magic '{other}'"))),
    };
    Ok((magic_static, width, height, maxval, pos))
}

pub fn read_ppm(path: impl AsRef<Path>) -> Result<PpmImage> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let (magic, width, height, maxval, offset) = parse_netpbm_header(&bytes, path)?;
    if magic != "P6" {
        return Err(format_err(path, format!("expected P6, found {magic}")));
    }
    if maxval != 255 {
        return Err(format_err(path, format!("unsupported maxval {maxval}")));
    }
    let need = width * height * 3;
    if bytes.len() < offset + need {
        return Err(format_err(path, "truncated pixel data"));
    }
    Ok(PpmImage {
        width,
        height,
        data: bytes[offset..offset + need].to_vec(),
    })
}

pub fn write_ppm(path: impl AsRef<Path>, img: &PpmImage) -> Result<()> {
    let mut out = Vec::with_capacity(img.data.len() + 32);
    write!(out, "P6\n{} {}\n255\n", img.width, img.height)?;
    out.extend_from_slice(&img.data);
    fs::write(path, out)?;
    Ok(())
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<PgmImage> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let (magic, width, height, maxval, offset) = parse_netpbm_header(&bytes, path)?;
    if magic != "P5" {
        return Err(format_err(path, format!("expected P5, found {magic}")));
    }
    if maxval != 255 {
        return Err(format_err(path, format!("unsupported maxval {maxval}")));
    }
    let need = width * height;
    if bytes.len() < offset + need {
        return Err(format_err(path, "truncated pixel data"));
    }
    Ok(PgmImage {
        width,
        height,
        data: bytes[offset..offset + need].to_vec(),
    })
}

pub fn write_pgm(path: impl AsRef<Path>, img: &PgmImage) -> Result<()> {
    let mut out = Vec::with_capacity(img.data.len() + 32);
    write!(out, "P5\n{} {}\n255\n", img.width, img.height)?;
    out.extend_from_slice(&img.data);
    fs::write(path, out)?;
    Ok(())
}
