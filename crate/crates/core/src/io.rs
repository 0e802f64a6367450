//! Dataset ingestion and embedding output.
//!
//! Binary input layout (all little-endian): the magic bytes `NCV1`, the row
//! count and column count as `u32`, then `rows * cols` `f32` values in row
//! order.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{DataMatrix, EmbeddingState};

pub const BIN_MAGIC: &[u8; 4] = b"NCV1";
const BIN_HEADER_LEN: usize = 12;

/// Fixed color cycle for labeled scatter plots.
pub const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939",
];
const UNLABELED_COLOR: &str = "#1f77b4";
const VIEWPORT: f64 = 800.0;
const MARGIN: f64 = 0.05;

/// One label per input row, kept as text so both numeric and named classes
/// work.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelFile {
    pub labels: Vec<String>,
}

impl LabelFile {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Reads a headerless comma-separated matrix.
pub fn read_csv(path: impl AsRef<Path>) -> Result<DataMatrix> {
    read_delimited(path, b',')
}

/// Reads a headerless matrix with the given single-byte delimiter. Errors
/// carry 1-based row and column numbers.
pub fn read_delimited(path: impl AsRef<Path>, delimiter: u8) -> Result<DataMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0usize;
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                return Err(Error::Format {
                    path: path.into(),
                    message: e.to_string(),
                })
            }
        }
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let row = rows + 1;
        let width = *cols.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::RaggedRow {
                path: path.into(),
                row,
                expected: width,
                found: record.len(),
            });
        }
        for (c, token) in record.iter().enumerate() {
            let v: f64 = token.parse().map_err(|_| Error::ParseValue {
                path: path.into(),
                row,
                col: c + 1,
                token: token.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    path: path.into(),
                    row,
                    col: c + 1,
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    let Some(cols) = cols else {
        return Err(Error::Empty { path: path.into() });
    };
    DataMatrix::new(rows, cols, values)
}

/// Reads the `NCV1` binary format.
pub fn read_bin(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() < BIN_HEADER_LEN || &bytes[..4] != BIN_MAGIC {
        return Err(Error::Format {
            path: path.into(),
            message: "missing NCV1 magic header".into(),
        });
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = BIN_HEADER_LEN + rows * cols * 4;
    if bytes.len() != expected {
        return Err(Error::Truncated {
            path: path.into(),
            expected,
            found: bytes.len(),
        });
    }
    let mut values = Vec::with_capacity(rows * cols);
    for (k, chunk) in bytes[BIN_HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                path: path.into(),
                row: k / cols + 1,
                col: k % cols + 1,
            });
        }
        values.push(v as f64);
    }
    DataMatrix::new(rows, cols, values)
}

/// Writes `data` in the `NCV1` format; values are narrowed to `f32`.
pub fn write_bin(data: &DataMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(BIN_HEADER_LEN + data.values().len() * 4);
    bytes.extend_from_slice(BIN_MAGIC);
    bytes.extend_from_slice(&(data.rows() as u32).to_le_bytes());
    bytes.extend_from_slice(&(data.cols() as u32).to_le_bytes());
    for &v in data.values() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Shortest decimal that parses back to exactly `v`; negative zero is
/// written as `0.0`.
fn format_coord(v: f64) -> String {
    if v == 0.0 {
        "0.0".to_string()
    } else {
        format!("{v:?}")
    }
}

/// Writes one tab-separated line per point.
pub fn write_embedding(state: &EmbeddingState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut line = String::new();
    for i in 0..state.n_points() {
        line.clear();
        for (c, &v) in state.point(i).iter().enumerate() {
            if c > 0 {
                line.push('\t');
            }
            line.push_str(&format_coord(v));
        }
        line.push('\n');
        out.write_all(line.as_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads an embedding written by [`write_embedding`] (`Q` is not stored and
/// comes back as zero).
pub fn read_embedding(path: impl AsRef<Path>) -> Result<EmbeddingState> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut coords = Vec::new();
    let mut rows = 0;
    let mut dim = None;
    for (r, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let fields: Vec<&str> = line.split('\t').collect();
        let width = *dim.get_or_insert(fields.len());
        if fields.len() != width {
            return Err(Error::RaggedRow {
                path: path.into(),
                row: r + 1,
                expected: width,
                found: fields.len(),
            });
        }
        for (c, tok) in fields.iter().enumerate() {
            coords.push(tok.trim().parse::<f64>().map_err(|_| Error::ParseValue {
                path: path.into(),
                row: r + 1,
                col: c + 1,
                token: tok.to_string(),
            })?);
        }
        rows += 1;
    }
    EmbeddingState::new(rows, dim.unwrap_or(0), coords, 0.0)
}

/// One label per non-empty line.
pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(LabelFile {
        labels: text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect(),
    })
}

/// Renders a 2-D embedding as a standalone SVG scatter plot. Coordinates are
/// mapped affinely into a square viewport with a 5% margin; each distinct
/// label gets its own color, cycling through [`PALETTE`] in order of first
/// appearance.
pub fn render_svg_scatter(state: &EmbeddingState, labels: Option<&LabelFile>) -> Result<String> {
    if state.dim() != 2 {
        return Err(Error::Plot(format!(
            "scatter plot needs a 2-D embedding, got {} dimensions",
            state.dim()
        )));
    }
    let n = state.n_points();
    if let Some(l) = labels {
        if l.len() != n {
            return Err(Error::Plot(format!(
                "label count {} does not match point count {n}",
                l.len()
            )));
        }
    }

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for i in 0..n {
        for c in 0..2 {
            lo[c] = lo[c].min(state.point(i)[c]);
            hi[c] = hi[c].max(state.point(i)[c]);
        }
    }
    // One scale for both axes keeps the aspect ratio.
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let inner = VIEWPORT * (1.0 - 2.0 * MARGIN);
    let scale = if span > 0.0 { inner / span } else { 0.0 };
    let offset = |c: usize| VIEWPORT * MARGIN + (inner - scale * (hi[c] - lo[c])) / 2.0;
    let (ox, oy) = (offset(0), offset(1));

    let mut colors: HashMap<&str, &str> = HashMap::new();
    let mut svg = String::with_capacity(64 * n + 256);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{v}" height="{v}" viewBox="0 0 {v} {v}">"#,
        v = VIEWPORT
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for i in 0..n {
        let p = state.point(i);
        let x = ox + scale * (p[0] - lo[0]);
        // SVG y grows downward
        let y = VIEWPORT - (oy + scale * (p[1] - lo[1]));
        let fill = match labels {
            Some(l) => {
                let next = PALETTE[colors.len() % PALETTE.len()];
                *colors.entry(l.labels[i].as_str()).or_insert(next)
            }
            None => UNLABELED_COLOR,
        };
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{fill}" fill-opacity="0.8"/>"#
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_svg_scatter(
    state: &EmbeddingState,
    labels: Option<&LabelFile>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg_scatter(state, labels)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
