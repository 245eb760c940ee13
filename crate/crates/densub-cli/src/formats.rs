//! Loaders and writers for the on-disk matrix and selection formats.
//!
//! Two text formats are accepted:
//!
//! * coordinate pattern: a header line `M N nnz`, then one `i j` pair per
//!   line, 1-indexed; `%` starts a comment line.
//! * edge list: one `i j` pair per line (an optional numeric third column is
//!   ignored); `%` and `#` start comment lines. Loading an edge list builds
//!   the perturbed adjacency matrix (unit diagonal plus mirrored edges).

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use densub::{perturbed_adjacency, BinaryMatrix, Selection};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("header declares {declared} entries but the file holds {found}")]
    CountMismatch { declared: usize, found: usize },

    #[error("line {line}: index {index} invalid for {base}-indexed input")]
    BadIndex {
        line: usize,
        index: usize,
        base: usize,
    },

    #[error("line {line}: node {index} out of range for {nodes} declared nodes")]
    NodeOutOfRange {
        line: usize,
        index: usize,
        nodes: usize,
    },

    #[error(transparent)]
    Matrix(#[from] densub::Error),
}

pub type FormatResult<T> = std::result::Result<T, FormatError>;

fn read_to_string(path: &Path) -> FormatResult<String> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn is_comment(line: &str, markers: &[char]) -> bool {
    line.chars()
        .next()
        .map(|c| markers.contains(&c))
        .unwrap_or(true)
}

/// A parsed pair with its 1-based source line, plus any trailing numeric
/// token (ignored as a weight).
fn parse_pair(line_no: usize, line: &str) -> FormatResult<(usize, usize)> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != 2 && tokens.len() != 3 {
        return Err(FormatError::Malformed {
            line: line_no,
            message: format!("expected `i j` (optionally a weight), got {:?}", line.trim()),
        });
    }
    let parse_int = |t: &str| -> FormatResult<usize> {
        t.parse().map_err(|_| FormatError::Malformed {
            line: line_no,
            message: format!("`{t}` is not a nonnegative integer"),
        })
    };
    let a = parse_int(tokens[0])?;
    let b = parse_int(tokens[1])?;
    if tokens.len() == 3 && tokens[2].parse::<f64>().is_err() {
        return Err(FormatError::Malformed {
            line: line_no,
            message: format!("trailing token `{}` is not numeric", tokens[2]),
        });
    }
    Ok((a, b))
}

/// Loads an edge list and returns the perturbed adjacency matrix.
///
/// `index_base` is 0 or 1; when `node_count` is absent it is inferred as the
/// largest translated index plus one.
pub fn load_edge_list(
    path: &Path,
    index_base: usize,
    node_count: Option<usize>,
) -> FormatResult<BinaryMatrix> {
    let text = read_to_string(path)?;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut max_index = 0usize;
    let mut lines_with_edges: Vec<usize> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || is_comment(trimmed, &['%', '#']) {
            continue;
        }
        let (a, b) = parse_pair(line_no, trimmed)?;
        for &v in &[a, b] {
            if v < index_base {
                return Err(FormatError::BadIndex {
                    line: line_no,
                    index: v,
                    base: index_base,
                });
            }
        }
        let (a0, b0) = (a - index_base, b - index_base);
        max_index = max_index.max(a0).max(b0);
        edges.push((a0, b0));
        lines_with_edges.push(line_no);
    }

    let nodes = match node_count {
        Some(n) => {
            for (&(a0, b0), &line) in edges.iter().zip(lines_with_edges.iter()) {
                let worst = a0.max(b0);
                if worst >= n {
                    return Err(FormatError::NodeOutOfRange {
                        line,
                        index: worst + index_base,
                        nodes: n,
                    });
                }
            }
            n
        }
        None => max_index + 1,
    };
    if nodes == 0 {
        return Err(FormatError::Malformed {
            line: 0,
            message: "empty edge list with no node count".into(),
        });
    }
    Ok(perturbed_adjacency(nodes, &edges)?)
}

/// A coordinate-format matrix plus the number of duplicate entries dropped.
pub struct CoordinateLoad {
    pub matrix: BinaryMatrix,
    pub duplicates: usize,
}

/// Loads a 1-indexed coordinate pattern file (`M N nnz` header).
pub fn load_coordinate_matrix(path: &Path) -> FormatResult<CoordinateLoad> {
    let text = read_to_string(path)?;
    let mut header: Option<(usize, usize, usize)> = None;
    let mut entries: Vec<(usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || is_comment(trimmed, &['%']) {
            continue;
        }
        match header {
            None => {
                let tokens: Vec<&str> = trimmed.split_whitespace().collect();
                if tokens.len() != 3 {
                    return Err(FormatError::Malformed {
                        line: line_no,
                        message: "header must be `M N nnz`".into(),
                    });
                }
                let mut parsed = [0usize; 3];
                for (slot, t) in parsed.iter_mut().zip(tokens.iter()) {
                    *slot = t.parse().map_err(|_| FormatError::Malformed {
                        line: line_no,
                        message: format!("`{t}` is not a nonnegative integer"),
                    })?;
                }
                header = Some((parsed[0], parsed[1], parsed[2]));
            }
            Some((rows, cols, _)) => {
                let (i, j) = parse_pair(line_no, trimmed)?;
                if i == 0 || j == 0 {
                    return Err(FormatError::BadIndex {
                        line: line_no,
                        index: 0,
                        base: 1,
                    });
                }
                if i > rows || j > cols {
                    return Err(FormatError::NodeOutOfRange {
                        line: line_no,
                        index: i.max(j),
                        nodes: rows.max(cols),
                    });
                }
                entries.push((i - 1, j - 1));
            }
        }
    }
    let (rows, cols, nnz) = header.ok_or(FormatError::Malformed {
        line: 0,
        message: "missing header line".into(),
    })?;
    if entries.len() != nnz {
        return Err(FormatError::CountMismatch {
            declared: nnz,
            found: entries.len(),
        });
    }
    let raw_count = entries.len();
    let matrix = BinaryMatrix::new(rows, cols, entries)?;
    Ok(CoordinateLoad {
        duplicates: raw_count - matrix.nnz(),
        matrix,
    })
}

/// Writes the coordinate pattern format, 1-indexed, entries sorted row-major.
pub fn write_coordinate_matrix(w: &mut impl Write, matrix: &BinaryMatrix) -> std::io::Result<()> {
    writeln!(w, "{} {} {}", matrix.rows(), matrix.cols(), matrix.nnz())?;
    for &(i, j) in matrix.nonzeros() {
        writeln!(w, "{} {}", i + 1, j + 1)?;
    }
    Ok(())
}

pub fn save_coordinate_matrix(path: &Path, matrix: &BinaryMatrix) -> FormatResult<()> {
    let mut buf = Vec::new();
    write_coordinate_matrix(&mut buf, matrix).expect("in-memory write");
    fs::write(path, buf).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// JSON rendering of a selection, 1-indexed for external consumption.
#[derive(Debug, Serialize, Deserialize)]
pub struct SelectionJson {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub index_base: usize,
}

impl SelectionJson {
    pub fn from_selection(sel: &Selection) -> Self {
        SelectionJson {
            rows: sel.rows().iter().map(|&i| i + 1).collect(),
            cols: sel.cols().iter().map(|&j| j + 1).collect(),
            index_base: 1,
        }
    }

    pub fn to_selection(&self) -> Result<Selection, densub::Error> {
        let translate = |v: &[usize]| -> Result<Vec<usize>, densub::Error> {
            v.iter()
                .map(|&x| {
                    x.checked_sub(self.index_base).ok_or_else(|| {
                        densub::Error::InvalidSelection(format!(
                            "index {x} invalid for base {}",
                            self.index_base
                        ))
                    })
                })
                .collect()
        };
        Selection::new(translate(&self.rows)?, translate(&self.cols)?)
    }
}

/// Which matrix format a file uses; `sniff_format` inspects the first data
/// line (three integer tokens means a coordinate header).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Coordinate,
    EdgeList,
}

pub fn sniff_format(path: &Path) -> FormatResult<MatrixFormat> {
    let text = read_to_string(path)?;
    for raw in text.lines() {
        let trimmed = raw.trim();
        if trimmed.is_empty() || is_comment(trimmed, &['%', '#']) {
            continue;
        }
        let tokens = trimmed.split_whitespace().count();
        return Ok(if tokens == 3 {
            MatrixFormat::Coordinate
        } else {
            MatrixFormat::EdgeList
        });
    }
    // An empty file can only be an edge list with an explicit node count.
    Ok(MatrixFormat::EdgeList)
}
