//! Shared containers: row-major matrices, datasets, label vectors and the
//! partition model used by the trainer.
//!
//! Matrices are stored row-major, one sample per row. CSV files follow the
//! same layout: comma separated, an optional single header row, decimal-point
//! floats. Label files hold one integer per line.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} values, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + Clone + '_ {
        // chunks_exact on an empty-width matrix would panic
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Raw data set: `N` samples of dimension `d`, all finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    x: Matrix,
}

impl Dataset {
    pub fn new(x: Matrix) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::InvalidInput(format!(
                "dataset must have at least one row and one column, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        if let Some(pos) = x.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row: pos / x.cols(),
                column: pos % x.cols(),
                message: "value is not finite".into(),
            });
        }
        Ok(Self { x })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn into_matrix(self) -> Matrix {
        self.x
    }
}

/// Reads a numeric CSV file into a [`Dataset`].
///
/// Row and column numbers in errors are 0-based and count data rows only.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, has_header).map_err(|e| match e {
        Error::Csv { message, .. } => Error::Csv {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// Parses CSV text; see [`load_csv`].
pub fn parse_csv(text: &str, has_header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: Default::default(),
            message: e.to_string(),
        })?;
        let mut values = Vec::with_capacity(record.len());
        for (column, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column,
                message: format!("cannot parse {cell:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column,
                    message: format!("{cell:?} is not finite"),
                });
            }
            values.push(v);
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("CSV contains no data rows".into()));
    }
    Dataset::from_rows(&rows)
}

/// Writes a matrix as headerless CSV using the shortest round-trip float
/// representation.
pub fn write_csv(path: impl AsRef<Path>, x: &Matrix) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(x.rows() * x.cols() * 12);
    for row in x.iter_rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Non-negative integer labels, one per sample. Values are not required to be
/// dense.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Labels(pub Vec<usize>);

impl Labels {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Number of distinct values.
    pub fn distinct(&self) -> usize {
        let mut v = self.0.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (row, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: i64 = line.parse().map_err(|_| Error::Parse {
                row,
                column: 0,
                message: format!("cannot parse {line:?} as an integer label"),
            })?;
            if v < 0 {
                return Err(Error::Parse {
                    row,
                    column: 0,
                    message: format!("label {v} is negative"),
                });
            }
            values.push(v as usize);
        }
        Ok(Labels(values))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = String::with_capacity(self.0.len() * 3);
        for v in &self.0 {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

impl From<Vec<usize>> for Labels {
    fn from(v: Vec<usize>) -> Self {
        Labels(v)
    }
}

/// Cluster and ARTa-category assignment of every sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub cluster_of: Vec<usize>,
    pub category_of: Vec<usize>,
    pub k_current: usize,
}

impl Partition {
    /// Remaps cluster ids to `0..k'` (see [`dense_relabel`]) and refreshes
    /// `k_current`.
    pub fn dense_relabel(mut self) -> Self {
        self.cluster_of = dense_relabel(&self.cluster_of);
        self.k_current = self.cluster_of.iter().max().map_or(0, |m| m + 1);
        self
    }
}

/// Maps arbitrary ids onto `0..k'`, preserving co-membership. New ids follow
/// the order of the original ids (smallest original id becomes 0).
pub fn dense_relabel(labels: &[usize]) -> Vec<usize> {
    let mut ids: Vec<usize> = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let map: HashMap<usize, usize> = ids.into_iter().enumerate().map(|(n, o)| (o, n)).collect();
    labels.iter().map(|l| map[l]).collect()
}
