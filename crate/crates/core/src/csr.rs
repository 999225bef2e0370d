//! Compressed sparse row matrices and per-row degree statistics.
//!
//! A [`CsrMatrix`] is canonical: `row_ptr` is non-decreasing with
//! `row_ptr[0] == 0` and `row_ptr[n_rows] == nnz`, and column indices are
//! strictly increasing within each row. Every ingestion path produces
//! canonical matrices; [`CsrMatrix::validate`] checks the invariants.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Sparse matrix in compressed sparse row format, f32 values.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Row i spans `col_idx[row_ptr[i]..row_ptr[i+1]]`.
    pub row_ptr: Vec<usize>,
    /// Column indices, strictly increasing within each row.
    pub col_idx: Vec<u32>,
    pub values: Vec<f32>,
}

impl CsrMatrix {
    /// Empty matrix with no nonzeros.
    pub fn zero(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// n×n identity.
    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n as u32).collect(),
            values: vec![1.0; n],
        }
    }

    /// Build a canonical matrix from (row, col, value) triplets.
    ///
    /// Triplets are sorted by (row, col) and duplicates are merged by
    /// summing their values. Explicit zeros are kept as structural
    /// nonzeros.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(u32, u32, f32)],
    ) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r as usize >= n_rows || c as usize >= n_cols {
                return Err(Error::InvalidParameter(format!(
                    "entry ({r}, {c}) outside {n_rows}x{n_cols} matrix"
                )));
            }
        }
        let mut sorted: Vec<(u32, u32, f32)> = triplets.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx: Vec<u32> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f32> = Vec::with_capacity(sorted.len());
        let mut cur_row = 0usize;

        for &(r, c, v) in &sorted {
            if col_idx.len() > row_ptr[cur_row]
                && cur_row == r as usize
                && *col_idx.last().unwrap() == c
            {
                *values.last_mut().unwrap() += v;
                continue;
            }
            while cur_row < r as usize {
                cur_row += 1;
                row_ptr[cur_row] = col_idx.len();
            }
            col_idx.push(c);
            values.push(v);
        }
        while cur_row < n_rows {
            cur_row += 1;
            row_ptr[cur_row] = col_idx.len();
        }

        Ok(Self { n_rows, n_cols, row_ptr, col_idx, values })
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Number of nonzeros in `row`.
    pub fn degree(&self, row: usize) -> usize {
        self.row_ptr[row + 1] - self.row_ptr[row]
    }

    /// Column indices and values of `row`.
    pub fn row_entries(&self, row: usize) -> (&[u32], &[f32]) {
        let s = self.row_ptr[row];
        let e = self.row_ptr[row + 1];
        (&self.col_idx[s..e], &self.values[s..e])
    }

    /// Check the canonical-form invariants.
    pub fn validate(&self) -> Result<()> {
        if self.row_ptr.len() != self.n_rows + 1 {
            return Err(Error::DimensionMismatch(format!(
                "row_ptr length {} != n_rows + 1 = {}",
                self.row_ptr.len(),
                self.n_rows + 1
            )));
        }
        if self.row_ptr[0] != 0 {
            return Err(Error::DimensionMismatch("row_ptr[0] != 0".into()));
        }
        if self.row_ptr[self.n_rows] != self.nnz() || self.values.len() != self.nnz() {
            return Err(Error::DimensionMismatch(
                "row_ptr[n_rows] does not match nnz".into(),
            ));
        }
        for i in 0..self.n_rows {
            if self.row_ptr[i] > self.row_ptr[i + 1] {
                return Err(Error::DimensionMismatch(format!(
                    "row_ptr decreases at row {i}"
                )));
            }
            let (cols, _) = self.row_entries(i);
            for w in cols.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::DimensionMismatch(format!(
                        "columns not strictly increasing in row {i}"
                    )));
                }
            }
            if let Some(&c) = cols.last() {
                if c as usize >= self.n_cols {
                    return Err(Error::DimensionMismatch(format!(
                        "column {c} out of range in row {i}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Densify; rows missing from the sparsity pattern are zero.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row_entries(i);
            let row = out.row_mut(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c as usize] = v;
            }
        }
        out
    }
}

/// Row-degree summary computed from `row_ptr` alone.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub max_over_mean: f64,
    /// degree -> number of rows with that degree
    pub histogram: BTreeMap<usize, usize>,
}

/// O(n_rows) degree statistics.
pub fn degree_stats(a: &CsrMatrix) -> DegreeStats {
    let mut histogram = BTreeMap::new();
    let mut min = usize::MAX;
    let mut max = 0usize;
    for i in 0..a.n_rows {
        let d = a.degree(i);
        *histogram.entry(d).or_insert(0) += 1;
        min = min.min(d);
        max = max.max(d);
    }
    if a.n_rows == 0 {
        return DegreeStats { min: 0, max: 0, mean: 0.0, max_over_mean: 0.0, histogram };
    }
    let mean = a.nnz() as f64 / a.n_rows as f64;
    let max_over_mean = if mean > 0.0 { max as f64 / mean } else { 0.0 };
    DegreeStats { min, max, mean, max_over_mean, histogram }
}

/// Symmetric normalization with self-loops: D^{-1/2} (A + I) D^{-1/2},
/// where D is the diagonal of row sums of A + I.
pub fn gcn_normalize(a: &CsrMatrix) -> Result<CsrMatrix> {
    if a.n_rows != a.n_cols {
        return Err(Error::DimensionMismatch(format!(
            "normalization needs a square matrix, got {}x{}",
            a.n_rows, a.n_cols
        )));
    }
    let n = a.n_rows;

    // A + I as triplets; an existing diagonal entry absorbs the self-loop.
    let mut triplets: Vec<(u32, u32, f32)> = Vec::with_capacity(a.nnz() + n);
    for i in 0..n {
        let (cols, vals) = a.row_entries(i);
        let mut has_diag = false;
        for (&c, &v) in cols.iter().zip(vals) {
            let v = if c as usize == i {
                has_diag = true;
                v + 1.0
            } else {
                v
            };
            triplets.push((i as u32, c, v));
        }
        if !has_diag {
            triplets.push((i as u32, i as u32, 1.0));
        }
    }
    let with_loops = CsrMatrix::from_triplets(n, n, &triplets)?;

    let mut inv_sqrt_deg = Vec::with_capacity(n);
    for i in 0..n {
        let (_, vals) = with_loops.row_entries(i);
        let d: f64 = vals.iter().map(|&v| v as f64).sum();
        if d <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "row {i} of A + I has non-positive degree {d}"
            )));
        }
        inv_sqrt_deg.push(1.0 / d.sqrt());
    }

    let mut out = with_loops;
    for i in 0..n {
        let s = out.row_ptr[i];
        let e = out.row_ptr[i + 1];
        for k in s..e {
            let j = out.col_idx[k] as usize;
            let v = out.values[k] as f64 * inv_sqrt_deg[i] * inv_sqrt_deg[j];
            out.values[k] = v as f32;
        }
    }
    Ok(out)
}
