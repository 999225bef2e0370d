//! Stable counting sort of CSR rows by degree.
//!
//! Rows are reordered ascending by degree; ties keep their original
//! relative order. Column indices are not remapped — only the row order
//! changes, so restoring an SpMM result needs just the row inverse.

use crate::csr::CsrMatrix;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Bijection between original and degree-sorted row orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowPermutation {
    /// sorted position -> original row id
    pub sorted_to_orig: Vec<u32>,
    /// original row id -> sorted position
    pub orig_to_sorted: Vec<u32>,
}

impl RowPermutation {
    pub fn identity(n: usize) -> Self {
        let ids: Vec<u32> = (0..n as u32).collect();
        Self { sorted_to_orig: ids.clone(), orig_to_sorted: ids }
    }

    /// Build from the forward map, checking that it is a bijection.
    pub fn from_sorted_to_orig(sorted_to_orig: Vec<u32>) -> Result<Self> {
        let n = sorted_to_orig.len();
        let mut orig_to_sorted = vec![u32::MAX; n];
        for (pos, &orig) in sorted_to_orig.iter().enumerate() {
            let o = orig as usize;
            if o >= n || orig_to_sorted[o] != u32::MAX {
                return Err(Error::InvalidParameter(format!(
                    "sorted_to_orig is not a permutation of 0..{n}"
                )));
            }
            orig_to_sorted[o] = pos as u32;
        }
        Ok(Self { sorted_to_orig, orig_to_sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted_to_orig.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_to_orig.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.sorted_to_orig.iter().enumerate().all(|(i, &o)| i == o as usize)
    }

    /// Serialize as a JSON array of `sorted_to_orig`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.sorted_to_orig).expect("serializing Vec<u32> cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sorted_to_orig: Vec<u32> = serde_json::from_str(s)
            .map_err(|e| Error::InvalidParameter(format!("bad permutation JSON: {e}")))?;
        Self::from_sorted_to_orig(sorted_to_orig)
    }
}

/// Reorder rows ascending by degree with a stable counting sort.
///
/// Runs in O(n_rows + nnz + max_degree); no comparison sort is involved.
pub fn sort_rows_by_degree(a: &CsrMatrix) -> (CsrMatrix, RowPermutation) {
    let n = a.n_rows;
    if n == 0 {
        return (a.clone(), RowPermutation::identity(0));
    }

    let max_deg = (0..n).map(|i| a.degree(i)).max().unwrap_or(0);

    // Bucket counts, then exclusive prefix sums to get bucket starts.
    let mut start = vec![0usize; max_deg + 2];
    for i in 0..n {
        start[a.degree(i) + 1] += 1;
    }
    for d in 1..start.len() {
        start[d] += start[d - 1];
    }

    // Stable scatter: rows visited in original order land in bucket order.
    let mut sorted_to_orig = vec![0u32; n];
    for i in 0..n {
        let d = a.degree(i);
        sorted_to_orig[start[d]] = i as u32;
        start[d] += 1;
    }
    let perm = RowPermutation::from_sorted_to_orig(sorted_to_orig)
        .expect("counting sort produces a bijection");

    // Rebuild the CSR arrays in the new row order.
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0usize);
    let mut col_idx = Vec::with_capacity(a.nnz());
    let mut values = Vec::with_capacity(a.nnz());
    for pos in 0..n {
        let orig = perm.sorted_to_orig[pos] as usize;
        let (cols, vals) = a.row_entries(orig);
        col_idx.extend_from_slice(cols);
        values.extend_from_slice(vals);
        row_ptr.push(col_idx.len());
    }

    let sorted = CsrMatrix { n_rows: n, n_cols: a.n_cols, row_ptr, col_idx, values };
    (sorted, perm)
}

/// Map rows of a sorted-order result back to original row order:
/// output row `sorted_to_orig[i]` = input row `i`.
pub fn restore_rows(y_sorted: &DenseMatrix, perm: &RowPermutation) -> Result<DenseMatrix> {
    if y_sorted.n_rows != perm.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows but permutation covers {}",
            y_sorted.n_rows,
            perm.len()
        )));
    }
    let mut out = DenseMatrix::zeros(y_sorted.n_rows, y_sorted.n_cols);
    for i in 0..y_sorted.n_rows {
        let orig = perm.sorted_to_orig[i] as usize;
        out.row_mut(orig).copy_from_slice(y_sorted.row(i));
    }
    Ok(out)
}

/// Apply the permutation forward: output row `i` = input row `sorted_to_orig[i]`.
pub fn permute_rows(x: &DenseMatrix, perm: &RowPermutation) -> Result<DenseMatrix> {
    if x.n_rows != perm.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows but permutation covers {}",
            x.n_rows,
            perm.len()
        )));
    }
    let mut out = DenseMatrix::zeros(x.n_rows, x.n_cols);
    for i in 0..x.n_rows {
        let orig = perm.sorted_to_orig[i] as usize;
        out.row_mut(i).copy_from_slice(x.row(orig));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn example_graph() -> CsrMatrix {
        // rows of degree 2, 4, 2
        CsrMatrix::from_triplets(
            3,
            4,
            &[
                (0, 0, 1.0),
                (0, 1, 2.0),
                (1, 0, 3.0),
                (1, 1, 4.0),
                (1, 2, 5.0),
                (1, 3, 6.0),
                (2, 1, 7.0),
                (2, 2, 8.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sorts_example_graph_stably() {
        let a = example_graph();
        let (sorted, perm) = sort_rows_by_degree(&a);
        assert_eq!(perm.sorted_to_orig, vec![0, 2, 1]);
        assert_eq!(sorted.row_ptr, vec![0, 2, 4, 8]);
        // sorted row 1 is original row 2
        assert_eq!(sorted.row_entries(1).1, &[7.0, 8.0]);
        assert_eq!(sorted.row_entries(2).1, &[3.0, 4.0, 5.0, 6.0]);
        sorted.validate().unwrap();
    }

    #[test]
    fn already_sorted_gives_identity() {
        let a = CsrMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 0, 1.0), (2, 1, 1.0), (2, 2, 1.0)],
        )
        .unwrap();
        let (_, perm) = sort_rows_by_degree(&a);
        assert!(perm.is_identity());
    }

    #[test]
    fn matches_reference_stable_sort() {
        let mut rng = StdRng::seed_from_u64(11);
        let n = 1000usize;
        let mut triplets = Vec::new();
        for r in 0..n {
            let deg = rng.gen_range(0..8usize);
            let mut cols: Vec<u32> = (0..n as u32).collect();
            for k in 0..deg {
                let pick = rng.gen_range(k..n);
                cols.swap(k, pick);
            }
            for &c in &cols[..deg] {
                triplets.push((r as u32, c, rng.gen_range(-4..=4) as f32));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &triplets).unwrap();
        let (sorted, perm) = sort_rows_by_degree(&a);

        // Oracle: comparison-based stable sort on (degree, original index).
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| a.degree(i));
        let oracle: Vec<u32> = order.iter().map(|&i| i as u32).collect();
        assert_eq!(perm.sorted_to_orig, oracle);

        // Degrees non-decreasing and rows carried over verbatim.
        for i in 0..n {
            if i + 1 < n {
                assert!(sorted.degree(i) <= sorted.degree(i + 1));
            }
            let orig = perm.sorted_to_orig[i] as usize;
            assert_eq!(sorted.row_entries(i), a.row_entries(orig));
            assert_eq!(perm.orig_to_sorted[orig] as usize, i);
        }
    }

    #[test]
    fn restore_identity_is_noop() {
        let x = DenseMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f32);
        let out = restore_rows(&x, &RowPermutation::identity(3)).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn restore_example_permutation() {
        let perm = RowPermutation::from_sorted_to_orig(vec![0, 2, 1]).unwrap();
        let y = DenseMatrix::from_rows(3, 1, vec![10.0, 11.0, 12.0]).unwrap();
        let out = restore_rows(&y, &perm).unwrap();
        // row 1 of the input lands at original index 2, row 2 at index 1
        assert_eq!(out.data, vec![10.0, 12.0, 11.0]);
    }

    #[test]
    fn restore_undoes_permute() {
        let mut rng = StdRng::seed_from_u64(3);
        let n = 64;
        let x = DenseMatrix::from_fn(n, 5, |_, _| rng.gen_range(-1.0..1.0));
        let mut ids: Vec<u32> = (0..n as u32).collect();
        for k in 0..n {
            let pick = rng.gen_range(k..n);
            ids.swap(k, pick);
        }
        let perm = RowPermutation::from_sorted_to_orig(ids).unwrap();
        let permuted = permute_rows(&x, &perm).unwrap();
        let restored = restore_rows(&permuted, &perm).unwrap();
        assert_eq!(restored, x);
    }

    #[test]
    fn restore_rejects_dimension_mismatch() {
        let x = DenseMatrix::zeros(3, 2);
        assert!(restore_rows(&x, &RowPermutation::identity(4)).is_err());
    }

    #[test]
    fn permutation_json_roundtrip() {
        let perm = RowPermutation::from_sorted_to_orig(vec![2, 0, 1]).unwrap();
        let json = perm.to_json();
        assert_eq!(json, "[2,0,1]");
        assert_eq!(RowPermutation::from_json(&json).unwrap(), perm);
        assert!(RowPermutation::from_json("[0,0,1]").is_err());
    }
}
