//! Oracles shared by the integration suites. Everything here recomputes
//! results from first principles, independent of the library's
//! partitioning and simulation code paths.
#![allow(dead_code)] // each test binary uses a different subset

use blockspmm::{CsrMatrix, DenseMatrix};
use rand::rngs::StdRng;
use rand::Rng;

/// Brute-force triple-loop product in f64, original row order.
pub fn dense_spmm_f64(a: &CsrMatrix, x: &DenseMatrix) -> Vec<f64> {
    let col_dim = x.n_cols;
    let mut out = vec![0.0f64; a.n_rows * col_dim];
    for i in 0..a.n_rows {
        let (cols, vals) = a.row_entries(i);
        for (&j, &v) in cols.iter().zip(vals) {
            for k in 0..col_dim {
                out[i * col_dim + k] += v as f64 * x.get(j as usize, k) as f64;
            }
        }
    }
    out
}

/// Accumulate triplets into a dense array (duplicate entries sum).
pub fn dense_from_triplets(n_rows: usize, n_cols: usize, triplets: &[(u32, u32, f32)]) -> Vec<f64> {
    let mut dense = vec![0.0f64; n_rows * n_cols];
    for &(r, c, v) in triplets {
        dense[r as usize * n_cols + c as usize] += v as f64;
    }
    dense
}

pub fn csr_to_dense_f64(a: &CsrMatrix) -> Vec<f64> {
    let mut dense = vec![0.0f64; a.n_rows * a.n_cols];
    for i in 0..a.n_rows {
        let (cols, vals) = a.row_entries(i);
        for (&c, &v) in cols.iter().zip(vals) {
            dense[i * a.n_cols + c as usize] = v as f64;
        }
    }
    dense
}

/// Random canonical matrix with integer values in [-4, 4].
pub fn random_int_csr(rng: &mut StdRng, n_rows: usize, n_cols: usize, density: f64) -> CsrMatrix {
    let mut triplets = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if rng.gen_bool(density) {
                triplets.push((r as u32, c as u32, rng.gen_range(-4i32..=4) as f32));
            }
        }
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &triplets).unwrap()
}

/// Random canonical matrix with positive real values in [0.1, 1).
pub fn random_real_csr(rng: &mut StdRng, n_rows: usize, n_cols: usize, density: f64) -> CsrMatrix {
    let mut triplets = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if rng.gen_bool(density) {
                triplets.push((r as u32, c as u32, rng.gen_range(0.1f32..1.0)));
            }
        }
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &triplets).unwrap()
}

/// Uniform-degree square matrix: every row has exactly `deg` nonzeros.
pub fn uniform_degree_csr(n: usize, deg: usize) -> CsrMatrix {
    assert!(deg <= n);
    let mut triplets = Vec::with_capacity(n * deg);
    for r in 0..n {
        for k in 0..deg {
            let c = (r + k) % n;
            triplets.push((r as u32, c as u32, 1.0));
        }
    }
    CsrMatrix::from_triplets(n, n, &triplets).unwrap()
}
