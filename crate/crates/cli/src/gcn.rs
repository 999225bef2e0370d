//! Demo graph-convolution layer: linear transform, sparse aggregation
//! through the block-level SpMM pipeline, then ReLU.

use blockspmm::{spmm, CsrMatrix, DenseMatrix, Error, PartitionConfig, Result};

/// Naive row-major dense GEMM, f32 accumulation.
pub fn dense_gemm(x: &DenseMatrix, w: &DenseMatrix) -> Result<DenseMatrix> {
    if x.n_cols != w.n_rows {
        return Err(Error::DimensionMismatch(format!(
            "left operand has {} columns, right has {} rows",
            x.n_cols, w.n_rows
        )));
    }
    let mut out = DenseMatrix::zeros(x.n_rows, w.n_cols);
    for i in 0..x.n_rows {
        let x_row = x.row(i);
        let out_row = out.row_mut(i);
        for (k, &xv) in x_row.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let w_row = w.row(k);
            for j in 0..w.n_cols {
                out_row[j] += xv * w_row[j];
            }
        }
    }
    Ok(out)
}

pub fn relu(m: &mut DenseMatrix) {
    for v in m.data.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// One forward layer: relu(a_norm . (x . w)), with the aggregation run
/// through the sorted block-level simulator.
pub fn gcn_layer_forward(
    x: &DenseMatrix,
    w: &DenseMatrix,
    a_norm: &CsrMatrix,
    cfg: &PartitionConfig,
) -> Result<DenseMatrix> {
    if a_norm.n_rows != a_norm.n_cols {
        return Err(Error::DimensionMismatch(format!(
            "adjacency must be square, got {}x{}",
            a_norm.n_rows, a_norm.n_cols
        )));
    }
    if a_norm.n_rows != x.n_rows {
        return Err(Error::DimensionMismatch(format!(
            "adjacency covers {} nodes but features have {} rows",
            a_norm.n_rows, x.n_rows
        )));
    }
    let y = dense_gemm(x, w)?;
    let mut aggregated = spmm(a_norm, &y, cfg)?;
    relu(&mut aggregated);
    Ok(aggregated)
}
