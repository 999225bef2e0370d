//! Deterministic functional simulator of the block/warp execution model.
//!
//! Atomic adds are modeled as ordered additions — within a block by
//! ascending warp id, across blocks by ascending block id — so repeated
//! runs are bitwise identical. Real GPU atomics are unordered; tests that
//! need exact results use integer-valued data.

use serde::Serialize;

use crate::csr::CsrMatrix;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::partition::{
    block_partition, get_partition_patterns, warp_partition, BlockDescriptor, BlockKind,
    PartitionConfig, WarpTask, WARP_SIZE,
};
use crate::sort::{restore_rows, sort_rows_by_degree};

/// Mapping of the dense column dimension onto combined warps.
///
/// `c = ceil(col_dim / 32)` consecutive physical warps act as one
/// combined warp of `round_dim = c * 32` lanes; lanes at or beyond
/// `col_dim` are truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CombinedWarpPlan {
    pub col_dim: usize,
    /// Physical warps per combined warp.
    pub c: usize,
    /// Lanes per combined warp, always c * 32.
    pub round_dim: usize,
    /// Physical threads per block.
    pub block_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaneAssignment {
    pub combined_warp_id: usize,
    pub lane_id: usize,
    pub active: bool,
}

impl CombinedWarpPlan {
    /// Virtual-id recurrence: physical thread `t` in round `j` takes
    /// virtual id `t + j * block_dim`; dividing by round_dim gives the
    /// combined warp id and the remainder the lane id.
    pub fn lane(&self, physical_thread: usize, round: usize) -> LaneAssignment {
        let virtual_id = physical_thread + round * self.block_dim;
        let lane_id = virtual_id % self.round_dim;
        LaneAssignment {
            combined_warp_id: virtual_id / self.round_dim,
            lane_id,
            active: lane_id < self.col_dim,
        }
    }

    /// All lane assignments of one block, rounds outermost.
    pub fn lane_assignments(&self) -> impl Iterator<Item = LaneAssignment> + '_ {
        (0..self.c).flat_map(move |j| (0..self.block_dim).map(move |t| self.lane(t, j)))
    }

    /// Combined warps per block; always equals max_block_warps.
    pub fn combined_warps_per_block(&self) -> usize {
        self.block_dim * self.c / self.round_dim
    }
}

/// Build the combined-warp plan for a dense column dimension.
pub fn plan_combined_warps(col_dim: usize, cfg: &PartitionConfig) -> CombinedWarpPlan {
    assert!(col_dim >= 1, "col_dim must be at least 1");
    let c = col_dim.div_ceil(WARP_SIZE);
    CombinedWarpPlan { col_dim, c, round_dim: c * WARP_SIZE, block_dim: cfg.block_dim() }
}

/// Workload and modeled-atomic counters for one executed block (or one
/// warp task under the warp-level baseline).
#[derive(Debug, Clone, Serialize)]
pub struct BlockTrace {
    /// None for warp-level runs, which have no block metadata.
    pub descriptor: Option<BlockDescriptor>,
    /// Nonzeros handled by each warp slot of the block.
    pub per_warp_nnz: Vec<u64>,
    pub shared_atomic_adds: u64,
    pub global_atomic_adds: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TraceTotals {
    pub nnz: u64,
    pub warps_launched: u64,
    pub active_warps: u64,
    pub shared_atomic_adds: u64,
    pub global_atomic_adds: u64,
    /// Column-loop passes issued by the warp-level baseline.
    pub inner_loop_iters: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExecTrace {
    pub blocks: Vec<BlockTrace>,
    pub totals: TraceTotals,
}

impl ExecTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serialization cannot fail")
    }

    /// Per-warp nonzero counts across all blocks, idle slots included.
    pub fn per_warp_nnz(&self) -> impl Iterator<Item = u64> + '_ {
        self.blocks.iter().flat_map(|b| b.per_warp_nnz.iter().copied())
    }
}

/// One warp slot's chunk of work inside a block: `len` nonzeros of
/// `row` starting at absolute nonzero index `nz_start`.
struct WarpChunk {
    row: usize,
    nz_start: usize,
    len: usize,
}

/// Decode the per-warp workload of a block from its descriptor alone.
///
/// Pattern blocks give each row `ceil(deg / warp_nzs)` consecutive warp
/// slots; oversized blocks spread their nonzeros over all warps,
/// remainder to the leading ones. Slots without work yield None.
fn block_warp_chunks(
    desc: &BlockDescriptor,
    cfg: &PartitionConfig,
) -> Result<Vec<Option<WarpChunk>>> {
    let w = cfg.max_block_warps;
    let mut chunks = Vec::with_capacity(w);
    match desc.kind(cfg.deg_bound()) {
        BlockKind::Pattern { warp_nzs, rows } => {
            let deg = desc.deg as usize;
            let warp_nzs = warp_nzs as usize;
            let rows = rows as usize;
            if warp_nzs == 0 || rows == 0 || deg == 0 {
                return Err(Error::BadDescriptor(format!(
                    "pattern block has deg={deg}, warp_nzs={warp_nzs}, rows={rows}"
                )));
            }
            let warps_per_row = deg.div_ceil(warp_nzs);
            for slot in 0..w {
                let row_in_block = slot / warps_per_row;
                let chunk = slot % warps_per_row;
                if row_in_block >= rows {
                    chunks.push(None);
                    continue;
                }
                let offset = chunk * warp_nzs;
                let len = warp_nzs.min(deg - offset);
                chunks.push(Some(WarpChunk {
                    row: desc.row as usize + row_in_block,
                    nz_start: desc.loc as usize + row_in_block * deg + offset,
                    len,
                }));
            }
        }
        BlockKind::Oversized { nnz } => {
            let nnz = nnz as usize;
            if nnz == 0 {
                return Err(Error::BadDescriptor("oversized block with zero nonzeros".into()));
            }
            let base = nnz / w;
            let rem = nnz % w;
            let mut start = 0usize;
            for slot in 0..w {
                let len = base + usize::from(slot < rem);
                if len == 0 {
                    chunks.push(None);
                    continue;
                }
                chunks.push(Some(WarpChunk {
                    row: desc.row as usize,
                    nz_start: desc.loc as usize + start,
                    len,
                }));
                start += len;
            }
        }
    }
    Ok(chunks)
}

/// Shared body of the block-level simulator and its trace-only variant.
///
/// Accumulation happens at three levels: each active lane sums its
/// column over a warp's chunk (registers), warps of the same row merge
/// into a shared row buffer padded to round_dim (block-shared atomics,
/// warp-id order), and rows split across blocks merge into the output
/// (global atomics, block-id order).
fn run_block_partition(
    sorted: &CsrMatrix,
    x: Option<&DenseMatrix>,
    blocks: &[BlockDescriptor],
    plan: &CombinedWarpPlan,
    cfg: &PartitionConfig,
) -> Result<(Option<DenseMatrix>, ExecTrace)> {
    if let Some(x) = x {
        if sorted.n_cols != x.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "sparse matrix has {} columns, dense operand has {} rows",
                sorted.n_cols, x.n_rows
            )));
        }
        if plan.col_dim != x.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "plan covers col_dim {}, dense operand has {} columns",
                plan.col_dim, x.n_cols
            )));
        }
    }
    let col_dim = plan.col_dim;
    let nnz = sorted.nnz();

    let mut y = x.map(|_| DenseMatrix::zeros(sorted.n_rows, col_dim));
    let mut row_written = vec![false; sorted.n_rows];
    let mut row_buffer = vec![0.0f32; plan.round_dim];
    let mut traces = Vec::with_capacity(blocks.len());
    let mut totals = TraceTotals { nnz: 0, ..Default::default() };

    for desc in blocks {
        let chunks = block_warp_chunks(desc, cfg)?;
        let mut per_warp_nnz = vec![0u64; cfg.max_block_warps];
        let mut shared_atomic_adds = 0u64;
        let mut global_atomic_adds = 0u64;

        for (slot, chunk) in chunks.iter().enumerate() {
            let Some(chunk) = chunk else { continue };
            if chunk.row >= sorted.n_rows || chunk.nz_start + chunk.len > nnz {
                return Err(Error::BadDescriptor(format!(
                    "block at loc {} references out-of-range nonzeros",
                    desc.loc
                )));
            }
            if chunk.nz_start < sorted.row_ptr[chunk.row]
                || chunk.nz_start + chunk.len > sorted.row_ptr[chunk.row + 1]
            {
                return Err(Error::BadDescriptor(format!(
                    "block at loc {} assigns nonzeros outside row {}",
                    desc.loc, chunk.row
                )));
            }
            per_warp_nnz[slot] = chunk.len as u64;
        }

        // Process each row of the block: lane accumulation per warp,
        // then a shared-buffer merge in ascending warp order.
        let mut slot = 0usize;
        while slot < chunks.len() {
            let Some(first) = &chunks[slot] else {
                slot += 1;
                continue;
            };
            let row = first.row;
            row_buffer[..col_dim].fill(0.0);
            let mut warps_on_row = 0usize;

            while slot < chunks.len() {
                let Some(chunk) = &chunks[slot] else { break };
                if chunk.row != row {
                    break;
                }
                if let (Some(x), Some(_)) = (x, y.as_ref()) {
                    for nz in chunk.nz_start..chunk.nz_start + chunk.len {
                        let j = sorted.col_idx[nz] as usize;
                        let v = sorted.values[nz];
                        let x_row = x.row(j);
                        // L1: every active lane k accumulates v * x[j][k].
                        // L2: merge into the shared row buffer.
                        for k in 0..col_dim {
                            row_buffer[k] += v * x_row[k];
                        }
                    }
                }
                warps_on_row += 1;
                slot += 1;
            }
            if warps_on_row > 1 {
                shared_atomic_adds += (warps_on_row as u64 - 1) * col_dim as u64;
            }

            // L3: first block of a row writes, later blocks merge.
            if row_written[row] {
                global_atomic_adds += col_dim as u64;
                if let Some(y) = y.as_mut() {
                    let out = y.row_mut(row);
                    for k in 0..col_dim {
                        out[k] += row_buffer[k];
                    }
                }
            } else {
                row_written[row] = true;
                if let Some(y) = y.as_mut() {
                    y.row_mut(row)[..col_dim].copy_from_slice(&row_buffer[..col_dim]);
                }
            }
        }

        totals.nnz += per_warp_nnz.iter().sum::<u64>();
        totals.warps_launched += cfg.max_block_warps as u64;
        totals.active_warps += per_warp_nnz.iter().filter(|&&n| n > 0).count() as u64;
        totals.shared_atomic_adds += shared_atomic_adds;
        totals.global_atomic_adds += global_atomic_adds;
        traces.push(BlockTrace {
            descriptor: Some(*desc),
            per_warp_nnz,
            shared_atomic_adds,
            global_atomic_adds,
        });
    }

    Ok((y, ExecTrace { blocks: traces, totals }))
}

/// Simulate the block-level SpMM over a degree-sorted matrix.
///
/// The result stays in sorted row order; use
/// [`restore_rows`](crate::sort::restore_rows) to undo the permutation.
pub fn simulate_block_spmm(
    sorted: &CsrMatrix,
    x: &DenseMatrix,
    blocks: &[BlockDescriptor],
    plan: &CombinedWarpPlan,
    cfg: &PartitionConfig,
) -> Result<(DenseMatrix, ExecTrace)> {
    let (y, trace) = run_block_partition(sorted, Some(x), blocks, plan, cfg)?;
    Ok((y.expect("numeric run returns a matrix"), trace))
}

/// Workload trace of a block-level run without computing the product.
pub fn trace_block_run(
    sorted: &CsrMatrix,
    blocks: &[BlockDescriptor],
    plan: &CombinedWarpPlan,
    cfg: &PartitionConfig,
) -> Result<ExecTrace> {
    let (_, trace) = run_block_partition(sorted, None, blocks, plan, cfg)?;
    Ok(trace)
}

fn check_warp_tasks(a: &CsrMatrix, warps: &[WarpTask], cfg: &PartitionConfig) -> Result<()> {
    for t in warps {
        let row = t.row as usize;
        if row >= a.n_rows {
            return Err(Error::BadDescriptor(format!("warp task row {row} out of range")));
        }
        if t.len as usize > cfg.max_warp_nzs {
            return Err(Error::BadDescriptor(format!(
                "warp task of {} nonzeros exceeds max_warp_nzs {}",
                t.len, cfg.max_warp_nzs
            )));
        }
        if (t.col + t.len) as usize > a.degree(row) {
            return Err(Error::BadDescriptor(format!(
                "warp task covers nonzeros past the end of row {row}"
            )));
        }
    }
    Ok(())
}

/// Shared body of the warp-level baseline simulator.
fn run_warp_partition(
    a: &CsrMatrix,
    x: Option<&DenseMatrix>,
    warps: &[WarpTask],
    cfg: &PartitionConfig,
) -> Result<(Option<DenseMatrix>, ExecTrace)> {
    let col_dim = match x {
        Some(x) => {
            if a.n_cols != x.n_rows {
                return Err(Error::DimensionMismatch(format!(
                    "sparse matrix has {} columns, dense operand has {} rows",
                    a.n_cols, x.n_rows
                )));
            }
            x.n_cols
        }
        None => 0,
    };
    check_warp_tasks(a, warps, cfg)?;

    let mut y = x.map(|_| DenseMatrix::zeros(a.n_rows, col_dim));
    let mut traces = Vec::with_capacity(warps.len());
    let mut totals = TraceTotals::default();
    let iters_per_task = col_dim.div_ceil(WARP_SIZE) as u64;

    for t in warps {
        let row = t.row as usize;
        let start = a.row_ptr[row] + t.col as usize;

        if let (Some(x), Some(y)) = (x, y.as_mut()) {
            // One warp strides over the column dimension; with the
            // deterministic ordered-atomic model this is a plain
            // accumulate in task order.
            let out = y.row_mut(row);
            for nz in start..start + t.len as usize {
                let j = a.col_idx[nz] as usize;
                let v = a.values[nz];
                let x_row = x.row(j);
                for k in 0..col_dim {
                    out[k] += v * x_row[k];
                }
            }
        }

        // Chunks after the first of a row merge atomically.
        let global_atomic_adds = if t.col > 0 { col_dim as u64 } else { 0 };
        totals.nnz += t.len as u64;
        totals.warps_launched += 1;
        totals.active_warps += u64::from(t.len > 0);
        totals.global_atomic_adds += global_atomic_adds;
        totals.inner_loop_iters += iters_per_task;
        traces.push(BlockTrace {
            descriptor: None,
            per_warp_nnz: vec![t.len as u64],
            shared_atomic_adds: 0,
            global_atomic_adds,
        });
    }

    Ok((y, ExecTrace { blocks: traces, totals }))
}

/// Simulate the warp-level baseline: one warp per task, looping over the
/// column dimension in strides of 32.
pub fn simulate_warp_spmm(
    a: &CsrMatrix,
    x: &DenseMatrix,
    warps: &[WarpTask],
    cfg: &PartitionConfig,
) -> Result<(DenseMatrix, ExecTrace)> {
    let (y, trace) = run_warp_partition(a, Some(x), warps, cfg)?;
    Ok((y.expect("numeric run returns a matrix"), trace))
}

/// Workload trace of a warp-level run at a given column dimension,
/// without computing the product.
pub fn trace_warp_run(
    a: &CsrMatrix,
    warps: &[WarpTask],
    col_dim: usize,
    cfg: &PartitionConfig,
) -> Result<ExecTrace> {
    check_warp_tasks(a, warps, cfg)?;
    let mut traces = Vec::with_capacity(warps.len());
    let mut totals = TraceTotals::default();
    let iters_per_task = col_dim.div_ceil(WARP_SIZE) as u64;
    for t in warps {
        let global_atomic_adds = if t.col > 0 { col_dim as u64 } else { 0 };
        totals.nnz += t.len as u64;
        totals.warps_launched += 1;
        totals.active_warps += u64::from(t.len > 0);
        totals.global_atomic_adds += global_atomic_adds;
        totals.inner_loop_iters += iters_per_task;
        traces.push(BlockTrace {
            descriptor: None,
            per_warp_nnz: vec![t.len as u64],
            shared_atomic_adds: 0,
            global_atomic_adds,
        });
    }
    Ok(ExecTrace { blocks: traces, totals })
}

/// Full pipeline: degree-sort, partition, simulate, and restore the
/// original row order.
pub fn spmm(a: &CsrMatrix, x: &DenseMatrix, cfg: &PartitionConfig) -> Result<DenseMatrix> {
    if a.n_cols != x.n_rows {
        return Err(Error::DimensionMismatch(format!(
            "sparse matrix has {} columns, dense operand has {} rows",
            a.n_cols, x.n_rows
        )));
    }
    if x.n_cols == 0 {
        return Err(Error::DimensionMismatch("dense operand has no columns".into()));
    }
    let (sorted, perm) = sort_rows_by_degree(a);
    let patterns = get_partition_patterns(cfg);
    let blocks = block_partition(&sorted, &patterns, cfg)?;
    let plan = plan_combined_warps(x.n_cols, cfg);
    let (y_sorted, _) = simulate_block_spmm(&sorted, x, &blocks, &plan, cfg)?;
    restore_rows(&y_sorted, &perm)
}

/// Convenience wrapper around the warp-level baseline on an unsorted
/// canonical matrix.
pub fn spmm_warp_baseline(
    a: &CsrMatrix,
    x: &DenseMatrix,
    cfg: &PartitionConfig,
) -> Result<DenseMatrix> {
    let warps = warp_partition(a, cfg.max_warp_nzs);
    let (y, _) = simulate_warp_spmm(a, x, &warps, cfg)?;
    Ok(y)
}
