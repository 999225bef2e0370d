//! Analytic memory model: coalesced-transaction counting over dense rows,
//! shared-memory padding, and per-warp workload balance.
//!
//! The model prices accesses to the dense operand and output only. A
//! physical 32-lane warp touching a chunk of a dense row costs
//! `ceil(span of touched bytes, extended to segment boundaries / 128)`
//! transactions, with 4-byte elements and rows assumed 128-byte aligned
//! unless a base offset says otherwise. The looped-warp strategy issues
//! one access per inner-loop iteration per nonzero; the combined-warp
//! strategy issues one access per physical warp per nonzero, and one
//! row write per block instead of one per warp task. Transaction counts
//! come out equal in the aligned case; the strategies differ in issue
//! counts, and reports state exactly that.

use serde::Serialize;

use crate::csr::CsrMatrix;
use crate::error::{Error, Result};
use crate::partition::{
    block_partition, get_partition_patterns, warp_partition, BlockDescriptor, BlockKind,
    PartitionConfig, WARP_SIZE,
};
use crate::sim::{plan_combined_warps, trace_block_run, trace_warp_run, ExecTrace};
use crate::sort::sort_rows_by_degree;

/// Global-memory transaction granularity in bytes.
pub const SEGMENT_BYTES: usize = 128;
/// Dense element width in bytes.
pub const ELEMENT_BYTES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    BlockCombined,
    WarpLooped,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block-combined" => Ok(Strategy::BlockCombined),
            "warp-looped" => Ok(Strategy::WarpLooped),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy `{other}` (expected block-combined or warp-looped)"
            ))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::BlockCombined => write!(f, "block-combined"),
            Strategy::WarpLooped => write!(f, "warp-looped"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MemReport {
    pub read_transactions: u64,
    pub write_transactions: u64,
    pub warp_instruction_issues: u64,
    /// Bytes per transaction, fixed at 128.
    pub segment_size: u32,
}

/// Smallest multiple of 32 that is >= col_dim.
pub fn shared_padding(col_dim: usize) -> usize {
    assert!(col_dim >= 1, "col_dim must be at least 1");
    col_dim.div_ceil(32) * 32
}

/// Transactions for one warp access covering columns [a, b) of a row
/// whose base sits `offset` bytes past a segment boundary.
fn span_transactions(col_start: usize, col_end: usize, offset: usize) -> u64 {
    debug_assert!(col_end > col_start);
    let first = offset + col_start * ELEMENT_BYTES;
    let last = offset + col_end * ELEMENT_BYTES - 1;
    (last / SEGMENT_BYTES - first / SEGMENT_BYTES + 1) as u64
}

/// Transactions for one full sweep over the column dimension, chunked in
/// 32-column physical-warp accesses.
fn sweep_transactions(col_dim: usize, offset: usize) -> u64 {
    let mut total = 0u64;
    let mut col = 0usize;
    while col < col_dim {
        let end = (col + WARP_SIZE).min(col_dim);
        total += span_transactions(col, end, offset);
        col = end;
    }
    total
}

struct PartitionShape {
    nnz: u64,
    /// Warp tasks (warp-looped) or rows covered summed over blocks
    /// (block-combined), i.e. the number of output-row write sweeps.
    write_sweeps: u64,
}

fn mem_report(shape: &PartitionShape, col_dim: usize, offset: usize) -> MemReport {
    let c = col_dim.div_ceil(WARP_SIZE) as u64;
    let per_sweep = sweep_transactions(col_dim, offset);
    MemReport {
        read_transactions: shape.nnz * per_sweep,
        write_transactions: shape.write_sweeps * per_sweep,
        warp_instruction_issues: shape.nnz * c + shape.write_sweeps * c,
        segment_size: SEGMENT_BYTES as u32,
    }
}

fn block_shape(blocks: &[BlockDescriptor], deg_bound: usize, nnz: usize) -> PartitionShape {
    let rows_covered: u64 = blocks
        .iter()
        .map(|b| match b.kind(deg_bound) {
            BlockKind::Pattern { rows, .. } => rows as u64,
            BlockKind::Oversized { .. } => 1,
        })
        .sum();
    PartitionShape { nnz: nnz as u64, write_sweeps: rows_covered }
}

/// Count modeled global-memory transactions and warp issues for one
/// strategy, with dense rows assumed segment-aligned.
pub fn count_transactions(
    a: &CsrMatrix,
    col_dim: usize,
    strategy: Strategy,
    cfg: &PartitionConfig,
) -> Result<MemReport> {
    count_transactions_with_offset(a, col_dim, strategy, cfg, 0)
}

/// [`count_transactions`] with each dense row's base shifted
/// `row_base_offset` bytes past a 128-byte boundary.
pub fn count_transactions_with_offset(
    a: &CsrMatrix,
    col_dim: usize,
    strategy: Strategy,
    cfg: &PartitionConfig,
    row_base_offset: usize,
) -> Result<MemReport> {
    if col_dim == 0 {
        return Err(Error::InvalidParameter("col_dim must be at least 1".into()));
    }
    let shape = match strategy {
        Strategy::WarpLooped => {
            let tasks = warp_partition(a, cfg.max_warp_nzs);
            PartitionShape { nnz: a.nnz() as u64, write_sweeps: tasks.len() as u64 }
        }
        Strategy::BlockCombined => {
            let (sorted, _) = sort_rows_by_degree(a);
            let patterns = get_partition_patterns(cfg);
            let blocks = block_partition(&sorted, &patterns, cfg)?;
            block_shape(&blocks, cfg.deg_bound(), a.nnz())
        }
    };
    Ok(mem_report(&shape, col_dim, row_base_offset))
}

/// Per-warp workload statistics from an execution trace.
///
/// `mean`, `min`, and `imbalance` are taken over warps that received
/// work; launched-but-idle warp slots show up in `active_warp_fraction`.
#[derive(Debug, Clone, Serialize)]
pub struct BalanceReport {
    pub per_warp_nnz: Vec<u64>,
    pub mean: f64,
    pub max: u64,
    pub min: u64,
    /// max / mean, >= 1 whenever any warp has work.
    pub imbalance: f64,
    pub active_warp_fraction: f64,
}

pub fn balance_report(trace: &ExecTrace) -> BalanceReport {
    let per_warp_nnz: Vec<u64> = trace.per_warp_nnz().collect();
    let launched = per_warp_nnz.len();
    let active: Vec<u64> = per_warp_nnz.iter().copied().filter(|&n| n > 0).collect();
    let nnz: u64 = active.iter().sum();

    let (mean, max, min, imbalance) = if active.is_empty() {
        (0.0, 0, 0, 0.0)
    } else {
        let mean = nnz as f64 / active.len() as f64;
        let max = *active.iter().max().unwrap();
        let min = *active.iter().min().unwrap();
        (mean, max, min, max as f64 / mean)
    };
    let active_warp_fraction =
        if launched == 0 { 0.0 } else { active.len() as f64 / launched as f64 };

    BalanceReport { per_warp_nnz, mean, max, min, imbalance, active_warp_fraction }
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyMetrics {
    pub mem: MemReport,
    pub balance: BalanceReport,
}

/// One sweep row: both strategies evaluated on the same matrix at one
/// dense column dimension.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub col_dim: usize,
    pub block: StrategyMetrics,
    pub warp: StrategyMetrics,
}

/// Evaluate both strategies over a list of dense column dimensions.
pub fn compare_strategies(
    a: &CsrMatrix,
    col_dims: &[usize],
    cfg: &PartitionConfig,
) -> Result<Vec<ComparisonRow>> {
    let (sorted, _) = sort_rows_by_degree(a);
    let patterns = get_partition_patterns(cfg);
    let blocks = block_partition(&sorted, &patterns, cfg)?;
    let tasks = warp_partition(a, cfg.max_warp_nzs);

    let bshape = block_shape(&blocks, cfg.deg_bound(), a.nnz());
    let wshape = PartitionShape { nnz: a.nnz() as u64, write_sweeps: tasks.len() as u64 };

    let mut rows = Vec::with_capacity(col_dims.len());
    for &col_dim in col_dims {
        if col_dim == 0 {
            return Err(Error::InvalidParameter("col_dim must be at least 1".into()));
        }
        let plan = plan_combined_warps(col_dim, cfg);
        let block_trace = trace_block_run(&sorted, &blocks, &plan, cfg)?;
        let warp_trace = trace_warp_run(a, &tasks, col_dim, cfg)?;
        rows.push(ComparisonRow {
            col_dim,
            block: StrategyMetrics {
                mem: mem_report(&bshape, col_dim, 0),
                balance: balance_report(&block_trace),
            },
            warp: StrategyMetrics {
                mem: mem_report(&wshape, col_dim, 0),
                balance: balance_report(&warp_trace),
            },
        });
    }
    Ok(rows)
}
