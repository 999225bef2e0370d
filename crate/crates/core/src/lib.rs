//! Degree-sorted block-level SpMM partitioning with a deterministic
//! functional simulator of the GPU execution model and an analytic
//! memory-coalescing model.
//!
//! The pipeline: ingest a sparse matrix into canonical CSR, sort rows by
//! degree with a linear-time counting sort, group rows into block-level
//! metadata records (one 128-bit descriptor per thread block), map the
//! dense column dimension onto combined warps, and simulate the
//! block/warp execution with three-level accumulation. Everything is
//! CPU-side and bit-reproducible; GPU behavior is represented by counters
//! (atomic adds, warp issues, memory transactions), not timing.

pub mod csr;
pub mod dense;
pub mod error;
pub mod io;
pub mod mem;
pub mod partition;
pub mod sim;
pub mod sort;
pub mod synth;

pub use csr::{degree_stats, gcn_normalize, CsrMatrix, DegreeStats};
pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use io::{load_csr_snapshot, load_edge_list, load_matrix_market, save_csr_snapshot};
pub use mem::{
    balance_report, compare_strategies, count_transactions, count_transactions_with_offset,
    shared_padding, BalanceReport, ComparisonRow, MemReport, Strategy, StrategyMetrics,
};
pub use partition::{
    block_partition, descriptors_from_bytes, descriptors_to_bytes, get_partition_patterns,
    pack_descriptor, pack_warp_task, storage_ratio, unpack_descriptor, warp_partition,
    warp_tasks_to_bytes, BlockDescriptor, BlockKind, PartitionConfig, PatternEntry, PatternTable,
    WarpTask, RECORD_BITS, WARP_SIZE,
};
pub use sim::{
    plan_combined_warps, simulate_block_spmm, simulate_warp_spmm, spmm, spmm_warp_baseline,
    trace_block_run, trace_warp_run, BlockTrace, CombinedWarpPlan, ExecTrace, LaneAssignment,
    TraceTotals,
};
pub use sort::{permute_rows, restore_rows, sort_rows_by_degree, RowPermutation};
pub use synth::synth_power_law;
