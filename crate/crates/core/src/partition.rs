//! Block-level partitioning of a degree-sorted CSR matrix, the warp-level
//! baseline partitioner, and the packed 128-bit metadata records.
//!
//! A block handles up to `deg_bound = max_block_warps * max_warp_nzs`
//! nonzeros. Rows with degree at or below that bound are grouped whole
//! into blocks according to a per-degree pattern; heavier rows are split
//! across several blocks of `deg_bound` nonzeros each.

use serde::Serialize;

use crate::csr::CsrMatrix;
use crate::error::{Error, Result};

/// Threads per warp.
pub const WARP_SIZE: usize = 32;
/// Global-memory transaction and metadata record width, in bits.
pub const RECORD_BITS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PartitionConfig {
    pub max_block_warps: usize,
    pub max_warp_nzs: usize,
    pub warp_size: usize,
}

impl PartitionConfig {
    /// Pattern-table sizes beyond this reject the config outright.
    pub const MAX_DEG_BOUND: usize = 1 << 20;

    pub fn new(max_block_warps: usize, max_warp_nzs: usize) -> Result<Self> {
        if max_block_warps == 0 || max_warp_nzs == 0 {
            return Err(Error::InvalidParameter(
                "max_block_warps and max_warp_nzs must be at least 1".into(),
            ));
        }
        // Both quantities land in 16-bit halves of the info word.
        if max_block_warps > u16::MAX as usize || max_warp_nzs > u16::MAX as usize {
            return Err(Error::InvalidParameter(
                "max_block_warps and max_warp_nzs must fit in 16 bits".into(),
            ));
        }
        if max_block_warps * max_warp_nzs > Self::MAX_DEG_BOUND {
            return Err(Error::InvalidParameter(format!(
                "deg_bound {} exceeds the supported maximum {}",
                max_block_warps * max_warp_nzs,
                Self::MAX_DEG_BOUND
            )));
        }
        Ok(Self { max_block_warps, max_warp_nzs, warp_size: WARP_SIZE })
    }

    /// Largest per-row nonzero count a single block handles whole.
    pub fn deg_bound(&self) -> usize {
        self.max_block_warps * self.max_warp_nzs
    }

    /// Physical threads per block.
    pub fn block_dim(&self) -> usize {
        self.max_block_warps * self.warp_size
    }
}

impl Default for PartitionConfig {
    /// max_block_warps = 12, max_warp_nzs = 32.
    fn default() -> Self {
        Self { max_block_warps: 12, max_warp_nzs: 32, warp_size: WARP_SIZE }
    }
}

/// Assignment for one degree: rows per block and nonzeros per warp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PatternEntry {
    pub block_rows: usize,
    pub warp_nzs: usize,
}

/// Per-degree patterns for degrees 1..=deg_bound.
#[derive(Debug, Clone)]
pub struct PatternTable {
    deg_bound: usize,
    entries: Vec<PatternEntry>,
}

impl PatternTable {
    pub fn deg_bound(&self) -> usize {
        self.deg_bound
    }

    /// Pattern for `deg`; None outside 1..=deg_bound.
    pub fn entry(&self, deg: usize) -> Option<PatternEntry> {
        if deg >= 1 && deg <= self.deg_bound {
            Some(self.entries[deg - 1])
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, PatternEntry)> + '_ {
        self.entries.iter().enumerate().map(|(i, &e)| (i + 1, e))
    }
}

/// Build the pattern table for all degrees 1..=deg_bound.
///
/// Factors of `max_block_warps` are scanned ascending with an index that
/// only moves forward as degrees increase: the first factor `f` with
/// `f * max_warp_nzs >= deg` yields `block_rows = max_block_warps / f`
/// and `warp_nzs = ceil(deg / f)`.
pub fn get_partition_patterns(cfg: &PartitionConfig) -> PatternTable {
    let deg_bound = cfg.deg_bound();
    let factors: Vec<usize> =
        (1..=cfg.max_block_warps).filter(|&f| cfg.max_block_warps.is_multiple_of(f)).collect();

    let mut entries = Vec::with_capacity(deg_bound);
    let mut i = 0usize;
    let mut deg = 1usize;
    while deg <= deg_bound {
        if factors[i] * cfg.max_warp_nzs >= deg {
            let f = factors[i];
            entries.push(PatternEntry {
                block_rows: cfg.max_block_warps / f,
                warp_nzs: deg.div_ceil(f),
            });
            deg += 1;
        } else {
            i += 1;
        }
    }
    PatternTable { deg_bound, entries }
}

/// One 128-bit block-partition metadata record.
///
/// For `deg <= deg_bound`, `info` packs warp_nzs in the high 16 bits and
/// the number of rows handled in the low 16 bits. For `deg > deg_bound`,
/// `info` is the count of nonzeros assigned to this block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockDescriptor {
    /// Degree of the rows handled by this block.
    pub deg: u32,
    /// Index of the block's first nonzero in the sorted nonzero array.
    pub loc: u32,
    /// First row index, in sorted order.
    pub row: u32,
    pub info: u32,
}

/// Decoded view of [`BlockDescriptor::info`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Pattern { warp_nzs: u32, rows: u32 },
    Oversized { nnz: u32 },
}

impl BlockDescriptor {
    /// Descriptor for whole rows handled under a pattern (deg <= deg_bound).
    pub fn pattern(deg: u32, loc: u32, row: u32, warp_nzs: u32, rows: u32) -> Result<Self> {
        if warp_nzs > u16::MAX as u32 {
            return Err(Error::FieldOverflow(format!("warp_nzs {warp_nzs} exceeds 16 bits")));
        }
        if rows > u16::MAX as u32 {
            return Err(Error::FieldOverflow(format!("rows {rows} exceeds 16 bits")));
        }
        Ok(Self { deg, loc, row, info: (warp_nzs << 16) | rows })
    }

    /// Descriptor for a slice of an oversized row (deg > deg_bound).
    pub fn oversized(deg: u32, loc: u32, row: u32, nnz: u32) -> Self {
        Self { deg, loc, row, info: nnz }
    }

    /// Interpret `info` with respect to the config's deg_bound.
    pub fn kind(&self, deg_bound: usize) -> BlockKind {
        if self.deg as usize <= deg_bound {
            BlockKind::Pattern { warp_nzs: self.info >> 16, rows: self.info & 0xFFFF }
        } else {
            BlockKind::Oversized { nnz: self.info }
        }
    }

    /// Nonzeros covered by this block.
    pub fn block_nnz(&self, deg_bound: usize) -> u64 {
        match self.kind(deg_bound) {
            BlockKind::Pattern { rows, .. } => self.deg as u64 * rows as u64,
            BlockKind::Oversized { nnz } => nnz as u64,
        }
    }
}

/// Pack a descriptor into one 128-bit word: fields (deg, loc, row, info)
/// in ascending byte order, each 32-bit little-endian.
pub fn pack_descriptor(d: &BlockDescriptor) -> u128 {
    d.deg as u128 | (d.loc as u128) << 32 | (d.row as u128) << 64 | (d.info as u128) << 96
}

/// Inverse of [`pack_descriptor`], validating the info layout for the
/// config's deg_bound.
pub fn unpack_descriptor(word: u128, cfg: &PartitionConfig) -> Result<BlockDescriptor> {
    let d = BlockDescriptor {
        deg: word as u32,
        loc: (word >> 32) as u32,
        row: (word >> 64) as u32,
        info: (word >> 96) as u32,
    };
    let deg_bound = cfg.deg_bound();
    match d.kind(deg_bound) {
        BlockKind::Pattern { rows, .. } => {
            if rows == 0 {
                return Err(Error::BadDescriptor(format!(
                    "pattern block for degree {} handles zero rows",
                    d.deg
                )));
            }
        }
        BlockKind::Oversized { nnz } => {
            if nnz == 0 || nnz as usize > deg_bound {
                return Err(Error::BadDescriptor(format!(
                    "oversized block carries {nnz} nonzeros, outside 1..={deg_bound}"
                )));
            }
        }
    }
    Ok(d)
}

/// Serialize descriptors as consecutive little-endian 128-bit records.
pub fn descriptors_to_bytes(blocks: &[BlockDescriptor]) -> Vec<u8> {
    let mut out = Vec::with_capacity(blocks.len() * 16);
    for b in blocks {
        out.extend_from_slice(&pack_descriptor(b).to_le_bytes());
    }
    out
}

/// Inverse of [`descriptors_to_bytes`].
pub fn descriptors_from_bytes(
    bytes: &[u8],
    cfg: &PartitionConfig,
) -> Result<Vec<BlockDescriptor>> {
    if !bytes.len().is_multiple_of(16) {
        return Err(Error::BadDescriptor(format!(
            "descriptor array length {} is not a multiple of 16 bytes",
            bytes.len()
        )));
    }
    bytes
        .chunks_exact(16)
        .map(|chunk| {
            unpack_descriptor(u128::from_le_bytes(chunk.try_into().unwrap()), cfg)
        })
        .collect()
}

/// One warp-level metadata record: a chunk of consecutive nonzeros in a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WarpTask {
    pub row: u32,
    /// Offset of the first covered nonzero within the row's segment.
    pub col: u32,
    pub len: u32,
}

/// Serialize a warp task as 128 bits: (row, col, len, zero padding).
pub fn pack_warp_task(t: &WarpTask) -> u128 {
    t.row as u128 | (t.col as u128) << 32 | (t.len as u128) << 64
}

/// Serialize warp tasks as padded little-endian 128-bit records.
pub fn warp_tasks_to_bytes(tasks: &[WarpTask]) -> Vec<u8> {
    let mut out = Vec::with_capacity(tasks.len() * 16);
    for t in tasks {
        out.extend_from_slice(&pack_warp_task(t).to_le_bytes());
    }
    out
}

/// Partition a degree-sorted matrix into block descriptors.
///
/// Descriptors come out in nonzero order and tile `[0, nnz)` exactly.
/// Degree-0 rows produce no descriptor; residual groups with zero rows or
/// zero nonzeros are never emitted.
pub fn block_partition(
    sorted: &CsrMatrix,
    patterns: &PatternTable,
    cfg: &PartitionConfig,
) -> Result<Vec<BlockDescriptor>> {
    let deg_bound = cfg.deg_bound();
    if patterns.deg_bound() != deg_bound {
        return Err(Error::InvalidParameter(format!(
            "pattern table was built for deg_bound {}, config has {deg_bound}",
            patterns.deg_bound()
        )));
    }

    let n = sorted.n_rows;
    for i in 1..n {
        if sorted.degree(i) < sorted.degree(i - 1) {
            return Err(Error::UnsortedRows { row: i });
        }
    }

    let as_u32 = |v: usize, what: &str| -> Result<u32> {
        u32::try_from(v).map_err(|_| Error::FieldOverflow(format!("{what} {v} exceeds 32 bits")))
    };

    let mut blocks = Vec::new();
    let mut row = 0usize;
    let mut loc = 0usize;

    while row < n {
        let deg = sorted.degree(row);
        let mut run = 1usize;
        while row + run < n && sorted.degree(row + run) == deg {
            run += 1;
        }

        if deg == 0 {
            row += run;
            continue;
        }

        if deg <= deg_bound {
            let entry = patterns.entry(deg).expect("deg within table range");
            let mut rows_remaining = run;
            while rows_remaining >= entry.block_rows {
                blocks.push(BlockDescriptor::pattern(
                    as_u32(deg, "deg")?,
                    as_u32(loc, "loc")?,
                    as_u32(row, "row")?,
                    as_u32(entry.warp_nzs, "warp_nzs")?,
                    as_u32(entry.block_rows, "rows")?,
                )?);
                rows_remaining -= entry.block_rows;
                row += entry.block_rows;
                loc += entry.block_rows * deg;
            }
            if rows_remaining > 0 {
                blocks.push(BlockDescriptor::pattern(
                    as_u32(deg, "deg")?,
                    as_u32(loc, "loc")?,
                    as_u32(row, "row")?,
                    as_u32(entry.warp_nzs, "warp_nzs")?,
                    as_u32(rows_remaining, "rows")?,
                )?);
                row += rows_remaining;
                loc += rows_remaining * deg;
            }
        } else {
            for _ in 0..run {
                let mut deg_remaining = deg;
                while deg_remaining >= deg_bound {
                    blocks.push(BlockDescriptor::oversized(
                        as_u32(deg, "deg")?,
                        as_u32(loc, "loc")?,
                        as_u32(row, "row")?,
                        as_u32(deg_bound, "info")?,
                    ));
                    deg_remaining -= deg_bound;
                    loc += deg_bound;
                }
                if deg_remaining > 0 {
                    blocks.push(BlockDescriptor::oversized(
                        as_u32(deg, "deg")?,
                        as_u32(loc, "loc")?,
                        as_u32(row, "row")?,
                        as_u32(deg_remaining, "info")?,
                    ));
                    loc += deg_remaining;
                }
                row += 1;
            }
        }
    }

    debug_assert_eq!(loc, sorted.nnz());
    Ok(blocks)
}

/// Baseline partitioner: split each row into consecutive chunks of at
/// most `max_warp_nzs` nonzeros, one warp task per chunk.
pub fn warp_partition(a: &CsrMatrix, max_warp_nzs: usize) -> Vec<WarpTask> {
    assert!(max_warp_nzs >= 1, "max_warp_nzs must be at least 1");
    let mut tasks = Vec::new();
    for row in 0..a.n_rows {
        let deg = a.degree(row);
        let mut col = 0usize;
        while col < deg {
            let len = max_warp_nzs.min(deg - col);
            tasks.push(WarpTask { row: row as u32, col: col as u32, len: len as u32 });
            col += len;
        }
    }
    tasks
}

/// Metadata storage of the block partition relative to the warp
/// partition. Both record kinds occupy 128 bits, so this is the
/// descriptor-count ratio.
pub fn storage_ratio(blocks: &[BlockDescriptor], warps: &[WarpTask]) -> Result<f64> {
    if warps.is_empty() {
        return Err(Error::EmptyPartition);
    }
    Ok((blocks.len() * RECORD_BITS) as f64 / ((warps.len() * RECORD_BITS) as f64))
}
