//! Report structures and JSON/CSV emission.
//!
//! Every report carries `schema_version: 1`; the JSON shapes are
//! documented in `docs/report-schema.json` at the repository root.

use std::collections::BTreeMap;

use serde::Serialize;

use blockspmm::{
    BalanceReport, DegreeStats, MemReport, PatternEntry, TraceTotals,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct InputDesc {
    /// File path, or `synth:<n>,<avg>,<skew>`.
    pub source: String,
    pub format: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    pub normalized: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigDesc {
    pub max_block_warps: usize,
    pub max_warp_nzs: usize,
    pub warp_size: usize,
    pub deg_bound: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeStatsOut {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub max_over_mean: f64,
    pub histogram: BTreeMap<usize, usize>,
}

impl From<&DegreeStats> for DegreeStatsOut {
    fn from(s: &DegreeStats) -> Self {
        Self {
            min: s.min,
            max: s.max,
            mean: s.mean,
            max_over_mean: s.max_over_mean,
            histogram: s.histogram.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternOut {
    pub deg: usize,
    pub block_rows: usize,
    pub warp_nzs: usize,
}

impl PatternOut {
    pub fn from_entry(deg: usize, e: PatternEntry) -> Self {
        Self { deg, block_rows: e.block_rows, warp_nzs: e.warp_nzs }
    }
}

/// Balance statistics without the raw per-warp array.
#[derive(Debug, Clone, Serialize)]
pub struct BalanceSummary {
    pub warps_launched: usize,
    pub active_warp_fraction: f64,
    pub mean_nnz: f64,
    pub max_nnz: u64,
    pub min_nnz: u64,
    pub imbalance: f64,
}

impl From<&BalanceReport> for BalanceSummary {
    fn from(b: &BalanceReport) -> Self {
        Self {
            warps_launched: b.per_warp_nnz.len(),
            active_warp_fraction: b.active_warp_fraction,
            mean_nnz: b.mean,
            max_nnz: b.max,
            min_nnz: b.min,
            imbalance: b.imbalance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub mode: String,
    pub pass: bool,
    pub max_rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub schema_version: u32,
    pub command: String,
    pub input: InputDesc,
    pub config: ConfigDesc,
    pub degree_stats: DegreeStatsOut,
    pub pattern_table: Vec<PatternOut>,
    pub blocks: usize,
    pub warps: usize,
    /// None when the matrix has no nonzeros.
    pub storage_ratio: Option<f64>,
    pub preprocess_ms: f64,
    pub blocks_file: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanOut {
    pub c: usize,
    pub round_dim: usize,
    pub block_dim: usize,
    pub combined_warps_per_block: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub command: String,
    pub input: InputDesc,
    pub config: ConfigDesc,
    pub col_dim: usize,
    pub plan: PlanOut,
    pub trace_totals: TraceTotals,
    pub balance: BalanceSummary,
    pub mem_block: MemReport,
    pub mem_warp: MemReport,
    pub oracle_check: Option<OracleCheck>,
    pub preprocess_ms: f64,
    pub simulate_ms: f64,
    pub matrix_file: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRowOut {
    pub col_dim: usize,
    pub strategy: String,
    pub read_transactions: u64,
    pub write_transactions: u64,
    pub warp_instruction_issues: u64,
    pub segment_size: u32,
    pub warps_launched: usize,
    pub active_warp_fraction: f64,
    pub mean_nnz: f64,
    pub max_nnz: u64,
    pub min_nnz: u64,
    pub imbalance: f64,
}

impl CompareRowOut {
    pub fn new(col_dim: usize, strategy: &str, mem: &MemReport, b: &BalanceSummary) -> Self {
        Self {
            col_dim,
            strategy: strategy.to_string(),
            read_transactions: mem.read_transactions,
            write_transactions: mem.write_transactions,
            warp_instruction_issues: mem.warp_instruction_issues,
            segment_size: mem.segment_size,
            warps_launched: b.warps_launched,
            active_warp_fraction: b.active_warp_fraction,
            mean_nnz: b.mean_nnz,
            max_nnz: b.max_nnz,
            min_nnz: b.min_nnz,
            imbalance: b.imbalance,
        }
    }
}

pub const COMPARE_CSV_HEADER: &str = "col_dim,strategy,read_transactions,write_transactions,\
warp_instruction_issues,segment_size,warps_launched,active_warp_fraction,mean_nnz,max_nnz,\
min_nnz,imbalance";

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub command: String,
    pub input: InputDesc,
    pub config: ConfigDesc,
    pub sweep: Vec<usize>,
    pub rows: Vec<CompareRowOut>,
    pub preprocess_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GcnReport {
    pub schema_version: u32,
    pub command: String,
    pub input: InputDesc,
    pub config: ConfigDesc,
    pub col_dim: usize,
    pub out_features: usize,
    pub output_sum: f64,
    pub output_min: f64,
    pub output_max: f64,
    pub oracle_check: Option<OracleCheck>,
    pub matrix_file: Option<String>,
}

/// CSV rendering: compare reports become the fixed-header table, the
/// others flatten to `key,value` lines.
pub trait ToCsv {
    fn to_csv(&self) -> String;
}

fn flatten_json(prefix: &str, value: &serde_json::Value, out: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_json(&key, v, out);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_json(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn key_value_csv<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_value(value).expect("report serialization cannot fail");
    let mut pairs = Vec::new();
    flatten_json("", &json, &mut pairs);
    let mut out = String::from("key,value\n");
    for (k, v) in pairs {
        out.push_str(&k);
        out.push(',');
        out.push_str(v.trim_matches('"'));
        out.push('\n');
    }
    out
}

impl ToCsv for PartitionReport {
    fn to_csv(&self) -> String {
        key_value_csv(self)
    }
}

impl ToCsv for SimulateReport {
    fn to_csv(&self) -> String {
        key_value_csv(self)
    }
}

impl ToCsv for GcnReport {
    fn to_csv(&self) -> String {
        key_value_csv(self)
    }
}

impl ToCsv for CompareReport {
    fn to_csv(&self) -> String {
        let mut out = String::from(COMPARE_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.col_dim,
                r.strategy,
                r.read_transactions,
                r.write_transactions,
                r.warp_instruction_issues,
                r.segment_size,
                r.warps_launched,
                r.active_warp_fraction,
                r.mean_nnz,
                r.max_nnz,
                r.min_nnz,
                r.imbalance
            ));
        }
        out
    }
}
