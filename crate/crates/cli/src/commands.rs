//! Command implementations shared by the binary and the integration
//! tests. Each command ingests one input, runs its stage of the
//! pipeline, and returns a serializable report.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blockspmm::{
    balance_report, block_partition, compare_strategies, count_transactions, degree_stats,
    gcn_normalize, get_partition_patterns, load_csr_snapshot, load_edge_list, load_matrix_market,
    plan_combined_warps, restore_rows, simulate_block_spmm, sort_rows_by_degree, storage_ratio,
    synth_power_law, warp_partition, CsrMatrix, DenseMatrix, PartitionConfig, Strategy,
};

use crate::gcn::gcn_layer_forward;
use crate::report::{
    BalanceSummary, CompareReport, CompareRowOut, ConfigDesc, DegreeStatsOut, GcnReport,
    InputDesc, OracleCheck, PartitionReport, PatternOut, PlanOut, SimulateReport, SCHEMA_VERSION,
};

pub const ORACLE_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone)]
pub enum InputSource {
    File { path: PathBuf, format: InputFormat },
    Synth { n: usize, avg_degree: f64, skew: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Mtx,
    EdgeList,
    CsrSnapshot,
}

impl std::str::FromStr for InputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "mtx" => Ok(InputFormat::Mtx),
            "edgelist" => Ok(InputFormat::EdgeList),
            "csr" => Ok(InputFormat::CsrSnapshot),
            other => bail!("unknown input format `{other}` (expected mtx, edgelist, or csr)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => bail!("unknown output format `{other}` (expected json or csv)"),
        }
    }
}

/// How the dense operand is produced for simulate/gcn runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DenseSource {
    /// Seeded uniform values; integers in [-4, 4] under --check-exact.
    Seeded,
    Identity,
    CsvFile(PathBuf),
}

impl std::str::FromStr for DenseSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "seed" => Ok(DenseSource::Seeded),
            "identity" => Ok(DenseSource::Identity),
            path => Ok(DenseSource::CsvFile(PathBuf::from(path))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: InputSource,
    pub max_block_warps: usize,
    pub max_warp_nzs: usize,
    pub col_dim: usize,
    pub sweep: Vec<usize>,
    pub seed: u64,
    pub normalize: bool,
    pub check: bool,
    pub check_exact: bool,
    pub x_source: DenseSource,
    pub out: Option<PathBuf>,
    pub out_format: OutputFormat,
    pub save_matrix: Option<PathBuf>,
    pub save_blocks: Option<PathBuf>,
}

impl RunConfig {
    pub fn partition_config(&self) -> anyhow::Result<PartitionConfig> {
        Ok(PartitionConfig::new(self.max_block_warps, self.max_warp_nzs)?)
    }
}

fn ingest(cfg: &RunConfig) -> anyhow::Result<(CsrMatrix, InputDesc)> {
    let (a, source, format) = match &cfg.input {
        InputSource::File { path, format } => {
            let a = match format {
                InputFormat::Mtx => load_matrix_market(path)?,
                InputFormat::EdgeList => load_edge_list(path)?,
                InputFormat::CsrSnapshot => load_csr_snapshot(path)?,
            };
            let name = match format {
                InputFormat::Mtx => "mtx",
                InputFormat::EdgeList => "edgelist",
                InputFormat::CsrSnapshot => "csr",
            };
            (a, path.display().to_string(), name.to_string())
        }
        InputSource::Synth { n, avg_degree, skew } => {
            let a = synth_power_law(*n, *avg_degree, *skew, cfg.seed)?;
            (a, format!("synth:{n},{avg_degree},{skew}"), "synth".to_string())
        }
    };
    let a = if cfg.normalize { gcn_normalize(&a)? } else { a };
    let desc = InputDesc {
        source,
        format,
        n_rows: a.n_rows,
        n_cols: a.n_cols,
        nnz: a.nnz(),
        normalized: cfg.normalize,
    };
    Ok((a, desc))
}

fn config_desc(cfg: &RunConfig, pc: &PartitionConfig) -> ConfigDesc {
    ConfigDesc {
        max_block_warps: pc.max_block_warps,
        max_warp_nzs: pc.max_warp_nzs,
        warp_size: pc.warp_size,
        deg_bound: pc.deg_bound(),
        seed: cfg.seed,
    }
}

/// Seeded dense operand. Distinct xor masks keep the graph, X, and W
/// streams independent even though they share the user seed.
fn gen_dense(n_rows: usize, n_cols: usize, seed: u64, exact: bool, mask: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ mask);
    if exact {
        DenseMatrix::from_fn(n_rows, n_cols, |_, _| rng.gen_range(-4i32..=4) as f32)
    } else {
        DenseMatrix::from_fn(n_rows, n_cols, |_, _| rng.gen::<f32>())
    }
}

const X_STREAM: u64 = 0x517c_c1b7_2722_0a95;
const W_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

fn load_dense_csv(path: &Path) -> anyhow::Result<DenseMatrix> {
    let reader = BufReader::new(File::open(path).with_context(|| format!("opening {path:?}"))?);
    let mut rows: Vec<Vec<f32>> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f32> = line
            .split(',')
            .map(|t| t.trim().parse::<f32>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("bad number on line {}", i + 1))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                bail!("ragged rows in dense CSV at line {}", i + 1);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("dense CSV {path:?} is empty");
    }
    let n_rows = rows.len();
    let n_cols = rows[0].len();
    Ok(DenseMatrix::from_rows(n_rows, n_cols, rows.into_iter().flatten().collect())?)
}

fn save_dense_csv(m: &DenseMatrix, path: &Path) -> anyhow::Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {path:?}"))?;
    for i in 0..m.n_rows {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

fn make_x(cfg: &RunConfig, a: &CsrMatrix) -> anyhow::Result<DenseMatrix> {
    let x = match &cfg.x_source {
        DenseSource::Seeded => {
            gen_dense(a.n_cols, cfg.col_dim, cfg.seed, cfg.check_exact, X_STREAM)
        }
        DenseSource::Identity => DenseMatrix::identity(a.n_cols),
        DenseSource::CsvFile(path) => {
            let x = load_dense_csv(path)?;
            if x.n_rows != a.n_cols {
                bail!(
                    "dense operand has {} rows but the matrix has {} columns",
                    x.n_rows,
                    a.n_cols
                );
            }
            x
        }
    };
    Ok(x)
}

/// f64 reference product in original row order.
fn oracle_spmm(a: &CsrMatrix, x: &DenseMatrix) -> Vec<f64> {
    let col_dim = x.n_cols;
    let mut out = vec![0.0f64; a.n_rows * col_dim];
    for i in 0..a.n_rows {
        let (cols, vals) = a.row_entries(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let x_row = x.row(j as usize);
            for k in 0..col_dim {
                out[i * col_dim + k] += v as f64 * x_row[k] as f64;
            }
        }
    }
    out
}

/// Max relative error with an absolute floor of 1, so near-zero entries
/// are compared absolutely.
fn max_rel_err(y: &DenseMatrix, oracle: &[f64]) -> f64 {
    y.data
        .iter()
        .zip(oracle)
        .map(|(&a, &b)| (a as f64 - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max)
}

pub fn cmd_partition(cfg: &RunConfig) -> anyhow::Result<PartitionReport> {
    let pc = cfg.partition_config()?;
    let (a, input) = ingest(cfg)?;
    let stats = degree_stats(&a);

    let t0 = Instant::now();
    let (sorted, _) = sort_rows_by_degree(&a);
    let patterns = get_partition_patterns(&pc);
    let blocks = block_partition(&sorted, &patterns, &pc)?;
    let warps = warp_partition(&a, pc.max_warp_nzs);
    let preprocess_ms = t0.elapsed().as_secs_f64() * 1e3;

    let ratio = if warps.is_empty() { None } else { Some(storage_ratio(&blocks, &warps)?) };

    let blocks_file = match &cfg.save_blocks {
        Some(path) => {
            std::fs::write(path, blockspmm::descriptors_to_bytes(&blocks))
                .with_context(|| format!("writing descriptor array to {path:?}"))?;
            Some(path.display().to_string())
        }
        None => None,
    };

    Ok(PartitionReport {
        schema_version: SCHEMA_VERSION,
        command: "partition".into(),
        input,
        config: config_desc(cfg, &pc),
        degree_stats: DegreeStatsOut::from(&stats),
        pattern_table: patterns.iter().map(|(d, e)| PatternOut::from_entry(d, e)).collect(),
        blocks: blocks.len(),
        warps: warps.len(),
        storage_ratio: ratio,
        preprocess_ms,
        blocks_file,
    })
}

pub fn cmd_simulate(cfg: &RunConfig) -> anyhow::Result<SimulateReport> {
    let pc = cfg.partition_config()?;
    let (a, input) = ingest(cfg)?;
    let x = make_x(cfg, &a)?;
    let col_dim = x.n_cols;
    if col_dim == 0 {
        bail!("the dense operand must have at least one column");
    }

    let t0 = Instant::now();
    let (sorted, perm) = sort_rows_by_degree(&a);
    let patterns = get_partition_patterns(&pc);
    let blocks = block_partition(&sorted, &patterns, &pc)?;
    let preprocess_ms = t0.elapsed().as_secs_f64() * 1e3;

    let plan = plan_combined_warps(col_dim, &pc);
    let t0 = Instant::now();
    let (y_sorted, trace) = simulate_block_spmm(&sorted, &x, &blocks, &plan, &pc)?;
    let y = restore_rows(&y_sorted, &perm)?;
    let simulate_ms = t0.elapsed().as_secs_f64() * 1e3;

    let oracle_check = if cfg.check || cfg.check_exact {
        let oracle = oracle_spmm(&a, &x);
        let err = max_rel_err(&y, &oracle);
        let pass = if cfg.check_exact {
            y.data.iter().zip(&oracle).all(|(&got, &want)| got == want as f32)
        } else {
            err <= ORACLE_TOLERANCE
        };
        Some(OracleCheck {
            mode: if cfg.check_exact { "exact".into() } else { "real".into() },
            pass,
            max_rel_err: err,
        })
    } else {
        None
    };

    let matrix_file = match &cfg.save_matrix {
        Some(path) => {
            save_dense_csv(&y, path)?;
            Some(path.display().to_string())
        }
        None => None,
    };

    Ok(SimulateReport {
        schema_version: SCHEMA_VERSION,
        command: "simulate".into(),
        input,
        config: config_desc(cfg, &pc),
        col_dim,
        plan: PlanOut {
            c: plan.c,
            round_dim: plan.round_dim,
            block_dim: plan.block_dim,
            combined_warps_per_block: plan.combined_warps_per_block(),
        },
        trace_totals: trace.totals,
        balance: BalanceSummary::from(&balance_report(&trace)),
        mem_block: count_transactions(&a, col_dim, Strategy::BlockCombined, &pc)?,
        mem_warp: count_transactions(&a, col_dim, Strategy::WarpLooped, &pc)?,
        oracle_check,
        preprocess_ms,
        simulate_ms,
        matrix_file,
    })
}

pub fn cmd_compare(cfg: &RunConfig) -> anyhow::Result<CompareReport> {
    if cfg.sweep.is_empty() {
        bail!("compare needs a --sweep list of column dimensions");
    }
    let pc = cfg.partition_config()?;
    let (a, input) = ingest(cfg)?;

    let t0 = Instant::now();
    let rows_in = compare_strategies(&a, &cfg.sweep, &pc)?;
    let preprocess_ms = t0.elapsed().as_secs_f64() * 1e3;

    let mut rows = Vec::with_capacity(rows_in.len() * 2);
    for r in &rows_in {
        rows.push(CompareRowOut::new(
            r.col_dim,
            "block-combined",
            &r.block.mem,
            &BalanceSummary::from(&r.block.balance),
        ));
        rows.push(CompareRowOut::new(
            r.col_dim,
            "warp-looped",
            &r.warp.mem,
            &BalanceSummary::from(&r.warp.balance),
        ));
    }

    Ok(CompareReport {
        schema_version: SCHEMA_VERSION,
        command: "compare".into(),
        input,
        config: config_desc(cfg, &pc),
        sweep: cfg.sweep.clone(),
        rows,
        preprocess_ms,
    })
}

pub fn cmd_gcn(cfg: &RunConfig) -> anyhow::Result<GcnReport> {
    let pc = cfg.partition_config()?;
    let (a, input) = ingest(cfg)?;
    if a.n_rows != a.n_cols {
        bail!("gcn needs a square adjacency matrix");
    }
    let n = a.n_rows;
    let x = match &cfg.x_source {
        DenseSource::Identity => DenseMatrix::identity(n),
        DenseSource::CsvFile(path) => load_dense_csv(path)?,
        DenseSource::Seeded => gen_dense(n, cfg.col_dim, cfg.seed, cfg.check_exact, X_STREAM),
    };
    if x.n_rows != n {
        bail!("feature matrix has {} rows but the graph has {n} nodes", x.n_rows);
    }
    if x.n_cols == 0 {
        bail!("the feature matrix must have at least one column");
    }
    let out_features = x.n_cols;
    let w = gen_dense(x.n_cols, out_features, cfg.seed, cfg.check_exact, W_STREAM);

    let out = gcn_layer_forward(&x, &w, &a, &pc)?;

    let oracle_check = if cfg.check || cfg.check_exact {
        // f64 oracle of relu(A (X W))
        let mut xw = vec![0.0f64; n * out_features];
        for i in 0..n {
            for k in 0..x.n_cols {
                let xv = x.get(i, k) as f64;
                if xv == 0.0 {
                    continue;
                }
                for j in 0..out_features {
                    xw[i * out_features + j] += xv * w.get(k, j) as f64;
                }
            }
        }
        let mut expect = vec![0.0f64; n * out_features];
        for i in 0..n {
            let (cols, vals) = a.row_entries(i);
            for (&c, &v) in cols.iter().zip(vals) {
                for j in 0..out_features {
                    expect[i * out_features + j] += v as f64 * xw[c as usize * out_features + j];
                }
            }
        }
        for e in expect.iter_mut() {
            *e = e.max(0.0);
        }
        let err = max_rel_err(&out, &expect);
        Some(OracleCheck {
            mode: if cfg.check_exact { "exact".into() } else { "real".into() },
            pass: err <= ORACLE_TOLERANCE,
            max_rel_err: err,
        })
    } else {
        None
    };

    let matrix_file = match &cfg.save_matrix {
        Some(path) => {
            save_dense_csv(&out, path)?;
            Some(path.display().to_string())
        }
        None => None,
    };

    Ok(GcnReport {
        schema_version: SCHEMA_VERSION,
        command: "gcn".into(),
        input,
        config: config_desc(cfg, &pc),
        col_dim: x.n_cols,
        out_features,
        output_sum: out.data.iter().map(|&v| v as f64).sum(),
        output_min: out.data.iter().copied().map(f64::from).reduce(f64::min).unwrap_or(0.0),
        output_max: out.data.iter().copied().map(f64::from).reduce(f64::max).unwrap_or(0.0),
        oracle_check,
        matrix_file,
    })
}

/// Serialize a report and write it to `out` or stdout.
pub fn emit<T: serde::Serialize + crate::report::ToCsv>(
    report: &T,
    out: &Option<PathBuf>,
    format: OutputFormat,
) -> anyhow::Result<()> {
    let text = match format {
        OutputFormat::Json => serde_json::to_string_pretty(report)?,
        OutputFormat::Csv => report.to_csv(),
    };
    match out {
        Some(path) => {
            std::fs::write(path, text.as_bytes())
                .with_context(|| format!("writing report to {path:?}"))?;
        }
        None => println!("{}", text.trim_end_matches('\n')),
    }
    Ok(())
}

/// Whether every oracle check the run requested came back green.
pub fn checks_passed(oracle_check: &Option<OracleCheck>) -> bool {
    oracle_check.as_ref().is_none_or(|c| c.pass)
}

pub fn parse_synth_spec(s: &str) -> anyhow::Result<InputSource> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        bail!("--synth expects `n,avg_degree,skew`");
    }
    Ok(InputSource::Synth {
        n: parts[0].trim().parse().map_err(|e| anyhow!("bad n in --synth: {e}"))?,
        avg_degree: parts[1].trim().parse().map_err(|e| anyhow!("bad avg in --synth: {e}"))?,
        skew: parts[2].trim().parse().map_err(|e| anyhow!("bad skew in --synth: {e}"))?,
    })
}

pub fn parse_sweep(s: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| anyhow!("bad sweep entry `{t}`: {e}")))
        .collect()
}
