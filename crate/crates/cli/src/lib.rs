//! Library side of the `blockspmm` command-line tool: command
//! implementations, report types, and the demo GCN layer.

pub mod commands;
pub mod gcn;
pub mod report;

pub use commands::{
    checks_passed, cmd_compare, cmd_gcn, cmd_partition, cmd_simulate, emit, parse_sweep,
    parse_synth_spec, DenseSource, InputFormat, InputSource, OutputFormat, RunConfig,
    ORACLE_TOLERANCE,
};
pub use gcn::{dense_gemm, gcn_layer_forward, relu};
