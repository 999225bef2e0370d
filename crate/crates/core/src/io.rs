//! File ingestion and the binary CSR snapshot format.
//!
//! Snapshot layout: magic `CSR1`, then little-endian u64 `n_rows`,
//! `n_cols`, `nnz`, followed by `row_ptr` as u64, `col_idx` as u32, and
//! `values` as f32.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::csr::CsrMatrix;
use crate::error::{Error, Result};

const SNAPSHOT_MAGIC: &[u8; 4] = b"CSR1";

#[derive(Clone, Copy, PartialEq)]
enum MtxField {
    Real,
    Pattern,
}

/// Load a MatrixMarket coordinate file (real or pattern, general).
///
/// Indices are 1-based in the file and converted to 0-based; duplicate
/// entries are summed; pattern entries get value 1.0.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let (line_no, header) = match lines.next() {
        Some((i, l)) => (i + 1, l?),
        None => return Err(Error::Parse { line: 1, msg: "empty file".into() }),
    };
    let field = parse_mtx_header(&header, line_no)?;

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(u32, u32, f32)> = Vec::new();

    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match dims {
            None => {
                if toks.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "size line must be `rows cols nnz`".into(),
                    });
                }
                let r = parse_usize(toks[0], line_no)?;
                let c = parse_usize(toks[1], line_no)?;
                let nz = parse_usize(toks[2], line_no)?;
                triplets.reserve(nz);
                dims = Some((r, c, nz));
            }
            Some((n_rows, n_cols, _)) => {
                let expected = match field {
                    MtxField::Real => 3,
                    MtxField::Pattern => 2,
                };
                if toks.len() != expected {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected {expected} fields, got {}", toks.len()),
                    });
                }
                let r = parse_usize(toks[0], line_no)?;
                let c = parse_usize(toks[1], line_no)?;
                if r < 1 || r > n_rows || c < 1 || c > n_cols {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("entry ({r}, {c}) outside declared {n_rows}x{n_cols}"),
                    });
                }
                let v = match field {
                    MtxField::Real => toks[2].parse::<f32>().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("bad value `{}`", toks[2]),
                    })?,
                    MtxField::Pattern => 1.0,
                };
                triplets.push(((r - 1) as u32, (c - 1) as u32, v));
            }
        }
    }

    let (n_rows, n_cols, declared) = dims.ok_or(Error::Parse {
        line: 2,
        msg: "missing size line".into(),
    })?;
    if triplets.len() != declared {
        return Err(Error::Parse {
            line: 0,
            msg: format!("declared {declared} entries, found {}", triplets.len()),
        });
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &triplets)
}

fn parse_mtx_header(header: &str, line_no: usize) -> Result<MtxField> {
    let toks: Vec<String> = header.split_whitespace().map(|t| t.to_lowercase()).collect();
    if toks.len() != 5
        || toks[0] != "%%matrixmarket"
        || toks[1] != "matrix"
        || toks[2] != "coordinate"
    {
        return Err(Error::Parse {
            line: line_no,
            msg: "expected `%%MatrixMarket matrix coordinate real|pattern general`".into(),
        });
    }
    let field = match toks[3].as_str() {
        "real" => MtxField::Real,
        "pattern" => MtxField::Pattern,
        other => {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("unsupported field `{other}` (expected real or pattern)"),
            })
        }
    };
    if toks[4] != "general" {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("unsupported symmetry `{}` (expected general)", toks[4]),
        });
    }
    Ok(field)
}

fn parse_usize(tok: &str, line_no: usize) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("bad integer `{tok}`"),
    })
}

/// Load a whitespace-separated `src dst` edge list with 0-based node ids.
///
/// Lines starting with `#` are ignored. The result is square with
/// `n = max id + 1`, all values 1.0; repeated edges collapse to one entry.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let reader = BufReader::new(File::open(path)?);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut max_id: i64 = -1;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `src dst`, got {} tokens", toks.len()),
            });
        }
        let src = parse_node_id(toks[0], line_no)?;
        let dst = parse_node_id(toks[1], line_no)?;
        max_id = max_id.max(src as i64).max(dst as i64);
        edges.push((src, dst));
    }

    let n = (max_id + 1) as usize;
    edges.sort_unstable();
    edges.dedup();
    let triplets: Vec<(u32, u32, f32)> = edges.into_iter().map(|(r, c)| (r, c, 1.0)).collect();
    CsrMatrix::from_triplets(n, n, &triplets)
}

fn parse_node_id(tok: &str, line_no: usize) -> Result<u32> {
    let id = tok.parse::<i64>().map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("non-integer node id `{tok}`"),
    })?;
    if id < 0 {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("negative node id {id}"),
        });
    }
    u32::try_from(id).map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("node id {id} out of range"),
    })
}

/// Write the binary snapshot format.
pub fn save_csr_snapshot(a: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(a.n_rows as u64).to_le_bytes())?;
    w.write_all(&(a.n_cols as u64).to_le_bytes())?;
    w.write_all(&(a.nnz() as u64).to_le_bytes())?;
    for &p in &a.row_ptr {
        w.write_all(&(p as u64).to_le_bytes())?;
    }
    for &c in &a.col_idx {
        w.write_all(&c.to_le_bytes())?;
    }
    for &v in &a.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read the binary snapshot format and validate the result.
pub fn load_csr_snapshot(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::BadSnapshot("file shorter than header".into()))?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::BadSnapshot("bad magic bytes".into()));
    }
    let n_rows = read_u64(&mut r)? as usize;
    let n_cols = read_u64(&mut r)? as usize;
    let nnz = read_u64(&mut r)? as usize;

    let mut row_ptr = Vec::with_capacity(n_rows + 1);
    for _ in 0..=n_rows {
        row_ptr.push(read_u64(&mut r)? as usize);
    }
    let mut col_idx = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let mut buf = [0u8; 4];
        r.read_exact(&mut buf)
            .map_err(|_| Error::BadSnapshot("truncated col_idx".into()))?;
        col_idx.push(u32::from_le_bytes(buf));
    }
    let mut values = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let mut buf = [0u8; 4];
        r.read_exact(&mut buf)
            .map_err(|_| Error::BadSnapshot("truncated values".into()))?;
        values.push(f32::from_le_bytes(buf));
    }

    let a = CsrMatrix { n_rows, n_cols, row_ptr, col_idx, values };
    a.validate().map_err(|e| Error::BadSnapshot(e.to_string()))?;
    Ok(a)
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| Error::BadSnapshot("truncated header or row_ptr".into()))?;
    Ok(u64::from_le_bytes(buf))
}
