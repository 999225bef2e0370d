//! Seeded generator for heavy-tailed synthetic graphs.
//!
//! Row degrees follow a bounded Pareto distribution with tail exponent
//! `1 + skew` (smaller skew, heavier tail), capped at 16x the average
//! degree, then nudged so the total nonzero count hits
//! `round(n_rows * avg_degree)` exactly. A small set of hub rows with
//! degree above 5x the average guarantees the heavy tail at any size.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csr::CsrMatrix;
use crate::error::{Error, Result};

/// Degree cap as a multiple of the average degree.
const TAIL_FACTOR: f64 = 16.0;
/// One hub row per this many rows.
const ROWS_PER_HUB: usize = 1000;

/// Generate an n x n matrix with a power-law row-degree distribution,
/// unit values, and distinct sorted columns per row. Deterministic for a
/// fixed seed.
pub fn synth_power_law(
    n_rows: usize,
    avg_degree: f64,
    skew: f64,
    seed: u64,
) -> Result<CsrMatrix> {
    if n_rows == 0 {
        return Err(Error::InvalidParameter("n_rows must be at least 1".into()));
    }
    if !avg_degree.is_finite() || avg_degree <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "avg_degree must be positive, got {avg_degree}"
        )));
    }
    if avg_degree > n_rows as f64 {
        return Err(Error::InvalidParameter(format!(
            "avg_degree {avg_degree} exceeds n_rows {n_rows}"
        )));
    }
    if !skew.is_finite() || skew <= 0.0 {
        return Err(Error::InvalidParameter(format!("skew must be positive, got {skew}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_rows;
    let target_nnz = (n as f64 * avg_degree).round() as usize;
    let cap = ((avg_degree * TAIL_FACTOR).ceil() as usize).clamp(1, n);
    let hub_floor = (((avg_degree * 5.0).floor() as usize) + 1).min(cap);
    let n_hubs = n.div_ceil(ROWS_PER_HUB);

    // Pareto scale chosen so the uncapped mean equals avg_degree.
    let alpha = 1.0 + skew;
    let scale = avg_degree * skew / alpha;

    let mut degrees = Vec::with_capacity(n);
    for i in 0..n {
        if i < n_hubs {
            degrees.push(rng.gen_range(hub_floor..=cap));
        } else {
            let u: f64 = rng.gen_range(f64::EPSILON..1.0);
            let raw = scale / u.powf(1.0 / alpha);
            degrees.push((raw.round() as usize).min(cap));
        }
    }

    // Nudge the total onto target_nnz. Shrink non-hub rows first, then
    // hubs down to their floor, so the tail guarantee survives.
    let mut total: usize = degrees.iter().sum();
    while total > target_nnz {
        let before = total;
        for d in degrees[n_hubs..].iter_mut() {
            if total == target_nnz {
                break;
            }
            if *d > 0 {
                *d -= 1;
                total -= 1;
            }
        }
        for d in degrees[..n_hubs].iter_mut() {
            if total == target_nnz {
                break;
            }
            if *d > hub_floor {
                *d -= 1;
                total -= 1;
            }
        }
        if total == before {
            // Only hubs at their floor remain; give up the guarantee.
            for d in degrees.iter_mut() {
                if total == target_nnz {
                    break;
                }
                if *d > 0 {
                    *d -= 1;
                    total -= 1;
                }
            }
        }
    }
    while total < target_nnz {
        let before = total;
        for d in degrees.iter_mut() {
            if total == target_nnz {
                break;
            }
            if *d < cap {
                *d += 1;
                total += 1;
            }
        }
        debug_assert!(total > before, "degree budget cannot be reached");
    }

    degrees.shuffle(&mut rng);

    // Materialize each row with distinct uniform columns.
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0usize);
    let mut col_idx: Vec<u32> = Vec::with_capacity(target_nnz);
    let mut cols_buf: Vec<u32> = Vec::new();
    let mut seen = vec![false; n];
    for &d in &degrees {
        cols_buf.clear();
        while cols_buf.len() < d {
            let c = rng.gen_range(0..n) as u32;
            if !seen[c as usize] {
                seen[c as usize] = true;
                cols_buf.push(c);
            }
        }
        for &c in &cols_buf {
            seen[c as usize] = false;
        }
        cols_buf.sort_unstable();
        col_idx.extend_from_slice(&cols_buf);
        row_ptr.push(col_idx.len());
    }

    let values = vec![1.0f32; col_idx.len()];
    Ok(CsrMatrix { n_rows: n, n_cols: n, row_ptr, col_idx, values })
}
