//! Closed-form, stall-free compute-cycle model for a MatMul on an `R x C`
//! systolic array.
//!
//! Each dataflow maps two dimensions of `(m x k) * (k x n)` spatially onto the
//! array and streams the third. Dimensions larger than the array are folded:
//! the op is split into tiles that run back to back, each paying its own fill,
//! stream and drain latency. The per-fold latencies are:
//!
//! | dataflow | spatial    | streamed | cycles per `r x c` fold  |
//! |----------|------------|----------|--------------------------|
//! | OS       | m, n       | k        | `2r + c + k - 2`         |
//! | WS       | k, n       | m        | `r + (m + r + c - 2)`    |
//! | IS       | m, k       | n        | `c + (n + r + c - 2)`    |
//!
//! [`crate::reference_sim`] derives the same numbers by stepping a PE grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardware::{Dataflow, HardwareConfig};
use crate::model_zoo::Shape;

/// Cost of one op under one dataflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpCost {
    pub compute_cycles: u64,
    pub folds: u64,
    pub mac_count: u64,
    /// `mac_count / (compute_cycles * R * C)`.
    pub utilization: f64,
}

/// Splits `dim` into tiles of at most `array` elements, as `(tile, count)`
/// groups: `floor(dim / array)` full tiles and at most one remainder tile.
pub fn fold_groups(dim: u64, array: u64) -> impl Iterator<Item = (u64, u64)> {
    let full = dim / array;
    let rem = dim % array;
    [(array, full), (rem, 1)]
        .into_iter()
        .filter(|&(tile, count)| tile > 0 && count > 0)
}

pub fn fold_count(dim: u64, array: u64) -> u64 {
    dim.div_ceil(array)
}

/// Sums `per_fold(row_tile, col_tile)` over every fold of a `rows_dim x
/// cols_dim` spatial mapping.
fn sum_folds(
    rows_dim: u64,
    cols_dim: u64,
    hw: &HardwareConfig,
    per_fold: impl Fn(u64, u64) -> u64,
) -> u64 {
    let mut total = 0;
    for (r, nr) in fold_groups(rows_dim, hw.rows) {
        for (c, nc) in fold_groups(cols_dim, hw.cols) {
            total += nr * nc * per_fold(r, c);
        }
    }
    total
}

fn finish(shape: Shape, hw: &HardwareConfig, cycles: u64, folds: u64) -> OpCost {
    let mac_count = shape.macs();
    OpCost {
        compute_cycles: cycles,
        folds,
        mac_count,
        utilization: mac_count as f64 / (cycles as f64 * hw.pe_count() as f64),
    }
}

fn check(shape: Shape, hw: &HardwareConfig, expected: Dataflow) -> Result<()> {
    if hw.dataflow != expected {
        return Err(Error::Domain(format!(
            "hardware `{}` uses {} dataflow, expected {}",
            hw.name, hw.dataflow, expected
        )));
    }
    if hw.rows == 0 || hw.cols == 0 {
        return Err(Error::InvalidHardware("rows and cols must be >= 1".into()));
    }
    shape.check_nonzero()
}

/// Output stationary: `m` on rows, `n` on columns, `k` accumulated in place.
pub fn cost_os(shape: Shape, hw: &HardwareConfig) -> Result<OpCost> {
    check(shape, hw, Dataflow::Os)?;
    let k = shape.k;
    let cycles = sum_folds(shape.m, shape.n, hw, |r, c| 2 * r + c + k - 2);
    let folds = fold_count(shape.m, hw.rows) * fold_count(shape.n, hw.cols);
    Ok(finish(shape, hw, cycles, folds))
}

/// Weight stationary: the `k x n` operand is preloaded (`k` on rows, `n` on
/// columns) and the `m` rows of the other operand stream through.
pub fn cost_ws(shape: Shape, hw: &HardwareConfig) -> Result<OpCost> {
    check(shape, hw, Dataflow::Ws)?;
    let m = shape.m;
    let cycles = sum_folds(shape.k, shape.n, hw, |r, c| r + m + r + c - 2);
    let folds = fold_count(shape.k, hw.rows) * fold_count(shape.n, hw.cols);
    Ok(finish(shape, hw, cycles, folds))
}

/// Input stationary: the `m x k` operand is preloaded (`m` on rows, `k` on
/// columns) and the `n` columns of the other operand stream through.
pub fn cost_is(shape: Shape, hw: &HardwareConfig) -> Result<OpCost> {
    check(shape, hw, Dataflow::Is)?;
    let n = shape.n;
    let cycles = sum_folds(shape.m, shape.k, hw, |r, c| c + n + r + c - 2);
    let folds = fold_count(shape.m, hw.rows) * fold_count(shape.k, hw.cols);
    Ok(finish(shape, hw, cycles, folds))
}

/// Cost under the hardware's configured dataflow.
pub fn cost(shape: Shape, hw: &HardwareConfig) -> Result<OpCost> {
    match hw.dataflow {
        Dataflow::Os => cost_os(shape, hw),
        Dataflow::Ws => cost_ws(shape, hw),
        Dataflow::Is => cost_is(shape, hw),
    }
}
