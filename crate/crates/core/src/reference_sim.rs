//! Cycle-level PE-grid simulator for small arrays and small operands.
//!
//! This is the oracle for [`crate::systolic_cost`]: it moves concrete integer
//! operands through the array one register hop per cycle and counts cycles
//! until the last output leaves the array. The schedule is:
//!
//! * streams entering row `i` are delayed `i` cycles, streams entering
//!   column `j` are delayed `j` cycles;
//! * OS folds drain their accumulators one row per cycle out of the bottom
//!   edge once every PE has finished its `k` MACs;
//! * WS folds preload the stationary tile one row per cycle from the top;
//!   partial sums flow down and leave the bottom edge;
//! * IS folds are the WS machine rotated by 90 degrees: the stationary tile is
//!   preloaded one column per cycle from the left and partial sums leave the
//!   right edge.
//!
//! Folds run back to back. Every in-flight operand carries the index of the
//! stream step it belongs to, and a MAC between operands of different steps
//! aborts the simulation, so a skew error cannot go unnoticed.

use std::fmt;

use crate::error::{Error, Result};
use crate::hardware::{Dataflow, HardwareConfig};
use crate::model_zoo::Shape;
use crate::systolic_cost::{self, OpCost};

pub const MAX_MK: usize = 64;
pub const MAX_N: usize = 16;
pub const MAX_ARRAY: u64 = 16;

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Domain("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Deterministic small-integer fill, distinct per `salt`.
    pub fn patterned(rows: usize, cols: usize, salt: usize) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = (i * 7 + j * 13 + salt * 5) % 11;
                m.set(i, j, v as i64 - 5);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    fn add(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
}

/// An operand in flight, tagged with the stream step it belongs to.
#[derive(Debug, Clone, Copy)]
struct Flit {
    step: usize,
    value: i64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Pe {
    held: Option<i64>,
    acc: i64,
    macs: u64,
    horiz: Option<Flit>,
    vert: Option<Flit>,
}

/// State of the PE grid plus the global cycle and MAC counters.
#[derive(Debug, Clone)]
pub struct PeGridState {
    rows: usize,
    cols: usize,
    pes: Vec<Pe>,
    cycle: u64,
    mac_events: u64,
}

impl PeGridState {
    fn new(rows: usize, cols: usize) -> Self {
        PeGridState {
            rows,
            cols,
            pes: vec![Pe::default(); rows * cols],
            cycle: 0,
            mac_events: 0,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn mac_events(&self) -> u64 {
        self.mac_events
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.cols + j
    }

    fn reset_pes(&mut self) {
        self.pes.fill(Pe::default());
    }

    fn mac(&mut self, a: Flit, b: Flit) -> Result<i64> {
        if a.step != b.step {
            return Err(Error::Domain(format!(
                "schedule misalignment at cycle {}: operands of steps {} and {} met",
                self.cycle, a.step, b.step
            )));
        }
        self.mac_events += 1;
        Ok(a.value * b.value)
    }

    /// One output-stationary fold over an `r x c` tile. `west(t, i)` and
    /// `north(t, j)` are the unskewed streams for reduction step `t`.
    fn run_os_fold(
        &mut self,
        r: usize,
        c: usize,
        k: usize,
        west: impl Fn(usize, usize) -> i64,
        north: impl Fn(usize, usize) -> i64,
        mut sink: impl FnMut(usize, usize, i64),
    ) -> Result<()> {
        self.reset_pes();
        let mut t = 0usize;
        let done = |s: &Self| (0..r).all(|i| (0..c).all(|j| s.pes[s.idx(i, j)].macs == k as u64));
        while !done(self) {
            let prev = self.pes.clone();
            for i in 0..r {
                for j in 0..c {
                    let a = if j == 0 {
                        t.checked_sub(i).filter(|&s| s < k).map(|s| Flit {
                            step: s,
                            value: west(s, i),
                        })
                    } else {
                        prev[self.idx(i, j - 1)].horiz
                    };
                    let b = if i == 0 {
                        t.checked_sub(j).filter(|&s| s < k).map(|s| Flit {
                            step: s,
                            value: north(s, j),
                        })
                    } else {
                        prev[self.idx(i - 1, j)].vert
                    };
                    let product = match (a, b) {
                        (Some(a), Some(b)) => Some(self.mac(a, b)?),
                        _ => None,
                    };
                    let idx = self.idx(i, j);
                    let pe = &mut self.pes[idx];
                    pe.horiz = a;
                    pe.vert = b;
                    if let Some(p) = product {
                        pe.acc += p;
                        pe.macs += 1;
                    }
                }
            }
            self.cycle += 1;
            t += 1;
        }

        // Drain: each cycle the bottom row leaves and every other row moves
        // down one position.
        let mut slots: Vec<Option<usize>> = (0..r).map(Some).collect();
        while slots.iter().any(Option::is_some) {
            if let Some(origin) = slots[r - 1] {
                for j in 0..c {
                    let idx = self.idx(r - 1, j);
                    sink(origin, j, self.pes[idx].acc);
                }
            }
            for i in (1..r).rev() {
                slots[i] = slots[i - 1];
                for j in 0..c {
                    let (dst, src) = (self.idx(i, j), self.idx(i - 1, j));
                    self.pes[dst].acc = self.pes[src].acc;
                }
            }
            slots[0] = None;
            self.cycle += 1;
        }
        Ok(())
    }

    /// One stationary-operand fold on an `r x c` tile (weight-stationary
    /// orientation). `weight(i, j)` is preloaded; `stream(t, i)` enters row
    /// `i` at step `t`; the finished sum of step `t` for column `j` is passed
    /// to `sink(t, j, value)` as it leaves the bottom edge.
    fn run_stationary_fold(
        &mut self,
        r: usize,
        c: usize,
        steps: usize,
        weight: impl Fn(usize, usize) -> i64,
        stream: impl Fn(usize, usize) -> i64,
        mut sink: impl FnMut(usize, usize, i64),
    ) -> Result<()> {
        self.reset_pes();

        // Preload from the top edge, one row per cycle.
        for p in 0..r {
            for i in (1..r).rev() {
                for j in 0..c {
                    let (dst, src) = (self.idx(i, j), self.idx(i - 1, j));
                    self.pes[dst].held = self.pes[src].held;
                }
            }
            for j in 0..c {
                let idx = self.idx(0, j);
                self.pes[idx].held = Some(weight(r - 1 - p, j));
            }
            self.cycle += 1;
        }

        let expected = steps * c;
        let mut exited = 0;
        let mut t = 0usize;
        while exited < expected {
            let prev = self.pes.clone();
            for i in 0..r {
                for j in 0..c {
                    let a = if j == 0 {
                        t.checked_sub(i).filter(|&s| s < steps).map(|s| Flit {
                            step: s,
                            value: stream(s, i),
                        })
                    } else {
                        prev[self.idx(i, j - 1)].horiz
                    };
                    let psum_in = if i == 0 {
                        a.map(|a| Flit {
                            step: a.step,
                            value: 0,
                        })
                    } else {
                        prev[self.idx(i - 1, j)].vert
                    };
                    let held = self.pes[self.idx(i, j)]
                        .held
                        .ok_or_else(|| Error::Domain("stream started before preload".into()))?;
                    let psum_out = match (a, psum_in) {
                        (Some(a), Some(p)) => {
                            let prod = self.mac(
                                a,
                                Flit {
                                    step: p.step,
                                    value: held,
                                },
                            )?;
                            Some(Flit {
                                step: p.step,
                                value: p.value + prod,
                            })
                        }
                        (None, None) => None,
                        _ => {
                            return Err(Error::Domain(format!(
                                "partial sum and operand out of step at cycle {}",
                                self.cycle
                            )))
                        }
                    };
                    let idx = self.idx(i, j);
                    let pe = &mut self.pes[idx];
                    pe.horiz = a;
                    pe.vert = psum_out;
                    if psum_out.is_some() {
                        pe.macs += 1;
                    }
                    if i == r - 1 {
                        if let Some(p) = psum_out {
                            sink(p.step, j, p.value);
                            exited += 1;
                        }
                    }
                }
            }
            self.cycle += 1;
            t += 1;
        }
        Ok(())
    }
}

/// Output of one reference simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutcome {
    pub result: Matrix,
    pub cycles: u64,
    pub mac_events: u64,
}

fn tiles(dim: usize, array: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim)
        .step_by(array)
        .map(move |start| (start, array.min(dim - start)))
}

/// Multiplies `a (m x k)` by `b (k x n)` on the PE grid described by `hw`.
pub fn simulate(a: &Matrix, b: &Matrix, hw: &HardwareConfig) -> Result<SimOutcome> {
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    if b.rows() != k {
        return Err(Error::Domain(format!(
            "inner dimensions differ: {}x{} * {}x{}",
            m,
            k,
            b.rows(),
            n
        )));
    }
    Shape::new(m as u64, k as u64, n as u64).check_nonzero()?;
    if m > MAX_MK || k > MAX_MK || n > MAX_N {
        return Err(Error::OracleScale(format!(
            "op {m}x{k}x{n} exceeds {MAX_MK}x{MAX_MK}x{MAX_N}"
        )));
    }
    if hw.rows == 0 || hw.cols == 0 || hw.rows > MAX_ARRAY || hw.cols > MAX_ARRAY {
        return Err(Error::OracleScale(format!(
            "array {}x{} outside 1..={MAX_ARRAY}",
            hw.rows, hw.cols
        )));
    }
    let (rows, cols) = (hw.rows as usize, hw.cols as usize);
    let mut out = Matrix::zeros(m, n);

    let grid = match hw.dataflow {
        Dataflow::Os => {
            let mut grid = PeGridState::new(rows, cols);
            for (i0, r) in tiles(m, rows) {
                for (j0, c) in tiles(n, cols) {
                    grid.run_os_fold(
                        r,
                        c,
                        k,
                        |s, i| a.get(i0 + i, s),
                        |s, j| b.get(s, j0 + j),
                        |i, j, v| out.set(i0 + i, j0 + j, v),
                    )?;
                }
            }
            grid
        }
        Dataflow::Ws => {
            let mut grid = PeGridState::new(rows, cols);
            for (k0, r) in tiles(k, rows) {
                for (j0, c) in tiles(n, cols) {
                    grid.run_stationary_fold(
                        r,
                        c,
                        m,
                        |i, j| b.get(k0 + i, j0 + j),
                        |t, i| a.get(t, k0 + i),
                        |t, j, v| out.add(t, j0 + j, v),
                    )?;
                }
            }
            grid
        }
        Dataflow::Is => {
            // Rotated view: grid rows run along the physical columns (k) and
            // grid columns along the physical rows (m).
            let mut grid = PeGridState::new(cols, rows);
            for (i0, r) in tiles(m, rows) {
                for (k0, c) in tiles(k, cols) {
                    grid.run_stationary_fold(
                        c,
                        r,
                        n,
                        |kk, i| a.get(i0 + i, k0 + kk),
                        |t, kk| b.get(k0 + kk, t),
                        |t, i, v| out.add(i0 + i, t, v),
                    )?;
                }
            }
            grid
        }
    };

    Ok(SimOutcome {
        result: out,
        cycles: grid.cycle(),
        mac_events: grid.mac_events(),
    })
}

/// Direct triple-loop product.
pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = 0;
            for s in 0..a.cols() {
                acc += a.get(i, s) * b.get(s, j);
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// Bounds of an exhaustive oracle sweep (all inclusive, starting at 1).
#[derive(Debug, Clone, Copy)]
pub struct SweepBounds {
    pub max_mk: u64,
    pub max_n: u64,
    pub max_array: u64,
}

impl Default for SweepBounds {
    fn default() -> Self {
        SweepBounds {
            max_mk: 8,
            max_n: 4,
            max_array: 4,
        }
    }
}

impl SweepBounds {
    pub fn shape_count(&self) -> u64 {
        self.max_mk * self.max_mk * self.max_n * self.max_array * self.max_array * 3
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub shape: Shape,
    pub rows: u64,
    pub cols: u64,
    pub dataflow: Dataflow,
    pub analytical: Option<u64>,
    pub simulated: Option<u64>,
    pub detail: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<u64>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        write!(
            f,
            "{} on {}x{} {}: analytical={} simulated={} {}",
            self.shape,
            self.rows,
            self.cols,
            self.dataflow,
            show(self.analytical),
            show(self.simulated),
            self.detail
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checked: u64,
    pub mismatches: Vec<Mismatch>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares `model` against the simulator on every shape within `bounds`,
/// also checking the product and MAC count of each simulation.
pub fn oracle_sweep(
    bounds: SweepBounds,
    model: impl Fn(Shape, &HardwareConfig) -> Result<OpCost>,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    for df in Dataflow::ALL {
        for rows in 1..=bounds.max_array {
            for cols in 1..=bounds.max_array {
                let hw = HardwareConfig::array(rows, cols, df);
                for m in 1..=bounds.max_mk {
                    for k in 1..=bounds.max_mk {
                        for n in 1..=bounds.max_n {
                            let shape = Shape::new(m, k, n);
                            report.checked += 1;
                            if let Some(mm) = check_shape(shape, &hw, &model) {
                                report.mismatches.push(mm);
                            }
                        }
                    }
                }
            }
        }
    }
    report
}

fn check_shape(
    shape: Shape,
    hw: &HardwareConfig,
    model: &impl Fn(Shape, &HardwareConfig) -> Result<OpCost>,
) -> Option<Mismatch> {
    let a = Matrix::patterned(shape.m as usize, shape.k as usize, 1);
    let b = Matrix::patterned(shape.k as usize, shape.n as usize, 2);
    let analytical = model(shape, hw).ok().map(|c| c.compute_cycles);
    let mismatch = |simulated, detail: &str| Mismatch {
        shape,
        rows: hw.rows,
        cols: hw.cols,
        dataflow: hw.dataflow,
        analytical,
        simulated,
        detail: detail.to_string(),
    };
    match simulate(&a, &b, hw) {
        Err(e) => Some(mismatch(None, &e.to_string())),
        Ok(sim) => {
            if sim.result != matmul(&a, &b) {
                Some(mismatch(Some(sim.cycles), "wrong product"))
            } else if sim.mac_events != shape.macs() {
                Some(mismatch(Some(sim.cycles), "MAC count differs from m*k*n"))
            } else if analytical != Some(sim.cycles) {
                Some(mismatch(Some(sim.cycles), "cycle count differs"))
            } else {
                None
            }
        }
    }
}

/// Oracle sweep against the production cost model.
pub fn validate_cost_model(bounds: SweepBounds) -> ValidationReport {
    oracle_sweep(bounds, systolic_cost::cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hw(r: u64, c: u64, df: Dataflow) -> HardwareConfig {
        HardwareConfig::array(r, c, df)
    }

    #[test]
    fn two_by_two_os() {
        let a = Matrix::from_rows(vec![vec![1, 2], vec![3, 4]]).unwrap();
        let x = Matrix::from_rows(vec![vec![1], vec![1]]).unwrap();
        let out = simulate(&a, &x, &hw(2, 2, Dataflow::Os)).unwrap();
        assert_eq!(out.result.column(0), [3, 7]);
        assert_eq!(out.mac_events, 4);
    }

    #[test]
    fn cost_examples_from_stepping() {
        let a = Matrix::patterned(4, 3, 9);
        let b = Matrix::patterned(3, 1, 4);
        assert_eq!(
            simulate(&a, &b, &hw(2, 2, Dataflow::Os)).unwrap().cycles,
            12
        );
        assert_eq!(
            simulate(&a, &b, &hw(2, 2, Dataflow::Is)).unwrap().cycles,
            16
        );
        let a = Matrix::patterned(3, 4, 9);
        let b = Matrix::patterned(4, 1, 4);
        assert_eq!(
            simulate(&a, &b, &hw(2, 2, Dataflow::Ws)).unwrap().cycles,
            12
        );
        let one = Matrix::from_rows(vec![vec![3]]).unwrap();
        for df in Dataflow::ALL {
            assert_eq!(simulate(&one, &one, &hw(3, 3, df)).unwrap().cycles, 2);
        }
    }

    #[test]
    fn identity_passes_vector_through() {
        let x = Matrix::from_rows(vec![vec![4], vec![-1], vec![7], vec![2], vec![0]]).unwrap();
        for df in Dataflow::ALL {
            let out = simulate(&Matrix::identity(5), &x, &hw(2, 3, df)).unwrap();
            assert_eq!(out.result, x);
        }
    }

    #[test]
    fn scale_limits() {
        let a = Matrix::zeros(65, 1);
        let b = Matrix::zeros(1, 1);
        assert!(matches!(
            simulate(&a, &b, &hw(2, 2, Dataflow::Os)),
            Err(Error::OracleScale(_))
        ));
        let a = Matrix::zeros(2, 2);
        assert!(matches!(
            simulate(&a, &a, &hw(17, 2, Dataflow::Os)),
            Err(Error::OracleScale(_))
        ));
        let b = Matrix::zeros(3, 1);
        assert!(simulate(&a, &b, &hw(2, 2, Dataflow::Os)).is_err());
    }

    #[test]
    fn small_sweep_agrees() {
        let bounds = SweepBounds {
            max_mk: 5,
            max_n: 3,
            max_array: 3,
        };
        let report = validate_cost_model(bounds);
        assert_eq!(report.checked, bounds.shape_count());
        assert!(report.passed(), "{:?}", report.mismatches.first());
    }

    #[test]
    fn off_by_one_is_caught() {
        let bounds = SweepBounds {
            max_mk: 3,
            max_n: 2,
            max_array: 2,
        };
        let report = oracle_sweep(bounds, |s, hw| {
            let mut c = systolic_cost::cost(s, hw)?;
            c.compute_cycles += 1;
            Ok(c)
        });
        assert_eq!(report.mismatches.len() as u64, report.checked);
    }

    proptest! {
        #[test]
        fn product_and_work_conserved(
            m in 1usize..12, k in 1usize..12, n in 1usize..5,
            r in 1u64..6, c in 1u64..6, df_idx in 0usize..3,
            seed in proptest::collection::vec(-9i64..10, 0..1),
        ) {
            let salt = seed.first().copied().unwrap_or(0).unsigned_abs() as usize;
            let a = Matrix::patterned(m, k, salt);
            let b = Matrix::patterned(k, n, salt + 3);
            let hw = hw(r, c, Dataflow::ALL[df_idx]);
            let out = simulate(&a, &b, &hw).unwrap();
            prop_assert_eq!(&out.result, &matmul(&a, &b));
            prop_assert_eq!(out.mac_events, (m * k * n) as u64);
            let shape = Shape::new(m as u64, k as u64, n as u64);
            prop_assert_eq!(out.cycles, systolic_cost::cost(shape, &hw).unwrap().compute_cycles);
        }
    }
}
