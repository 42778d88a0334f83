//! SRAM and DRAM access counting per op, plus weight footprints by precision.
//!
//! Operand placement follows the TPU partition: the matrix operand (a weight
//! matrix, or the cached Key/Value matrix of a head) lives in weight SRAM,
//! the streamed vector in input SRAM, results in output SRAM. Counts are in
//! elements; DRAM traffic is also reported in bytes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardware::{Dataflow, HardwareConfig};
use crate::model_zoo::{ModelConfig, Shape};
use crate::systolic_cost::fold_count;

/// Which operands fit in their SRAM partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residency {
    pub a: bool,
    pub b: bool,
    pub out: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficResult {
    /// Reads of the `m x k` matrix operand.
    pub sram_reads_a: u64,
    /// Reads of the `k x n` streamed operand.
    pub sram_reads_b: u64,
    pub sram_writes_out: u64,
    pub dram_reads: u64,
    pub dram_writes: u64,
    /// DRAM traffic beyond the one-time cold load / write-back of each
    /// operand; zero whenever every operand fits.
    pub spill_elements: u64,
    pub fits_in_sram: Residency,
    pub element_bytes: u64,
}

impl TrafficResult {
    pub fn sram_accesses(&self) -> u64 {
        self.sram_reads_a + self.sram_reads_b + self.sram_writes_out
    }

    pub fn dram_bytes(&self) -> u64 {
        (self.dram_reads + self.dram_writes) * self.element_bytes
    }
}

/// SRAM/DRAM access counts for one op under the hardware's dataflow.
///
/// Under OS the matrix is re-read once per column fold and the vector once
/// per row fold (`F_N*m*k`, `F_M*k*n`) and each output is written once. Under
/// WS and IS the stationary operand is read exactly once, the streamed one
/// once per fold along the other spatial dimension, and partial sums are
/// written once per reduction fold.
pub fn traffic(shape: Shape, hw: &HardwareConfig) -> TrafficResult {
    let Shape { m, k, n } = shape;
    let (reads_a, reads_b, writes) = match hw.dataflow {
        Dataflow::Os => {
            let f_m = fold_count(m, hw.rows);
            let f_n = fold_count(n, hw.cols);
            (f_n * m * k, f_m * k * n, m * n)
        }
        Dataflow::Ws => {
            let f_k = fold_count(k, hw.rows);
            let f_n = fold_count(n, hw.cols);
            (f_n * m * k, k * n, f_k * m * n)
        }
        Dataflow::Is => {
            let f_m = fold_count(m, hw.rows);
            let f_k = fold_count(k, hw.cols);
            (m * k, f_m * k * n, f_k * m * n)
        }
    };

    let eb = hw.element_bytes;
    let fits = Residency {
        a: m * k * eb <= hw.sram_weight_bytes,
        b: k * n * eb <= hw.sram_input_bytes,
        out: m * n * eb <= hw.sram_output_bytes,
    };
    // Resident operands cost one cold load; the rest stream through DRAM.
    let dram_a = if fits.a { m * k } else { reads_a };
    let dram_b = if fits.b { k * n } else { reads_b };
    let dram_out = if fits.out { m * n } else { writes };

    TrafficResult {
        sram_reads_a: reads_a,
        sram_reads_b: reads_b,
        sram_writes_out: writes,
        dram_reads: dram_a + dram_b,
        dram_writes: dram_out,
        spill_elements: (dram_a - m * k) + (dram_b - k * n) + (dram_out - m * n),
        fits_in_sram: fits,
        element_bytes: eb,
    }
}

/// Weight storage precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Fp16,
    Int8,
    /// {-1, 0, 1}, stored in 2 bits.
    Ternary,
    /// {-1, 1}, stored in 1 bit.
    Binary,
}

impl Precision {
    pub const ALL: [Precision; 4] = [
        Precision::Fp16,
        Precision::Int8,
        Precision::Ternary,
        Precision::Binary,
    ];

    pub fn bits(self) -> u64 {
        match self {
            Precision::Fp16 => 16,
            Precision::Int8 => 8,
            Precision::Ternary => 2,
            Precision::Binary => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Fp16 => "fp16",
            Precision::Int8 => "int8",
            Precision::Ternary => "ternary",
            Precision::Binary => "binary",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fp16" => Ok(Precision::Fp16),
            "int8" => Ok(Precision::Int8),
            "ternary" | "1.58" => Ok(Precision::Ternary),
            "binary" | "1" => Ok(Precision::Binary),
            other => Err(Error::Domain(format!("unknown precision `{other}`"))),
        }
    }
}

/// Projection-weight bytes of one decoder block, rounded up to whole bytes.
pub fn weight_footprint(model: &ModelConfig, precision: Precision) -> u64 {
    (model.projection_weight_elements() * precision.bits()).div_ceil(8)
}
