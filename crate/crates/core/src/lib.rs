//! Performance model of decoder-only LLM inference on systolic-array
//! accelerators, split into the part that 1-bit quantization makes
//! MatMul-free (the projection layers) and the part that keeps full-precision
//! MatMuls (the attention heads).
//!
//! The pipeline: [`model_zoo`] enumerates the MatMuls of one decoder block,
//! [`systolic_cost`] and [`memory_model`] cost each one on a
//! [`hardware::HardwareConfig`], [`report`] aggregates fractions and sweeps,
//! and [`amdahl`] turns fractions into whole-model speedup curves.
//! [`reference_sim`] is a cycle-level oracle for the cycle formulas.

pub mod amdahl;
pub mod cli;
pub mod error;
pub mod hardware;
pub mod memory_model;
pub mod model_zoo;
pub mod reference_sim;
pub mod report;
pub mod systolic_cost;

pub use error::{Error, Result};
pub use hardware::{builtin_hardware, Dataflow, HardwareConfig};
pub use model_zoo::{builtin_models, enumerate_block_ops, MatMulOp, ModelConfig, Role, Shape};
pub use report::{analyze_block, sweep, FractionReport, MemoryMetric, Metric, SweepGrid};
pub use systolic_cost::OpCost;
