//! Block-level aggregation, sweeps over (sequence length x model), and
//! CSV / JSON / markdown emitters.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amdahl::AmdahlCurve;
use crate::error::{Error, Result};
use crate::hardware::{Dataflow, HardwareConfig};
use crate::memory_model::{self, Precision, TrafficResult};
use crate::model_zoo::{enumerate_block_ops, ModelConfig, Role};
use crate::systolic_cost::{self, OpCost};

/// Default sweep sequence lengths.
pub const DEFAULT_SEQLENS: [u64; 6] = [128, 256, 512, 1024, 2048, 4096];

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Compute,
    Memory,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Compute => "compute",
            Metric::Memory => "memory",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "compute" => Ok(Metric::Compute),
            "memory" => Ok(Metric::Memory),
            other => Err(Error::Domain(format!("unknown metric `{other}`"))),
        }
    }
}

/// What the memory metric counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMetric {
    /// SRAM reads + writes, in elements.
    #[default]
    SramElements,
    /// DRAM reads + writes, in bytes.
    DramBytes,
}

impl MemoryMetric {
    fn amount(self, t: &TrafficResult) -> u64 {
        match self {
            MemoryMetric::SramElements => t.sram_accesses(),
            MemoryMetric::DramBytes => t.dram_bytes(),
        }
    }
}

/// Cost and traffic of one op of the analyzed block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpRecord {
    pub role: Role,
    pub head_index: Option<u64>,
    pub m: u64,
    pub k: u64,
    pub n: u64,
    pub quantizable: bool,
    pub cost: OpCost,
    pub traffic: TrafficResult,
}

/// Sums over one partition of the block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionTotals {
    pub ops: u64,
    pub compute_cycles: u64,
    pub macs: u64,
    pub memory: u64,
}

impl PartitionTotals {
    fn add(&mut self, cycles: u64, macs: u64, memory: u64) {
        self.ops += 1;
        self.compute_cycles += cycles;
        self.macs += macs;
        self.memory += memory;
    }

    fn scaled(&self, layers: u64) -> PartitionTotals {
        PartitionTotals {
            ops: self.ops * layers,
            compute_cycles: self.compute_cycles * layers,
            macs: self.macs * layers,
            memory: self.memory * layers,
        }
    }
}

/// Share of one decoder block's work that sits in the quantizable
/// (MatMul-free) projection partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionReport {
    pub model: String,
    pub seqlen: u64,
    pub hardware: String,
    pub dataflow: Dataflow,
    pub memory_metric: MemoryMetric,
    pub f_compute: f64,
    pub f_memory: f64,
    pub projection: PartitionTotals,
    pub attention: PartitionTotals,
    pub layers: Option<u64>,
    pub per_op: Vec<OpRecord>,
}

impl FractionReport {
    pub fn fraction(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Compute => self.f_compute,
            Metric::Memory => self.f_memory,
        }
    }

    /// `(projection, attention)` amounts of one block for `metric`.
    pub fn split(&self, metric: Metric) -> (u64, u64) {
        match metric {
            Metric::Compute => (
                self.projection.compute_cycles,
                self.attention.compute_cycles,
            ),
            Metric::Memory => (self.projection.memory, self.attention.memory),
        }
    }

    pub fn block_cycles(&self) -> u64 {
        self.projection.compute_cycles + self.attention.compute_cycles
    }

    /// `(projection, attention)` totals over all decoder blocks, if a layer
    /// count is known.
    pub fn model_totals(&self) -> Option<(PartitionTotals, PartitionTotals)> {
        self.layers
            .map(|l| (self.projection.scaled(l), self.attention.scaled(l)))
    }
}

fn ratio(part: u64, other: u64) -> f64 {
    part as f64 / (part + other) as f64
}

/// Costs every MatMul of one block and splits the totals by partition.
pub fn analyze_block(
    model: &ModelConfig,
    seqlen: u64,
    hw: &HardwareConfig,
    memory_metric: MemoryMetric,
) -> Result<FractionReport> {
    hw.validate()?;
    let ops = enumerate_block_ops(model, seqlen)?;
    let mut projection = PartitionTotals::default();
    let mut attention = PartitionTotals::default();
    let mut per_op = Vec::with_capacity(ops.len());
    for op in ops {
        let cost = systolic_cost::cost(op.shape, hw)?;
        let traffic = memory_model::traffic(op.shape, hw);
        let part = if op.quantizable() {
            &mut projection
        } else {
            &mut attention
        };
        part.add(
            cost.compute_cycles,
            cost.mac_count,
            memory_metric.amount(&traffic),
        );
        per_op.push(OpRecord {
            role: op.role,
            head_index: op.head_index,
            m: op.m(),
            k: op.k(),
            n: op.n(),
            quantizable: op.quantizable(),
            cost,
            traffic,
        });
    }
    Ok(FractionReport {
        model: model.name().to_string(),
        seqlen,
        hardware: hw.name.clone(),
        dataflow: hw.dataflow,
        memory_metric,
        f_compute: ratio(projection.compute_cycles, attention.compute_cycles),
        f_memory: ratio(projection.memory, attention.memory),
        projection,
        attention,
        layers: model.layers(),
        per_op,
    })
}

/// MatMul-free fraction for each (sequence length, model) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub hardware: String,
    pub dataflow: Dataflow,
    pub metric: Metric,
    pub memory_metric: MemoryMetric,
    pub seqlens: Vec<u64>,
    pub models: Vec<String>,
    /// `cells[row][col]` for `seqlens[row]`, `models[col]`.
    pub cells: Vec<Vec<f64>>,
}

impl SweepGrid {
    pub fn get(&self, seqlen: u64, model: &str) -> Option<f64> {
        let r = self.seqlens.iter().position(|&l| l == seqlen)?;
        let c = self.models.iter().position(|m| m == model)?;
        Some(self.cells[r][c])
    }

    pub fn min(&self) -> f64 {
        self.cells
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.cells
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs [`analyze_block`] over the grid. Cells are evaluated in parallel and
/// assembled in input order.
pub fn sweep(
    models: &[ModelConfig],
    seqlens: &[u64],
    hw: &HardwareConfig,
    metric: Metric,
    memory_metric: MemoryMetric,
) -> Result<SweepGrid> {
    if models.is_empty() || seqlens.is_empty() {
        return Err(Error::Domain(
            "sweep needs at least one model and one seqlen".into(),
        ));
    }
    for model in models {
        for &l in seqlens {
            model.check_seqlen(l)?;
        }
    }
    let cells: Vec<(usize, f64)> = seqlens
        .par_iter()
        .enumerate()
        .flat_map(|(row, &l)| {
            models.par_iter().map(move |model| {
                analyze_block(model, l, hw, memory_metric).map(|r| (row, r.fraction(metric)))
            })
        })
        .collect::<Result<_>>()?;

    let mut grid = vec![Vec::with_capacity(models.len()); seqlens.len()];
    for (row, v) in cells {
        grid[row].push(v);
    }
    Ok(SweepGrid {
        hardware: hw.name.clone(),
        dataflow: hw.dataflow,
        metric,
        memory_metric,
        seqlens: seqlens.to_vec(),
        models: models.iter().map(|m| m.name().to_string()).collect(),
        cells: grid,
    })
}

/// Cells where the memory fraction falls below the compute fraction, as
/// `(seqlen, model)`. Expected to be empty; reported, not enforced.
pub fn memory_below_compute(compute: &SweepGrid, memory: &SweepGrid) -> Vec<(u64, String)> {
    let mut out = Vec::new();
    for (r, &l) in compute.seqlens.iter().enumerate() {
        for (c, model) in compute.models.iter().enumerate() {
            if let Some(mem) = memory.get(l, model) {
                if mem < compute.cells[r][c] {
                    out.push((l, model.clone()));
                }
            }
        }
    }
    out
}

/// Both Amdahl curves for one analyzed block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePair {
    pub model: String,
    pub seqlen: u64,
    pub hardware: String,
    pub metric: Metric,
    pub projection: AmdahlCurve,
    pub attention: AmdahlCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataflowRow {
    pub dataflow: Dataflow,
    pub total_cycles: u64,
    pub projection_cycles: u64,
    pub attention_cycles: u64,
    pub f_compute: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataflowComparison {
    pub model: String,
    pub seqlen: u64,
    pub hardware: String,
    pub rows: Vec<DataflowRow>,
    pub best: Dataflow,
}

/// Total block cycles under each of the three dataflows. Ties go to the
/// earlier dataflow in OS, WS, IS order.
pub fn compare_dataflows(
    model: &ModelConfig,
    seqlen: u64,
    hw: &HardwareConfig,
) -> Result<DataflowComparison> {
    let rows = Dataflow::ALL
        .iter()
        .map(|&df| {
            let r = analyze_block(
                model,
                seqlen,
                &hw.clone().with_dataflow(df),
                MemoryMetric::default(),
            )?;
            Ok(DataflowRow {
                dataflow: df,
                total_cycles: r.block_cycles(),
                projection_cycles: r.projection.compute_cycles,
                attention_cycles: r.attention.compute_cycles,
                f_compute: r.f_compute,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = rows
        .iter()
        .min_by_key(|r| r.total_cycles)
        .map(|r| r.dataflow)
        .expect("three dataflows");
    Ok(DataflowComparison {
        model: model.name().to_string(),
        seqlen,
        hardware: hw.name.clone(),
        rows,
        best,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintRow {
    pub precision: Precision,
    pub bits: u64,
    pub block_bytes: u64,
    pub model_bytes: Option<u64>,
    pub reduction_vs_fp16: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintReport {
    pub model: String,
    pub weight_elements: u64,
    pub layers: Option<u64>,
    pub rows: Vec<FootprintRow>,
}

pub fn footprint_report(model: &ModelConfig, precisions: &[Precision]) -> FootprintReport {
    let fp16 = memory_model::weight_footprint(model, Precision::Fp16);
    let rows = precisions
        .iter()
        .map(|&p| {
            let block = memory_model::weight_footprint(model, p);
            FootprintRow {
                precision: p,
                bits: p.bits(),
                block_bytes: block,
                model_bytes: model.layers().map(|l| l * block),
                reduction_vs_fp16: fp16 as f64 / block as f64,
            }
        })
        .collect();
    FootprintReport {
        model: model.name().to_string(),
        weight_elements: model.projection_weight_elements(),
        layers: model.layers(),
        rows,
    }
}

/// Listing of model configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTable {
    pub models: Vec<ModelConfig>,
}

// ---------------------------------------------------------------------------
// Emitters
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(Error::Domain(format!("unsupported format `{other}`"))),
        }
    }
}

/// Context recorded in the JSON envelope.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub hardware: Option<HardwareConfig>,
    pub metric: Option<Metric>,
    /// Seconds since the Unix epoch; omitted for reproducible output.
    pub generated_at: Option<u64>,
}

/// Self-describing JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub tool: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardware: Option<HardwareConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataflow: Option<Dataflow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
    pub payload: T,
}

/// Payloads that can be rendered as CSV and markdown.
pub trait Tabular {
    fn to_csv(&self) -> String;
    fn to_markdown(&self) -> String;
}

pub fn emit<T: Tabular + Serialize>(payload: &T, format: Format, meta: &RunMeta) -> String {
    match format {
        Format::Csv => payload.to_csv(),
        Format::Markdown => payload.to_markdown(),
        Format::Json => {
            let doc = Document {
                tool: TOOL_NAME.to_string(),
                version: TOOL_VERSION.to_string(),
                generated_at: meta.generated_at,
                hardware: meta.hardware.clone(),
                dataflow: meta.hardware.as_ref().map(|h| h.dataflow),
                metric: meta.metric,
                payload,
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("payloads serialize");
            s.push('\n');
            s
        }
    }
}

/// Parses a JSON document produced by [`emit`].
pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Document<T>> {
    serde_json::from_str(text).map_err(|e| Error::Domain(format!("invalid document: {e}")))
}

fn md_row(out: &mut String, cells: &[String]) {
    out.push('|');
    for c in cells {
        let _ = write!(out, " {c} |");
    }
    out.push('\n');
}

fn md_table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    md_row(
        out,
        &header.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
    );
    md_row(out, &vec!["---".to_string(); header.len()]);
    for r in rows {
        md_row(out, r);
    }
}

fn pct(f: f64) -> String {
    format!("{:.1}%", f * 100.0)
}

impl Tabular for SweepGrid {
    fn to_csv(&self) -> String {
        let mut out = String::from("seqlen");
        for m in &self.models {
            let _ = write!(out, ",{m}");
        }
        out.push('\n');
        for (l, row) in self.seqlens.iter().zip(&self.cells) {
            let _ = write!(out, "{l}");
            for v in row {
                let _ = write!(out, ",{v:.4}");
            }
            out.push('\n');
        }
        out
    }

    fn to_markdown(&self) -> String {
        let mut out = format!(
            "# MatMul-free fraction ({} metric, {} hardware, {} dataflow)\n\n",
            self.metric, self.hardware, self.dataflow
        );
        let mut header = vec!["seqlen"];
        header.extend(self.models.iter().map(String::as_str));
        let rows: Vec<Vec<String>> = self
            .seqlens
            .iter()
            .zip(&self.cells)
            .map(|(l, row)| {
                std::iter::once(l.to_string())
                    .chain(row.iter().map(|&v| pct(v)))
                    .collect()
            })
            .collect();
        md_table(&mut out, &header, &rows);
        let _ = writeln!(out, "\nrange: {} .. {}", pct(self.min()), pct(self.max()));
        out
    }
}

impl Tabular for CurvePair {
    fn to_csv(&self) -> String {
        let mut out = String::from("s_partial,projections,attention\n");
        for (p, a) in self.projection.samples.iter().zip(&self.attention.samples) {
            let _ = writeln!(out, "{},{:.6},{:.6}", p.s_partial, p.s_total, a.s_total);
        }
        out
    }

    fn to_markdown(&self) -> String {
        let mut out = format!(
            "# Amdahl curves: {} @ {} on {} ({} metric)\n\n",
            self.model, self.seqlen, self.hardware, self.metric
        );
        let rows: Vec<Vec<String>> = [&self.projection, &self.attention]
            .iter()
            .map(|c| {
                vec![
                    c.target.to_string(),
                    format!("{:.4}", c.f),
                    c.last().map_or("-".into(), |s| format!("{:.4}", s.s_total)),
                    format!("{:.4}", c.asymptote()),
                ]
            })
            .collect();
        let s_max = self.projection.last().map_or(0.0, |s| s.s_partial);
        let at_max = format!("S_total @ S_partial={s_max}");
        md_table(&mut out, &["improved", "F", &at_max, "limit"], &rows);
        out.push('\n');
        let rows: Vec<Vec<String>> = self
            .projection
            .samples
            .iter()
            .zip(&self.attention.samples)
            .map(|(p, a)| {
                vec![
                    p.s_partial.to_string(),
                    format!("{:.4}", p.s_total),
                    format!("{:.4}", a.s_total),
                ]
            })
            .collect();
        md_table(&mut out, &["S_partial", "projections", "attention"], &rows);
        out
    }
}

const PER_OP_CSV_HEADER: &str = "model,seqlen,role,head,m,k,n,quantizable,folds,compute_cycles,utilization,sram_reads_a,sram_reads_b,sram_writes_out,dram_reads,dram_writes\n";

fn per_op_csv_rows(report: &FractionReport, out: &mut String) {
    for op in &report.per_op {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{:.4},{},{},{},{},{}",
            report.model,
            report.seqlen,
            op.role,
            op.head_index.map_or(String::new(), |h| h.to_string()),
            op.m,
            op.k,
            op.n,
            op.quantizable,
            op.cost.folds,
            op.cost.compute_cycles,
            op.cost.utilization,
            op.traffic.sram_reads_a,
            op.traffic.sram_reads_b,
            op.traffic.sram_writes_out,
            op.traffic.dram_reads,
            op.traffic.dram_writes,
        );
    }
}

/// Several block analyses emitted as one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSet {
    pub reports: Vec<FractionReport>,
}

impl Tabular for SimulationSet {
    fn to_csv(&self) -> String {
        let mut out = String::from(PER_OP_CSV_HEADER);
        for r in &self.reports {
            per_op_csv_rows(r, &mut out);
        }
        out
    }

    fn to_markdown(&self) -> String {
        self.reports
            .iter()
            .map(Tabular::to_markdown)
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl Tabular for FractionReport {
    fn to_csv(&self) -> String {
        let mut out = String::from(PER_OP_CSV_HEADER);
        per_op_csv_rows(self, &mut out);
        out
    }

    fn to_markdown(&self) -> String {
        let mut out = format!(
            "# {} @ seqlen {} on {} ({} dataflow)\n\n",
            self.model, self.seqlen, self.hardware, self.dataflow
        );
        let mem_label = match self.memory_metric {
            MemoryMetric::SramElements => "SRAM accesses",
            MemoryMetric::DramBytes => "DRAM bytes",
        };
        let rows = vec![
            vec![
                "projections (MatMul-free)".to_string(),
                self.projection.ops.to_string(),
                self.projection.compute_cycles.to_string(),
                self.projection.memory.to_string(),
                pct(self.f_compute),
                pct(self.f_memory),
            ],
            vec![
                "attention heads (MatMul)".to_string(),
                self.attention.ops.to_string(),
                self.attention.compute_cycles.to_string(),
                self.attention.memory.to_string(),
                pct(1.0 - self.f_compute),
                pct(1.0 - self.f_memory),
            ],
        ];
        md_table(
            &mut out,
            &[
                "partition",
                "ops",
                "cycles",
                mem_label,
                "compute share",
                "memory share",
            ],
            &rows,
        );
        let _ = writeln!(
            out,
            "\nf_compute = {:.4}, f_memory = {:.4}",
            self.f_compute, self.f_memory
        );
        if let Some((p, a)) = self.model_totals() {
            let _ = writeln!(
                out,
                "whole model ({} blocks): {} cycles, {} {}",
                self.layers.unwrap_or(1),
                p.compute_cycles + a.compute_cycles,
                p.memory + a.memory,
                mem_label
            );
        }
        out.push_str("\n## Per-op costs\n\n");
        // Heads are identical; show head 0 and fold the rest into a count.
        let h = self
            .per_op
            .iter()
            .filter(|o| o.role == Role::ScoreQK)
            .count();
        let rows: Vec<Vec<String>> = self
            .per_op
            .iter()
            .filter(|o| o.head_index.is_none_or(|i| i == 0))
            .map(|o| {
                let count = if o.head_index.is_some() { h } else { 1 };
                vec![
                    o.role.to_string(),
                    count.to_string(),
                    format!("{}x{}x{}", o.m, o.k, o.n),
                    o.cost.folds.to_string(),
                    o.cost.compute_cycles.to_string(),
                    format!("{:.3}", o.cost.utilization),
                    o.traffic.sram_accesses().to_string(),
                ]
            })
            .collect();
        md_table(
            &mut out,
            &[
                "role",
                "count",
                "m x k x n",
                "folds",
                "cycles each",
                "utilization",
                "SRAM accesses each",
            ],
            &rows,
        );
        out
    }
}

impl Tabular for DataflowComparison {
    fn to_csv(&self) -> String {
        let mut out =
            String::from("dataflow,total_cycles,projection_cycles,attention_cycles,f_compute\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.4}",
                r.dataflow, r.total_cycles, r.projection_cycles, r.attention_cycles, r.f_compute
            );
        }
        out
    }

    fn to_markdown(&self) -> String {
        let mut out = format!(
            "# Dataflow comparison: {} @ seqlen {} on {}\n\n",
            self.model, self.seqlen, self.hardware
        );
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.dataflow.to_string(),
                    r.total_cycles.to_string(),
                    r.projection_cycles.to_string(),
                    r.attention_cycles.to_string(),
                    pct(r.f_compute),
                ]
            })
            .collect();
        md_table(
            &mut out,
            &[
                "dataflow",
                "total cycles",
                "projection",
                "attention",
                "f_compute",
            ],
            &rows,
        );
        let _ = writeln!(out, "\nbest: {}", self.best);
        out
    }
}

impl Tabular for FootprintReport {
    fn to_csv(&self) -> String {
        let mut out = String::from("precision,bits,block_bytes,model_bytes,reduction_vs_fp16\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.precision,
                r.bits,
                r.block_bytes,
                r.model_bytes.map_or(String::new(), |b| b.to_string()),
                r.reduction_vs_fp16
            );
        }
        out
    }

    fn to_markdown(&self) -> String {
        let mut out = format!(
            "# Projection weight footprint: {} ({} elements per block)\n\n",
            self.model, self.weight_elements
        );
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.precision.to_string(),
                    r.bits.to_string(),
                    r.block_bytes.to_string(),
                    r.model_bytes.map_or("-".into(), |b| b.to_string()),
                    format!("{}x", r.reduction_vs_fp16),
                ]
            })
            .collect();
        md_table(
            &mut out,
            &[
                "precision",
                "bits",
                "bytes / block",
                "bytes / model",
                "vs fp16",
            ],
            &rows,
        );
        out
    }
}

fn warning_text(m: &ModelConfig) -> String {
    if m.head_dim_warning() {
        format!("WARN d mod h = {}", m.d() % m.h())
    } else {
        String::new()
    }
}

impl Tabular for ModelTable {
    fn to_csv(&self) -> String {
        let mut out = String::from("name,d,h,d_ff,head_dim,seqlen_min,seqlen_max,warning\n");
        for m in &self.models {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                m.name(),
                m.d(),
                m.h(),
                m.d_ff(),
                m.head_dim(),
                m.seqlen_min(),
                m.seqlen_max(),
                warning_text(m)
            );
        }
        out
    }

    fn to_markdown(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .models
            .iter()
            .map(|m| {
                vec![
                    m.name().to_string(),
                    m.d().to_string(),
                    m.h().to_string(),
                    m.d_ff().to_string(),
                    m.head_dim().to_string(),
                    format!("{}-{}", m.seqlen_min(), m.seqlen_max()),
                    warning_text(m),
                ]
            })
            .collect();
        let mut out = String::new();
        md_table(
            &mut out,
            &["model", "d", "h", "d_ff", "head_dim", "seqlen", "warning"],
            &rows,
        );
        out
    }
}
