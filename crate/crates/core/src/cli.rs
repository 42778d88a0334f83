//! Command-line front end. [`run`] executes one invocation in-process and
//! returns what should be written to stdout/stderr plus the exit code.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::amdahl;
use crate::error::Error;
use crate::hardware::{find_hardware, Dataflow, HardwareConfig};
use crate::memory_model::Precision;
use crate::model_zoo::{builtin_models, find_model, opt_models, ModelConfig};
use crate::reference_sim::{self, SweepBounds, ValidationReport};
use crate::report::{
    self, emit, CurvePair, Format, MemoryMetric, Metric, ModelTable, RunMeta, SimulationSet,
    Tabular, DEFAULT_SEQLENS,
};
use crate::systolic_cost;

/// Relative `--out` paths are resolved against this directory when set.
pub const OUTPUT_DIR_ENV: &str = "MMFREE_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mmfree",
    version,
    about = "How much of an LLM decoder becomes MatMul-free under 1-bit projections, on a systolic-array TPU"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in model configurations.
    Models(OutputArgs),
    /// Cost one decoder block and report the MatMul-free fractions.
    Simulate(SimulateArgs),
    /// Fraction grid over models x sequence lengths.
    Sweep(SweepArgs),
    /// Amdahl speedup curves for improving projections vs. attention.
    Amdahl(AmdahlArgs),
    /// Compare OS, WS and IS total block cycles.
    Dataflows(DataflowsArgs),
    /// Check the closed-form cycle model against the cycle-level simulator.
    Validate(ValidateArgs),
    /// Projection weight bytes per block at several precisions.
    Footprint(FootprintArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Markdown,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Markdown => Format::Markdown,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Compute,
    Memory,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Compute => Metric::Compute,
            MetricArg::Memory => Metric::Memory,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataflowArg {
    Os,
    Ws,
    Is,
}

impl From<DataflowArg> for Dataflow {
    fn from(d: DataflowArg) -> Self {
        match d {
            DataflowArg::Os => Dataflow::Os,
            DataflowArg::Ws => Dataflow::Ws,
            DataflowArg::Is => Dataflow::Is,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: FormatArg,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the generation timestamp from JSON output.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct HardwareArgs {
    /// Builtin hardware name (cloud, edge) or a TOML config path.
    #[arg(long, default_value = "cloud")]
    pub hw: String,
    /// Override the hardware's dataflow.
    #[arg(long, value_enum)]
    pub dataflow: Option<DataflowArg>,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long, value_enum, default_value = "compute")]
    pub metric: MetricArg,
    /// Count DRAM bytes instead of SRAM element accesses for the memory metric.
    #[arg(long)]
    pub dram: bool,
}

impl MetricArgs {
    fn memory_metric(&self) -> MemoryMetric {
        if self.dram {
            MemoryMetric::DramBytes
        } else {
            MemoryMetric::SramElements
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Builtin model name or a TOML config path; repeatable.
    #[arg(long = "model", required = true)]
    pub models: Vec<String>,
    /// Sequence length; repeatable.
    #[arg(long = "seqlen", required = true)]
    pub seqlens: Vec<u64>,
    /// Decoder-block count for whole-model totals.
    #[arg(long)]
    pub layers: Option<u64>,
    #[command(flatten)]
    pub hardware: HardwareArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Models to sweep; defaults to the OPT family.
    #[arg(long = "model")]
    pub models: Vec<String>,
    /// Sequence lengths; defaults to 128..4096 in powers of two.
    #[arg(long = "seqlen")]
    pub seqlens: Vec<u64>,
    #[command(flatten)]
    pub hardware: HardwareArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AmdahlArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 2048)]
    pub seqlen: u64,
    #[arg(long, default_value_t = amdahl::DEFAULT_S_MAX)]
    pub s_max: u64,
    #[command(flatten)]
    pub hardware: HardwareArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DataflowsArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 2048)]
    pub seqlen: u64,
    /// Builtin hardware name (cloud, edge) or a TOML config path.
    #[arg(long, default_value = "cloud")]
    pub hw: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 8)]
    pub max_mk: u64,
    #[arg(long, default_value_t = 4)]
    pub max_n: u64,
    #[arg(long, default_value_t = 4)]
    pub max_array: u64,
    /// Add a constant to every analytical cycle count (harness self-test).
    #[arg(long, default_value_t = 0, hide = true, allow_negative_numbers = true)]
    pub inject_cycle_offset: i64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FootprintArgs {
    #[arg(long)]
    pub model: String,
    /// fp16, int8, ternary or binary; repeatable. Defaults to all four.
    #[arg(long = "precision")]
    pub precisions: Vec<Precision>,
    #[arg(long)]
    pub layers: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Result of one invocation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            }
        }
    }
}

pub fn execute(cli: Cli) -> Outcome {
    let mut out = Outcome::default();
    let result = match cli.command {
        Command::Models(o) => cmd_models(&o, &mut out),
        Command::Simulate(a) => cmd_simulate(&a, &mut out),
        Command::Sweep(a) => cmd_sweep(&a, &mut out),
        Command::Amdahl(a) => cmd_amdahl(&a, &mut out),
        Command::Dataflows(a) => cmd_dataflows(&a, &mut out),
        Command::Validate(a) => cmd_validate(&a, &mut out),
        Command::Footprint(a) => cmd_footprint(&a, &mut out),
    };
    match result {
        Ok(()) => out.code = EXIT_OK,
        Err(Failure::Usage(msg)) => {
            out.code = EXIT_USAGE;
            out.stderr.push_str(&format!("error: {msg}\n"));
        }
        Err(Failure::Validation(msg)) => {
            out.code = EXIT_VALIDATION;
            out.stderr.push_str(&format!("validation failed: {msg}\n"));
        }
    }
    out
}

/// Builtin name first, then a config file path.
pub fn resolve_model(selector: &str) -> Result<ModelConfig, Error> {
    if let Some(m) = find_model(selector) {
        return Ok(m);
    }
    let path = Path::new(selector);
    if path.is_file() {
        return ModelConfig::from_toml_file(path);
    }
    Err(Error::UnknownModel(selector.to_string()))
}

pub fn resolve_hardware(selector: &str) -> Result<HardwareConfig, Error> {
    if let Some(hw) = find_hardware(selector) {
        return Ok(hw);
    }
    let path = Path::new(selector);
    if path.is_file() {
        return HardwareConfig::from_toml_file(path);
    }
    Err(Error::UnknownHardware(selector.to_string()))
}

fn hardware(args: &HardwareArgs) -> Result<HardwareConfig, Failure> {
    let hw = resolve_hardware(&args.hw)?;
    Ok(match args.dataflow {
        Some(df) => hw.with_dataflow(df.into()),
        None => hw,
    })
}

fn timestamp(output: &OutputArgs) -> Option<u64> {
    if output.no_timestamp {
        return None;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs())
}

fn output_path(out: &Path) -> PathBuf {
    if out.is_relative() {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            return Path::new(&dir).join(out);
        }
    }
    out.to_path_buf()
}

fn deliver<T: Tabular + Serialize>(
    payload: &T,
    output: &OutputArgs,
    hardware: Option<HardwareConfig>,
    metric: Option<Metric>,
    out: &mut Outcome,
) -> Result<(), Failure> {
    let meta = RunMeta {
        hardware,
        metric,
        generated_at: timestamp(output),
    };
    let text = emit(payload, output.format.into(), &meta);
    match &output.out {
        None => out.stdout.push_str(&text),
        Some(path) => {
            let path = output_path(path);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| {
                    Failure::Usage(format!("cannot create {}: {e}", parent.display()))
                })?;
            }
            std::fs::write(&path, text)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            out.stderr.push_str(&format!("wrote {}\n", path.display()));
        }
    }
    Ok(())
}

fn with_layers(model: ModelConfig, layers: Option<u64>) -> Result<ModelConfig, Failure> {
    Ok(match layers {
        Some(l) => model.with_layers(l)?,
        None => model,
    })
}

fn cmd_models(output: &OutputArgs, out: &mut Outcome) -> Result<(), Failure> {
    let table = ModelTable {
        models: builtin_models(),
    };
    deliver(&table, output, None, None, out)
}

fn cmd_simulate(args: &SimulateArgs, out: &mut Outcome) -> Result<(), Failure> {
    let hw = hardware(&args.hardware)?;
    let mut reports = Vec::new();
    for selector in &args.models {
        let model = with_layers(resolve_model(selector)?, args.layers)?;
        if model.head_dim_warning() {
            out.stderr.push_str(&format!(
                "warning: {} has d mod h = {}; using floor(d/h) = {}\n",
                model.name(),
                model.d() % model.h(),
                model.head_dim()
            ));
        }
        for &l in &args.seqlens {
            reports.push(report::analyze_block(
                &model,
                l,
                &hw,
                args.metric.memory_metric(),
            )?);
        }
    }
    let set = SimulationSet { reports };
    deliver(
        &set,
        &args.output,
        Some(hw),
        Some(args.metric.metric.into()),
        out,
    )
}

fn cmd_sweep(args: &SweepArgs, out: &mut Outcome) -> Result<(), Failure> {
    let hw = hardware(&args.hardware)?;
    let models = if args.models.is_empty() {
        opt_models()
    } else {
        args.models
            .iter()
            .map(|s| resolve_model(s))
            .collect::<Result<Vec<_>, _>>()?
    };
    let seqlens = if args.seqlens.is_empty() {
        DEFAULT_SEQLENS.to_vec()
    } else {
        args.seqlens.clone()
    };
    let metric: Metric = args.metric.metric.into();
    let mm = args.metric.memory_metric();
    let grid = report::sweep(&models, &seqlens, &hw, metric, mm)?;

    let other_metric = match metric {
        Metric::Compute => Metric::Memory,
        Metric::Memory => Metric::Compute,
    };
    let other = report::sweep(&models, &seqlens, &hw, other_metric, mm)?;
    let (compute, memory) = match metric {
        Metric::Compute => (&grid, &other),
        Metric::Memory => (&other, &grid),
    };
    for (l, model) in report::memory_below_compute(compute, memory) {
        out.stderr.push_str(&format!(
            "warning: memory fraction below compute fraction for {model} @ {l}\n"
        ));
    }
    deliver(&grid, &args.output, Some(hw), Some(metric), out)
}

fn cmd_amdahl(args: &AmdahlArgs, out: &mut Outcome) -> Result<(), Failure> {
    if args.s_max < 1 {
        return Err(Failure::Usage("--s-max must be at least 1".into()));
    }
    let hw = hardware(&args.hardware)?;
    let model = resolve_model(&args.model)?;
    let metric: Metric = args.metric.metric.into();
    let r = report::analyze_block(&model, args.seqlen, &hw, args.metric.memory_metric())?;
    let (projection, attention) = amdahl::curves(&r, metric, args.s_max)?;
    let pair = CurvePair {
        model: r.model,
        seqlen: r.seqlen,
        hardware: r.hardware,
        metric,
        projection,
        attention,
    };
    deliver(&pair, &args.output, Some(hw), Some(metric), out)
}

fn cmd_dataflows(args: &DataflowsArgs, out: &mut Outcome) -> Result<(), Failure> {
    let hw = resolve_hardware(&args.hw)?;
    let model = resolve_model(&args.model)?;
    let cmp = report::compare_dataflows(&model, args.seqlen, &hw)?;
    deliver(&cmp, &args.output, Some(hw), Some(Metric::Compute), out)
}

/// Outcome of an oracle sweep in emit-able form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub checked: u64,
    pub mismatches: u64,
    pub passed: bool,
    /// First (at most 10) failing shapes.
    pub failures: Vec<String>,
}

impl From<&ValidationReport> for ValidationSummary {
    fn from(r: &ValidationReport) -> Self {
        ValidationSummary {
            checked: r.checked,
            mismatches: r.mismatches.len() as u64,
            passed: r.passed(),
            failures: r
                .mismatches
                .iter()
                .take(10)
                .map(|m| m.to_string())
                .collect(),
        }
    }
}

impl Tabular for ValidationSummary {
    fn to_csv(&self) -> String {
        let mut s = format!(
            "checked,mismatches,passed\n{},{},{}\n",
            self.checked, self.mismatches, self.passed
        );
        for f in &self.failures {
            s.push_str(&format!("# {f}\n"));
        }
        s
    }

    fn to_markdown(&self) -> String {
        let mut s = format!(
            "# Cycle model vs. reference simulator\n\nshapes checked: {}\nmismatches: {}\nresult: {}\n",
            self.checked,
            self.mismatches,
            if self.passed { "PASS" } else { "FAIL" }
        );
        if !self.failures.is_empty() {
            s.push_str("\nfirst failures:\n");
            for f in &self.failures {
                s.push_str(&format!("- {f}\n"));
            }
        }
        s
    }
}

fn cmd_validate(args: &ValidateArgs, out: &mut Outcome) -> Result<(), Failure> {
    let bounds = SweepBounds {
        max_mk: args.max_mk,
        max_n: args.max_n,
        max_array: args.max_array,
    };
    if bounds.max_mk < 1 || bounds.max_n < 1 || bounds.max_array < 1 {
        return Err(Failure::Usage("sweep bounds must be at least 1".into()));
    }
    if bounds.max_mk as usize > reference_sim::MAX_MK
        || bounds.max_n as usize > reference_sim::MAX_N
        || bounds.max_array > reference_sim::MAX_ARRAY
    {
        return Err(Failure::Usage(
            "sweep bounds exceed reference simulator limits".into(),
        ));
    }
    let offset = args.inject_cycle_offset;
    let report = reference_sim::oracle_sweep(bounds, |shape, hw| {
        let mut c = systolic_cost::cost(shape, hw)?;
        c.compute_cycles = c.compute_cycles.saturating_add_signed(offset);
        Ok(c)
    });
    let summary = ValidationSummary::from(&report);
    deliver(&summary, &args.output, None, None, out)?;
    if summary.passed {
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "{} of {} shapes disagree",
            summary.mismatches, summary.checked
        )))
    }
}

fn cmd_footprint(args: &FootprintArgs, out: &mut Outcome) -> Result<(), Failure> {
    let model = with_layers(resolve_model(&args.model)?, args.layers)?;
    let precisions = if args.precisions.is_empty() {
        Precision::ALL.to_vec()
    } else {
        args.precisions.clone()
    };
    let rep = report::footprint_report(&model, &precisions);
    deliver(&rep, &args.output, None, None, out)
}
