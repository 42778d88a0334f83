//! Built-in decoder-only LLM configurations and the per-block MatMul census.
//!
//! One decoder block in a single decode step contains `2h + 6` matrix-vector
//! products: six weight-to-activation projections (the part that 1-bit
//! quantization turns into additions) and two activation-to-activation
//! products per attention head, which keep full precision.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sequence-length range shared by every built-in model.
pub const DEFAULT_SEQLEN_MIN: u64 = 128;
pub const DEFAULT_SEQLEN_MAX: u64 = 4096;

/// Hyperparameters of a decoder-only transformer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawModelConfig", into = "RawModelConfig")]
pub struct ModelConfig {
    name: String,
    d: u64,
    h: u64,
    d_ff: u64,
    seqlen_min: u64,
    seqlen_max: u64,
    head_dim_override: Option<u64>,
    layers: Option<u64>,
}

/// On-disk form of [`ModelConfig`]; validated on conversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelConfig {
    name: String,
    d: u64,
    h: u64,
    d_ff: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    head_dim: Option<u64>,
    #[serde(default = "default_seqlen_min")]
    seqlen_min: u64,
    #[serde(default = "default_seqlen_max")]
    seqlen_max: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layers: Option<u64>,
}

fn default_seqlen_min() -> u64 {
    DEFAULT_SEQLEN_MIN
}

fn default_seqlen_max() -> u64 {
    DEFAULT_SEQLEN_MAX
}

impl TryFrom<RawModelConfig> for ModelConfig {
    type Error = Error;

    fn try_from(raw: RawModelConfig) -> Result<Self> {
        let mut cfg = ModelConfig::new(
            raw.name,
            raw.d,
            raw.h,
            raw.d_ff,
            raw.seqlen_min,
            raw.seqlen_max,
        )?;
        if let Some(hd) = raw.head_dim {
            cfg = cfg.with_head_dim(hd)?;
        }
        if let Some(layers) = raw.layers {
            cfg = cfg.with_layers(layers)?;
        }
        Ok(cfg)
    }
}

impl From<ModelConfig> for RawModelConfig {
    fn from(cfg: ModelConfig) -> Self {
        RawModelConfig {
            name: cfg.name,
            d: cfg.d,
            h: cfg.h,
            d_ff: cfg.d_ff,
            head_dim: cfg.head_dim_override,
            seqlen_min: cfg.seqlen_min,
            seqlen_max: cfg.seqlen_max,
            layers: cfg.layers,
        }
    }
}

impl ModelConfig {
    pub fn new(
        name: impl Into<String>,
        d: u64,
        h: u64,
        d_ff: u64,
        seqlen_min: u64,
        seqlen_max: u64,
    ) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: &str| Error::InvalidModel {
            name: name.clone(),
            reason: reason.to_string(),
        };
        if d == 0 || h == 0 || d_ff == 0 {
            return Err(invalid("d, h and d_ff must be positive"));
        }
        if seqlen_min == 0 || seqlen_min > seqlen_max {
            return Err(invalid("require 1 <= seqlen_min <= seqlen_max"));
        }
        if d < h {
            return Err(invalid(
                "d must be at least h (head dimension would be zero)",
            ));
        }
        Ok(ModelConfig {
            name,
            d,
            h,
            d_ff,
            seqlen_min,
            seqlen_max,
            head_dim_override: None,
            layers: None,
        })
    }

    pub fn with_head_dim(mut self, head_dim: u64) -> Result<Self> {
        if head_dim == 0 {
            return Err(Error::InvalidModel {
                name: self.name,
                reason: "head_dim must be positive".into(),
            });
        }
        self.head_dim_override = Some(head_dim);
        Ok(self)
    }

    /// Attach a decoder-block count used only for whole-model absolute totals.
    pub fn with_layers(mut self, layers: u64) -> Result<Self> {
        if layers == 0 {
            return Err(Error::InvalidModel {
                name: self.name,
                reason: "layers must be positive".into(),
            });
        }
        self.layers = Some(layers);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    pub fn d_ff(&self) -> u64 {
        self.d_ff
    }

    pub fn seqlen_min(&self) -> u64 {
        self.seqlen_min
    }

    pub fn seqlen_max(&self) -> u64 {
        self.seqlen_max
    }

    pub fn layers(&self) -> Option<u64> {
        self.layers
    }

    pub fn head_dim_override(&self) -> Option<u64> {
        self.head_dim_override
    }

    /// Per-head dimension: the override if present, otherwise `floor(d / h)`.
    pub fn head_dim(&self) -> u64 {
        self.head_dim_override.unwrap_or(self.d / self.h)
    }

    /// Set when `d` is not a multiple of `h` and no override was given, so
    /// the floored head dimension drops `d mod h` elements per block.
    pub fn head_dim_warning(&self) -> bool {
        self.head_dim_override.is_none() && !self.d.is_multiple_of(self.h)
    }

    /// Number of weight elements in the six projection matrices of one block.
    pub fn projection_weight_elements(&self) -> u64 {
        4 * self.d * self.d + 2 * self.d * self.d_ff
    }

    pub fn check_seqlen(&self, seqlen: u64) -> Result<()> {
        if seqlen < self.seqlen_min || seqlen > self.seqlen_max {
            return Err(Error::SeqlenOutOfRange {
                model: self.name.clone(),
                seqlen,
                min: self.seqlen_min,
                max: self.seqlen_max,
            });
        }
        Ok(())
    }

    /// Load a model from a TOML file with keys `name`, `d`, `h`, `d_ff`,
    /// and optionally `head_dim`, `seqlen_min`, `seqlen_max`, `layers`.
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

/// The MatMul roles of a decoder block, in enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    QProj,
    KProj,
    VProj,
    OutProj,
    FFIntermediate,
    FFOutput,
    ScoreQK,
    ContextSV,
}

impl Role {
    pub const PROJECTIONS: [Role; 6] = [
        Role::QProj,
        Role::KProj,
        Role::VProj,
        Role::OutProj,
        Role::FFIntermediate,
        Role::FFOutput,
    ];

    /// Projection roles multiply a trainable weight matrix and can be
    /// quantized to 1 bit; the attention roles multiply two activations.
    pub fn is_quantizable(self) -> bool {
        !matches!(self, Role::ScoreQK | Role::ContextSV)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::QProj => "q_proj",
            Role::KProj => "k_proj",
            Role::VProj => "v_proj",
            Role::OutProj => "out_proj",
            Role::FFIntermediate => "ff_intermediate",
            Role::FFOutput => "ff_output",
            Role::ScoreQK => "score_qk",
            Role::ContextSV => "context_sv",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dimensions of `(m x k) * (k x n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub m: u64,
    pub k: u64,
    pub n: u64,
}

impl Shape {
    pub const fn new(m: u64, k: u64, n: u64) -> Self {
        Shape { m, k, n }
    }

    pub fn macs(&self) -> u64 {
        self.m * self.k * self.n
    }

    pub fn check_nonzero(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 || self.n == 0 {
            return Err(Error::ZeroDimension {
                m: self.m,
                k: self.k,
                n: self.n,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.m, self.k, self.n)
    }
}

/// One decode-time MatMul of a decoder block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatMulOp {
    pub role: Role,
    pub shape: Shape,
    pub head_index: Option<u64>,
}

impl MatMulOp {
    pub fn quantizable(&self) -> bool {
        self.role.is_quantizable()
    }

    pub fn m(&self) -> u64 {
        self.shape.m
    }

    pub fn k(&self) -> u64 {
        self.shape.k
    }

    pub fn n(&self) -> u64 {
        self.shape.n
    }
}

fn builtin(name: &str, d: u64, h: u64, d_ff: u64) -> ModelConfig {
    ModelConfig::new(name, d, h, d_ff, DEFAULT_SEQLEN_MIN, DEFAULT_SEQLEN_MAX)
        .expect("builtin model table is valid")
}

/// The thirteen GPT, OPT and LLaMA configurations, smallest first per family.
pub fn builtin_models() -> Vec<ModelConfig> {
    vec![
        builtin("gpt-125m", 768, 12, 768),
        builtin("gpt-355m", 1024, 16, 1024),
        builtin("gpt-774m", 1280, 20, 1280),
        builtin("gpt-1.5b", 1600, 25, 1600),
        builtin("opt-350m", 1024, 16, 4096),
        builtin("opt-1.3b", 2048, 32, 8192),
        builtin("opt-2.7b", 2560, 32, 10240),
        builtin("opt-6.7b", 4096, 32, 16384),
        builtin("opt-13b", 5120, 40, 20480),
        builtin("opt-30b", 7168, 56, 28672),
        builtin("opt-66b", 9216, 76, 36864),
        builtin("llama-7b", 4096, 32, 11008),
        builtin("llama-13b", 5120, 40, 13824),
    ]
}

/// The OPT family in increasing size.
pub fn opt_models() -> Vec<ModelConfig> {
    builtin_models()
        .into_iter()
        .filter(|m| m.name().starts_with("opt-"))
        .collect()
}

/// Case-insensitive lookup of a built-in model.
pub fn find_model(name: &str) -> Option<ModelConfig> {
    let wanted = name.to_ascii_lowercase();
    builtin_models().into_iter().find(|m| m.name() == wanted)
}

/// All MatMuls of one decoder block for a decode step at context length `seqlen`.
///
/// Order: the six projections (Q, K, V, output, FF intermediate, FF output),
/// then for each head its score product followed by its context product.
pub fn enumerate_block_ops(model: &ModelConfig, seqlen: u64) -> Result<Vec<MatMulOp>> {
    model.check_seqlen(seqlen)?;
    let d = model.d();
    let d_ff = model.d_ff();
    let head_dim = model.head_dim();

    let mut ops = Vec::with_capacity(2 * model.h() as usize + 6);
    let proj = |role, m, k| MatMulOp {
        role,
        shape: Shape::new(m, k, 1),
        head_index: None,
    };
    ops.push(proj(Role::QProj, d, d));
    ops.push(proj(Role::KProj, d, d));
    ops.push(proj(Role::VProj, d, d));
    ops.push(proj(Role::OutProj, d, d));
    ops.push(proj(Role::FFIntermediate, d_ff, d));
    ops.push(proj(Role::FFOutput, d, d_ff));

    for head in 0..model.h() {
        ops.push(MatMulOp {
            role: Role::ScoreQK,
            shape: Shape::new(seqlen, head_dim, 1),
            head_index: Some(head),
        });
        ops.push(MatMulOp {
            role: Role::ContextSV,
            shape: Shape::new(head_dim, seqlen, 1),
            head_index: Some(head),
        });
    }
    Ok(ops)
}
