//! Systolic-array accelerator descriptions.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIB: u64 = 1024 * 1024;

/// Which operand stays resident in the PEs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataflow {
    /// Output stationary: each PE owns one output accumulator.
    Os,
    /// Weight stationary: the `k x n` operand is preloaded.
    Ws,
    /// Input stationary: the `m x k` operand is preloaded.
    Is,
}

impl Dataflow {
    pub const ALL: [Dataflow; 3] = [Dataflow::Os, Dataflow::Ws, Dataflow::Is];

    pub fn as_str(self) -> &'static str {
        match self {
            Dataflow::Os => "os",
            Dataflow::Ws => "ws",
            Dataflow::Is => "is",
        }
    }
}

impl fmt::Display for Dataflow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dataflow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "os" | "output_stationary" => Ok(Dataflow::Os),
            "ws" | "weight_stationary" => Ok(Dataflow::Ws),
            "is" | "input_stationary" => Ok(Dataflow::Is),
            other => Err(Error::InvalidHardware(format!(
                "unknown dataflow `{other}`"
            ))),
        }
    }
}

/// Array geometry, SRAM partition and dataflow of a TPU-style accelerator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawHardwareConfig")]
pub struct HardwareConfig {
    pub name: String,
    pub rows: u64,
    pub cols: u64,
    pub dataflow: Dataflow,
    pub sram_input_bytes: u64,
    pub sram_output_bytes: u64,
    pub sram_weight_bytes: u64,
    pub element_bytes: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHardwareConfig {
    #[serde(default = "default_name")]
    name: String,
    rows: u64,
    cols: u64,
    #[serde(default = "default_dataflow")]
    dataflow: Dataflow,
    sram_input_bytes: u64,
    sram_output_bytes: u64,
    sram_weight_bytes: u64,
    #[serde(default = "default_element_bytes")]
    element_bytes: u64,
}

fn default_name() -> String {
    "custom".to_string()
}

fn default_dataflow() -> Dataflow {
    Dataflow::Os
}

fn default_element_bytes() -> u64 {
    2
}

impl TryFrom<RawHardwareConfig> for HardwareConfig {
    type Error = Error;

    fn try_from(raw: RawHardwareConfig) -> Result<Self> {
        let hw = HardwareConfig {
            name: raw.name,
            rows: raw.rows,
            cols: raw.cols,
            dataflow: raw.dataflow,
            sram_input_bytes: raw.sram_input_bytes,
            sram_output_bytes: raw.sram_output_bytes,
            sram_weight_bytes: raw.sram_weight_bytes,
            element_bytes: raw.element_bytes,
        };
        hw.validate()?;
        Ok(hw)
    }
}

impl HardwareConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidHardware("rows and cols must be >= 1".into()));
        }
        if self.sram_input_bytes == 0 || self.sram_output_bytes == 0 || self.sram_weight_bytes == 0
        {
            return Err(Error::InvalidHardware("SRAM capacities must be > 0".into()));
        }
        if !matches!(self.element_bytes, 1 | 2 | 4) {
            return Err(Error::InvalidHardware(format!(
                "element_bytes must be 1, 2 or 4, got {}",
                self.element_bytes
            )));
        }
        Ok(())
    }

    /// 256x256 array with 4/4/8 MiB input/output/weight SRAM.
    pub fn cloud() -> Self {
        HardwareConfig {
            name: "cloud".into(),
            rows: 256,
            cols: 256,
            dataflow: Dataflow::Os,
            sram_input_bytes: 4 * MIB,
            sram_output_bytes: 4 * MIB,
            sram_weight_bytes: 8 * MIB,
            element_bytes: 2,
        }
    }

    /// 32x32 array with 2/2/4 MiB input/output/weight SRAM.
    pub fn edge() -> Self {
        HardwareConfig {
            name: "edge".into(),
            rows: 32,
            cols: 32,
            dataflow: Dataflow::Os,
            sram_input_bytes: 2 * MIB,
            sram_output_bytes: 2 * MIB,
            sram_weight_bytes: 4 * MIB,
            element_bytes: 2,
        }
    }

    /// Unbounded-SRAM array of the given size; used for small shape studies.
    pub fn array(rows: u64, cols: u64, dataflow: Dataflow) -> Self {
        HardwareConfig {
            name: format!("{rows}x{cols}"),
            rows,
            cols,
            dataflow,
            sram_input_bytes: u64::MAX,
            sram_output_bytes: u64::MAX,
            sram_weight_bytes: u64::MAX,
            element_bytes: 2,
        }
    }

    pub fn with_dataflow(mut self, dataflow: Dataflow) -> Self {
        self.dataflow = dataflow;
        self
    }

    pub fn pe_count(&self) -> u64 {
        self.rows * self.cols
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut hw: HardwareConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if hw.name == "custom" {
            if let Some(stem) = path.file_stem() {
                hw.name = stem.to_string_lossy().into_owned();
            }
        }
        Ok(hw)
    }
}

pub fn builtin_hardware() -> Vec<HardwareConfig> {
    vec![HardwareConfig::cloud(), HardwareConfig::edge()]
}

pub fn find_hardware(name: &str) -> Option<HardwareConfig> {
    let wanted = name.to_ascii_lowercase();
    builtin_hardware().into_iter().find(|h| h.name == wanted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        let cloud = find_hardware("cloud").unwrap();
        assert_eq!((cloud.rows, cloud.cols), (256, 256));
        assert_eq!(cloud.sram_weight_bytes, 8 * MIB);
        assert_eq!(cloud.sram_input_bytes, 4 * MIB);
        let edge = find_hardware("edge").unwrap();
        assert_eq!((edge.rows, edge.cols), (32, 32));
        assert_eq!(edge.sram_input_bytes, 2 * MIB);
        assert_eq!(edge.sram_weight_bytes, 4 * MIB);
        for hw in builtin_hardware() {
            assert_eq!(hw.dataflow, Dataflow::Os);
            hw.validate().unwrap();
        }
    }

    #[test]
    fn toml_roundtrip() {
        let text = r#"
            rows = 8
            cols = 16
            dataflow = "ws"
            sram_input_bytes = 1024
            sram_output_bytes = 1024
            sram_weight_bytes = 4096
        "#;
        let hw: HardwareConfig = toml::from_str(text).unwrap();
        assert_eq!(hw.dataflow, Dataflow::Ws);
        assert_eq!(hw.element_bytes, 2);

        let bad = text.replace("rows = 8", "rows = 0");
        assert!(toml::from_str::<HardwareConfig>(&bad).is_err());
        let bad = format!("{text}\nelement_bytes = 3\n");
        assert!(toml::from_str::<HardwareConfig>(&bad).is_err());
    }

    #[test]
    fn parse_dataflow() {
        assert_eq!("OS".parse::<Dataflow>().unwrap(), Dataflow::Os);
        assert_eq!(
            "weight_stationary".parse::<Dataflow>().unwrap(),
            Dataflow::Ws
        );
        assert!("rs".parse::<Dataflow>().is_err());
    }
}
