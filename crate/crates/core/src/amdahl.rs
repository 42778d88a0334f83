//! Amdahl's-law speedup curves for partially improved decoder blocks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{FractionReport, Metric};

pub const DEFAULT_S_MAX: u64 = 100;

/// Whole-system speedup when a fraction `f` of the work is sped up by
/// `s_partial`: `1 / ((1 - f) + f / s_partial)`.
pub fn s_total(f: f64, s_partial: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Domain(format!("fraction {f} outside [0, 1]")));
    }
    if s_partial.is_nan() || s_partial < 1.0 {
        return Err(Error::Domain(format!(
            "partial speedup {s_partial} below 1"
        )));
    }
    Ok(1.0 / ((1.0 - f) + f / s_partial))
}

/// `lim s_partial -> inf` of [`s_total`]; infinite for `f = 1`.
pub fn asymptote(f: f64) -> f64 {
    1.0 / (1.0 - f)
}

/// Which partition of the block is improved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// The six quantizable projection layers.
    Projections,
    /// The attention-head MatMuls.
    Attention,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Projections => "projections",
            Target::Attention => "attention",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub s_partial: f64,
    pub s_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmdahlCurve {
    pub target: Target,
    pub f: f64,
    pub samples: Vec<Sample>,
}

impl AmdahlCurve {
    /// Samples at every integer `s_partial` in `[1, s_max]`.
    pub fn sample(target: Target, f: f64, s_max: u64) -> Result<Self> {
        if s_max < 1 {
            return Err(Error::Domain("s_max must be at least 1".into()));
        }
        let samples = (1..=s_max)
            .map(|s| {
                let s = s as f64;
                s_total(f, s).map(|total| Sample {
                    s_partial: s,
                    s_total: total,
                })
            })
            .collect::<Result<_>>()?;
        Ok(AmdahlCurve { target, f, samples })
    }

    pub fn asymptote(&self) -> f64 {
        asymptote(self.f)
    }

    pub fn last(&self) -> Option<Sample> {
        self.samples.last().copied()
    }
}

/// Projection-improvement and attention-improvement curves for a
/// projection fraction `f_projection`.
pub fn curves_for_fraction(f_projection: f64, s_max: u64) -> Result<(AmdahlCurve, AmdahlCurve)> {
    Ok((
        AmdahlCurve::sample(Target::Projections, f_projection, s_max)?,
        AmdahlCurve::sample(Target::Attention, 1.0 - f_projection, s_max)?,
    ))
}

/// Curves from the absolute work in each partition. Each fraction is taken
/// directly from its own partition, so swapping the two amounts swaps the
/// curves bit for bit.
pub fn curves_for_split(
    projection: f64,
    attention: f64,
    s_max: u64,
) -> Result<(AmdahlCurve, AmdahlCurve)> {
    let total = projection + attention;
    if total.is_nan() || total <= 0.0 || projection < 0.0 || attention < 0.0 {
        return Err(Error::Domain(
            "partition amounts must be non-negative with a positive sum".into(),
        ));
    }
    Ok((
        AmdahlCurve::sample(Target::Projections, projection / total, s_max)?,
        AmdahlCurve::sample(Target::Attention, attention / total, s_max)?,
    ))
}

/// Projection- and attention-improvement curves for one analyzed block.
pub fn curves(
    report: &FractionReport,
    metric: Metric,
    s_max: u64,
) -> Result<(AmdahlCurve, AmdahlCurve)> {
    let (projection, attention) = report.split(metric);
    curves_for_split(projection as f64, attention as f64, s_max)
}
