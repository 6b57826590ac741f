//! Visual-encoding layer: named mappings from data domains to visual
//! ranges. Quantitative kinds (linear, logarithmic, exponential/power,
//! quantile) and ordinal scales with band or discrete ranges.
//!
//! The free functions (`scale_linear`, `scale_log`, ...) are the value-level
//! mappings; [`ResolvedScale`] packages one of them with its resolved domain
//! and range so downstream layers can apply it to whole columns.

use crate::datastore::{DataError, DataRegistry};
use crate::transform::quantile_type7;
use crate::value::{ColumnType, DataValue};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaleError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("domain is empty")]
    EmptyDomain,
    #[error("degenerate domain: min equals max ({0})")]
    DegenerateDomain(f64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("quantile sample is empty")]
    EmptyInput,
    #[error("category {0:?} is not in the scale domain")]
    UnknownCategory(String),
    #[error("value {0} is not numeric for a quantitative scale")]
    NonNumericValue(String),
}

/// The scale families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleKind {
    Linear,
    Log,
    Exp,
    Quantile,
    Ordinal,
}

impl ScaleKind {
    pub fn parse(s: &str) -> Option<ScaleKind> {
        match s {
            "linear" => Some(ScaleKind::Linear),
            "log" => Some(ScaleKind::Log),
            "exp" => Some(ScaleKind::Exp),
            "quantile" => Some(ScaleKind::Quantile),
            "ordinal" => Some(ScaleKind::Ordinal),
            _ => None,
        }
    }

    pub const ALL: [&'static str; 5] = ["linear", "log", "exp", "quantile", "ordinal"];
}

/// Domain as written in the spec: a dataset/field reference or explicit
/// values.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Reference { data: String, field: String },
    Pair(f64, f64),
    List(Vec<DataValue>),
}

/// Range as written in the spec.
#[derive(Debug, Clone, PartialEq)]
pub enum RangeSpec {
    /// Explicit numeric pair `[r0, r1]`.
    Pair(f64, f64),
    /// The plot's inner width or height, resolved at link time.
    Named(Dimension),
    /// Discrete list (colors, shape names, positions).
    Discrete(Vec<RangeValue>),
    /// Absent in the spec; the consumer's channel decides at link time.
    Default,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Width,
    Height,
}

/// One element of a discrete range.
#[derive(Debug, Clone, PartialEq)]
pub enum RangeValue {
    Number(f64),
    Text(String),
}

/// A scale declaration from the spec's `scales` block.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleDef {
    pub name: String,
    pub kind: ScaleKind,
    pub domain: DomainSpec,
    pub range: RangeSpec,
    /// Exponent for the power-law `exp` kind; ignored otherwise.
    pub exponent: f64,
    /// Clamp inputs into the domain before mapping (default off).
    pub clamp: bool,
}

/// Domain after resolution against the data registry.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedDomain {
    /// Quantitative (min, max); guaranteed min < max (widened if needed).
    Interval(f64, f64),
    /// Full numeric sample for quantile scales.
    Sample(Vec<f64>),
    /// Ordinal categories in first-occurrence order.
    Categories(Vec<DataValue>),
}

/// Resolves a scale's domain: quantitative references take the column
/// extent, ordinal references the distinct values in first-occurrence
/// order, quantile references the whole non-null numeric column; explicit
/// domains pass through.
pub fn resolve_domain(def: &ScaleDef, registry: &DataRegistry) -> Result<ResolvedDomain, ScaleError> {
    match (&def.domain, def.kind) {
        (DomainSpec::Reference { data, field }, ScaleKind::Ordinal) => {
            let table = registry.read(data)?;
            let values = table.distinct_values(field)?;
            if values.is_empty() {
                return Err(ScaleError::EmptyDomain);
            }
            Ok(ResolvedDomain::Categories(values))
        }
        (DomainSpec::Reference { data, field }, ScaleKind::Quantile) => {
            let table = registry.read(data)?;
            let sample = table.numeric_values(field)?;
            if sample.is_empty() {
                return Err(ScaleError::EmptyInput);
            }
            Ok(ResolvedDomain::Sample(sample))
        }
        (DomainSpec::Reference { data, field }, _) => {
            let table = registry.read(data)?;
            let (lo, hi) = table.column_extent(field)?;
            Ok(ResolvedDomain::Interval(lo, hi))
        }
        (DomainSpec::Pair(a, b), ScaleKind::Quantile) => Ok(ResolvedDomain::Sample(vec![*a, *b])),
        (DomainSpec::Pair(a, b), ScaleKind::Ordinal) => Ok(ResolvedDomain::Categories(vec![
            DataValue::Number(*a),
            DataValue::Number(*b),
        ])),
        (DomainSpec::Pair(a, b), _) => Ok(ResolvedDomain::Interval(*a, *b)),
        (DomainSpec::List(values), kind) => {
            if values.is_empty() {
                return Err(ScaleError::EmptyDomain);
            }
            match kind {
                ScaleKind::Ordinal => {
                    let mut seen = Vec::new();
                    for v in values {
                        if !seen.contains(v) {
                            seen.push(v.clone());
                        }
                    }
                    Ok(ResolvedDomain::Categories(seen))
                }
                ScaleKind::Quantile => {
                    let sample: Vec<f64> = values.iter().filter_map(DataValue::as_number).collect();
                    if sample.is_empty() {
                        return Err(ScaleError::EmptyInput);
                    }
                    Ok(ResolvedDomain::Sample(sample))
                }
                _ => {
                    let nums: Vec<f64> = values.iter().filter_map(DataValue::as_number).collect();
                    if nums.len() < 2 {
                        return Err(ScaleError::EmptyDomain);
                    }
                    Ok(ResolvedDomain::Interval(nums[0], nums[nums.len() - 1]))
                }
            }
        }
    }
}

// The interpolation below is written in lerp form r0·(1−t) + r1·t rather
// than r0 + t·(r1−r0): t is exactly 0 at d0 and exactly 1 at d1, so domain
// endpoints hit range endpoints bit-exactly.
fn lerp(range: (f64, f64), t: f64) -> f64 {
    range.0 * (1.0 - t) + range.1 * t
}

/// `r0 + (v − d0)·(r1 − r0)/(d1 − d0)`; out-of-domain values extrapolate.
pub fn scale_linear(domain: (f64, f64), range: (f64, f64), v: f64) -> Result<f64, ScaleError> {
    let (d0, d1) = domain;
    if d0 >= d1 {
        return Err(ScaleError::DegenerateDomain(d0));
    }
    Ok(lerp(range, (v - d0) / (d1 - d0)))
}

/// Linear interpolation in ln-space; domain and value must be positive.
pub fn scale_log(domain: (f64, f64), range: (f64, f64), v: f64) -> Result<f64, ScaleError> {
    let (d0, d1) = domain;
    if d0 <= 0.0 || d1 <= 0.0 || v <= 0.0 {
        return Err(ScaleError::DomainError(format!(
            "log scale requires positive domain and value (domain ({d0}, {d1}), value {v})"
        )));
    }
    if d0 >= d1 {
        return Err(ScaleError::DegenerateDomain(d0));
    }
    Ok(lerp(range, (v.ln() - d0.ln()) / (d1.ln() - d0.ln())))
}

/// Power-law scale: linear interpolation in `v^k` space.
pub fn scale_exp(
    domain: (f64, f64),
    range: (f64, f64),
    exponent: f64,
    v: f64,
) -> Result<f64, ScaleError> {
    let (d0, d1) = domain;
    if d0 >= d1 {
        return Err(ScaleError::DegenerateDomain(d0));
    }
    if exponent.fract() != 0.0 && (d0 < 0.0 || v < 0.0) {
        return Err(ScaleError::DomainError(format!(
            "exponent {exponent} requires a non-negative domain and value"
        )));
    }
    let f = |x: f64| x.powf(exponent);
    let (f0, f1) = (f(d0), f(d1));
    if !(f0.is_finite() && f1.is_finite()) || f0 == f1 {
        return Err(ScaleError::DomainError(format!(
            "exponent {exponent} degenerates the domain ({d0}, {d1})"
        )));
    }
    Ok(lerp(range, (f(v) - f0) / (f1 - f0)))
}

/// Thresholds sit at the type-7 quantiles i/m of the sample; `v` maps to
/// the count of thresholds ≤ v (ties go to the higher bucket).
pub fn scale_quantile_bucket(sample: &[f64], m: usize, v: f64) -> Result<usize, ScaleError> {
    if sample.is_empty() {
        return Err(ScaleError::EmptyInput);
    }
    if m == 0 {
        return Err(ScaleError::EmptyDomain);
    }
    let thresholds = quantile_thresholds(sample, m);
    Ok(thresholds.iter().filter(|&&t| t <= v).count())
}

/// The m − 1 bucket boundaries of a quantile scale.
pub fn quantile_thresholds(sample: &[f64], m: usize) -> Vec<f64> {
    (1..m)
        .map(|i| quantile_type7(sample, i as f64 / m as f64))
        .collect()
}

/// Band layout: category i of n maps to the band center
/// `r0 + (i + 0.5)·(r1 − r0)/n`.
pub fn scale_ordinal_band(n: usize, range: (f64, f64), index: usize) -> f64 {
    let (r0, r1) = range;
    let w = (r1 - r0) / n as f64;
    r0 + (index as f64 + 0.5) * w
}

/// A scale with its domain and range fully resolved; the forward map is
/// total on the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedScale {
    Linear {
        domain: (f64, f64),
        range: (f64, f64),
        clamp: bool,
    },
    Log {
        domain: (f64, f64),
        range: (f64, f64),
        clamp: bool,
    },
    Exp {
        domain: (f64, f64),
        range: (f64, f64),
        exponent: f64,
        clamp: bool,
    },
    Quantile {
        sample: Vec<f64>,
        range: Vec<RangeValue>,
    },
    OrdinalBand {
        domain: Vec<DataValue>,
        range: (f64, f64),
    },
    OrdinalDiscrete {
        domain: Vec<DataValue>,
        range: Vec<RangeValue>,
    },
}

/// Output of a resolved scale's forward map.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaledValue {
    Number(f64),
    Text(String),
}

impl ScaledValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            ScaledValue::Number(v) => Some(*v),
            ScaledValue::Text(_) => None,
        }
    }
}

impl ResolvedScale {
    /// Builds a quantitative scale from an interval domain, widening a
    /// degenerate domain to (v − 0.5, v + 0.5) with a warning.
    pub fn quantitative(
        kind: ScaleKind,
        domain: (f64, f64),
        range: (f64, f64),
        exponent: f64,
        clamp: bool,
        warnings: &mut Vec<String>,
    ) -> Result<ResolvedScale, ScaleError> {
        let (mut d0, mut d1) = domain;
        if d0 == d1 {
            warnings.push(format!(
                "degenerate domain ({d0}, {d1}) widened to ({}, {})",
                d0 - 0.5,
                d1 + 0.5
            ));
            d0 -= 0.5;
            d1 += 0.5;
        }
        if d0 > d1 {
            return Err(ScaleError::DomainError(format!(
                "domain minimum {d0} exceeds maximum {d1}"
            )));
        }
        match kind {
            ScaleKind::Linear => Ok(ResolvedScale::Linear { domain: (d0, d1), range, clamp }),
            ScaleKind::Log => {
                if d0 <= 0.0 {
                    return Err(ScaleError::DomainError(format!(
                        "log scale requires a positive domain, got ({d0}, {d1})"
                    )));
                }
                Ok(ResolvedScale::Log { domain: (d0, d1), range, clamp })
            }
            ScaleKind::Exp => {
                // validate once so apply() can't fail on the endpoints
                scale_exp((d0, d1), range, exponent, d0)?;
                Ok(ResolvedScale::Exp { domain: (d0, d1), range, exponent, clamp })
            }
            _ => Err(ScaleError::DomainError(format!(
                "{kind:?} is not a quantitative interval scale"
            ))),
        }
    }

    /// Maps one value through the scale.
    pub fn apply(&self, v: &DataValue) -> Result<ScaledValue, ScaleError> {
        match self {
            ResolvedScale::Linear { .. } | ResolvedScale::Log { .. } | ResolvedScale::Exp { .. } => {
                let x = v
                    .as_number()
                    .ok_or_else(|| ScaleError::NonNumericValue(v.to_string()))?;
                Ok(ScaledValue::Number(self.apply_number(x)?))
            }
            ResolvedScale::Quantile { sample, range } => {
                let x = v
                    .as_number()
                    .ok_or_else(|| ScaleError::NonNumericValue(v.to_string()))?;
                let bucket = scale_quantile_bucket(sample, range.len(), x)?;
                Ok(match &range[bucket.min(range.len() - 1)] {
                    RangeValue::Number(n) => ScaledValue::Number(*n),
                    RangeValue::Text(s) => ScaledValue::Text(s.clone()),
                })
            }
            ResolvedScale::OrdinalBand { domain, range } => {
                let idx = domain
                    .iter()
                    .position(|d| d == v)
                    .ok_or_else(|| ScaleError::UnknownCategory(v.to_string()))?;
                Ok(ScaledValue::Number(scale_ordinal_band(domain.len(), *range, idx)))
            }
            ResolvedScale::OrdinalDiscrete { domain, range } => {
                let idx = domain
                    .iter()
                    .position(|d| d == v)
                    .ok_or_else(|| ScaleError::UnknownCategory(v.to_string()))?;
                Ok(match &range[idx % range.len()] {
                    RangeValue::Number(n) => ScaledValue::Number(*n),
                    RangeValue::Text(s) => ScaledValue::Text(s.clone()),
                })
            }
        }
    }

    /// Numeric fast path for the quantitative kinds.
    pub fn apply_number(&self, v: f64) -> Result<f64, ScaleError> {
        match self {
            ResolvedScale::Linear { domain, range, clamp } => {
                scale_linear(*domain, *range, clamp_value(v, *domain, *clamp))
            }
            ResolvedScale::Log { domain, range, clamp } => {
                scale_log(*domain, *range, clamp_value(v, *domain, *clamp))
            }
            ResolvedScale::Exp { domain, range, exponent, clamp } => {
                scale_exp(*domain, *range, *exponent, clamp_value(v, *domain, *clamp))
            }
            other => Err(ScaleError::DomainError(format!(
                "{other:?} does not map numbers to numbers"
            ))),
        }
    }

    /// The numeric range, when the scale has one.
    pub fn numeric_range(&self) -> Option<(f64, f64)> {
        match self {
            ResolvedScale::Linear { range, .. }
            | ResolvedScale::Log { range, .. }
            | ResolvedScale::Exp { range, .. }
            | ResolvedScale::OrdinalBand { range, .. } => Some(*range),
            _ => None,
        }
    }

    /// The quantitative interval domain, when the scale has one.
    pub fn interval_domain(&self) -> Option<(f64, f64)> {
        match self {
            ResolvedScale::Linear { domain, .. }
            | ResolvedScale::Log { domain, .. }
            | ResolvedScale::Exp { domain, .. } => Some(*domain),
            _ => None,
        }
    }

    pub fn categories(&self) -> Option<&[DataValue]> {
        match self {
            ResolvedScale::OrdinalBand { domain, .. }
            | ResolvedScale::OrdinalDiscrete { domain, .. } => Some(domain),
            _ => None,
        }
    }

    /// True when applying the scale yields numbers.
    pub fn is_positional(&self) -> bool {
        match self {
            ResolvedScale::Linear { .. }
            | ResolvedScale::Log { .. }
            | ResolvedScale::Exp { .. }
            | ResolvedScale::OrdinalBand { .. } => true,
            ResolvedScale::Quantile { range, .. } | ResolvedScale::OrdinalDiscrete { range, .. } => {
                range.iter().all(|r| matches!(r, RangeValue::Number(_)))
            }
        }
    }
}

fn clamp_value(v: f64, domain: (f64, f64), clamp: bool) -> f64 {
    if clamp {
        v.clamp(domain.0, domain.1)
    } else {
        v
    }
}

/// Helper used by domain inference on ordinal references: ordinal scales
/// accept any column type; quantitative kinds demand numbers.
pub fn domain_type_ok(kind: ScaleKind, ty: ColumnType) -> bool {
    match kind {
        ScaleKind::Ordinal => true,
        _ => ty == ColumnType::Number,
    }
}
