//! Architecture specifications and their self-diagnosis classification.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One redundancy layer: at least `required` of `count` identical
/// components must operate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Layer {
    pub required: u32,
    pub count: u32,
}

impl Layer {
    pub const fn new(required: u32, count: u32) -> Self {
        Self { required, count }
    }

    fn check(self, layer: &'static str) -> Result<Self> {
        if self.required < 1 || self.required > self.count {
            return Err(Error::ThresholdOutOfRange {
                layer,
                required: self.required,
                count: self.count,
            });
        }
        Ok(self)
    }

    /// Number of component failures the layer survives.
    pub fn tolerated_failures(self) -> u32 {
        self.count - self.required
    }

    pub fn diagnosis_class(self) -> DiagnosisClass {
        DiagnosisClass::of(self)
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}oo{}", self.required, self.count)
    }
}

impl FromStr for Layer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: &str| Error::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let lower = s.trim().to_ascii_lowercase();
        let (required, count) = lower
            .split_once("oo")
            .ok_or_else(|| parse_err("expected <k>oo<n>"))?;
        let required = required
            .parse::<u32>()
            .map_err(|_| parse_err("threshold is not a non-negative integer"))?;
        let count = count
            .parse::<u32>()
            .map_err(|_| parse_err("count is not a non-negative integer"))?;
        Ok(Layer { required, count })
    }
}

/// A `SooN_S/MooN_M` architecture with per-component failure rates (h⁻¹).
///
/// Instances are always valid: thresholds lie in `1..=count` and both rates
/// are finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchitectureSpec {
    sensors: Layer,
    mcus: Layer,
    lambda_sensor: f64,
    lambda_mcu: f64,
}

impl ArchitectureSpec {
    pub fn new(sensors: Layer, mcus: Layer, lambda_sensor: f64, lambda_mcu: f64) -> Result<Self> {
        Self {
            sensors,
            mcus,
            lambda_sensor,
            lambda_mcu,
        }
        .validate()
    }

    /// Builds a spec from the compact `SooN_S/MooN_M` label.
    pub fn parse(label: &str, lambda_sensor: f64, lambda_mcu: f64) -> Result<Self> {
        let (sensors, mcus) = parse_label(label)?;
        Self::new(sensors, mcus, lambda_sensor, lambda_mcu)
    }

    /// Returns the spec unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self> {
        self.sensors.check("sensor")?;
        self.mcus.check("MCU")?;
        check_rate("lambda_sensor", self.lambda_sensor)?;
        check_rate("lambda_mcu", self.lambda_mcu)?;
        Ok(self)
    }

    pub fn sensors(&self) -> Layer {
        self.sensors
    }

    pub fn mcus(&self) -> Layer {
        self.mcus
    }

    pub fn n_sensors(&self) -> u32 {
        self.sensors.count
    }

    pub fn s_required(&self) -> u32 {
        self.sensors.required
    }

    pub fn n_mcus(&self) -> u32 {
        self.mcus.count
    }

    pub fn m_required(&self) -> u32 {
        self.mcus.required
    }

    pub fn lambda_sensor(&self) -> f64 {
        self.lambda_sensor
    }

    pub fn lambda_mcu(&self) -> f64 {
        self.lambda_mcu
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.sensors, self.mcus)
    }

    /// The unredundant 1oo1/1oo1 baseline.
    pub fn is_reference(&self) -> bool {
        self.sensors == Layer::new(1, 1) && self.mcus == Layer::new(1, 1)
    }

    /// Same layout with different rates.
    pub fn with_rates(&self, lambda_sensor: f64, lambda_mcu: f64) -> Result<Self> {
        Self::new(self.sensors, self.mcus, lambda_sensor, lambda_mcu)
    }
}

impl fmt::Display for ArchitectureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.sensors, self.mcus)
    }
}

fn check_rate(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveRate { name, value })
    }
}

/// Splits `"SooN_S/MooN_M"` into its sensor and MCU layers (case-insensitive).
/// Thresholds are not range-checked here.
pub fn parse_label(label: &str) -> Result<(Layer, Layer)> {
    let (sensors, mcus) = label.split_once('/').ok_or_else(|| Error::Parse {
        input: label.to_string(),
        reason: "expected <S>oo<N_S>/<M>oo<N_M>".to_string(),
    })?;
    let wrap = |e: Error| match e {
        Error::Parse { reason, .. } => Error::Parse {
            input: label.to_string(),
            reason,
        },
        other => other,
    };
    Ok((
        sensors.parse().map_err(wrap)?,
        mcus.parse().map_err(wrap)?,
    ))
}

/// Self-diagnosis capability of one redundancy layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosisClass {
    /// `1 < k < n`: outputs are validated by a majority comparison.
    MajorityVoting,
    /// `NooN`, `N > 1`.
    PureSeries,
    /// `1ooN`, `N > 1`.
    PureParallel,
    /// A single component.
    NoRedundancy,
}

impl DiagnosisClass {
    pub fn of(layer: Layer) -> Self {
        match (layer.required, layer.count) {
            (_, 1) => DiagnosisClass::NoRedundancy,
            (1, _) => DiagnosisClass::PureParallel,
            (k, n) if k == n => DiagnosisClass::PureSeries,
            _ => DiagnosisClass::MajorityVoting,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosisClass::MajorityVoting => "MajorityVoting",
            DiagnosisClass::PureSeries => "PureSeries",
            DiagnosisClass::PureParallel => "PureParallel",
            DiagnosisClass::NoRedundancy => "NoRedundancy",
        }
    }
}

impl fmt::Display for DiagnosisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelfDiagnosis {
    pub sensor: DiagnosisClass,
    pub mcu: DiagnosisClass,
    pub suitable: bool,
}

/// Classifies both layers. An architecture is suitable for fault-tolerant
/// operation when every layer votes, or when a single-component layer is
/// paired with a voting layer.
pub fn classify_self_diagnosis(spec: &ArchitectureSpec) -> SelfDiagnosis {
    use DiagnosisClass::*;
    let sensor = spec.sensors.diagnosis_class();
    let mcu = spec.mcus.diagnosis_class();
    let suitable = matches!(
        (sensor, mcu),
        (MajorityVoting, MajorityVoting) | (NoRedundancy, MajorityVoting) | (MajorityVoting, NoRedundancy)
    );
    SelfDiagnosis {
        sensor,
        mcu,
        suitable,
    }
}
