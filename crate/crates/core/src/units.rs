//! Unit systems for glucose and body weight.
//!
//! Values are stored canonically in mg/dL and kilograms. Conversion never
//! rounds; rounding is a presentation concern.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// mg/dL per mmol/L, from the molar mass of glucose (180.16 g/mol).
pub const MG_DL_PER_MMOL_L: f64 = 18.016;

/// Pounds per kilogram.
pub const LB_PER_KG: f64 = 2.20462;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum GlucoseUnit {
    #[default]
    #[serde(rename = "mg/dL")]
    MgPerDl,
    #[serde(rename = "mmol/L")]
    MmolPerL,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum WeightUnit {
    #[default]
    #[serde(rename = "kg")]
    Kilograms,
    #[serde(rename = "lbs")]
    Pounds,
}

impl GlucoseUnit {
    pub const ALL: [GlucoseUnit; 2] = [GlucoseUnit::MgPerDl, GlucoseUnit::MmolPerL];

    pub fn as_str(self) -> &'static str {
        match self {
            GlucoseUnit::MgPerDl => "mg/dL",
            GlucoseUnit::MmolPerL => "mmol/L",
        }
    }

    /// Converts a canonical mg/dL value into this unit.
    pub fn from_canonical(self, mg_dl: f64) -> f64 {
        match self {
            GlucoseUnit::MgPerDl => mg_dl,
            GlucoseUnit::MmolPerL => mg_dl / MG_DL_PER_MMOL_L,
        }
    }

    /// Converts a value expressed in this unit into canonical mg/dL.
    pub fn to_canonical(self, value: f64) -> f64 {
        match self {
            GlucoseUnit::MgPerDl => value,
            GlucoseUnit::MmolPerL => value * MG_DL_PER_MMOL_L,
        }
    }
}

impl WeightUnit {
    pub const ALL: [WeightUnit; 2] = [WeightUnit::Kilograms, WeightUnit::Pounds];

    pub fn as_str(self) -> &'static str {
        match self {
            WeightUnit::Kilograms => "kg",
            WeightUnit::Pounds => "lbs",
        }
    }

    pub fn from_canonical(self, kg: f64) -> f64 {
        match self {
            WeightUnit::Kilograms => kg,
            WeightUnit::Pounds => kg * LB_PER_KG,
        }
    }

    pub fn to_canonical(self, value: f64) -> f64 {
        match self {
            WeightUnit::Kilograms => value,
            WeightUnit::Pounds => value / LB_PER_KG,
        }
    }
}

impl fmt::Display for GlucoseUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for WeightUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GlucoseUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mg/dl" | "mgdl" | "mg_per_dl" => Ok(GlucoseUnit::MgPerDl),
            "mmol/l" | "mmoll" | "mmol_per_l" => Ok(GlucoseUnit::MmolPerL),
            other => Err(Error::invalid(
                "unit.unknown_glucose_unit",
                format!("unknown glucose unit '{other}'"),
            )),
        }
    }
}

impl FromStr for WeightUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kg" | "kilograms" => Ok(WeightUnit::Kilograms),
            "lb" | "lbs" | "pounds" => Ok(WeightUnit::Pounds),
            other => Err(Error::invalid(
                "unit.unknown_weight_unit",
                format!("unknown weight unit '{other}'"),
            )),
        }
    }
}

fn check_magnitude(value: f64, code: &'static str) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::invalid(
            code,
            format!("value must be finite and non-negative, got {value}"),
        ));
    }
    Ok(())
}

pub fn convert_glucose(value: f64, from: GlucoseUnit, to: GlucoseUnit) -> Result<f64> {
    check_magnitude(value, "glucose.invalid_value")?;
    if from == to {
        return Ok(value);
    }
    Ok(to.from_canonical(from.to_canonical(value)))
}

pub fn convert_weight(value: f64, from: WeightUnit, to: WeightUnit) -> Result<f64> {
    check_magnitude(value, "weight.invalid_value")?;
    if from == to {
        return Ok(value);
    }
    Ok(to.from_canonical(from.to_canonical(value)))
}

pub const WEIGHT_KG_BOUNDS: (f64, f64) = (1.0, 500.0);
pub const HEIGHT_M_BOUNDS: (f64, f64) = (0.3, 2.8);

/// Body mass index, `weight_kg / height_m²`, unrounded.
pub fn compute_bmi(weight_kg: f64, height_m: f64) -> Result<f64> {
    let mut violations = Vec::new();
    if !(WEIGHT_KG_BOUNDS.0..=WEIGHT_KG_BOUNDS.1).contains(&weight_kg) {
        violations.push(crate::Violation::new(
            "weight.out_of_bounds",
            format!("weight {weight_kg} kg outside 1-500 kg"),
        ));
    }
    if !(HEIGHT_M_BOUNDS.0..=HEIGHT_M_BOUNDS.1).contains(&height_m) {
        violations.push(crate::Violation::new(
            "profile.height_out_of_bounds",
            format!("height {height_m} m outside 0.3-2.8 m"),
        ));
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(weight_kg / (height_m * height_m))
}
