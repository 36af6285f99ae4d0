//! Conversion from natural time units to seconds for a coupling quoted in kelvin.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{QstError, Result};

/// Planck constant, J s (exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant `h / 2 pi` = 1.054 571 817 646 e-34 J s.
pub const HBAR: f64 = PLANCK / std::f64::consts::TAU;
/// Boltzmann constant, J / K (exact SI value).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// What one natural time unit means once the coupling has a physical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeConvention {
    /// `hbar / J`: the coupling is an angular frequency.
    Hbar,
    /// `h / J`: the coupling is a cyclic frequency.
    #[default]
    H,
}

impl TimeConvention {
    fn action(self) -> f64 {
        match self {
            TimeConvention::Hbar => HBAR,
            TimeConvention::H => PLANCK,
        }
    }
}

impl fmt::Display for TimeConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeConvention::Hbar => "hbar",
            TimeConvention::H => "h",
        })
    }
}

impl FromStr for TimeConvention {
    type Err = QstError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hbar" => Ok(TimeConvention::Hbar),
            "h" => Ok(TimeConvention::H),
            other => Err(QstError::Config(format!(
                "unknown time convention {other:?} (expected \"hbar\" or \"h\")"
            ))),
        }
    }
}

/// Seconds per natural time unit for a coupling of `j_kelvin` times `k_B`.
pub fn seconds_per_unit(j_kelvin: f64, convention: TimeConvention) -> Result<f64> {
    if !(j_kelvin.is_finite() && j_kelvin > 0.0) {
        return Err(QstError::Config(format!(
            "coupling in kelvin must be positive, got {j_kelvin}"
        )));
    }
    Ok(convention.action() / (BOLTZMANN * j_kelvin))
}

/// `t hbar / (k_B J)`.
pub fn to_physical_units(t_natural: f64, j_kelvin: f64) -> Result<f64> {
    to_physical_units_with(t_natural, j_kelvin, TimeConvention::Hbar)
}

pub fn to_physical_units_with(
    t_natural: f64,
    j_kelvin: f64,
    convention: TimeConvention,
) -> Result<f64> {
    Ok(t_natural * seconds_per_unit(j_kelvin, convention)?)
}
