//! The four monitored pollutants and per-pollutant reading bundles.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// One of the four pollutants measured by the taxi fleet.
///
/// NO and NO₂ readings are in ppb, PM₂.₅ and PM₁₀ in µg/m³.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pollutant {
    No,
    No2,
    Pm25,
    Pm10,
}

impl Pollutant {
    pub const ALL: [Pollutant; 4] = [
        Pollutant::No,
        Pollutant::No2,
        Pollutant::Pm25,
        Pollutant::Pm10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pollutant::No => "no",
            Pollutant::No2 => "no2",
            Pollutant::Pm25 => "pm25",
            Pollutant::Pm10 => "pm10",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Pollutant::No => 0,
            Pollutant::No2 => 1,
            Pollutant::Pm25 => 2,
            Pollutant::Pm10 => 3,
        }
    }
}

impl fmt::Display for Pollutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pollutant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no" => Ok(Pollutant::No),
            "no2" => Ok(Pollutant::No2),
            "pm25" => Ok(Pollutant::Pm25),
            "pm10" => Ok(Pollutant::Pm10),
            other => Err(format!("unknown pollutant {other:?}")),
        }
    }
}

/// One value per pollutant. NaN marks a missing reading prior to cleaning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Readings {
    pub no: f64,
    pub no2: f64,
    pub pm25: f64,
    pub pm10: f64,
}

impl Readings {
    pub fn get(&self, p: Pollutant) -> f64 {
        match p {
            Pollutant::No => self.no,
            Pollutant::No2 => self.no2,
            Pollutant::Pm25 => self.pm25,
            Pollutant::Pm10 => self.pm10,
        }
    }

    pub fn get_mut(&mut self, p: Pollutant) -> &mut f64 {
        match p {
            Pollutant::No => &mut self.no,
            Pollutant::No2 => &mut self.no2,
            Pollutant::Pm25 => &mut self.pm25,
            Pollutant::Pm10 => &mut self.pm10,
        }
    }

    pub fn all_finite(&self) -> bool {
        Pollutant::ALL.iter().all(|&p| self.get(p).is_finite())
    }
}
