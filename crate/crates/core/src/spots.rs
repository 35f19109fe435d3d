//! Tourist-spot coverage areas. Each spot's walk distance is treated as the
//! radius of a half circle on one bank of the river.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HA_PER_KM2: f64 = 100.0;

/// Which value of π to use. `Rounded` is the five-decimal constant 3.14159.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiMode {
    #[default]
    Rounded,
    Exact,
}

impl PiMode {
    #[allow(clippy::approx_constant)]
    pub fn value(self) -> f64 {
        match self {
            PiMode::Rounded => 3.14159,
            PiMode::Exact => std::f64::consts::PI,
        }
    }
}

impl fmt::Display for PiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PiMode::Rounded => "rounded",
            PiMode::Exact => "exact",
        })
    }
}

impl FromStr for PiMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rounded" => Ok(PiMode::Rounded),
            "exact" => Ok(PiMode::Exact),
            other => Err(format!("unknown pi mode `{other}` (expected rounded or exact)")),
        }
    }
}

pub fn half_circle_area_km2(distance_km: f64, pi: PiMode) -> Result<f64> {
    if !(distance_km >= 0.0) || !distance_km.is_finite() {
        return Err(Error::invalid(format!("walk distance {distance_km} km must be a nonnegative number")));
    }
    Ok(pi.value() * distance_km * distance_km / 2.0)
}

pub fn km2_to_ha(area_km2: f64) -> Result<f64> {
    if !(area_km2 >= 0.0) {
        return Err(Error::invalid(format!("area {area_km2} km² is negative")));
    }
    Ok(area_km2 * HA_PER_KM2)
}

/// One row of the spots file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotInput {
    pub name: String,
    pub compartment_no: String,
    pub walk_distance_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TouristSpot {
    pub name: String,
    pub compartment_no: String,
    pub walk_distance_km: f64,
    pub area_km2: f64,
    pub area_ha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotTable {
    pub pi_mode: PiMode,
    pub spots: Vec<TouristSpot>,
    pub total_distance_km: f64,
    pub total_km2: f64,
    pub total_ha: f64,
}

pub fn build_spot_table(inputs: &[SpotInput], pi: PiMode) -> Result<SpotTable> {
    let mut spots: Vec<TouristSpot> = Vec::with_capacity(inputs.len());
    for s in inputs {
        if spots.iter().any(|t| t.name == s.name) {
            return Err(Error::DuplicateSpot(s.name.clone()));
        }
        let area_km2 = half_circle_area_km2(s.walk_distance_km, pi)
            .map_err(|e| Error::invalid(format!("spot {}: {e}", s.name)))?;
        spots.push(TouristSpot {
            name: s.name.clone(),
            compartment_no: s.compartment_no.clone(),
            walk_distance_km: s.walk_distance_km,
            area_km2,
            area_ha: km2_to_ha(area_km2)?,
        });
    }
    Ok(SpotTable {
        pi_mode: pi,
        total_distance_km: spots.iter().map(|s| s.walk_distance_km).sum(),
        total_km2: spots.iter().map(|s| s.area_km2).sum(),
        total_ha: spots.iter().map(|s| s.area_ha).sum(),
        spots,
    })
}

pub fn read_spots_csv(path: &Path) -> Result<Vec<SpotInput>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file)
        .deserialize()
        .collect::<std::result::Result<Vec<SpotInput>, _>>()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spot(name: &str, d: f64) -> SpotInput {
        SpotInput {
            name: name.into(),
            compartment_no: "1".into(),
            walk_distance_km: d,
        }
    }

    #[test]
    fn area_examples() {
        assert_eq!(half_circle_area_km2(0.0, PiMode::Rounded).unwrap(), 0.0);
        assert!((half_circle_area_km2(6.0, PiMode::Rounded).unwrap() - 56.5486).abs() < 1e-3);
        assert!((half_circle_area_km2(15.0, PiMode::Rounded).unwrap() - 353.4).abs() < 0.05);
        assert!(half_circle_area_km2(-0.1, PiMode::Rounded).is_err());
        assert!(half_circle_area_km2(f64::NAN, PiMode::Exact).is_err());
    }

    #[test]
    fn hectare_conversion() {
        assert_eq!(km2_to_ha(0.0).unwrap(), 0.0);
        assert_eq!(km2_to_ha(1.0).unwrap(), 100.0);
        assert!((km2_to_ha(56.5487).unwrap() - 5654.87).abs() < 1e-9);
        assert!(km2_to_ha(-1.0).is_err());
    }

    #[test]
    fn tables() {
        let t = build_spot_table(&[], PiMode::Rounded).unwrap();
        assert!(t.spots.is_empty() && t.total_ha == 0.0 && t.total_km2 == 0.0);

        let t = build_spot_table(&[spot("Kachikhali", 2.0)], PiMode::Rounded).unwrap();
        assert!((t.total_ha - 628.3).abs() < 0.1);

        assert!(matches!(
            build_spot_table(&[spot("a", 1.0), spot("a", 2.0)], PiMode::Rounded),
            Err(Error::DuplicateSpot(n)) if n == "a"
        ));
    }

    #[test]
    fn pi_modes() {
        assert_eq!("Rounded".parse::<PiMode>().unwrap(), PiMode::Rounded);
        assert_eq!("exact".parse::<PiMode>().unwrap(), PiMode::Exact);
        assert!("tau".parse::<PiMode>().is_err());
        let a = half_circle_area_km2(15.0, PiMode::Rounded).unwrap();
        let b = half_circle_area_km2(15.0, PiMode::Exact).unwrap();
        assert!((a - b).abs() / b < 1e-4);
    }
}
