//! Zone table construction and the zone × travel-mode regression observations.
//!
//! Visitation rates are always expressed per [`VISITATION_SCALE`] potential
//! visitors.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::DesignMatrix;
use crate::survey::{Dataset, Division, TravelMode};

pub const VISITATION_SCALE: f64 = 10_000.0;

/// Names of the regressors, in design-matrix order after the intercept.
pub const REGRESSORS: [&str; 5] = ["TCost", "Alone", "Air", "Khln", "Package"];

/// Zone income distribution given as a quantile table of
/// `(cumulative population fraction, income)` points.
///
/// The CDF is zero below the first income, piecewise linear between points
/// and flat (at the last fraction) above the last income.
#[derive(Debug, Clone, PartialEq)]
pub struct IncomeDistribution {
    pub zone: Division,
    points: Vec<(f64, f64)>,
    pub population: f64,
}

impl IncomeDistribution {
    pub fn new(zone: Division, points: Vec<(f64, f64)>, population: f64) -> Result<Self> {
        let bad = || Error::BadQuantileTable(zone.to_string());
        if points.is_empty() {
            return Err(bad());
        }
        for w in points.windows(2) {
            let ((f0, x0), (f1, x1)) = (w[0], w[1]);
            if !(f1 > f0) || x1 < x0 {
                return Err(bad());
            }
        }
        if points.iter().any(|&(f, x)| !(f > 0.0 && f <= 1.0) || !x.is_finite()) {
            return Err(bad());
        }
        if !(population >= 0.0) {
            return Err(Error::invalid(format!("zone {zone}: population must be nonnegative")));
        }
        Ok(Self {
            zone,
            points,
            population,
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Fraction of the population with income at or below `income`.
    pub fn cdf(&self, income: f64) -> f64 {
        let pts = &self.points;
        let Some(i) = pts.iter().rposition(|&(_, x)| x <= income) else {
            return 0.0;
        };
        if i + 1 == pts.len() {
            return pts[i].0;
        }
        let (f0, x0) = pts[i];
        let (f1, x1) = pts[i + 1];
        f0 + (f1 - f0) * (income - x0) / (x1 - x0)
    }
}

pub fn scale_annual_visits(total: f64, shares: &BTreeMap<Division, f64>) -> Result<BTreeMap<Division, f64>> {
    if !(total >= 0.0) {
        return Err(Error::invalid(format!("annual visit total {total} is negative")));
    }
    let sum: f64 = shares.values().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("zone shares sum to {sum}, expected 1")));
    }
    Ok(shares.iter().map(|(z, s)| (*z, total * s)).collect())
}

/// Zone population with income at or above `threshold`.
pub fn potential_visitors(dist: &IncomeDistribution, threshold: f64) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid(format!("income threshold {threshold} is negative")));
    }
    Ok(dist.population * (1.0 - dist.cdf(threshold)))
}

/// Visits per [`VISITATION_SCALE`] potential visitors.
pub fn visitation_rate(visits: f64, potential: f64) -> Result<f64> {
    if !(potential > 0.0) {
        return Err(Error::invalid("potential visitors must be positive"));
    }
    if !(visits >= 0.0) {
        return Err(Error::invalid("visits must be nonnegative"));
    }
    Ok(visits / potential * VISITATION_SCALE)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneRecord {
    pub zone: Division,
    pub annual_visits: f64,
    pub potential_visitors: f64,
    pub mean_travel_cost: f64,
    pub visitation_rate: f64,
    pub respondents: usize,
    pub income_threshold: f64,
}

/// One row of the zones file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneInput {
    pub zone_id: Division,
    pub annual_visits: f64,
    pub population: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VisitSource {
    /// Use each zone's `annual_visits` from the zones file.
    PerZone,
    /// Split this annual total by the sample's zone shares.
    ScaledTotal(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// Lowest reported income among the zone's respondents.
    ZoneMinimum,
    Fixed(f64),
}

/// Builds one [`ZoneRecord`] per division that has local respondents in `dataset`.
pub fn build_zone_table(
    dataset: &Dataset,
    zones: &[ZoneInput],
    incomes: &[IncomeDistribution],
    visits: VisitSource,
    threshold: ThresholdMode,
) -> Result<Vec<ZoneRecord>> {
    let mut cost_sum: BTreeMap<Division, (f64, usize)> = BTreeMap::new();
    let mut min_income: BTreeMap<Division, f64> = BTreeMap::new();
    for r in dataset.locals() {
        let Some(z) = r.origin_zone.division() else { continue };
        let e = cost_sum.entry(z).or_default();
        e.0 += r.travel_cost;
        e.1 += 1;
        if let Some(inc) = r.monthly_income {
            let m = min_income.entry(z).or_insert(inc);
            *m = m.min(inc);
        }
    }
    if cost_sum.is_empty() {
        return Err(Error::EmptyLocalSubset);
    }
    let scaled = match visits {
        VisitSource::ScaledTotal(total) => Some(scale_annual_visits(total, &crate::survey::zonal_shares(dataset)?)?),
        VisitSource::PerZone => None,
    };

    let mut table = Vec::with_capacity(cost_sum.len());
    for (zone, (sum, count)) in cost_sum {
        let input = zones
            .iter()
            .find(|z| z.zone_id == zone)
            .ok_or_else(|| Error::MissingZone(zone.to_string()))?;
        let dist = incomes
            .iter()
            .find(|d| d.zone == zone)
            .ok_or_else(|| Error::BadQuantileTable(zone.to_string()))?;
        let thr = match threshold {
            ThresholdMode::Fixed(t) => t,
            ThresholdMode::ZoneMinimum => *min_income.get(&zone).ok_or_else(|| {
                Error::invalid(format!(
                    "zone {zone}: no respondent reported an income, so the zone-minimum threshold is undefined"
                ))
            })?,
        };
        let potential = potential_visitors(dist, thr)?;
        let annual_visits = match &scaled {
            Some(m) => m.get(&zone).copied().unwrap_or(0.0),
            None => input.annual_visits,
        };
        table.push(ZoneRecord {
            zone,
            annual_visits,
            potential_visitors: potential,
            mean_travel_cost: sum / count as f64,
            visitation_rate: visitation_rate(annual_visits, potential)
                .map_err(|e| Error::invalid(format!("zone {zone}: {e}")))?,
            respondents: count,
            income_threshold: thr,
        });
    }
    Ok(table)
}

/// One regression observation: a non-empty zone × travel-mode cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationRow {
    pub zone: Division,
    pub mode: TravelMode,
    pub respondents: usize,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "TCost")]
    pub tcost: f64,
    #[serde(rename = "Alone", with = "flag")]
    pub alone: bool,
    #[serde(rename = "Air", with = "flag")]
    pub air: bool,
    #[serde(rename = "Khln", with = "flag")]
    pub khln: bool,
    #[serde(rename = "Package", with = "flag")]
    pub package: bool,
}

mod flag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("expected 0/1, got {other}"))),
        }
    }
}

/// Splits each zone's visitation rate across its travel-mode cells in
/// proportion to respondents. Within a cell, `Alone` and `Package` take the
/// majority value with ties going to 0.
pub fn build_observation_rows(dataset: &Dataset, zone_table: &[ZoneRecord]) -> Result<Vec<ObservationRow>> {
    #[derive(Default)]
    struct Cell {
        n: usize,
        cost: f64,
        alone: usize,
        package: usize,
    }
    let mut cells: BTreeMap<(Division, TravelMode), Cell> = BTreeMap::new();
    let mut zone_n: BTreeMap<Division, usize> = BTreeMap::new();
    for r in dataset.locals() {
        let Some(z) = r.origin_zone.division() else { continue };
        let c = cells.entry((z, r.travel_mode)).or_default();
        c.n += 1;
        c.cost += r.travel_cost;
        c.alone += usize::from(r.alone);
        c.package += usize::from(r.package_tour);
        *zone_n.entry(z).or_default() += 1;
    }
    cells
        .into_iter()
        .map(|((zone, mode), c)| {
            let zr = zone_table
                .iter()
                .find(|z| z.zone == zone)
                .ok_or_else(|| Error::MissingZone(zone.to_string()))?;
            let share = c.n as f64 / zone_n[&zone] as f64;
            Ok(ObservationRow {
                zone,
                mode,
                respondents: c.n,
                v: zr.visitation_rate * share,
                tcost: c.cost / c.n as f64,
                alone: 2 * c.alone > c.n,
                air: mode == TravelMode::AirCombined,
                khln: zone == Division::Khulna,
                package: 2 * c.package > c.n,
            })
        })
        .collect()
}

/// Design matrix for `V = α + β1 TCost + β2 Alone + β3 Air + β4 Khln + β5 Package`.
pub fn observation_design(rows: &[ObservationRow]) -> Result<DesignMatrix> {
    let f = |b: bool| if b { 1.0 } else { 0.0 };
    let cols = vec![
        rows.iter().map(|r| r.tcost).collect(),
        rows.iter().map(|r| f(r.alone)).collect(),
        rows.iter().map(|r| f(r.air)).collect(),
        rows.iter().map(|r| f(r.khln)).collect(),
        rows.iter().map(|r| f(r.package)).collect(),
    ];
    DesignMatrix::new(&REGRESSORS, &cols, rows.iter().map(|r| r.v).collect())
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_rows<T: serde::de::DeserializeOwned, R: Read>(reader: R, path: &Path) -> Result<Vec<T>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })
}

/// Reads the zones file: `zone_id, annual_visits, population`.
pub fn read_zone_inputs(path: &Path) -> Result<Vec<ZoneInput>> {
    let rows: Vec<ZoneInput> = read_rows(open(path)?, path)?;
    for (i, a) in rows.iter().enumerate() {
        if rows[..i].iter().any(|b| b.zone_id == a.zone_id) {
            return Err(Error::invalid(format!("{}: zone {} listed twice", path.display(), a.zone_id)));
        }
        if !(a.annual_visits >= 0.0) || !(a.population >= 0.0) {
            return Err(Error::invalid(format!(
                "{}: zone {} has negative visits or population",
                path.display(),
                a.zone_id
            )));
        }
    }
    Ok(rows)
}

#[derive(Deserialize)]
struct QuantileRow {
    zone_id: Division,
    cum_fraction: f64,
    income_bdt: f64,
}

/// Reads the income quantile file (`zone_id, cum_fraction, income_bdt`) and
/// attaches populations from the zones file.
pub fn read_income_quantiles(path: &Path, zones: &[ZoneInput]) -> Result<Vec<IncomeDistribution>> {
    let rows: Vec<QuantileRow> = read_rows(open(path)?, path)?;
    let mut by_zone: BTreeMap<Division, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        by_zone.entry(r.zone_id).or_default().push((r.cum_fraction, r.income_bdt));
    }
    by_zone
        .into_iter()
        .map(|(zone, mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let population = zones
                .iter()
                .find(|z| z.zone_id == zone)
                .map(|z| z.population)
                .ok_or_else(|| Error::MissingZone(zone.to_string()))?;
            IncomeDistribution::new(zone, pts, population)
        })
        .collect()
}

pub fn read_observations<R: Read>(reader: R, path: &Path) -> Result<Vec<ObservationRow>> {
    read_rows(reader, path)
}

pub fn read_observations_csv(path: &Path) -> Result<Vec<ObservationRow>> {
    read_observations(open(path)?, path)
}

pub fn write_observations<W: Write>(rows: &[ObservationRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |source| Error::Csv {
        path: "observations".into(),
        source,
    };
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "observations".into(),
        source,
    })
}
