//! Consumer surplus and willingness to pay from the fitted travel-cost slope.
//!
//! Each zone gets its own linear demand segment with the shared slope `b`
//! passing through its observed `(travel cost, quantity)` point. Quantities are
//! in demand units (the dependent variable of the regression); `unit_scale`
//! converts per-unit surplus into money for the whole zone.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spots::TouristSpot;
use crate::survey::Division;
use crate::zoning::{ZoneRecord, VISITATION_SCALE};

pub const DEFAULT_EXCHANGE_RATE: f64 = 78.0;

/// Number of intervals in a demand-curve plot series.
pub const CURVE_STEPS: usize = 100;

/// Magnitude of the travel-cost coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DemandSlope(f64);

impl DemandSlope {
    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid(format!("demand slope must be positive and finite, got {b}")));
        }
        Ok(Self(b))
    }

    /// Takes `|β1|`. A zero coefficient has no choke price.
    pub fn from_coefficient(beta1: f64) -> Result<Self> {
        Self::new(beta1.abs())
    }

    pub fn b(self) -> f64 {
        self.0
    }
}

fn check_quantity(q: f64) -> Result<()> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::invalid(format!("demand quantity must be nonnegative, got {q}")));
    }
    Ok(())
}

/// Price at which the zone's demand reaches zero: `tc + q / b`.
pub fn choke_price(travel_cost: f64, quantity: f64, slope: DemandSlope) -> Result<f64> {
    check_quantity(quantity)?;
    Ok(travel_cost + quantity / slope.b())
}

/// Triangle under the zone's demand segment, `q² / (2b)`, per demand unit.
pub fn zone_consumer_surplus(travel_cost: f64, quantity: f64, slope: DemandSlope) -> Result<f64> {
    let _ = choke_price(travel_cost, quantity, slope)?;
    Ok(quantity * quantity / (2.0 * slope.b()))
}

/// Inputs for valuing one zone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneDemand {
    pub zone: Division,
    pub travel_cost: f64,
    pub quantity: f64,
    /// Money multiplier applied to the per-unit surplus.
    pub unit_scale: f64,
    pub visits: f64,
}

impl ZoneDemand {
    /// Demand measured as the visitation rate; one unit is `VISITATION_SCALE`
    /// potential visitors.
    pub fn from_zone(z: &ZoneRecord) -> Self {
        Self {
            zone: z.zone,
            travel_cost: z.mean_travel_cost,
            quantity: z.visitation_rate,
            unit_scale: z.potential_visitors / VISITATION_SCALE,
            visits: z.annual_visits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneValuation {
    pub zone: Division,
    pub travel_cost: f64,
    pub visits: f64,
    pub quantity: f64,
    pub choke_price: f64,
    pub consumer_surplus: f64,
    pub twtp: f64,
    pub zero_visits: bool,
}

pub fn value_zone(d: &ZoneDemand, slope: DemandSlope) -> Result<ZoneValuation> {
    if !(d.unit_scale >= 0.0) {
        return Err(Error::invalid(format!("zone {}: unit scale must be nonnegative", d.zone)));
    }
    let cs = zone_consumer_surplus(d.travel_cost, d.quantity, slope)
        .map_err(|e| Error::invalid(format!("zone {}: {e}", d.zone)))?;
    Ok(ZoneValuation {
        zone: d.zone,
        travel_cost: d.travel_cost,
        visits: d.visits,
        quantity: d.quantity,
        choke_price: choke_price(d.travel_cost, d.quantity, slope)?,
        consumer_surplus: cs,
        twtp: cs * d.unit_scale,
        zero_visits: d.quantity == 0.0,
    })
}

pub fn total_wtp(zones: &[ZoneValuation]) -> Result<f64> {
    if zones.is_empty() {
        return Err(Error::invalid("no zones to total"));
    }
    Ok(zones.iter().map(|z| z.twtp).sum())
}

pub fn mean_cs_per_visit(total: f64, total_visits: f64) -> Result<f64> {
    if !(total_visits > 0.0) {
        return Err(Error::invalid("total visits must be positive"));
    }
    Ok(total / total_visits)
}

pub fn value_per_hectare(total: f64, area_ha: f64) -> Result<f64> {
    if !(area_ha > 0.0) {
        return Err(Error::invalid("total area must be positive"));
    }
    Ok(total / area_ha)
}

pub fn convert_currency(amount: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::invalid(format!("exchange rate must be positive, got {rate}")));
    }
    Ok(amount / rate)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotValue {
    pub name: String,
    pub compartment_no: String,
    pub area_ha: f64,
    pub share: f64,
    pub value: f64,
}

/// Splits `total` across spots in proportion to area.
pub fn allocate_spot_values(total: f64, spots: &[TouristSpot]) -> Result<Vec<SpotValue>> {
    if spots.is_empty() {
        return Err(Error::invalid("no spots to allocate to"));
    }
    if let Some(s) = spots.iter().find(|s| !(s.area_ha > 0.0)) {
        return Err(Error::invalid(format!("spot {} has no area", s.name)));
    }
    let area: f64 = spots.iter().map(|s| s.area_ha).sum();
    Ok(spots
        .iter()
        .map(|s| SpotValue {
            name: s.name.clone(),
            compartment_no: s.compartment_no.clone(),
            area_ha: s.area_ha,
            share: s.area_ha / area,
            value: total * s.area_ha / area,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Money {
    pub bdt: f64,
    pub usd: f64,
}

impl Money {
    pub fn from_bdt(bdt: f64, rate: f64) -> Result<Self> {
        Ok(Self {
            bdt,
            usd: convert_currency(bdt, rate)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValuationReport {
    pub slope: DemandSlope,
    pub zones: Vec<ZoneValuation>,
    pub total_visits: f64,
    pub total_value: Money,
    pub mean_cs_per_visit: Option<Money>,
    pub area_ha: Option<f64>,
    pub value_per_ha: Option<Money>,
    pub exchange_rate: f64,
}

/// Values every zone and derives the totals. `area_ha` is the combined spot
/// area, when known. Mean surplus per visit is omitted when there are no visits.
pub fn build_report(
    demands: &[ZoneDemand],
    slope: DemandSlope,
    area_ha: Option<f64>,
    exchange_rate: f64,
) -> Result<ValuationReport> {
    let zones = demands.iter().map(|d| value_zone(d, slope)).collect::<Result<Vec<_>>>()?;
    let total = total_wtp(&zones)?;
    let total_visits: f64 = zones.iter().map(|z| z.visits).sum();
    let mean = if total_visits > 0.0 {
        Some(Money::from_bdt(mean_cs_per_visit(total, total_visits)?, exchange_rate)?)
    } else {
        None
    };
    let per_ha = area_ha
        .map(|a| value_per_hectare(total, a).and_then(|v| Money::from_bdt(v, exchange_rate)))
        .transpose()?;
    Ok(ValuationReport {
        slope,
        total_visits,
        total_value: Money::from_bdt(total, exchange_rate)?,
        mean_cs_per_visit: mean,
        area_ha,
        value_per_ha: per_ha,
        exchange_rate,
        zones,
    })
}

/// `(price, quantity)` points along the zone's demand segment from its
/// travel cost up to the choke price.
pub fn demand_curve(z: &ZoneValuation, slope: DemandSlope) -> Vec<(f64, f64)> {
    let span = z.choke_price - z.travel_cost;
    (0..=CURVE_STEPS)
        .map(|i| {
            if i == CURVE_STEPS {
                return (z.choke_price, 0.0);
            }
            let p = z.travel_cost + span * i as f64 / CURVE_STEPS as f64;
            (p, (z.quantity - slope.b() * (p - z.travel_cost)).max(0.0))
        })
        .collect()
}
