//! Machine-readable rows and text renderings of the fit, zone and spot tables.

use serde::Serialize;
use ztcm_core::regression::{CovarianceFlavor, OlsFit, INTERCEPT};
use ztcm_core::spots::{SpotTable, TouristSpot};
use ztcm_core::survey::Division;
use ztcm_core::valuation::{demand_curve, DemandSlope, ValuationReport};
use ztcm_core::zoning::{ZoneRecord, VISITATION_SCALE};

use crate::error::CliResult;
use crate::output::{grouped, text_table, OutputDir};

#[derive(Debug, Clone, Serialize)]
pub struct FitRow {
    pub variable: String,
    pub coef: f64,
    pub robust_se: f64,
    pub t: f64,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub dependent: &'static str,
    pub visitation_scale: f64,
    pub covariance: CovarianceFlavor,
    pub n: usize,
    pub df_model: u32,
    pub df_resid: usize,
    /// Regressors first, intercept last.
    pub rows: Vec<FitRow>,
    #[serde(rename = "F")]
    pub f: Option<f64>,
    pub p_f: f64,
    pub f_infinite: bool,
    pub r2: f64,
    pub root_mse: f64,
}

impl FitReport {
    pub fn new(fit: &OlsFit) -> Self {
        let mut rows: Vec<FitRow> = fit
            .terms
            .iter()
            .map(|t| FitRow {
                variable: t.name.clone(),
                coef: t.coef,
                robust_se: t.se,
                t: t.t,
                p: t.p,
                ci_low: t.ci_low,
                ci_high: t.ci_high,
            })
            .collect();
        rows.rotate_left(1);
        Self {
            dependent: "V",
            visitation_scale: VISITATION_SCALE,
            covariance: fit.flavor,
            n: fit.n,
            df_model: fit.wald.df_num,
            df_resid: fit.df_resid,
            rows,
            f: fit.wald.f.is_finite().then_some(fit.wald.f),
            p_f: fit.wald.p,
            f_infinite: fit.wald.infinite,
            r2: fit.r_squared,
            root_mse: fit.root_mse,
        }
    }

    pub fn to_text(&self) -> String {
        let num = |x: f64| {
            if x != 0.0 && x.abs() < 1e-3 {
                format!("{x:.3e}")
            } else {
                format!("{x:.4}")
            }
        };
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.variable.clone(),
                    num(r.coef),
                    num(r.robust_se),
                    format!("{:.2}", r.t),
                    format!("{:.4}", r.p),
                    num(r.ci_low),
                    num(r.ci_high),
                ]
            })
            .collect();
        let f = if self.f_infinite { "inf".to_string() } else { format!("{:.2}", self.f.unwrap_or(f64::NAN)) };
        text_table(
            &format!("Visit-generating function (dependent: V per {} potential visitors)", self.visitation_scale),
            &["Variable", "Coef.", &format!("Robust SE ({})", self.covariance), "t", "P>|t|", "95% CI low", "95% CI high"],
            &rows,
            &[format!(
                "Number of obs = {}, F({}, {}) = {}, Prob > F = {:.4}, R-squared = {:.4}, Root MSE = {:.3}",
                self.n, self.df_model, self.df_resid, f, self.p_f, self.r2, self.root_mse
            )],
        )
    }

    pub fn slope_coefficient(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.variable == "TCost").map(|r| r.coef)
    }

    pub fn intercept(&self) -> Option<&FitRow> {
        self.rows.iter().find(|r| r.variable == INTERCEPT)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZoneRow {
    pub zone: Division,
    pub travel_cost: f64,
    pub visits: f64,
    pub potential_visitors: Option<f64>,
    pub quantity: f64,
    pub choke_price: f64,
    pub consumer_surplus: f64,
    pub twtp: f64,
    pub zero_visits: bool,
}

pub const ZONE_HEADER: [&str; 9] = [
    "zone",
    "travel_cost",
    "visits",
    "potential_visitors",
    "quantity",
    "choke_price",
    "consumer_surplus",
    "twtp",
    "zero_visits",
];

pub fn zone_rows(report: &ValuationReport, zones: Option<&[ZoneRecord]>) -> Vec<ZoneRow> {
    report
        .zones
        .iter()
        .map(|z| ZoneRow {
            zone: z.zone,
            travel_cost: z.travel_cost,
            visits: z.visits,
            potential_visitors: zones
                .and_then(|t| t.iter().find(|r| r.zone == z.zone))
                .map(|r| r.potential_visitors),
            quantity: z.quantity,
            choke_price: z.choke_price,
            consumer_surplus: z.consumer_surplus,
            twtp: z.twtp,
            zero_visits: z.zero_visits,
        })
        .collect()
}

/// Visit and population counts are shown divided by `count_divisor`.
pub fn zones_text(rows: &[ZoneRow], report: &ValuationReport, count_divisor: f64) -> String {
    let per10k = |x: f64| grouped(x / count_divisor, 1);
    let suffix = if count_divisor == 1.0 { String::new() } else { format!("/{count_divisor}") };
    let visits_h = format!("Visits{suffix}");
    let potential_h = format!("Potential{suffix}");
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{}{}", r.zone, if r.zero_visits { " (no visits)" } else { "" }),
                grouped(r.travel_cost, 1),
                per10k(r.visits),
                r.potential_visitors.map_or("-".into(), per10k),
                grouped(r.choke_price, 1),
                grouped(r.twtp / 1e6, 1),
            ]
        })
        .collect();
    let mut notes = vec![format!(
        "Total value     BDT {} million (USD {} million)",
        grouped(report.total_value.bdt / 1e6, 1),
        grouped(report.total_value.usd / 1e6, 2)
    )];
    if let Some(m) = report.mean_cs_per_visit {
        notes.push(format!("Mean CS/visit   BDT {} (USD {})", grouped(m.bdt, 0), grouped(m.usd, 0)));
    }
    if let Some(v) = report.value_per_ha {
        notes.push(format!("Value/ha        BDT {} (USD {})", grouped(v.bdt, 1), grouped(v.usd, 2)));
    }
    notes.push(format!(
        "Slope b = {:e}; exchange rate {} BDT/USD; choke price = travel cost + quantity / b",
        report.slope.b(),
        report.exchange_rate
    ));
    text_table(
        "Zonal valuation",
        &["Zone", "Travel cost (BDT)", &visits_h, &potential_h, "Choke price (BDT)", "TWTP (million BDT)"],
        &body,
        &notes,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SpotRow {
    pub name: String,
    pub compartment_no: String,
    pub walk_distance_km: f64,
    pub area_km2: f64,
    pub area_ha: f64,
    pub value_million_usd: Option<f64>,
}

pub const SPOT_HEADER: [&str; 6] = [
    "name",
    "compartment_no",
    "walk_distance_km",
    "area_km2",
    "area_ha",
    "value_million_usd",
];

/// `total_usd` is spread across spots by area when given.
pub fn spot_rows(table: &SpotTable, total_usd: Option<f64>) -> CliResult<Vec<SpotRow>> {
    let values = match total_usd {
        Some(t) if !table.spots.is_empty() => Some(ztcm_core::valuation::allocate_spot_values(t / 1e6, &table.spots)?),
        _ => None,
    };
    Ok(table
        .spots
        .iter()
        .enumerate()
        .map(|(i, s): (usize, &TouristSpot)| SpotRow {
            name: s.name.clone(),
            compartment_no: s.compartment_no.clone(),
            walk_distance_km: s.walk_distance_km,
            area_km2: s.area_km2,
            area_ha: s.area_ha,
            value_million_usd: values.as_ref().map(|v| v[i].value),
        })
        .collect())
}

pub fn spots_text(rows: &[SpotRow], table: &SpotTable) -> String {
    let with_value = rows.iter().any(|r| r.value_million_usd.is_some());
    let mut body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![
                r.name.clone(),
                r.compartment_no.clone(),
                grouped(r.walk_distance_km, 1),
                grouped(r.area_km2, 1),
                grouped(r.area_ha, 1),
            ];
            if with_value {
                v.push(r.value_million_usd.map_or("-".into(), |x| format!("{x:.2}")));
            }
            v
        })
        .collect();
    let mut total = vec![
        "Total".to_string(),
        "-".to_string(),
        grouped(table.total_distance_km, 1),
        grouped(table.total_km2, 1),
        grouped(table.total_ha, 1),
    ];
    if with_value {
        let sum: f64 = rows.iter().filter_map(|r| r.value_million_usd).sum();
        total.push(format!("{sum:.2}"));
    }
    body.push(total);
    let mut headers = vec!["Tourist spot", "Compartment", "Distance (km)", "Half-circle area (km2)", "Area (ha)"];
    if with_value {
        headers.push("Value (million USD/yr)");
    }
    text_table(
        "Tourist spot coverage",
        &headers,
        &body,
        &[format!("pi = {} ({} mode); 1 km2 = 100 ha", table.pi_mode.value(), table.pi_mode)],
    )
}

/// Writes one `(price, quantity)` series per zone under `demand_curves/`.
pub fn write_demand_curves(out: &mut OutputDir, report: &ValuationReport, slope: DemandSlope) -> CliResult<()> {
    for z in &report.zones {
        let pts: Vec<(f64, f64)> = demand_curve(z, slope);
        out.write_csv(&format!("demand_curves/{}.csv", z.zone), &["price", "quantity"], &pts)?;
    }
    Ok(())
}
