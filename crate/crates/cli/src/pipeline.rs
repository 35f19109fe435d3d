//! The full run: survey → zones → regression → valuation → reports.

use std::path::PathBuf;

use serde::Serialize;
use ztcm_core::regression::fit_ols_with;
use ztcm_core::spots::{build_spot_table, read_spots_csv};
use ztcm_core::survey::{filter_by_purpose, parse_survey_csv, PurposeFilter, RowReject, SurveySchema};
use ztcm_core::valuation::{build_report, DemandSlope, Money, ZoneDemand};
use ztcm_core::zoning::{
    build_observation_rows, build_zone_table, observation_design, read_income_quantiles, read_zone_inputs,
    VisitSource, VISITATION_SCALE,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{digest_input, OutputDir};
use crate::report::{
    spot_rows, spots_text, write_demand_curves, zone_rows, zones_text, FitReport, SPOT_HEADER, ZONE_HEADER,
};

pub const SURPLUS_CONVENTION: &str =
    "zone twtp = quantity^2 / (2 b) x potential_visitors / 10000 = 0.5 x visits x (choke_price - travel_cost)";

#[derive(Debug, Clone, Serialize)]
pub struct RespondentCounts {
    pub accepted: usize,
    pub rejected: usize,
    pub excluded_by_purpose: usize,
    pub local: usize,
    pub foreign: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub visitation_scale: f64,
    pub demand_units: String,
    pub surplus_convention: &'static str,
    pub respondents: RespondentCounts,
    pub zones: usize,
    pub observations: usize,
    pub tcost_coefficient: f64,
    pub slope_b: f64,
    pub total_visits: f64,
    pub total_value: Money,
    pub mean_cs_per_visit: Option<Money>,
    pub area_ha: Option<f64>,
    pub value_per_ha: Option<Money>,
    pub exchange_rate: f64,
    pub warnings: Vec<String>,
}

pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub summary: Summary,
}

pub fn run_pipeline(cfg: &RunConfig) -> CliResult<RunOutcome> {
    cfg.validate()?;
    let mut warnings = Vec::new();

    let survey_path = cfg.resolve(&cfg.survey);
    let load = parse_survey_csv(&survey_path, &SurveySchema::default())?;
    let filter = PurposeFilter {
        excluded: cfg.exclude_purposes.clone(),
    };
    let tourists = filter_by_purpose(&load.dataset, &filter);
    if tourists.locals().next().is_none() {
        return Err(CliError {
            path: Some(survey_path),
            ..CliError::data("no local tourists remain after validation and purpose filtering")
        });
    }
    let local = tourists.locals().count();
    let counts = RespondentCounts {
        accepted: load.dataset.len(),
        rejected: load.rejects.len(),
        excluded_by_purpose: load.dataset.len() - tourists.len(),
        local,
        foreign: tourists.len() - local,
    };

    let zones_in = read_zone_inputs(&cfg.resolve(&cfg.zones))?;
    let incomes = read_income_quantiles(&cfg.resolve(&cfg.income), &zones_in)?;
    let source = cfg.total_annual_visits.map_or(VisitSource::PerZone, VisitSource::ScaledTotal);
    let zone_table = build_zone_table(&tourists, &zones_in, &incomes, source, cfg.income_threshold.mode())?;
    let rows = build_observation_rows(&tourists, &zone_table)?;
    let fit = fit_ols_with(&observation_design(&rows)?, cfg.covariance)?;
    let fit_report = FitReport::new(&fit);

    let beta1 = fit.coefficient("TCost").expect("TCost is always in the design");
    if beta1 >= 0.0 {
        warnings.push(format!(
            "travel-cost coefficient is {beta1}, not negative; valuation uses its magnitude"
        ));
    }
    let slope = DemandSlope::from_coefficient(beta1)?;

    let spots = match &cfg.spots {
        Some(p) => Some(build_spot_table(&read_spots_csv(&cfg.resolve(p))?, cfg.pi_mode)?),
        None => None,
    };
    let area = spots.as_ref().map(|s| s.total_ha).filter(|a| *a > 0.0);
    let demands: Vec<ZoneDemand> = zone_table.iter().map(ZoneDemand::from_zone).collect();
    let valuation = build_report(&demands, slope, area, cfg.exchange_rate)?;

    let mut out = OutputDir::create(&cfg.output_path())?;
    out.write_json("fit.json", &fit_report)?;
    out.write("fit.txt", fit_report.to_text().as_bytes())?;
    let zrows = zone_rows(&valuation, Some(&zone_table));
    out.write_csv("zones.csv", &ZONE_HEADER, &zrows)?;
    out.write("zones.txt", zones_text(&zrows, &valuation, VISITATION_SCALE).as_bytes())?;
    out.write_csv(
        "observations.csv",
        &["zone", "mode", "respondents", "V", "TCost", "Alone", "Air", "Khln", "Package"],
        &rows,
    )?;
    out.write_csv::<RowReject>("rejects.csv", &["line", "reason"], &load.rejects)?;
    write_demand_curves(&mut out, &valuation, slope)?;
    if let Some(table) = &spots {
        let srows = spot_rows(table, Some(valuation.total_value.usd))?;
        out.write_csv("spots.csv", &SPOT_HEADER, &srows)?;
        out.write("spots.txt", spots_text(&srows, table).as_bytes())?;
    }

    let summary = Summary {
        visitation_scale: VISITATION_SCALE,
        demand_units: format!("visits per {VISITATION_SCALE} potential visitors"),
        surplus_convention: SURPLUS_CONVENTION,
        respondents: counts,
        zones: zone_table.len(),
        observations: rows.len(),
        tcost_coefficient: beta1,
        slope_b: slope.b(),
        total_visits: valuation.total_visits,
        total_value: valuation.total_value,
        mean_cs_per_visit: valuation.mean_cs_per_visit,
        area_ha: valuation.area_ha,
        value_per_ha: valuation.value_per_ha,
        exchange_rate: cfg.exchange_rate,
        warnings,
    };
    out.write_json("summary.json", &summary)?;

    let mut inputs = vec![
        digest_input(&cfg.survey, &survey_path)?,
        digest_input(&cfg.zones, &cfg.resolve(&cfg.zones))?,
        digest_input(&cfg.income, &cfg.resolve(&cfg.income))?,
    ];
    if let Some(p) = &cfg.spots {
        inputs.push(digest_input(p, &cfg.resolve(p))?);
    }
    let output_dir = out.finish("run", cfg, inputs)?;
    Ok(RunOutcome { output_dir, summary })
}
