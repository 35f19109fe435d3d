//! The `profile`, `spots`, `simulate` and `value-only` subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ztcm_core::profiling::{
    chi_square_independence, contingency_from_shares, one_way_anova, CellRounding, ContingencyTable, GroupShares,
    GroupSummary, TestResult,
};
use ztcm_core::regression::CovarianceFlavor;
use ztcm_core::spots::{build_spot_table, read_spots_csv, PiMode, SpotTable};
use ztcm_core::survey::{write_survey_csv, Division, SurveySchema};
use ztcm_core::synthgen::{generate_synthetic_survey, monte_carlo_recovery, Execution, MonteCarloReport, ScenarioSpec};
use ztcm_core::valuation::{build_report, DemandSlope, ValuationReport, ZoneDemand};

use crate::error::{CliError, CliResult};
use crate::output::{digest_input, text_table, OutputDir};
use crate::report::{spot_rows, spots_text, write_demand_curves, zone_rows, zones_text, SPOT_HEADER, ZONE_HEADER};

// ---- profile -------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Shares,
    Counts,
    Anova,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileResult {
    pub name: String,
    pub kind: BlockKind,
    pub test: TestResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<ContingencyTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<GroupSummary>>,
}

struct Block {
    kind: BlockKind,
    name: String,
    line: usize,
    body: String,
}

/// Splits the profile file into `[kind name]` sections of CSV text.
fn split_blocks(text: &str, path: &Path) -> CliResult<Vec<Block>> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(head) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let (kind, name) = head.trim().split_once(char::is_whitespace).unwrap_or((head, ""));
            let kind = match kind.to_ascii_lowercase().as_str() {
                "shares" => BlockKind::Shares,
                "counts" => BlockKind::Counts,
                "anova" => BlockKind::Anova,
                other => {
                    return Err(CliError::data(format!(
                        "{}:{}: unknown block kind `{other}` (expected shares, counts or anova)",
                        path.display(),
                        i + 1
                    )))
                }
            };
            blocks.push(Block {
                kind,
                name: name.trim().to_string(),
                line: i + 1,
                body: String::new(),
            });
            continue;
        }
        let Some(b) = blocks.last_mut() else {
            return Err(CliError::data(format!("{}:{}: data before the first [block] header", path.display(), i + 1)));
        };
        b.body.push_str(line);
        b.body.push('\n');
    }
    Ok(blocks)
}

fn parse_block(b: &Block, rounding: CellRounding, path: &Path) -> CliResult<ProfileResult> {
    let at = |msg: String| CliError::data(format!("{}: block `{}` (line {}): {msg}", path.display(), b.name, b.line));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(b.body.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(|e| at(e.to_string()))?.iter().map(str::to_string).collect();
    let records: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>().map_err(|e| at(e.to_string()))?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| at(format!("`{s}` is not a number")));

    let mut result = ProfileResult {
        name: b.name.clone(),
        kind: b.kind,
        test: TestResult {
            statistic: 0.0,
            df: ztcm_core::profiling::Df::One(0),
            p: 1.0,
            degenerate: false,
        },
        table: None,
        groups: None,
    };
    match b.kind {
        BlockKind::Shares => {
            if header.len() < 4 {
                return Err(at("expected columns group,size,<category>,<category>...".into()));
            }
            let groups = records
                .iter()
                .map(|r| {
                    Ok(GroupShares {
                        label: r[0].to_string(),
                        size: num(&r[1])?,
                        percentages: r.iter().skip(2).map(num).collect::<CliResult<_>>()?,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            let table = contingency_from_shares(&header[2..], &groups, rounding).map_err(|e| at(e.to_string()))?;
            result.test = chi_square_independence(&table).map_err(|e| at(e.to_string()))?;
            result.table = Some(table);
        }
        BlockKind::Counts => {
            let counts = records
                .iter()
                .map(|r| r.iter().skip(1).map(num).collect::<CliResult<Vec<f64>>>())
                .collect::<CliResult<Vec<_>>>()?;
            let table = ContingencyTable::new(
                records.iter().map(|r| r[0].to_string()).collect(),
                header[1..].to_vec(),
                counts,
            )
            .map_err(|e| at(e.to_string()))?;
            result.test = chi_square_independence(&table).map_err(|e| at(e.to_string()))?;
            result.table = Some(table);
        }
        BlockKind::Anova => {
            if header.len() != 4 {
                return Err(at("expected columns group,n,mean,sd".into()));
            }
            let groups = records
                .iter()
                .map(|r| {
                    let n = num(&r[1])?;
                    if n.fract() != 0.0 || n < 1.0 {
                        return Err(at(format!("group size `{}` is not a positive whole number", &r[1])));
                    }
                    Ok(GroupSummary {
                        label: r[0].to_string(),
                        n: n as u32,
                        mean: num(&r[2])?,
                        sd: num(&r[3])?,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            result.test = one_way_anova(&groups).map_err(|e| at(e.to_string()))?;
            result.groups = Some(groups);
        }
    }
    Ok(result)
}

pub fn profile(input: &Path, rounding: CellRounding) -> CliResult<Vec<ProfileResult>> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let blocks = split_blocks(&text, input)?;
    if blocks.is_empty() {
        return Err(CliError::data(format!("{}: no [shares], [counts] or [anova] blocks", input.display())));
    }
    blocks.iter().map(|b| parse_block(b, rounding, input)).collect()
}

pub fn profile_text(results: &[ProfileResult]) -> String {
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            let df = match r.test.df {
                ztcm_core::profiling::Df::One(d) => d.to_string(),
                ztcm_core::profiling::Df::Pair(a, b) => format!("{a}, {b}"),
            };
            vec![
                r.name.clone(),
                match r.kind {
                    BlockKind::Anova => "F".into(),
                    _ => "chi2".into(),
                },
                format!("{:.2}", r.test.statistic),
                df,
                format!("{:.4}", r.test.p),
            ]
        })
        .collect();
    text_table("Profile tests", &["Variable", "Test", "Statistic", "df", "p"], &rows, &[])
}

#[derive(Serialize)]
struct ProfileConfig<'a> {
    input: &'a Path,
    rounding: String,
}

pub fn run_profile(input: &Path, rounding: CellRounding, out_dir: &Path) -> CliResult<Vec<ProfileResult>> {
    let results = profile(input, rounding)?;
    let mut out = OutputDir::create(out_dir)?;
    out.write_json("profile.json", &results)?;
    out.write("profile.txt", profile_text(&results).as_bytes())?;
    let rounding = match rounding {
        CellRounding::Exact => "exact".to_string(),
        CellRounding::Resolution(r) => r.to_string(),
    };
    out.finish("profile", &ProfileConfig { input, rounding }, vec![digest_input(input, input)?])?;
    Ok(results)
}

/// `exact` or a positive resolution such as `0.1` or `1`.
pub fn parse_rounding(s: &str) -> Result<CellRounding, String> {
    if s.trim().eq_ignore_ascii_case("exact") {
        return Ok(CellRounding::Exact);
    }
    match s.trim().parse::<f64>() {
        Ok(r) if r > 0.0 => Ok(CellRounding::Resolution(r)),
        _ => Err(format!("rounding must be `exact` or a positive number, got `{s}`")),
    }
}

// ---- spots ---------------------------------------------------------------

#[derive(Serialize)]
struct SpotsConfig<'a> {
    spots: &'a Path,
    pi_mode: PiMode,
    total_usd: Option<f64>,
}

pub fn run_spots(spots: &Path, pi: PiMode, total_usd: Option<f64>, out_dir: &Path) -> CliResult<SpotTable> {
    let table = build_spot_table(&read_spots_csv(spots)?, pi)?;
    let rows = spot_rows(&table, total_usd)?;
    let mut out = OutputDir::create(out_dir)?;
    out.write_csv("spots.csv", &SPOT_HEADER, &rows)?;
    out.write("spots.txt", spots_text(&rows, &table).as_bytes())?;
    out.finish(
        "spots",
        &SpotsConfig {
            spots,
            pi_mode: pi,
            total_usd,
        },
        vec![digest_input(spots, spots)?],
    )?;
    Ok(table)
}

// ---- simulate ------------------------------------------------------------

#[derive(Serialize)]
struct Truth<'a> {
    coefficients: [f64; 6],
    names: [&'static str; 6],
    true_v: &'a [f64],
    rng: &'static str,
    stream: u64,
}

#[derive(Serialize)]
struct SimulateConfig<'a> {
    scenario: &'a ScenarioSpec,
    reps: Option<usize>,
    flavor: CovarianceFlavor,
    serial: bool,
}

pub fn run_simulate(
    scenario: &Path,
    reps: Option<usize>,
    flavor: CovarianceFlavor,
    execution: Execution,
    out_dir: &Path,
) -> CliResult<Option<MonteCarloReport>> {
    let spec = ScenarioSpec::from_path(scenario)?;
    let sample = generate_synthetic_survey(&spec)?;
    let mut out = OutputDir::create(out_dir)?;
    let mut buf = Vec::new();
    write_survey_csv(&sample.dataset, &mut buf, &SurveySchema::default())?;
    out.write("synthetic_survey.csv", &buf)?;
    out.write_csv(
        "observations.csv",
        &["zone", "mode", "respondents", "V", "TCost", "Alone", "Air", "Khln", "Package"],
        &sample.rows,
    )?;
    out.write_json(
        "truth.json",
        &Truth {
            coefficients: spec.coefficients,
            names: ["Constant", "TCost", "Alone", "Air", "Khln", "Package"],
            true_v: &sample.true_v,
            rng: ztcm_core::synthgen::RNG_NAME,
            stream: 0,
        },
    )?;
    let report = match reps {
        Some(r) => {
            let rep = monte_carlo_recovery(&spec, r, flavor, execution)?;
            out.write_json("monte_carlo.json", &rep)?;
            Some(rep)
        }
        None => None,
    };
    out.finish(
        "simulate",
        &SimulateConfig {
            scenario: &spec,
            reps,
            flavor,
            serial: execution == Execution::Serial,
        },
        vec![digest_input(scenario, scenario)?],
    )?;
    Ok(report)
}

// ---- value-only ----------------------------------------------------------

/// One row of a value-only demand table. `unit_scale` defaults to 1 and
/// `visits` to `quantity × unit_scale`.
#[derive(Debug, Clone, Deserialize)]
pub struct DemandRow {
    pub zone: Division,
    pub travel_cost: f64,
    pub quantity: f64,
    #[serde(default)]
    pub unit_scale: Option<f64>,
    #[serde(default)]
    pub visits: Option<f64>,
}

pub fn read_demand_table(path: &Path) -> CliResult<Vec<ZoneDemand>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let rows: Vec<DemandRow> = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError {
            path: Some(path.to_path_buf()),
            ..CliError::data(format!("{}: {e}", path.display()))
        })?;
    if rows.is_empty() {
        return Err(CliError::data(format!("{}: no zones", path.display())));
    }
    Ok(rows
        .into_iter()
        .map(|r| {
            let scale = r.unit_scale.unwrap_or(1.0);
            ZoneDemand {
                zone: r.zone,
                travel_cost: r.travel_cost,
                quantity: r.quantity,
                unit_scale: scale,
                visits: r.visits.unwrap_or(r.quantity * scale),
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct ValueOnly {
    pub slope: f64,
    pub table: PathBuf,
    pub spots: Option<PathBuf>,
    pub area_ha: Option<f64>,
    pub pi_mode: PiMode,
    pub exchange_rate: f64,
}

#[derive(Serialize)]
struct ValueOnlyConfig<'a> {
    slope: f64,
    table: &'a Path,
    spots: Option<&'a Path>,
    area_ha: Option<f64>,
    pi_mode: PiMode,
    exchange_rate: f64,
}

const VALUE_ONLY_CONVENTION: &str = "zone twtp = quantity^2 / (2 b) x unit_scale; choke_price = travel_cost + quantity / b";

#[derive(Serialize)]
struct ValueSummary<'a> {
    surplus_convention: &'static str,
    #[serde(flatten)]
    report: &'a ValuationReport,
}

pub fn run_value_only(args: &ValueOnly, out_dir: &Path) -> CliResult<ValuationReport> {
    if !(args.exchange_rate > 0.0) {
        return Err(CliError::config(format!("exchange rate must be positive, got {}", args.exchange_rate)));
    }
    let slope = DemandSlope::new(args.slope).map_err(|e| CliError::config(e.to_string()))?;
    let demands = read_demand_table(&args.table)?;
    let spots = match &args.spots {
        Some(p) => Some(build_spot_table(&read_spots_csv(p)?, args.pi_mode)?),
        None => None,
    };
    let area = args.area_ha.or(spots.as_ref().map(|s| s.total_ha));
    let report = build_report(&demands, slope, area, args.exchange_rate)?;

    let mut out = OutputDir::create(out_dir)?;
    let rows = zone_rows(&report, None);
    out.write_csv("zones.csv", &ZONE_HEADER, &rows)?;
    out.write("zones.txt", zones_text(&rows, &report, 1.0).as_bytes())?;
    out.write_json(
        "summary.json",
        &ValueSummary {
            surplus_convention: VALUE_ONLY_CONVENTION,
            report: &report,
        },
    )?;
    write_demand_curves(&mut out, &report, slope)?;
    if let Some(table) = &spots {
        let srows = spot_rows(table, Some(report.total_value.usd))?;
        out.write_csv("spots.csv", &SPOT_HEADER, &srows)?;
        out.write("spots.txt", spots_text(&srows, table).as_bytes())?;
    }
    let mut inputs = vec![digest_input(&args.table, &args.table)?];
    if let Some(p) = &args.spots {
        inputs.push(digest_input(p, p)?);
    }
    out.finish(
        "value-only",
        &ValueOnlyConfig {
            slope: args.slope,
            table: &args.table,
            spots: args.spots.as_deref(),
            area_ha: args.area_ha,
            pi_mode: args.pi_mode,
            exchange_rate: args.exchange_rate,
        },
        inputs,
    )?;
    Ok(report)
}
