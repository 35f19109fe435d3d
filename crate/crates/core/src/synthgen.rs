//! Synthetic surveys with known demand parameters, and a Monte Carlo harness
//! that checks the estimator recovers them.
//!
//! Randomness comes from `ChaCha8Rng` seeded with the scenario seed. The
//! single-draw generator uses stream 0; Monte Carlo replication `r` uses
//! stream `r`, so replications are independent of scheduling.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{fit_ols_with, CovarianceFlavor};
use crate::survey::{Dataset, Division, OriginZone, Purpose, SurveyRecord, TravelMode, VisitorKind};
use crate::zoning::{observation_design, IncomeDistribution, ObservationRow};

pub const RNG_NAME: &str = "ChaCha8Rng";
pub const MIN_REPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLaw {
    #[default]
    Homoskedastic,
    /// Noise SD scaled by the row's travel cost relative to the mean travel cost.
    ProportionalTravelCost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneSpec {
    pub zone: Division,
    /// Relative weight used to apportion rows across zones.
    pub population: f64,
    pub tc_mean: f64,
    pub tc_sd: f64,
    /// `(cumulative fraction, monthly income)` points for drawing incomes.
    pub income_quantiles: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    /// `[α, β_TCost, β_Alone, β_Air, β_Khln, β_Package]`.
    pub coefficients: [f64; 6],
    pub zones: Vec<ZoneSpec>,
    pub noise_sd: f64,
    #[serde(default)]
    pub noise_law: NoiseLaw,
    /// Number of observation rows.
    pub sample_size: usize,
    pub seed: u64,
    #[serde(default = "half")]
    pub alone_share: f64,
    #[serde(default = "half")]
    pub package_share: f64,
}

fn half() -> f64 {
    0.5
}

impl ScenarioSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return bad("coefficients must be finite".into());
        }
        if !(self.coefficients[1] < 0.0) {
            return bad("the travel-cost coefficient must be negative".into());
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return bad("noise_sd must be nonnegative".into());
        }
        if self.sample_size < 8 {
            return bad("sample_size must be at least 8".into());
        }
        for (name, p) in [("alone_share", self.alone_share), ("package_share", self.package_share)] {
            if !(p > 0.0 && p < 1.0) {
                return bad(format!("{name} must lie strictly between 0 and 1"));
            }
        }
        if self.zones.len() < 2 {
            return bad("at least two zones are needed".into());
        }
        if !self.zones.iter().any(|z| z.zone == Division::Khulna) {
            return bad("one zone must be Khulna".into());
        }
        for (i, z) in self.zones.iter().enumerate() {
            if self.zones[..i].iter().any(|o| o.zone == z.zone) {
                return bad(format!("zone {} listed twice", z.zone));
            }
            if !(z.population > 0.0) || !(z.tc_mean >= 0.0) || !(z.tc_sd >= 0.0) {
                return bad(format!("zone {}: population must be positive and travel costs nonnegative", z.zone));
            }
            IncomeDistribution::new(z.zone, z.income_quantiles.clone(), z.population)
                .map_err(|_| Error::InvalidScenario(format!("zone {}: bad income quantiles", z.zone)))?;
            if z.income_quantiles.last().map(|q| q.0) != Some(1.0) {
                return bad(format!("zone {}: income quantiles must end at fraction 1", z.zone));
            }
        }
        Ok(())
    }
}

/// Rows per zone by largest remainder on population weights.
fn apportion(weights: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let short = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        counts[i] += 1;
    }
    counts
}

/// Exactly `round(share·n)` ones, clamped to `[1, n-1]`, in shuffled order.
fn stratified_flags(rng: &mut ChaCha8Rng, n: usize, share: f64) -> Vec<bool> {
    let ones = ((share * n as f64).round() as usize).clamp(1, n - 1);
    let mut v: Vec<bool> = (0..n).map(|i| i < ones).collect();
    v.shuffle(rng);
    v
}

fn draw_income(rng: &mut ChaCha8Rng, quantiles: &[(f64, f64)]) -> f64 {
    let u: f64 = rng.random();
    let mut prev = (0.0, quantiles[0].1);
    for &(f, x) in quantiles {
        if u <= f {
            let w = if f > prev.0 { (u - prev.0) / (f - prev.0) } else { 1.0 };
            return prev.1 + w * (x - prev.1);
        }
        prev = (f, x);
    }
    prev.1
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub dataset: Dataset,
    pub rows: Vec<ObservationRow>,
    /// Noise-free visitation rate for each row.
    pub true_v: Vec<f64>,
}

fn generate_with(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<SyntheticSample> {
    let n = spec.sample_size;
    let counts = apportion(&spec.zones.iter().map(|z| z.population).collect::<Vec<_>>(), n);
    let alone = stratified_flags(rng, n, spec.alone_share);
    let package = stratified_flags(rng, n, spec.package_share);

    let mut cells = Vec::with_capacity(n);
    for (z, &c) in spec.zones.iter().zip(&counts) {
        for j in 0..c {
            cells.push((z, TravelMode::ALL[j % TravelMode::ALL.len()]));
        }
    }

    let mut rows = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(n);
    for (i, (z, mode)) in cells.into_iter().enumerate() {
        let tc = if z.tc_sd > 0.0 {
            Normal::new(z.tc_mean, z.tc_sd)
                .map_err(|e| Error::InvalidScenario(e.to_string()))?
                .sample(rng)
                .max(0.0)
        } else {
            z.tc_mean
        };
        let income = draw_income(rng, &z.income_quantiles);
        rows.push(ObservationRow {
            zone: z.zone,
            mode,
            respondents: 1,
            v: 0.0,
            tcost: tc,
            alone: alone[i],
            air: mode == TravelMode::AirCombined,
            khln: z.zone == Division::Khulna,
            package: package[i],
        });
        records.push(SurveyRecord {
            respondent_id: format!("syn{i:05}"),
            visitor_kind: VisitorKind::Local,
            origin_zone: OriginZone::Domestic(z.zone),
            travel_cost: tc,
            travel_mode: mode,
            alone: alone[i],
            package_tour: package[i],
            purpose: Purpose::Recreation,
            sex: None,
            age_band: None,
            education_band: None,
            marital_status: None,
            occupation: None,
            household_size: None,
            monthly_income: Some(income),
            repeat_visitor: None,
        });
    }

    let mean_tc = rows.iter().map(|r| r.tcost).sum::<f64>() / n as f64;
    let c = &spec.coefficients;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let mut true_v = Vec::with_capacity(n);
    let unit = Normal::new(0.0, 1.0).expect("standard normal");
    for r in &mut rows {
        let mean =
            c[0] + c[1] * r.tcost + c[2] * flag(r.alone) + c[3] * flag(r.air) + c[4] * flag(r.khln) + c[5] * flag(r.package);
        let sd = match spec.noise_law {
            NoiseLaw::Homoskedastic => spec.noise_sd,
            NoiseLaw::ProportionalTravelCost if mean_tc > 0.0 => spec.noise_sd * r.tcost / mean_tc,
            NoiseLaw::ProportionalTravelCost => spec.noise_sd,
        };
        let e: f64 = unit.sample(rng);
        r.v = mean + sd * e;
        true_v.push(mean);
    }

    for (name, col) in [
        ("Air", rows.iter().map(|r| r.air).collect::<Vec<_>>()),
        ("Khln", rows.iter().map(|r| r.khln).collect()),
    ] {
        if col.iter().all(|&b| b) || col.iter().all(|&b| !b) {
            return Err(Error::InvalidScenario(format!(
                "the {name} dummy is constant; raise sample_size or adjust zone populations"
            )));
        }
    }

    Ok(SyntheticSample {
        dataset: Dataset::from_records(records, format!("synthetic seed {}", spec.seed))?,
        rows,
        true_v,
    })
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One synthetic sample from stream 0 of the scenario seed.
pub fn generate_synthetic_survey(spec: &ScenarioSpec) -> Result<SyntheticSample> {
    spec.validate()?;
    generate_with(spec, &mut rng_for(spec.seed, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub reps: usize,
    pub sample_size: usize,
    pub flavor: CovarianceFlavor,
    pub true_beta1: f64,
    pub mean_beta1: f64,
    pub beta1_bias: f64,
    /// Share of replications whose 95% interval for β1 contains the truth.
    pub beta1_coverage: f64,
    /// Quantity at which surplus is compared: the mean noise-free rate.
    pub cs_reference_quantity: f64,
    pub true_cs: f64,
    pub mean_cs_bias: f64,
    /// Replications with a nonnegative travel-cost estimate, left out of the surplus bias.
    pub nonnegative_slope_reps: usize,
    pub rng: String,
    pub stream_rule: String,
}

struct RepOutcome {
    beta1: f64,
    covered: bool,
    cs: Option<f64>,
}

fn run_rep(spec: &ScenarioSpec, rep: usize, flavor: CovarianceFlavor, q_ref: f64) -> Result<RepOutcome> {
    let sample = generate_with(spec, &mut rng_for(spec.seed, rep as u64))?;
    let fit = fit_ols_with(&observation_design(&sample.rows)?, flavor)
        .map_err(|e| Error::invalid(format!("replication {rep}: {e}")))?;
    let term = &fit.terms[1];
    let truth = spec.coefficients[1];
    // absorb rounding when the interval collapses to a point
    let tol = 1e-9 * truth.abs().max(1.0);
    Ok(RepOutcome {
        beta1: term.coef,
        covered: term.ci_low - tol <= truth && truth <= term.ci_high + tol,
        cs: (term.coef < 0.0).then(|| q_ref * q_ref / (2.0 * term.coef.abs())),
    })
}

pub fn monte_carlo_recovery(
    spec: &ScenarioSpec,
    reps: usize,
    flavor: CovarianceFlavor,
    execution: Execution,
) -> Result<MonteCarloReport> {
    spec.validate()?;
    if reps < MIN_REPS {
        return Err(Error::invalid(format!("at least {MIN_REPS} replications are required, got {reps}")));
    }
    let reference = generate_with(spec, &mut rng_for(spec.seed, 0))?;
    let q_ref = reference.true_v.iter().sum::<f64>() / reference.true_v.len() as f64;
    let truth = spec.coefficients[1];
    let true_cs = q_ref * q_ref / (2.0 * truth.abs());

    let outcomes: Vec<RepOutcome> = match execution {
        Execution::Serial => (0..reps).map(|r| run_rep(spec, r, flavor, q_ref)).collect::<Result<_>>()?,
        Execution::Parallel => (0..reps)
            .into_par_iter()
            .map(|r| run_rep(spec, r, flavor, q_ref))
            .collect::<Result<_>>()?,
    };

    let mean_beta1 = outcomes.iter().map(|o| o.beta1).sum::<f64>() / reps as f64;
    let covered = outcomes.iter().filter(|o| o.covered).count();
    let cs: Vec<f64> = outcomes.iter().filter_map(|o| o.cs).collect();
    let mean_cs_bias = if cs.is_empty() {
        f64::NAN
    } else {
        cs.iter().map(|c| c - true_cs).sum::<f64>() / cs.len() as f64
    };
    Ok(MonteCarloReport {
        reps,
        sample_size: spec.sample_size,
        flavor,
        true_beta1: truth,
        mean_beta1,
        beta1_bias: mean_beta1 - truth,
        beta1_coverage: covered as f64 / reps as f64,
        cs_reference_quantity: q_ref,
        true_cs,
        mean_cs_bias,
        nonnegative_slope_reps: reps - cs.len(),
        rng: RNG_NAME.to_string(),
        stream_rule: format!("seed_from_u64({}), set_stream(replication index)", spec.seed),
    })
}
