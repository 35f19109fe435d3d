//! Run configuration: a flat TOML file whose entries can be overridden by flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ztcm_core::regression::CovarianceFlavor;
use ztcm_core::spots::PiMode;
use ztcm_core::survey::Purpose;
use ztcm_core::valuation::DEFAULT_EXCHANGE_RATE;
use ztcm_core::zoning::{ThresholdMode, VISITATION_SCALE};

use crate::error::{CliError, CliResult};

/// `"zone_minimum"` or a fixed monthly income in BDT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdSetting {
    Fixed(f64),
    Named(NamedThreshold),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedThreshold {
    ZoneMinimum,
}

impl Default for ThresholdSetting {
    fn default() -> Self {
        ThresholdSetting::Named(NamedThreshold::ZoneMinimum)
    }
}

impl std::str::FromStr for ThresholdSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("zone_minimum") {
            return Ok(Self::default());
        }
        s.trim()
            .parse::<f64>()
            .map(ThresholdSetting::Fixed)
            .map_err(|_| format!("income threshold must be `zone_minimum` or a number, got `{s}`"))
    }
}

impl ThresholdSetting {
    pub fn mode(self) -> ThresholdMode {
        match self {
            ThresholdSetting::Fixed(t) => ThresholdMode::Fixed(t),
            ThresholdSetting::Named(NamedThreshold::ZoneMinimum) => ThresholdMode::ZoneMinimum,
        }
    }
}

fn default_rate() -> f64 {
    DEFAULT_EXCHANGE_RATE
}

fn default_scale() -> f64 {
    VISITATION_SCALE
}

fn default_output() -> PathBuf {
    PathBuf::from("ztcm-out")
}

fn default_excluded() -> Vec<Purpose> {
    vec![Purpose::Spiritual]
}

/// Paths are kept as written; relative ones resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub survey: PathBuf,
    pub zones: PathBuf,
    pub income: PathBuf,
    #[serde(default)]
    pub spots: Option<PathBuf>,
    /// When set, split across zones by sample shares instead of using the zones file.
    #[serde(default)]
    pub total_annual_visits: Option<f64>,
    #[serde(default)]
    pub income_threshold: ThresholdSetting,
    #[serde(default = "default_rate")]
    pub exchange_rate: f64,
    #[serde(default)]
    pub covariance: CovarianceFlavor,
    #[serde(default = "default_scale")]
    pub visitation_scale: f64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub pi_mode: PiMode,
    #[serde(default = "default_excluded")]
    pub exclude_purposes: Vec<Purpose>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Flag values that win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub survey: Option<PathBuf>,
    pub zones: Option<PathBuf>,
    pub income: Option<PathBuf>,
    pub spots: Option<PathBuf>,
    pub total_annual_visits: Option<f64>,
    pub income_threshold: Option<ThresholdSetting>,
    pub exchange_rate: Option<f64>,
    pub covariance: Option<CovarianceFlavor>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub pi_mode: Option<PiMode>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> CliResult<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base).map_err(|mut e| {
            e.message = format!("{}: {}", path.display(), e.message);
            e.path = Some(path.to_path_buf());
            e
        })
    }

    /// Flag paths are taken relative to the working directory, not the config file.
    pub fn apply(&mut self, o: Overrides) {
        let cwd = |p: PathBuf| std::path::absolute(&p).unwrap_or(p);
        if let Some(p) = o.survey {
            self.survey = cwd(p);
        }
        if let Some(p) = o.zones {
            self.zones = cwd(p);
        }
        if let Some(p) = o.income {
            self.income = cwd(p);
        }
        if let Some(p) = o.spots {
            self.spots = Some(cwd(p));
        }
        if let Some(p) = o.output_dir {
            self.output_dir = cwd(p);
        }
        self.total_annual_visits = o.total_annual_visits.or(self.total_annual_visits);
        self.income_threshold = o.income_threshold.unwrap_or(self.income_threshold);
        self.exchange_rate = o.exchange_rate.unwrap_or(self.exchange_rate);
        self.covariance = o.covariance.unwrap_or(self.covariance);
        self.seed = o.seed.or(self.seed);
        self.pi_mode = o.pi_mode.unwrap_or(self.pi_mode);
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    /// Checks values and that every referenced input exists.
    pub fn validate(&self) -> CliResult<()> {
        if !(self.exchange_rate > 0.0) || !self.exchange_rate.is_finite() {
            return Err(CliError::config(format!("exchange_rate must be positive, got {}", self.exchange_rate)));
        }
        if self.visitation_scale != VISITATION_SCALE {
            return Err(CliError::config(format!(
                "visitation_scale is fixed at {VISITATION_SCALE}, got {}",
                self.visitation_scale
            )));
        }
        if let Some(t) = self.total_annual_visits {
            if !(t >= 0.0) {
                return Err(CliError::config(format!("total_annual_visits must be nonnegative, got {t}")));
            }
        }
        if let ThresholdSetting::Fixed(t) = self.income_threshold {
            if !(t >= 0.0) {
                return Err(CliError::config(format!("income_threshold must be nonnegative, got {t}")));
            }
        }
        let mut inputs = vec![("survey", &self.survey), ("zones", &self.zones), ("income", &self.income)];
        if let Some(s) = &self.spots {
            inputs.push(("spots", s));
        }
        for (name, p) in inputs {
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(CliError {
                    path: Some(full.clone()),
                    ..CliError::config(format!("{name} file not found: {}", full.display()))
                });
            }
        }
        Ok(())
    }
}
