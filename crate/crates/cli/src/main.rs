use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ztcm_cli::commands::{self, parse_rounding, ValueOnly};
use ztcm_cli::config::{Overrides, RunConfig, ThresholdSetting};
use ztcm_cli::output::OutputDir;
use ztcm_cli::pipeline::run_pipeline;
use ztcm_cli::{CliError, CliResult};
use ztcm_core::profiling::CellRounding;
use ztcm_core::regression::CovarianceFlavor;
use ztcm_core::spots::PiMode;
use ztcm_core::synthgen::Execution;

/// Zonal travel cost valuation of recreation sites.
#[derive(Parser)]
#[command(name = "ztcm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputArg {
    /// Directory for reports (overrides the config file).
    #[arg(long, env = "ZTCM_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        survey: Option<PathBuf>,
        #[arg(long)]
        zones: Option<PathBuf>,
        #[arg(long)]
        income: Option<PathBuf>,
        #[arg(long)]
        spots: Option<PathBuf>,
        #[arg(long)]
        total_annual_visits: Option<f64>,
        /// `zone_minimum` or a monthly income in BDT.
        #[arg(long)]
        income_threshold: Option<ThresholdSetting>,
        #[arg(long)]
        exchange_rate: Option<f64>,
        /// HC0 or HC1.
        #[arg(long)]
        covariance: Option<CovarianceFlavor>,
        #[arg(long)]
        seed: Option<u64>,
        /// `rounded` (3.14159) or `exact`.
        #[arg(long)]
        pi_mode: Option<PiMode>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Chi-square and ANOVA tests from a block-structured CSV file.
    Profile {
        input: PathBuf,
        /// Cell rounding for tables rebuilt from percentages: `exact` or a resolution.
        #[arg(long, default_value = "0.1", value_parser = parse_rounding)]
        rounding: CellRounding,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Half-circle coverage areas from walk distances.
    Spots {
        spots: PathBuf,
        #[arg(long, default_value = "rounded")]
        pi_mode: PiMode,
        /// Total annual value in USD to spread across spots by area.
        #[arg(long)]
        total_usd: Option<f64>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Generate a synthetic survey and optionally run a Monte Carlo recovery check.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, default_value = "HC1")]
        covariance: CovarianceFlavor,
        /// Run replications on one thread.
        #[arg(long)]
        serial: bool,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Value zones with a given travel-cost slope, skipping the regression.
    ValueOnly {
        /// Magnitude of the travel-cost coefficient.
        #[arg(long)]
        slope: f64,
        /// CSV with zone, travel_cost, quantity and optional unit_scale, visits.
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        spots: Option<PathBuf>,
        #[arg(long, conflicts_with = "spots")]
        area_ha: Option<f64>,
        #[arg(long, default_value = "rounded")]
        pi_mode: PiMode,
        #[arg(long, default_value_t = ztcm_core::valuation::DEFAULT_EXCHANGE_RATE)]
        exchange_rate: f64,
        #[command(flatten)]
        out: OutputArg,
    },
}

fn out_dir(arg: &OutputArg) -> PathBuf {
    arg.output_dir.clone().unwrap_or_else(|| PathBuf::from("ztcm-out"))
}

fn dispatch(cli: Cli) -> (CliResult<String>, PathBuf) {
    match cli.command {
        Command::Run {
            config,
            survey,
            zones,
            income,
            spots,
            total_annual_visits,
            income_threshold,
            exchange_rate,
            covariance,
            seed,
            pi_mode,
            out,
        } => {
            let cfg = RunConfig::load(&config).map(|mut c| {
                c.apply(Overrides {
                    survey,
                    zones,
                    income,
                    spots,
                    total_annual_visits,
                    income_threshold,
                    exchange_rate,
                    covariance,
                    output_dir: out.output_dir.clone(),
                    seed,
                    pi_mode,
                });
                c
            });
            let dir = cfg.as_ref().map(RunConfig::output_path).unwrap_or_else(|_| out_dir(&out));
            let res = cfg.and_then(|c| run_pipeline(&c)).map(|o| {
                let s = &o.summary;
                format!(
                    "{} observations, total value BDT {:.1} million (USD {:.2} million); reports in {}",
                    s.observations,
                    s.total_value.bdt / 1e6,
                    s.total_value.usd / 1e6,
                    o.output_dir.display()
                )
            });
            (res, dir)
        }
        Command::Profile { input, rounding, out } => {
            let dir = out_dir(&out);
            let res = commands::run_profile(&input, rounding, &dir).map(|r| commands::profile_text(&r));
            (res, dir)
        }
        Command::Spots {
            spots,
            pi_mode,
            total_usd,
            out,
        } => {
            let dir = out_dir(&out);
            let res = commands::run_spots(&spots, pi_mode, total_usd, &dir)
                .and_then(|_| std::fs::read_to_string(dir.join("spots.txt")).map_err(|e| CliError::io(&dir, e)));
            (res, dir)
        }
        Command::Simulate {
            scenario,
            reps,
            covariance,
            serial,
            out,
        } => {
            let dir = out_dir(&out);
            let exec = if serial { Execution::Serial } else { Execution::Parallel };
            let res = commands::run_simulate(&scenario, reps, covariance, exec, &dir).map(|r| match r {
                Some(r) => format!(
                    "{} replications: beta1 coverage {:.3}, bias {:e}, mean surplus bias {:e}",
                    r.reps, r.beta1_coverage, r.beta1_bias, r.mean_cs_bias
                ),
                None => format!("synthetic sample written to {}", dir.display()),
            });
            (res, dir)
        }
        Command::ValueOnly {
            slope,
            table,
            spots,
            area_ha,
            pi_mode,
            exchange_rate,
            out,
        } => {
            let dir = out_dir(&out);
            let args = ValueOnly {
                slope,
                table,
                spots,
                area_ha,
                pi_mode,
                exchange_rate,
            };
            let res = commands::run_value_only(&args, &dir)
                .and_then(|_| std::fs::read_to_string(dir.join("zones.txt")).map_err(|e| CliError::io(&dir, e)));
            (res, dir)
        }
    }
}

/// Best effort: the error report goes next to where the outputs would have been.
fn write_error_report(dir: &Path, err: &CliError) {
    if let Ok(mut out) = OutputDir::create(dir) {
        let _ = out.write_json(
            "error.json",
            &serde_json::json!({
                "exit_code": err.exit_code(),
                "failure": err.failure,
                "message": err.message,
                "path": err.path,
                "column": err.column,
            }),
        );
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (res, dir) = dispatch(cli);
    match res {
        Ok(msg) => {
            print!("{msg}");
            if !msg.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            write_error_report(&dir, &e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
