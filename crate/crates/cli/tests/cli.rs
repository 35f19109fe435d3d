use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const GOLDEN_FILES: [&str; 16] = [
    "fit.json",
    "fit.txt",
    "zones.csv",
    "zones.txt",
    "observations.csv",
    "rejects.csv",
    "spots.csv",
    "spots.txt",
    "summary.json",
    "demand_curves/Barisal.csv",
    "demand_curves/Chittagong.csv",
    "demand_curves/Dhaka.csv",
    "demand_curves/Khulna.csv",
    "demand_curves/Rajshahi.csv",
    "demand_curves/Rangpur.csv",
    "demand_curves/Sylhet.csv",
];

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn ztcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ztcm"))
        .args(args)
        .env_remove("ZTCM_OUTPUT_DIR")
        .output()
        .expect("spawn ztcm")
}

fn run_golden(out: &Path) -> Output {
    let config = fixtures().join("golden/config.toml");
    ztcm(&["run", "--config", config.to_str().unwrap(), "--output-dir", out.to_str().unwrap()])
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn golden_run_matches_committed_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_golden(dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let expected = fixtures().join("golden/expected");
    let bless = std::env::var_os("ZTCM_BLESS").is_some();
    for name in GOLDEN_FILES {
        let got = fs::read(dir.path().join(name)).unwrap_or_else(|_| panic!("missing output {name}"));
        let want_path = expected.join(name);
        if bless {
            fs::create_dir_all(want_path.parent().unwrap()).unwrap();
            fs::write(&want_path, &got).unwrap();
            continue;
        }
        let want = fs::read(&want_path).unwrap_or_else(|_| panic!("missing expected file {name}; rerun with ZTCM_BLESS=1"));
        assert!(got == want, "{name} differs from the committed expectation");
    }
}

#[test]
fn golden_manifest_lists_inputs_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_golden(dir.path()).status.code(), Some(0));
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["tool"], "ztcm");
    assert_eq!(m["command"], "run");
    assert!(m["generated_at"].as_str().unwrap().ends_with('Z'));
    assert_eq!(m["config"]["exchange_rate"], 78.0);
    let inputs = m["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 4);
    for i in inputs {
        assert_eq!(i["sha256"].as_str().unwrap().len(), 64);
    }
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o["path"].as_str().unwrap()).collect();
    for name in GOLDEN_FILES {
        assert!(outputs.contains(&name), "manifest is missing {name}");
    }
}

#[test]
fn golden_summary_counts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_golden(dir.path()).status.code(), Some(0));
    let s = read_json(&dir.path().join("summary.json"));
    assert_eq!(s["respondents"]["rejected"], 2);
    assert_eq!(s["respondents"]["excluded_by_purpose"], 3);
    assert_eq!(s["respondents"]["local"], 369);
    assert_eq!(s["respondents"]["foreign"], 52);
    assert_eq!(s["zones"], 7);
    assert_eq!(s["observations"], 17);
    assert!(s["tcost_coefficient"].as_f64().unwrap() < 0.0);

    let rejects = fs::read_to_string(dir.path().join("rejects.csv")).unwrap();
    assert_eq!(rejects.lines().count(), 3);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_golden(dir.path()).status.code(), Some(0));
    let first: Vec<Vec<u8>> = GOLDEN_FILES.iter().map(|n| fs::read(dir.path().join(n)).unwrap()).collect();
    let mut m1 = read_json(&dir.path().join("manifest.json"));
    assert_eq!(run_golden(dir.path()).status.code(), Some(0));
    for (name, bytes) in GOLDEN_FILES.iter().zip(&first) {
        assert_eq!(&fs::read(dir.path().join(name)).unwrap(), bytes, "{name} changed between runs");
    }
    let mut m2 = read_json(&dir.path().join("manifest.json"));
    m1.as_object_mut().unwrap().remove("generated_at");
    m2.as_object_mut().unwrap().remove("generated_at");
    assert_eq!(m1, m2);
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixtures().join("golden/config.toml");
    let o = Command::new(env!("CARGO_BIN_EXE_ztcm"))
        .args(["run", "--config", config.to_str().unwrap()])
        .env("ZTCM_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn missing_zones_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no_such_zones.csv");
    let config = fixtures().join("golden/config.toml");
    let out = dir.path().join("out");
    let o = ztcm(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--zones",
        missing.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no_such_zones.csv"), "{}", stderr(&o));
    let e = read_json(&out.join("error.json"));
    assert_eq!(e["exit_code"], 1);
    assert!(e["message"].as_str().unwrap().contains("no_such_zones.csv"));
}

#[test]
fn rank_deficient_design_names_the_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixtures().join("rank_deficient/config.toml");
    let o = ztcm(&["run", "--config", config.to_str().unwrap(), "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("Package"));
    let e = read_json(&dir.path().join("error.json"));
    assert_eq!(e["exit_code"], 3);
    assert_eq!(e["column"], "Package");
}

#[test]
fn malformed_survey_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let survey = dir.path().join("survey.csv");
    fs::write(&survey, "respondent_id,visitor_type\nR1,local\n").unwrap();
    let config = fixtures().join("golden/config.toml");
    let out = dir.path().join("out");
    let o = ztcm(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--survey",
        survey.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert_eq!(read_json(&out.join("error.json"))["exit_code"], 2);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(ztcm(&["bogus"]).status.code(), Some(1));
    assert_eq!(ztcm(&["run"]).status.code(), Some(1));
    assert_eq!(ztcm(&["--help"]).status.code(), Some(0));
}

#[test]
fn spots_subcommand_reproduces_coverage_total() {
    let dir = tempfile::tempdir().unwrap();
    let spots = fixtures().join("table1_spots.csv");
    let o = ztcm(&["spots", spots.to_str().unwrap(), "--total-usd", "53.1e6", "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("spots.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let ha = headers.iter().position(|h| h == "area_ha").unwrap();
    let total: f64 = rdr.records().map(|r| r.unwrap()[ha].parse::<f64>().unwrap()).sum();
    assert!((total - 50_618.9).abs() < 2.0, "total {total}");
    assert!(dir.path().join("spots.txt").exists());
}

#[test]
fn value_only_reproduces_choke_prices() {
    let dir = tempfile::tempdir().unwrap();
    let table = fixtures().join("table4_demand.csv");
    let spots = fixtures().join("table1_spots.csv");
    let o = ztcm(&[
        "value-only",
        "--slope",
        "1.6e-4",
        "--table",
        table.to_str().unwrap(),
        "--spots",
        spots.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let expected = [
        ("Barisal", 133_787.4),
        ("Chittagong", 127_014.4),
        ("Dhaka", 232_247.8),
        ("Khulna", 648_468.8),
        ("Rajshahi", 176_831.7),
        ("Rangpur", 112_412.9),
        ("Sylhet", 194_581.6),
    ];
    let mut rdr = csv::Reader::from_path(dir.path().join("zones.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let zi = headers.iter().position(|h| h == "zone").unwrap();
    let ci = headers.iter().position(|h| h == "choke_price").unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), expected.len());
    for (zone, want) in expected {
        let r = rows.iter().find(|r| &r[zi] == zone).unwrap();
        let got: f64 = r[ci].parse().unwrap();
        assert!((got - want).abs() / want < 0.005, "{zone}: {got} vs {want}");
    }
    assert!(dir.path().join("demand_curves/Khulna.csv").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn value_only_rejects_a_nonpositive_slope() {
    let dir = tempfile::tempdir().unwrap();
    let table = fixtures().join("table4_demand.csv");
    let o = ztcm(&["value-only", "--slope", "0", "--table", table.to_str().unwrap(), "--output-dir", dir.path().to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn profile_subcommand_reports_tests() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixtures().join("table2_profile.csv");
    let o = ztcm(&["profile", input.to_str().unwrap(), "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let results = read_json(&dir.path().join("profile.json"));
    let stat = |name: &str| {
        results.as_array().unwrap().iter().find(|r| r["name"] == name).unwrap()["test"]["statistic"]
            .as_f64()
            .unwrap()
    };
    assert!((stat("sex") - 17.82).abs() <= 0.10);
    assert!((stat("repeat_visit") - 6.57).abs() <= 0.10);
    assert!((stat("age") - 16.26).abs() / 16.26 <= 0.05);
    assert!((stat("household_size") - 51.44).abs() / 51.44 <= 0.15);
}

#[test]
fn simulate_subcommand_writes_truth_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = fixtures().join("scenario.toml");
    let args = ["simulate", "--scenario", scenario.to_str().unwrap(), "--reps", "100", "--output-dir"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let mut first = args.to_vec();
    first.push(a.to_str().unwrap());
    let mut second = args.to_vec();
    second.push(b.to_str().unwrap());
    second.push("--serial");
    assert_eq!(ztcm(&first).status.code(), Some(0));
    assert_eq!(ztcm(&second).status.code(), Some(0));
    for name in ["synthetic_survey.csv", "observations.csv", "truth.json", "monte_carlo.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let mc = read_json(&a.join("monte_carlo.json"));
    assert_eq!(mc["reps"], 100);
    assert_eq!(mc["rng"], "ChaCha8Rng");
    let obs = fs::read_to_string(a.join("observations.csv")).unwrap();
    assert_eq!(obs.lines().count(), 41);
}

#[test]
fn simulate_rejects_too_few_reps() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = fixtures().join("scenario.toml");
    let o = ztcm(&["simulate", "--scenario", scenario.to_str().unwrap(), "--reps", "10", "--output-dir", dir.path().to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}
