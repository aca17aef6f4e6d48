use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nustab_cli::exit;
use nustab_cli::recipes::Recipe;
use nustab_cli::report::{ConditionsReport, DecayReport, DiophantineReport, ModesReport, ReproduceReport, ScanReport};
use serde::de::DeserializeOwned;
use tempfile::TempDir;

const WAVE_OMX: &str = r#"{"system": "wave1d", "damping": {"kind": "weak", "profile": "one_minus_xi"}, "truncation": 20}"#;

fn nustab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nustab")).args(args).output().expect("spawn nustab")
}

fn run_with(dir: &Path, task: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{task}-config.json"));
    fs::write(&cfg, config).unwrap();
    let mut args = vec![task, "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    nustab(&args)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read<T: DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn modes_table_for_three_modes() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"system": {"system": "wave1d", "damping": {"kind": "weak", "profile": "one_minus_xi"}, "truncation": 3}}"#;
    let o = run_with(dir.path(), "modes", cfg, &[]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("modes.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,lambda,coupling");
    assert_eq!(lines.len(), 4);
    for (k, line) in lines[1..].iter().enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], (k + 1).to_string());
        let lambda: f64 = f[1].parse().unwrap();
        assert!((lambda - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-12);
    }
    let report: ModesReport = read(&dir.path().join("modes.json"));
    assert_eq!(report.modal.modes.len(), 3);
    assert!(report.spectral_gap > 0.0);
}

#[test]
fn thread_count_does_not_change_output() {
    let cfg = format!(
        r#"{{"system": {WAVE_OMX}, "t_grid": {{"start": 1, "stop": 50, "points": 24, "spacing": "log"}}, "seed": 11}}"#
    );
    let mut tables = Vec::new();
    for threads in ["1", "4"] {
        let dir = TempDir::new().unwrap();
        let o = run_with(dir.path(), "decay-sim", &cfg, &["--threads", threads]);
        assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
        tables.push(fs::read(dir.path().join("decay-sim.csv")).unwrap());
        let _: DecayReport = read(&dir.path().join("decay-sim.json"));
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn seeded_conditions_are_reproducible() {
    let cfg = format!(r#"{{"system": {WAVE_OMX}, "conditions": {{"beta": 1.0, "tau": 1.0, "random_samples": 8}}}}"#);
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let dir = TempDir::new().unwrap();
        let o = run_with(dir.path(), "conditions", &cfg, &["--seed", "5", "--threads", threads]);
        assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
        let r: ConditionsReport = read(&dir.path().join("conditions.json"));
        assert_eq!(r.seed, 5);
        reports.push(r);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn scan_report_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{"system": {WAVE_OMX}, "s_grid": {{"mode": "frequencies", "refinements": 1}}}}"#);
    let o = run_with(dir.path(), "resolvent-scan", &cfg, &[]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let r: ScanReport = read(&dir.path().join("resolvent-scan.json"));
    let rows = fs::read_to_string(dir.path().join("resolvent-scan.csv")).unwrap().lines().count() - 1;
    assert_eq!(r.points, rows);
    assert!(r.max_norm.is_finite() && r.max_norm > 0.0);
}

#[test]
fn diophantine_report_fields() {
    let dir = TempDir::new().unwrap();
    let o = run_with(dir.path(), "diophantine", r#"{"diophantine": {"xi0": "(sqrt5-1)/2", "n_max": 2000}}"#, &[]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("xi0=(sqrt5-1)/2"));
    let r: DiophantineReport = read(&dir.path().join("diophantine.json"));
    assert!(r.continued_fraction.quotients.iter().skip(1).all(|&q| q == 1));
    assert!(r.stats.bounded_quotients);
    assert!(r.stats.c_est > 0.3 && r.stats.c_est < 0.5);
    assert!(r.sine_bound_at_n_max.unwrap() > 0.0);
}

#[test]
fn reproduce_recipe_passes() {
    let dir = TempDir::new().unwrap();
    let o = nustab(&["reproduce", "--recipe", "fractional-alpha-0.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let r: ReproduceReport = read(&dir.path().join("reproduce.json"));
    assert!(r.pass);
    assert_eq!(r.recipe, "fractional-alpha-0.5");
    assert!(r.checks.iter().all(|c| c.value >= c.lo && c.value <= c.hi));
}

#[test]
fn recipes_listing() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("recipes.json");
    let o = nustab(&["recipes", "--json", path.to_str().unwrap()]);
    assert_eq!(code(&o), exit::OK);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("pointwise-golden")));
    let all: Vec<Recipe> = read(&path);
    assert_eq!(all, nustab_cli::recipes::catalogue());
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();

    let o = run_with(d, "peaks", &format!(r#"{{"task": "modes", "system": {WAVE_OMX}}}"#), &[]);
    assert_eq!(code(&o), exit::VALIDATION);
    assert!(String::from_utf8_lossy(&o.stderr).contains("validation error"));

    let o = run_with(d, "modes", r#"{"system": {"system": "wave1d", "truncation": 3}, "extra": 1}"#, &[]);
    assert_eq!(code(&o), exit::VALIDATION);

    let o = nustab(&["reproduce", "--recipe", "no-such-recipe", "--out", d.to_str().unwrap()]);
    assert_eq!(code(&o), exit::VALIDATION);

    let missing = d.join("absent.json");
    let o = nustab(&["modes", "--config", missing.to_str().unwrap()]);
    assert_eq!(code(&o), exit::IO);

    let pole = r#"{
        "system": {"system": "wave1d", "damping": {"kind": "pointwise", "xi0": 0.5}, "truncation": 10},
        "s_grid": {"mode": "linear", "start": 0.0, "stop": 12.566370614359172, "points": 3}
    }"#;
    let o = run_with(d, "resolvent-scan", pole, &[]);
    assert_eq!(code(&o), exit::NUMERICAL, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("numerical failure"));
}
