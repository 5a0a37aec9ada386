use std::fs;
use std::path::Path;
use std::process::Command;

use illpose::harness::config::{parse_cli_overrides, parse_config_text, Experiment, ExperimentConfig, Source};
use illpose::harness::{run, run_experiment, HarnessError};

fn args(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_illpose"))
}

/// Every output file except the timing record, by name.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timing.txt")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn config_sections_and_comments() {
    let text = "out = here\n# comment\n[uc-szego]\ns = 0.3\n; other\neps = 0.1, 0.01\n[c3]\nT = 2\n";
    let sec = parse_config_text(text).unwrap();
    assert_eq!(sec["general"]["out"], "here");
    assert_eq!(sec["uc-szego"]["s"], "0.3");
    assert_eq!(sec["c3"]["t"], "2");
    assert!(parse_config_text("[broken\n").is_err());
    assert!(parse_config_text("no equals sign\n").is_err());
}

#[test]
fn cli_override_forms() {
    let m = parse_cli_overrides(&args(&["--sweep-N", "8", "--s=-0.5", "--svg", "--beta", "-1"])).unwrap();
    assert_eq!(m["sweep_n"], "8");
    assert_eq!(m["s"], "-0.5");
    assert_eq!(m["svg"], "true");
    // a negative value after a key is a value, not a flag
    assert_eq!(m["beta"], "-1");
    assert!(parse_cli_overrides(&args(&["positional"])).is_err());
}

#[test]
fn precedence_and_echo() {
    let sec = parse_config_text("[general]\nseed = 1\n[uc-szego]\ns = 0.3\neps = 0.1\n").unwrap();
    let cli = parse_cli_overrides(&args(&["--s", "0.2"])).unwrap();
    let cfg = ExperimentConfig::new(Experiment::UcSzego, Some(&sec), &cli);
    assert_eq!(cfg.f64("s", 0.25).unwrap(), 0.2);
    assert_eq!(cfg.f64_list("eps", &[1.0]).unwrap(), vec![0.1]);
    assert_eq!(cfg.usize("unused_default", 3).unwrap(), 3);
    cfg.finish().unwrap();
    let echo = cfg.echo();
    let src = |k: &str| echo.iter().find(|e| e.key == k).unwrap().source;
    assert_eq!(src("s"), Source::Cli);
    assert_eq!(src("eps"), Source::File);
    assert_eq!(src("unused_default"), Source::Default);
}

#[test]
fn unknown_and_malformed_parameters() {
    let cfg = ExperimentConfig::from_args(Experiment::UcSzego, &args(&["--bogus", "1"])).unwrap();
    let err = run(&cfg).unwrap_err();
    assert!(matches!(err, HarnessError::Config(_)));
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("bogus"));

    let cfg = ExperimentConfig::from_args(Experiment::UcSzego, &args(&["--s", "abc"])).unwrap();
    assert!(matches!(run(&cfg), Err(HarnessError::Config(_))));
    let cfg = ExperimentConfig::from_args(Experiment::RegionMap, &args(&["--beta-range", "1:0:0.1"])).unwrap();
    assert!(matches!(run(&cfg), Err(HarnessError::Config(_))));
    assert!("no-such".parse::<Experiment>().is_err());
    assert_eq!("uc-l2-focusing".parse::<Experiment>().unwrap(), Experiment::UcL2);
}

#[test]
fn range_keeps_grid_points_exact() {
    let cfg = ExperimentConfig::new(Experiment::RegionMap, None, &Default::default());
    let betas = cfg.range("beta_range", (0.2, 4.0, 0.05)).unwrap();
    assert_eq!(betas.len(), 77);
    assert!(betas.contains(&2.0));
    assert_eq!(*betas.last().unwrap(), 4.0);
}

#[test]
fn reruns_are_byte_identical() {
    for exp in [Experiment::UcSzego, Experiment::C3] {
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for d in [&d1, &d2] {
            let a = args(&["--out", d.path().to_str().unwrap()]);
            let o = run_experiment(exp, &a).unwrap();
            assert!(o.report.passed(), "{}", o.report.summary());
        }
        let (s1, s2) = (snapshot(&d1.path().join(exp.name())), snapshot(&d2.path().join(exp.name())));
        assert!(s1.iter().any(|(n, _)| n == "verdicts.csv"));
        assert_eq!(s1, s2, "{exp}");
    }
}

#[test]
fn csv_header_echoes_defaults() {
    let d = tempfile::tempdir().unwrap();
    run_experiment(Experiment::C3, &args(&["--out", d.path().to_str().unwrap(), "--svg", "false"])).unwrap();
    let text = fs::read_to_string(d.path().join("c3/trilinear.csv")).unwrap();
    assert!(text.starts_with("# experiment = c3\n"));
    assert!(text.contains("# points = 65536 (default)"));
    assert!(text.contains("# svg = false (cli)"));
    assert!(text.contains("# grid_dx = "));
    assert!(!d.path().join("c3/trilinear.svg").exists());
    let verdicts = fs::read_to_string(d.path().join("c3/verdicts.csv")).unwrap();
    assert!(verdicts.lines().any(|l| l.starts_with("slope,pass,")));
}

#[test]
fn binary_exit_codes() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let d = tempfile::tempdir().unwrap();
    let o = d.path().to_str().unwrap();
    assert_eq!(bin().args(["uc-szego", "--out", o]).status().unwrap().code(), Some(0));
    assert_eq!(bin().args(["uc-szego", "--out", o, "--nope", "1"]).status().unwrap().code(), Some(2));
    assert_eq!(bin().args(["uc-szego", "--out", o, "--config", "/nonexistent.cfg"]).status().unwrap().code(), Some(2));
    // an infeasible exponent budget is a run-time failure
    assert_eq!(bin().args(["inflate", "--out", o, "--a", "0.2"]).status().unwrap().code(), Some(1));
    // the linearity check only holds for small t, so this run reports a failing verdict
    let out = bin().args(["c3", "--out", o, "--t-small", "0.5"]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] c3 linear-in-time"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn env_out_dir_and_flag_precedence() {
    let (env_dir, flag_dir) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let st = bin().arg("uc-szego").env("ILLPOSE_OUT", env_dir.path()).status().unwrap();
    assert!(st.success());
    assert!(env_dir.path().join("uc-szego/verdicts.csv").exists());
    let st = bin()
        .args(["uc-szego", "--out", flag_dir.path().to_str().unwrap()])
        .env("ILLPOSE_OUT", env_dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    assert!(flag_dir.path().join("uc-szego/verdicts.csv").exists());
}

#[test]
fn config_file_drives_a_run() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    fs::write(&cfg, format!("out = {}\n[uc-szego]\neps = 0.01, 0.001\ns = 0\n", d.path().display())).unwrap();
    let o = run_experiment(Experiment::UcSzego, &args(&["--config", cfg.to_str().unwrap()])).unwrap();
    assert!(o.report.passed(), "{}", o.report.summary());
    // the L² branch adds the exact-norm check
    assert!(o.report.verdicts.iter().any(|v| v.name == "l2-norms"));
    let rows = &o.report.table("distances").unwrap().rows;
    assert_eq!(rows.len(), 2);
}

#[test]
fn inflate_sweep_ratio_is_monotone() {
    let d = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["inflate", "--beta", "1", "--s", "-0.5", "--sweep-N", "8", "--mode", "series", "--out"])
        .arg(d.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = fs::read_to_string(d.path().join("inflate/sweep.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let col = rdr.headers().unwrap().iter().position(|h| h == "ratio").unwrap();
    let ratios: Vec<f64> = rdr.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    assert_eq!(ratios.len(), 8);
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
}

#[test]
fn critical_case_table() {
    let d = tempfile::tempdir().unwrap();
    let o = run_experiment(
        Experiment::Inflate,
        &args(&["--beta", "2", "--s", "-0.5", "--out", d.path().to_str().unwrap()]),
    )
    .unwrap();
    assert!(o.report.passed());
    assert_eq!(o.report.table("case_two").unwrap().rows.len(), 4);
}

#[test]
fn quick_suite_through_run_alias() {
    let d = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--suite", "quick", "--threads", "2", "--svg", "false", "--out"])
        .arg(d.path())
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(d.path().join("suite.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + Experiment::ALL.len());
    assert!(summary.lines().skip(1).all(|l| l.contains(",true,")), "{summary}");
    for exp in Experiment::ALL {
        assert!(d.path().join(exp.name()).join("verdicts.csv").exists(), "{exp}");
    }
    // experiment parameters are not accepted on the suite command line
    let st = bin().args(["suite", "--eps", "0.1", "--out"]).arg(d.path()).status().unwrap();
    assert_eq!(st.code(), Some(2));
}
