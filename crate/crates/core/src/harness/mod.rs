//! Reproducible experiment runner behind the `illpose` binary.
//!
//! Each experiment reads its parameters through [`config::ExperimentConfig`],
//! produces an [`report::ExperimentReport`] and writes CSV tables, a verdict
//! file and optional SVG figures under `<out>/<experiment>/`.

pub mod config;
pub mod experiments;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use config::{load_config_file, parse_cli_overrides, Experiment, ExperimentConfig, Sections};
use report::ExperimentReport;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("experiment failed: {0}")]
    Experiment(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    /// 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Runs one experiment without writing anything.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let start = Instant::now();
    let mut rep = match cfg.experiment {
        Experiment::UcSzego => experiments::uc_szego(cfg),
        Experiment::UcNhw => experiments::uc_nhw(cfg),
        Experiment::UcL2 => experiments::uc_l2(cfg),
        Experiment::C3 => experiments::c3(cfg),
        Experiment::Approx => experiments::approx(cfg),
        Experiment::Inflate => experiments::inflate(cfg),
        Experiment::PicardAudit => experiments::picard_audit(cfg),
        Experiment::RegionMap => experiments::region_map(cfg),
    }?;
    // the output location is not a parameter of the computation
    rep.config = cfg.echo().into_iter().filter(|e| e.key != "out").collect();
    rep.wall_clock = start.elapsed();
    Ok(rep)
}

/// Outcome of a run that wrote its files.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: ExperimentReport,
    pub files: Vec<PathBuf>,
}

fn run_and_write(cfg: &ExperimentConfig) -> Result<RunOutcome, HarnessError> {
    let out = cfg.out_dir()?;
    let svg = cfg.bool("svg", true)?;
    let report = run(cfg)?;
    let files = report.write(&out, svg)?;
    Ok(RunOutcome { report, files })
}

/// Parses `args` (`--key value` pairs, optionally `--config <file>`) and runs `exp`.
pub fn run_experiment(exp: Experiment, args: &[String]) -> Result<RunOutcome, HarnessError> {
    let cfg = ExperimentConfig::from_args(exp, args)?;
    run_and_write(&cfg)
}

/// One experiment's outcome within a suite.
pub type SuiteEntry = (Experiment, Result<RunOutcome, HarnessError>);

/// Overrides that shrink each experiment to a few seconds.
fn quick_overrides(exp: Experiment) -> &'static [(&'static str, &'static str)] {
    match exp {
        Experiment::UcSzego => &[],
        Experiment::UcNhw => &[("eps", "0.3,0.2"), ("points", "2048"), ("length", "128")],
        Experiment::UcL2 => &[("eps", "0.1,0.05"), ("points", "8192")],
        Experiment::C3 => &[("eps", "0.2,0.1"), ("points", "16384")],
        Experiment::Approx => &[("eps", "0.3,0.25"), ("points", "2048"), ("length", "128")],
        Experiment::Inflate => &[("sweep_n", "2"), ("n_start_log2", "36")],
        Experiment::PicardAudit => &[("support_n", "64,128")],
        Experiment::RegionMap => &[("beta_range", "0.2:4:0.2"), ("s_range", "-2:0.2:0.1"), ("mc_samples", "10000")],
    }
}

/// Runs every experiment on a pool of `threads` workers. `suite` is
/// `default` or `quick`; per-experiment parameters come from the config file.
pub fn run_suite(args: &[String]) -> Result<Vec<SuiteEntry>, HarnessError> {
    let mut cli = parse_cli_overrides(args)?;
    let file: Option<Sections> = match cli.remove("config") {
        Some(path) => Some(load_config_file(std::path::Path::new(&path))?),
        None => None,
    };
    let general = ["out", "seed", "svg", "threads", "suite"];
    if let Some(bad) = cli.keys().find(|k| !general.contains(&k.as_str())) {
        return Err(HarnessError::Config(format!(
            "suite: '{bad}' is not a general option; put experiment parameters in a config file"
        )));
    }
    let suite = cli.get("suite").map(String::as_str).unwrap_or("default").to_string();
    let quick = match suite.as_str() {
        "default" => false,
        "quick" => true,
        other => return Err(HarnessError::Config(format!("unknown suite '{other}'"))),
    };
    let threads: usize = match cli.get("threads") {
        Some(v) => v.parse().ok().filter(|n| *n > 0).ok_or_else(|| HarnessError::Config(format!("bad thread count '{v}'")))?,
        None => 8,
    };
    let config_for = |exp: Experiment| {
        let mut over = cli.clone();
        if quick {
            for (k, v) in quick_overrides(exp) {
                over.entry(k.to_string()).or_insert_with(|| v.to_string());
            }
        }
        ExperimentConfig::new(exp, file.as_ref(), &over)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Experiment(e.to_string()))?;
    let results: Vec<_> = pool.install(|| {
        Experiment::ALL
            .par_iter()
            .map(|&exp| run_and_write(&config_for(exp)))
            .collect()
    });
    let out = config_for(Experiment::UcSzego).out_dir()?;
    let mut summary = String::from("experiment,passed,error\n");
    for (exp, r) in Experiment::ALL.iter().zip(&results) {
        match r {
            Ok(o) => summary.push_str(&format!("{},{},\n", exp, o.report.passed())),
            Err(e) => summary.push_str(&format!("{},false,\"{}\"\n", exp, e.to_string().replace('"', "'"))),
        }
    }
    std::fs::create_dir_all(&out).map_err(|e| HarnessError::Io(e.to_string()))?;
    std::fs::write(out.join("suite.csv"), summary).map_err(|e| HarnessError::Io(e.to_string()))?;
    Ok(Experiment::ALL.into_iter().zip(results).collect())
}
