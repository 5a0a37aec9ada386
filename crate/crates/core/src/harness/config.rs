//! Flat `key = value` configuration with `[sections]`, overridden by CLI flags.
//! Every value an experiment reads is recorded with its source so the report
//! header can echo the full parameter set, defaults included.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    UcSzego,
    UcNhw,
    UcL2,
    C3,
    Approx,
    Inflate,
    PicardAudit,
    RegionMap,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::UcSzego,
        Experiment::UcNhw,
        Experiment::UcL2,
        Experiment::C3,
        Experiment::Approx,
        Experiment::Inflate,
        Experiment::PicardAudit,
        Experiment::RegionMap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::UcSzego => "uc-szego",
            Experiment::UcNhw => "uc-nhw",
            Experiment::UcL2 => "uc-l2",
            Experiment::C3 => "c3",
            Experiment::Approx => "approx",
            Experiment::Inflate => "inflate",
            Experiment::PicardAudit => "picard-audit",
            Experiment::RegionMap => "region-map",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        // the focusing L² experiment also answers to its long name
        if s == "uc-l2-focusing" {
            return Ok(Experiment::UcL2);
        }
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Cli,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::Default => "default",
            Source::File => "config",
            Source::Cli => "cli",
        }
    }
}

/// Key/value pairs by section, as read from a config file.
pub type Sections = BTreeMap<String, BTreeMap<String, String>>;

/// Keys are compared after lowercasing and mapping `-` to `_`.
pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

/// Parses the config text. Keys before the first section go to `general`.
pub fn parse_config_text(text: &str) -> Result<Sections, HarnessError> {
    let mut out: Sections = BTreeMap::new();
    let mut section = "general".to_string();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| HarnessError::Config(format!("line {}: unterminated section header", n + 1)))?;
            section = name.trim().to_ascii_lowercase();
            if section.is_empty() {
                return Err(HarnessError::Config(format!("line {}: empty section name", n + 1)));
            }
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", n + 1)))?;
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(HarnessError::Config(format!("line {}: empty key", n + 1)));
        }
        out.entry(section.clone()).or_default().insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Parses `--key value`, `--key=value` and bare `--flag` (read as `true`).
pub fn parse_cli_overrides(args: &[String]) -> Result<BTreeMap<String, String>, HarnessError> {
    let mut out = BTreeMap::new();
    let mut i = 0;
    while i < args.len() {
        let tok = &args[i];
        let body = tok
            .strip_prefix("--")
            .ok_or_else(|| HarnessError::Config(format!("expected --key, got '{tok}'")))?;
        if body.is_empty() {
            return Err(HarnessError::Config("empty flag '--'".into()));
        }
        if let Some((k, v)) = body.split_once('=') {
            out.insert(normalize_key(k), v.to_string());
            i += 1;
            continue;
        }
        match args.get(i + 1) {
            Some(next) if !next.starts_with("--") => {
                out.insert(normalize_key(body), next.clone());
                i += 2;
            }
            _ => {
                out.insert(normalize_key(body), "true".to_string());
                i += 1;
            }
        }
    }
    Ok(out)
}

/// Keys every experiment accepts.
const GENERAL_KEYS: [&str; 5] = ["out", "seed", "svg", "threads", "suite"];

#[derive(Debug, Clone)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
    pub source: Source,
}

/// Parameters for one experiment run.
#[derive(Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    provided: BTreeMap<String, (String, Source)>,
    used: RefCell<BTreeMap<String, ConfigEntry>>,
}

impl ExperimentConfig {
    /// Merges `[general]` and `[<experiment>]` from the file (the latter wins),
    /// then the CLI overrides.
    pub fn new(experiment: Experiment, file: Option<&Sections>, cli: &BTreeMap<String, String>) -> Self {
        let mut provided = BTreeMap::new();
        if let Some(sections) = file {
            for name in ["general", experiment.name()] {
                if let Some(kv) = sections.get(name) {
                    for (k, v) in kv {
                        provided.insert(k.clone(), (v.clone(), Source::File));
                    }
                }
            }
        }
        for (k, v) in cli {
            provided.insert(k.clone(), (v.clone(), Source::Cli));
        }
        ExperimentConfig {
            experiment,
            provided,
            used: RefCell::new(BTreeMap::new()),
        }
    }

    /// Reads the config file named by `--config` (if any) and builds the run config.
    pub fn from_args(experiment: Experiment, args: &[String]) -> Result<Self, HarnessError> {
        let mut cli = parse_cli_overrides(args)?;
        let file = match cli.remove("config") {
            Some(path) => Some(load_config_file(Path::new(&path))?),
            None => None,
        };
        Ok(ExperimentConfig::new(experiment, file.as_ref(), &cli))
    }

    fn lookup(&self, key: &str) -> Option<(String, Source)> {
        self.provided.get(key).cloned()
    }

    fn record(&self, key: &str, value: String, source: Source) {
        self.used.borrow_mut().insert(
            key.to_string(),
            ConfigEntry {
                key: key.to_string(),
                value,
                source,
            },
        );
    }

    fn parse_with<T>(
        &self,
        key: &str,
        default: T,
        show: impl Fn(&T) -> String,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<T, HarnessError> {
        match self.lookup(key) {
            Some((raw, src)) => {
                let v = parse(raw.trim())
                    .ok_or_else(|| HarnessError::Config(format!("{}: cannot parse {key} = '{raw}'", self.experiment)))?;
                self.record(key, show(&v), src);
                Ok(v)
            }
            None => {
                self.record(key, show(&default), Source::Default);
                Ok(default)
            }
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64, HarnessError> {
        self.parse_with(key, default, |v| format!("{v}"), |s| s.parse().ok().filter(|v: &f64| v.is_finite()))
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize, HarnessError> {
        self.parse_with(key, default, |v| v.to_string(), |s| s.parse().ok())
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64, HarnessError> {
        self.parse_with(key, default, |v| v.to_string(), |s| s.parse().ok())
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool, HarnessError> {
        self.parse_with(key, default, |v| v.to_string(), |s| match s {
            "true" | "1" | "yes" | "on" => Some(true),
            "false" | "0" | "no" | "off" => Some(false),
            _ => None,
        })
    }

    pub fn string(&self, key: &str, default: &str) -> Result<String, HarnessError> {
        self.parse_with(key, default.to_string(), |v| v.clone(), |s| Some(s.to_string()))
    }

    /// Comma-separated list of reals.
    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, HarnessError> {
        self.parse_with(key, default.to_vec(), |v| join(v), |s| {
            let vals: Option<Vec<f64>> = s.split(',').map(|p| p.trim().parse().ok()).collect();
            vals.filter(|v| !v.is_empty() && v.iter().all(|x: &f64| x.is_finite()))
        })
    }

    /// `start:stop:step`, inclusive of `stop` up to rounding.
    pub fn range(&self, key: &str, default: (f64, f64, f64)) -> Result<Vec<f64>, HarnessError> {
        let (a, b, h) = self.parse_with(key, default, |(a, b, h)| format!("{a}:{b}:{h}"), |s| {
            let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse().ok()).collect::<Option<Vec<_>>>()?;
            match parts[..] {
                [a, b, h] if h > 0.0 && b >= a => Some((a, b, h)),
                _ => None,
            }
        })?;
        let n = ((b - a) / h + 1e-9).floor() as usize;
        // rounding keeps grid points such as β = 2 exact
        Ok((0..=n).map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12).collect())
    }

    pub fn out_dir(&self) -> Result<PathBuf, HarnessError> {
        // ILLPOSE_OUT replaces the default and the file value; an explicit flag still wins
        if let Some((v, Source::Cli)) = self.lookup("out") {
            self.record("out", v.clone(), Source::Cli);
            return Ok(PathBuf::from(v));
        }
        if let Ok(env) = std::env::var("ILLPOSE_OUT") {
            if !env.is_empty() {
                self.record("out", env.clone(), Source::Default);
                return Ok(PathBuf::from(env));
            }
        }
        Ok(PathBuf::from(self.string("out", "illpose-out")?))
    }

    /// Fails on provided keys that the experiment never read.
    pub fn finish(&self) -> Result<(), HarnessError> {
        let used = self.used.borrow();
        let unknown: Vec<&String> = self
            .provided
            .keys()
            .filter(|k| !used.contains_key(*k) && !GENERAL_KEYS.contains(&k.as_str()))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Config(format!(
                "{}: unknown parameter(s) {}",
                self.experiment,
                unknown.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")
            )))
        }
    }

    /// Every value read so far, sorted by key.
    pub fn echo(&self) -> Vec<ConfigEntry> {
        self.used.borrow().values().cloned().collect()
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

pub fn load_config_file(path: &Path) -> Result<Sections, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}
