//! Pipeline configuration: one JSON document, command-line flags override it.

use std::path::{Path, PathBuf};

use dynardl_core::ardl::{Criterion, EcmCase};
use dynardl_core::dataset::LogPolicy;
use dynardl_core::dynsim::{Disturbance, ShockKind, ShockSpec};
use dynardl_core::unitroot::Deterministic;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::fetch::FetchRequest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataConfig,
    /// Series to log-transform; each produces `log<NAME>`.
    #[serde(default)]
    pub log: Vec<String>,
    #[serde(default)]
    pub log_policy: LogPolicy,
    pub variables: Variables,
    #[serde(default)]
    pub unitroot: UnitRootConfig,
    #[serde(default)]
    pub ardl: ArdlConfig,
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub krls: KrlsConfig,
    /// Required whenever a stochastic step runs.
    pub seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Stamp SVG files with the wall-clock time of the run.
    #[serde(default)]
    pub svg_timestamp: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("report")
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub fetch: Vec<FetchRequest>,
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variables {
    pub dependent: String,
    pub regressors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitRootConfig {
    #[serde(default)]
    pub case: Deterministic,
    pub bandwidth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArdlConfig {
    pub pmax: usize,
    pub qmax: usize,
    pub criterion: Criterion,
    pub case: EcmCase,
}

impl Default for ArdlConfig {
    fn default() -> Self {
        Self {
            pmax: 4,
            qmax: 4,
            criterion: Criterion::Bic,
            case: EcmCase::Constant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub target: String,
    pub magnitude: f64,
    #[serde(default = "d_shock_time")]
    pub shock_time: usize,
    #[serde(default = "d_horizon")]
    pub horizon: usize,
    #[serde(default = "d_sims")]
    pub n_sims: usize,
    #[serde(default = "d_burn_in")]
    pub burn_in: usize,
    #[serde(default)]
    pub kind: ShockKind,
    #[serde(default)]
    pub disturbance: Disturbance,
}

fn d_shock_time() -> usize {
    5
}
fn d_horizon() -> usize {
    20
}
fn d_sims() -> usize {
    5000
}
fn d_burn_in() -> usize {
    20
}

impl SimulateConfig {
    pub fn shock(&self) -> ShockSpec {
        ShockSpec {
            target: self.target.clone(),
            magnitude: self.magnitude,
            shock_time: self.shock_time,
            horizon: self.horizon,
            n_sims: self.n_sims,
            burn_in: self.burn_in,
            kind: self.kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub bg_lags: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self { bg_lags: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrlsConfig {
    /// Features; defaults to the ARDL regressors.
    pub regressors: Option<Vec<String>>,
    pub lambda: Option<f64>,
    pub sigma2: Option<f64>,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(vec![e.to_string()]))
    }

    /// Reads a config file. Relative data paths resolve against the file's
    /// directory; `output_dir` stays relative to the working directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(csv) = cfg.data.csv.as_mut() {
            rebase(csv);
        }
        if let Some(dir) = cfg.data.cache_dir.as_mut() {
            rebase(dir);
        }
        Ok(cfg)
    }

    pub fn krls_regressors(&self) -> Vec<String> {
        self.krls
            .regressors
            .clone()
            .unwrap_or_else(|| self.variables.regressors.clone())
    }

    /// Checks the document, and variable names against `available` when
    /// given. Every problem is reported at once.
    pub fn validate(&self, available: Option<&[String]>) -> CliResult<()> {
        let mut problems = Vec::new();
        match (&self.data.csv, self.data.fetch.is_empty()) {
            (None, true) => problems.push("data: set `csv` or a `fetch` list".to_string()),
            (Some(_), false) => {
                problems.push("data: `csv` and `fetch` are mutually exclusive".to_string())
            }
            _ => {}
        }
        if self.seed.is_none() {
            problems.push("seed: missing; a seed is required for the simulation step".to_string());
        }
        if self.variables.dependent.is_empty() {
            problems.push("variables.dependent: empty".to_string());
        }
        if self.variables.regressors.is_empty() {
            problems.push("variables.regressors: at least one regressor is required".to_string());
        }
        let mut all = self.variables.regressors.clone();
        all.push(self.variables.dependent.clone());
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            problems.push("variables: dependent and regressors must be distinct".to_string());
        }
        if self.ardl.pmax == 0 {
            problems.push("ardl.pmax: must be at least 1".to_string());
        }
        if self.diagnostics.bg_lags == 0 {
            problems.push("diagnostics.bg_lags: must be at least 1".to_string());
        }
        if !self.variables.regressors.contains(&self.simulate.target) {
            problems.push(format!(
                "simulate.target: `{}` is not one of the regressors ({})",
                self.simulate.target,
                self.variables.regressors.join(", ")
            ));
        }
        if let Err(e) = self.simulate.shock().validate() {
            problems.push(format!("simulate: {e}"));
        }
        for (field, v) in [
            ("krls.lambda", self.krls.lambda),
            ("krls.sigma2", self.krls.sigma2),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    problems.push(format!("{field}: must be positive, got {v}"));
                }
            }
        }
        if let Some(names) = available {
            let derived: Vec<String> = self.log.iter().map(|n| format!("log{n}")).collect();
            for n in &self.log {
                if !names.contains(n) {
                    problems.push(format!(
                        "log: unknown series `{n}` (available: {})",
                        names.join(", ")
                    ));
                }
            }
            let known = |n: &String| names.contains(n) || derived.contains(n);
            let listing = || {
                names
                    .iter()
                    .chain(&derived)
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            let mut referenced = vec![("variables.dependent", &self.variables.dependent)];
            referenced.extend(
                self.variables
                    .regressors
                    .iter()
                    .map(|r| ("variables.regressors", r)),
            );
            let krls = self.krls.regressors.clone().unwrap_or_default();
            referenced.extend(krls.iter().map(|r| ("krls.regressors", r)));
            for (field, n) in referenced {
                if !known(n) {
                    problems.push(format!(
                        "{field}: unknown variable `{n}` (available: {})",
                        listing()
                    ));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "data": {"csv": "data.csv"},
        "log": ["CE", "NE"],
        "variables": {"dependent": "logCE", "regressors": ["logNE"]},
        "simulate": {"target": "logNE", "magnitude": -0.21},
        "seed": 42
    }"#;

    fn names() -> Vec<String> {
        vec!["CE".into(), "NE".into()]
    }

    #[test]
    fn defaults_fill_in() {
        let c = PipelineConfig::from_json(BASE).unwrap();
        assert_eq!(c.ardl, ArdlConfig::default());
        assert_eq!(c.diagnostics.bg_lags, 4);
        assert_eq!(c.simulate.n_sims, 5000);
        assert_eq!(c.simulate.horizon, 20);
        assert!(!c.svg_timestamp);
        c.validate(Some(&names())).unwrap();
    }

    #[test]
    fn missing_seed_is_named() {
        let c = PipelineConfig::from_json(
            &BASE
                .replace(r#","seed": 42"#, "")
                .replace("\"seed\": 42", "\"output_dir\": \"x\""),
        )
        .unwrap();
        let e = c.validate(None).unwrap_err();
        assert!(e.to_string().contains("seed"), "{e}");
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn unknown_regressor_lists_available_names() {
        let c = PipelineConfig::from_json(&BASE.replace(r#"["logNE"]"#, r#"["logNE", "logXX"]"#))
            .unwrap();
        let e = c.validate(Some(&names())).unwrap_err().to_string();
        assert!(
            e.contains("logXX") && e.contains("available: CE, NE, logCE, logNE"),
            "{e}"
        );
    }

    #[test]
    fn all_problems_reported_together() {
        let text = BASE
            .replace("\"seed\": 42", "\"output_dir\": \"x\"")
            .replace("-0.21", "-1.5")
            .replace(r#""target": "logNE""#, r#""target": "logZZ""#);
        let e = PipelineConfig::from_json(&text)
            .unwrap()
            .validate(None)
            .unwrap_err();
        let CliError::Config(problems) = e else {
            panic!()
        };
        assert_eq!(problems.len(), 3, "{problems:?}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = BASE.replace("\"seed\": 42", "\"seed\": 42, \"sed\": 1");
        assert!(matches!(
            PipelineConfig::from_json(&text),
            Err(CliError::Config(_))
        ));
    }
}
