//! Experiment configuration (flat JSON).

use std::fs;
use std::path::{Path, PathBuf};

use fastmix_core::coopucb2::{AlgoParams, SubLogFn};
use fastmix_core::weights::WeightMethod;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

/// Monte-Carlo experiment configuration.
///
/// `network` is a built-in name or an edge-list file path; `methods` lists
/// weight constructions by tag. Defaults mirror the reference experiment:
/// 100 arms, unit reward noise, horizon 1000, 10,000 runs (override `runs`
/// for desk-scale work).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: String,
    pub methods: Vec<String>,
    #[serde(default = "defaults::n_arms")]
    pub n_arms: usize,
    #[serde(default = "defaults::sigma")]
    pub sigma: f64,
    #[serde(default = "defaults::horizon")]
    pub horizon: usize,
    #[serde(default = "defaults::runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::kappa")]
    pub kappa: f64,
    #[serde(default = "defaults::sigma_g")]
    pub sigma_g: f64,
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
    #[serde(default = "defaults::eta")]
    pub eta: f64,
    #[serde(default = "defaults::f")]
    pub f: String,
    #[serde(default = "defaults::out_dir")]
    pub out_dir: PathBuf,
}

mod defaults {
    use std::path::PathBuf;

    pub fn n_arms() -> usize {
        100
    }
    pub fn sigma() -> f64 {
        1.0
    }
    pub fn horizon() -> usize {
        1000
    }
    pub fn runs() -> usize {
        10_000
    }
    pub fn kappa() -> f64 {
        0.02
    }
    pub fn sigma_g() -> f64 {
        1.0
    }
    pub fn gamma() -> f64 {
        1.1
    }
    pub fn eta() -> f64 {
        2.0
    }
    pub fn f() -> String {
        "sqrt_ln".to_string()
    }
    pub fn out_dir() -> PathBuf {
        PathBuf::from("out")
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(CliError::Validation("`methods` must not be empty".into()));
        }
        self.method_list()?;
        if self.runs < 1 {
            return Err(CliError::Validation("`runs` must be at least 1".into()));
        }
        if self.horizon <= self.n_arms {
            return Err(CliError::Validation(format!(
                "`horizon` ({}) must exceed `n_arms` ({}): seeding pulls every arm once",
                self.horizon, self.n_arms
            )));
        }
        if self.n_arms < 2 {
            return Err(CliError::Validation("`n_arms` must be at least 2".into()));
        }
        if !(self.sigma >= 0.0) {
            return Err(CliError::Validation(format!(
                "`sigma` must be nonnegative, got {}",
                self.sigma
            )));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(CliError::Validation(format!(
                "`kappa` must be in (0, 1], got {}",
                self.kappa
            )));
        }
        self.algo_params()?;
        Ok(())
    }

    pub fn algo_params(&self) -> Result<AlgoParams> {
        let f = SubLogFn::from_tag(&self.f).ok_or_else(|| {
            CliError::Validation(format!("unknown `f` schedule `{}`, expected `sqrt_ln`", self.f))
        })?;
        AlgoParams::new(self.sigma_g, self.gamma, self.eta, f).map_err(Into::into)
    }

    pub fn method_list(&self) -> Result<Vec<WeightMethod>> {
        let mut out = Vec::with_capacity(self.methods.len());
        for name in &self.methods {
            let method = parse_method(name)?;
            if out.contains(&method) {
                return Err(CliError::Validation(format!("duplicate method `{name}`")));
            }
            out.push(method);
        }
        Ok(out)
    }
}

/// Parses a method tag; common short forms are accepted.
pub fn parse_method(name: &str) -> Result<WeightMethod> {
    let canonical = match name {
        "const" | "constant" | "constant_edge" => "best_constant",
        "maxdeg" => "max_degree",
        "localdeg" => "local_degree",
        other => other,
    };
    WeightMethod::from_tag(canonical).ok_or_else(|| {
        CliError::Validation(format!(
            "unknown method `{name}`; expected one of kappa, best_constant, max_degree, \
             local_degree, fmmc, fdla"
        ))
    })
}

/// Loads and validates a JSON config; unknown keys are rejected with the
/// list of accepted ones.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}
