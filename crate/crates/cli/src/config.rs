//! Experiment configuration files and parameter resolution.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    #[default]
    Ideal,
    Concrete,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// ```json
/// {"experiment": "gaussian-sum", "params": {"ell": 2}, "seed": 7, "trials": 10,
///  "mode": "ideal", "output": {"path": "out.csv", "format": "csv"}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    pub fn named(experiment: &str) -> Self {
        Self { experiment: experiment.into(), params: BTreeMap::new(), seed: None, trials: None, mode: None, output: None }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(CliError::from_json)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&crate::read_file(path)?)
    }
}

/// Parameters after defaults are filled in and unknown names rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<String, f64>,
}

impl Params {
    pub fn resolve(given: &BTreeMap<String, f64>, defaults: &[(&str, f64)], what: &str) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, f64> = defaults.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        for (k, &v) in given {
            if !values.contains_key(k) {
                let known: Vec<&str> = defaults.iter().map(|d| d.0).collect();
                return Err(CliError::Config(format!("unknown parameter '{k}' for {what}; expected one of {}", known.join(", "))));
            }
            if !v.is_finite() {
                return Err(CliError::Config(format!("parameter '{k}' must be finite")));
            }
            values.insert(k.clone(), v);
        }
        Ok(Self { values })
    }

    pub fn f(&self, key: &str) -> f64 {
        self.values[key]
    }

    /// A non-negative integer parameter.
    pub fn count(&self, key: &str) -> Result<usize, CliError> {
        let v = self.f(key);
        if v < 0.0 || v.fract() != 0.0 || v > 1e15 {
            return Err(CliError::Config(format!("parameter '{key}' must be a non-negative integer, got {v}")));
        }
        Ok(v as usize)
    }

    pub fn map(&self) -> &BTreeMap<String, f64> {
        &self.values
    }
}

/// Parses `key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_and_params_are_rejected() {
        assert!(matches!(ExperimentConfig::from_json(r#"{"experiment": "x", "sed": 1}"#), Err(CliError::Parse { .. })));
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "x", "params": {"n": 3, "bogus": 1}}"#).unwrap();
        let err = Params::resolve(&cfg.params, &[("n", 10.0)], "x").unwrap_err();
        assert!(matches!(err, CliError::Config(ref m) if m.contains("bogus")));
        let ok = Params::resolve(&BTreeMap::from([("n".into(), 3.0)]), &[("n", 10.0), ("p", 0.1)], "x").unwrap();
        assert_eq!(ok.count("n").unwrap(), 3);
        assert_eq!(ok.f("p"), 0.1);
        let frac = Params::resolve(&BTreeMap::from([("n".into(), 2.5)]), &[("n", 10.0)], "x").unwrap();
        assert!(frac.count("n").is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = ExperimentConfig::from_json("{\n  \"experiment\": \"x\",\n  \"seed\": oops\n}").unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn assignments() {
        assert_eq!(parse_assignment("n = 14").unwrap(), ("n".into(), 14.0));
        assert!(parse_assignment("n").is_err());
        assert!(parse_assignment("n=x").is_err());
    }
}
