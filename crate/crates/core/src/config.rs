// SPDX-License-Identifier: Apache-2.0

//! Scenario configuration: `key = value` lines with `#` comments.

use std::fmt;
use std::path::PathBuf;

use crate::bath::BathSpec;
use crate::dynamics::{ModelKind, SystemParams, MAX_DT};

/// A configuration problem tied to one key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config key '{}': {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

pub const KEYS: [&str; 9] = ["model", "r", "lambda", "gamma0", "cutoff", "kt", "t_end", "dt", "output"];

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: ModelKind,
    pub r: f64,
    pub lambda: f64,
    pub gamma0: f64,
    pub cutoff: f64,
    pub kt: f64,
    pub t_end: f64,
    pub dt: f64,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Isolated,
            r: 0.0,
            lambda: 0.0,
            gamma0: 0.0,
            cutoff: 2000.0,
            kt: 10.0,
            t_end: 10.0,
            dt: 1e-3,
            output: None,
        }
    }
}

fn parse_number(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| ConfigError::new(key, format!("'{value}' is not a number")))
}

impl ScenarioConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "model" => self.model = value.parse().map_err(|e: crate::Error| ConfigError::new(key, e.to_string()))?,
            "r" => self.r = parse_number(key, value)?,
            "lambda" => self.lambda = parse_number(key, value)?,
            "gamma0" => self.gamma0 = parse_number(key, value)?,
            "cutoff" => self.cutoff = parse_number(key, value)?,
            "kt" => self.kt = parse_number(key, value)?,
            "t_end" => self.t_end = parse_number(key, value)?,
            "dt" => self.dt = parse_number(key, value)?,
            "output" => self.output = if value.is_empty() || value == "-" { None } else { Some(PathBuf::from(value)) },
            _ => return Err(ConfigError::new(key, format!("unknown key (expected one of {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Applies the lines of a configuration file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(line, format!("line {} is not of the form key = value", n + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Checks every numeric constraint and names the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::new(key, format!("must be finite, got {v}")))
            }
        };
        for (key, v) in [
            ("r", self.r),
            ("lambda", self.lambda),
            ("gamma0", self.gamma0),
            ("cutoff", self.cutoff),
            ("kt", self.kt),
            ("t_end", self.t_end),
            ("dt", self.dt),
        ] {
            finite(key, v)?;
        }
        if self.r < 0.0 {
            return Err(ConfigError::new("r", format!("must be >= 0, got {}", self.r)));
        }
        if self.lambda.abs() >= 1.0 {
            return Err(ConfigError::new("lambda", format!("|lambda| must be below omega_r^2 = 1, got {}", self.lambda)));
        }
        if self.gamma0 < 0.0 {
            return Err(ConfigError::new("gamma0", format!("must be >= 0, got {}", self.gamma0)));
        }
        if self.cutoff <= 0.0 {
            return Err(ConfigError::new("cutoff", format!("must be > 0, got {}", self.cutoff)));
        }
        if self.kt <= 0.0 {
            return Err(ConfigError::new("kt", format!("must be > 0, got {}", self.kt)));
        }
        if self.t_end <= 0.0 {
            return Err(ConfigError::new("t_end", format!("must be > 0, got {}", self.t_end)));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(ConfigError::new("dt", format!("must lie in (0, {MAX_DT}], got {}", self.dt)));
        }
        if self.model == ModelKind::MarkovianRwa {
            if self.lambda != 0.0 {
                return Err(ConfigError::new("lambda", "markovian_rwa requires lambda = 0"));
            }
            if self.gamma0 <= 0.0 {
                return Err(ConfigError::new("gamma0", "markovian_rwa requires gamma0 > 0"));
            }
        }
        Ok(())
    }

    pub fn bath(&self) -> Result<BathSpec, ConfigError> {
        BathSpec::new(self.gamma0, self.cutoff, self.kt).map_err(|e| ConfigError::new("gamma0", e.to_string()))
    }

    pub fn params(&self) -> Result<SystemParams, ConfigError> {
        SystemParams::new(1.0, self.lambda, self.r, self.bath()?).map_err(|e| ConfigError::new("lambda", e.to_string()))
    }

    /// `key=value` lines that reproduce this configuration.
    pub fn to_lines(&self) -> Vec<String> {
        vec![
            format!("model={}", self.model),
            format!("r={}", self.r),
            format!("lambda={}", self.lambda),
            format!("gamma0={}", self.gamma0),
            format!("cutoff={}", self.cutoff),
            format!("kt={}", self.kt),
            format!("t_end={}", self.t_end),
            format!("dt={}", self.dt),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments_and_defaults() {
        let cfg = ScenarioConfig::from_text("# fig 6\nmodel = model_b\nr=2 # squeezing\n\nlambda = -0.2\ngamma0=0.06\n").unwrap();
        assert_eq!(cfg.model, ModelKind::CommonBath);
        assert_eq!((cfg.r, cfg.lambda, cfg.gamma0), (2.0, -0.2, 0.06));
        assert_eq!((cfg.cutoff, cfg.kt, cfg.dt), (2000.0, 10.0, 1e-3));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_unknown_and_malformed_keys() {
        assert_eq!(ScenarioConfig::from_text("temperature = 3").unwrap_err().key, "temperature");
        assert_eq!(ScenarioConfig::from_text("r = two").unwrap_err().key, "r");
        assert_eq!(ScenarioConfig::from_text("model = model_c").unwrap_err().key, "model");
        assert!(ScenarioConfig::from_text("just words").is_err());
    }

    #[test]
    fn validation_names_the_key() {
        let bad = |text: &str| ScenarioConfig::from_text(text).unwrap().validate().unwrap_err().key;
        assert_eq!(bad("lambda = 1.0"), "lambda");
        assert_eq!(bad("dt = 0.1"), "dt");
        assert_eq!(bad("kt = 0"), "kt");
        assert_eq!(bad("r = -1"), "r");
        assert_eq!(bad("model = markovian_rwa\ngamma0 = 0.06\nlambda = 0.2"), "lambda");
    }

    #[test]
    fn lines_round_trip() {
        let cfg = ScenarioConfig::from_text("model=model_a\nr=0.1\nlambda=0.8\ngamma0=0.06\nt_end=3.3\ndt=0.0005").unwrap();
        let again = ScenarioConfig::from_text(&cfg.to_lines().join("\n")).unwrap();
        assert_eq!(again, cfg);
    }
}
