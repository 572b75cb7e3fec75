//! Experiment configuration.
//!
//! Configs are TOML documents. Recognized keys:
//!
//! ```toml
//! algorithm = "two_hop"        # one_hop | two_hop | j_hop:<j> | noisy_seeds:<r> | parallel_argmax[:<j>]
//! iterations = 0               # extra re-seeding rounds
//! n = [2000, 4000, 8000]
//! p = "n^-0.75"                # a number, or "n^-<gamma>"
//! s = 0.9
//! beta = [0.1, 0.2, 0.3]
//! beta_scale = "two_hop_t1"    # optional: beta values are multiples of this rate
//! trials = 10
//! seed = 1
//! complete_random = false
//! timing = false               # fill the runtime_ms CSV column
//! ```
//!
//! Unknown keys are rejected.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::collapse::Rescale;
use crate::error::{Error, Result};
use crate::matcher::Algorithm;

/// Parent edge probability, either fixed or tied to `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PSpec {
    Constant(f64),
    /// `p = n^(-gamma)`.
    Power(f64),
}

impl PSpec {
    pub fn at(&self, n: usize) -> f64 {
        match *self {
            PSpec::Constant(p) => p,
            PSpec::Power(gamma) => (n as f64).powf(-gamma),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let spec = if let Some(gamma) = text.strip_prefix("n^-") {
            let gamma: f64 = gamma
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("bad exponent in p = `{text}`")))?;
            PSpec::Power(gamma)
        } else {
            PSpec::Constant(
                text.parse()
                    .map_err(|_| Error::Usage(format!("p must be a number or n^-<gamma>, got `{text}`")))?,
            )
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PSpec::Constant(p) if !(0.0..=1.0).contains(&p) => Err(Error::domain(format!("p = {p} outside [0, 1]"))),
            PSpec::Power(g) if !(g >= 0.0 && g.is_finite()) => {
                Err(Error::domain(format!("exponent {g} must be finite and non-negative")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PSpec::Constant(p) => write!(f, "{p}"),
            PSpec::Power(g) => write!(f, "n^-{g}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PValue {
    Number(f64),
    Text(String),
}

impl Serialize for PSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            PSpec::Constant(p) => PValue::Number(p),
            PSpec::Power(_) => PValue::Text(self.to_string()),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let spec = match PValue::deserialize(de)? {
            PValue::Number(p) => PSpec::Constant(p),
            PValue::Text(t) => PSpec::parse(&t).map_err(serde::de::Error::custom)?,
        };
        spec.validate().map_err(serde::de::Error::custom)?;
        Ok(spec)
    }
}

fn algorithm_to_string<S: serde::Serializer>(alg: &Algorithm, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&alg.to_string())
}

fn algorithm_from_string<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Algorithm, D::Error> {
    Algorithm::parse(&String::deserialize(de)?).map_err(serde::de::Error::custom)
}

fn default_trials() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(serialize_with = "algorithm_to_string", deserialize_with = "algorithm_from_string")]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub iterations: usize,
    pub n: Vec<usize>,
    pub p: PSpec,
    pub s: f64,
    pub beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_scale: Option<Rescale>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub complete_random: bool,
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.algorithm.validate()?;
        self.p.validate()?;
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        if self.n.is_empty() || self.beta.is_empty() {
            return Err(Error::domain("the n and beta grids must be non-empty"));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 2) {
            return Err(Error::domain(format!("n = {n} is too small")));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::domain(format!("s = {} outside (0, 1]", self.s)));
        }
        for &b in &self.beta {
            let ok = if self.beta_scale.is_some() {
                b >= 0.0 && b.is_finite()
            } else {
                (0.0..=1.0).contains(&b)
            };
            if !ok {
                return Err(Error::domain(format!("beta grid value {b} out of range")));
            }
        }
        Ok(())
    }

    /// Seed fraction used at grid point `(n, beta_index)`.
    pub fn beta_at(&self, n: usize, beta_index: usize) -> f64 {
        let b = self.beta[beta_index];
        match self.beta_scale {
            Some(scale) => b * scale.rate(n as f64, self.p.at(n)),
            None => b,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Usage(format!("config: {}", e.message())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e
                .span()
                .map(|span| text[..span.start].lines().count().max(1))
                .unwrap_or(0),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }
}
