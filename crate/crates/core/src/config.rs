//! Experiment configuration: a TOML document with a fixed schema.
//!
//! ```toml
//! suite = "all"
//! seed = 1
//! M = 100000
//! K = 8
//! grid = [0.5, 1.0]
//! output_dir = "out"
//!
//! [model]
//! kind = "skellam"
//! lambdas = "constant 0.5"
//!
//! [tolerances]
//! closed_form = 1e-12
//! mc_sigmas = 5.0
//! ```
//!
//! Unknown keys are rejected. [`ExperimentConfig::canonical_text`] writes
//! every field explicitly and is a fixed point of parse-then-print.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::sequence::{SequenceRule, SequenceSpec};
use crate::simulate::TimeGrid;
use crate::skellam::LambdaProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Charfn,
    Units,
    Skellam,
    Hermite,
    Density,
    Orthogonality,
    Discriminate,
    All,
}

impl Suite {
    pub const CONCRETE: [Suite; 7] = [
        Suite::Charfn,
        Suite::Units,
        Suite::Skellam,
        Suite::Hermite,
        Suite::Density,
        Suite::Orthogonality,
        Suite::Discriminate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Charfn => "charfn",
            Suite::Units => "units",
            Suite::Skellam => "skellam",
            Suite::Hermite => "hermite",
            Suite::Density => "density",
            Suite::Orthogonality => "orthogonality",
            Suite::Discriminate => "discriminate",
            Suite::All => "all",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Suite::Charfn => "empirical vs closed-form characteristic functions for the configured model",
            Suite::Units => "unit factorization, Cameron-Martin norm and martingale, multiplication isometry, parity",
            Suite::Skellam => "Skellam pmf mass, per-coordinate exponent, unit inner products",
            Suite::Hermite => "Hermite recurrence, generating function, reconstruction from exponential probes",
            Suite::Density => "least-squares residuals against exponential dictionaries",
            Suite::Orthogonality => "centered-indicator vector orthogonal to every unit",
            Suite::Discriminate => "exponent-based discrimination of lambda profiles",
            Suite::All => "every suite above, in order",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        if self == Suite::All {
            Suite::CONCRETE.to_vec()
        } else {
            vec![self]
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::CONCRETE
            .iter()
            .chain(std::iter::once(&Suite::All))
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn zero_drift() -> SequenceSpec {
    SequenceSpec::Rule(SequenceRule::Constant(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Gaussian {
        #[serde(default = "zero_drift")]
        drift: SequenceSpec,
        variances: SequenceSpec,
    },
    Lp {
        rates: SequenceSpec,
    },
    Bernoulli {
        rate: f64,
        probs: SequenceSpec,
    },
    Skellam {
        lambdas: SequenceSpec,
    },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Skellam {
            lambdas: SequenceSpec::Rule(SequenceRule::Constant(0.5)),
        }
    }
}

impl ModelSpec {
    pub fn build(&self, dim: usize) -> Result<LevyModel> {
        match self {
            ModelSpec::Gaussian { drift, variances } => {
                LevyModel::gaussian(drift.resolve("drift", dim)?, variances.resolve("variances", dim)?)
            }
            ModelSpec::Lp { rates } => LevyModel::lp_compound_poisson(rates.resolve("rates", dim)?),
            ModelSpec::Bernoulli { rate, probs } => LevyModel::bernoulli_compound(*rate, probs.resolve("probs", dim)?),
            ModelSpec::Skellam { lambdas } => Ok(LevyModel::skellam(LambdaProfile::new(
                lambdas.resolve("lambdas", dim)?,
            )?)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_sigmas: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute tolerance for closed-form identities.
    #[serde(default = "default_closed_form")]
    pub closed_form: f64,
    /// Monte Carlo comparisons pass within this many standard errors.
    #[serde(default = "default_mc_sigmas")]
    pub mc_sigmas: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub suites: BTreeMap<Suite, ToleranceOverride>,
}

fn default_closed_form() -> f64 {
    1e-12
}

fn default_mc_sigmas() -> f64 {
    5.0
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            closed_form: default_closed_form(),
            mc_sigmas: default_mc_sigmas(),
            suites: BTreeMap::new(),
        }
    }
}

/// Tolerances in force for one suite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteTolerance {
    pub closed_form: f64,
    pub mc_sigmas: f64,
}

fn default_seed() -> u64 {
    1
}
fn default_samples() -> usize {
    100_000
}
fn default_truncation() -> usize {
    8
}
fn default_grid() -> Vec<f64> {
    vec![0.5, 1.0]
}
fn default_output_dir() -> String {
    "out".into()
}
fn default_suite() -> Suite {
    Suite::All
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_suite")]
    pub suite: Suite,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Sample count.
    #[serde(rename = "M", default = "default_samples")]
    pub samples: usize,
    /// Truncation dimension.
    #[serde(rename = "K", default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_grid")]
    pub grid: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: default_suite(),
            seed: default_seed(),
            samples: default_samples(),
            truncation: default_truncation(),
            grid: default_grid(),
            output_dir: default_output_dir(),
            model: ModelSpec::default(),
            tolerances: Tolerances::default(),
        }
    }
}

/// Line (1-based) on which `key` is assigned, if any.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|line| {
        let line = line.trim_start();
        line.strip_prefix(key)
            .map(|rest| rest.trim_start().starts_with('='))
            .unwrap_or(false)
    })
    .map(|i| i + 1)
}

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_owned()))?;
        config.normalize();
        if let Err(err) = config.validate() {
            return Err(match &err {
                Error::InvalidParameter { name, .. } => match line_of_key(text, name) {
                    Some(line) => Error::Config(format!("line {line}: {err}")),
                    None => Error::Config(err.to_string()),
                },
                _ => Error::Config(err.to_string()),
            });
        }
        Ok(config)
    }

    fn normalize(&mut self) {
        self.tolerances
            .suites
            .retain(|_, o| o.closed_form.is_some() || o.mc_sigmas.is_some());
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation == 0 {
            return Err(Error::invalid("K", "must be at least 1"));
        }
        if self.samples == 0 {
            return Err(Error::invalid("M", "must be at least 1"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::invalid("seed", "must fit in a signed 64-bit integer"));
        }
        TimeGrid::new(self.grid.clone())?;
        self.model.build(self.truncation)?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("{v} must be positive")))
            }
        };
        positive("closed_form", self.tolerances.closed_form)?;
        positive("mc_sigmas", self.tolerances.mc_sigmas)?;
        for o in self.tolerances.suites.values() {
            if let Some(v) = o.closed_form {
                positive("closed_form", v)?;
            }
            if let Some(v) = o.mc_sigmas {
                positive("mc_sigmas", v)?;
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<LevyModel> {
        self.model.build(self.truncation)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.grid.clone())
    }

    pub fn tolerance(&self, suite: Suite) -> SuiteTolerance {
        let o = self.tolerances.suites.get(&suite).cloned().unwrap_or_default();
        SuiteTolerance {
            closed_form: o.closed_form.unwrap_or(self.tolerances.closed_form),
            mc_sigmas: o.mc_sigmas.unwrap_or(self.tolerances.mc_sigmas),
        }
    }

    /// Every field written out; parsing the result reproduces it byte for
    /// byte.
    pub fn canonical_text(&self) -> String {
        let mut normalized = self.clone();
        normalized.normalize();
        toml::to_string(&normalized).expect("config serializes")
    }
}

/// Parses `text` and returns its canonical form.
pub fn print_effective_config(text: &str) -> Result<String> {
    Ok(ExperimentConfig::parse(text)?.canonical_text())
}
