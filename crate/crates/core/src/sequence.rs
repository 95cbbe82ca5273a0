//! Per-coordinate parameter sequences, given either explicitly or by a rule.
//!
//! Rule grammar (whitespace-separated, case-sensitive):
//!
//! ```text
//! constant <c>          c, c, c, …
//! alternating <a>,<b>   a, b, a, b, …
//! harmonic [1/n]        1, 1/2, 1/3, …
//! n^-<r>                1, 2^-r, 3^-r, …
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SequenceRule {
    Constant(f64),
    Alternating(f64, f64),
    Harmonic,
    Power(f64),
}

fn parse_number(s: &str, rule: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{s}` is not a number in rule `{rule}`")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("non-finite value in rule `{rule}`")));
    }
    Ok(v)
}

impl FromStr for SequenceRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        if let Some(rest) = text.strip_prefix("n^-") {
            return Ok(Self::Power(parse_number(rest, text)?));
        }
        let (head, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
        let rest = rest.trim();
        match head {
            "constant" => Ok(Self::Constant(parse_number(rest, text)?)),
            "alternating" => {
                let (a, b) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::Config(format!("rule `{text}` needs two comma-separated values")))?;
                Ok(Self::Alternating(parse_number(a, text)?, parse_number(b, text)?))
            }
            "harmonic" if rest.is_empty() || rest == "1/n" => Ok(Self::Harmonic),
            _ => Err(Error::Config(format!(
                "unknown sequence rule `{text}` (expected constant, alternating, harmonic or n^-r)"
            ))),
        }
    }
}

impl fmt::Display for SequenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "constant {c:?}"),
            Self::Alternating(a, b) => write!(f, "alternating {a:?},{b:?}"),
            Self::Harmonic => f.write_str("harmonic"),
            Self::Power(r) => write!(f, "n^-{r:?}"),
        }
    }
}

impl SequenceRule {
    pub fn value(&self, n: usize) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::Alternating(a, b) => {
                if n % 2 == 1 {
                    a
                } else {
                    b
                }
            }
            Self::Harmonic => 1.0 / n as f64,
            Self::Power(r) => (n as f64).powf(-r),
        }
    }

    pub fn generate(&self, dim: usize) -> Vec<f64> {
        (1..=dim).map(|n| self.value(n)).collect()
    }
}

/// An explicit list or a generating rule.
#[derive(Clone, Debug, PartialEq)]
pub enum SequenceSpec {
    List(Vec<f64>),
    Rule(SequenceRule),
}

impl SequenceSpec {
    /// The first `dim` values. Lists must have exactly `dim` entries.
    pub fn resolve(&self, name: &str, dim: usize) -> Result<Vec<f64>> {
        match self {
            Self::List(values) => {
                if values.len() != dim {
                    return Err(Error::invalid(name, format!("has {} entries but K = {dim}", values.len())));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid(name, "contains a non-finite value"));
                }
                Ok(values.clone())
            }
            Self::Rule(rule) => Ok(rule.generate(dim)),
        }
    }
}

impl Serialize for SequenceSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::List(values) => values.serialize(serializer),
            Self::Rule(rule) => serializer.serialize_str(&rule.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for SequenceSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<f64>),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::List(values) => Ok(Self::List(values)),
            Raw::Text(text) => text.parse().map(Self::Rule).map_err(serde::de::Error::custom),
        }
    }
}
