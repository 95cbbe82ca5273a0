//! Process models and their Lévy exponents.
//!
//! A model is the truncation to coordinates `1..=K` of an infinite-dimensional
//! Lévy process. Functionals with finite support pair with a state vector
//! coordinatewise, so every exponent below is exact for functionals whose
//! support fits in the truncation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::skellam::LambdaProfile;

/// Value of a Lévy exponent or characteristic function.
pub type ComplexScalar = Complex64;

/// A finite-support element of the dual space, stored sparsely by 1-based
/// coordinate index. Zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FiniteFunctional {
    entries: BTreeMap<usize, f64>,
}

impl FiniteFunctional {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut out = BTreeMap::new();
        for (index, value) in entries {
            if index == 0 {
                return Err(Error::invalid("functional", "coordinate indices start at 1"));
            }
            if !value.is_finite() {
                return Err(Error::invalid(
                    "functional",
                    format!("coordinate {index} has non-finite value {value}"),
                ));
            }
            if value != 0.0 {
                out.insert(index, value);
            } else {
                out.remove(&index);
            }
        }
        Ok(Self { entries: out })
    }

    /// Builds a functional from dense coordinates, `values[0]` being coordinate 1.
    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().copied().enumerate().map(|(i, v)| (i + 1, v)))
    }

    /// The functional `value · e_index`.
    pub fn coordinate(index: usize, value: f64) -> Result<Self> {
        Self::new([(index, value)])
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries.get(&index).copied().unwrap_or(0.0)
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&n, &v)| (n, v))
    }

    pub fn check_within(&self, dim: usize) -> Result<()> {
        match self.max_index() {
            Some(index) if index > dim => Err(Error::OutOfTruncation { index, dim }),
            _ => Ok(()),
        }
    }

    /// Pairing `Σ φ_n x_n` with a dense state whose slot 0 is coordinate 1.
    pub fn pair(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|(&n, &v)| v * x.get(n - 1).copied().unwrap_or(0.0))
            .sum()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (&n, &v) in &self.entries {
            if n <= dim {
                out[n - 1] = v;
            }
        }
        out
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let mut entries = self.entries.clone();
        for (&n, &v) in &other.entries {
            let slot = entries.entry(n).or_insert(0.0);
            *slot += sign * v;
            if *slot == 0.0 {
                entries.remove(&n);
            }
        }
        Self { entries }
    }
}

impl Add for &FiniteFunctional {
    type Output = FiniteFunctional;
    fn add(self, rhs: Self) -> FiniteFunctional {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &FiniteFunctional {
    type Output = FiniteFunctional;
    fn sub(self, rhs: Self) -> FiniteFunctional {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &FiniteFunctional {
    type Output = FiniteFunctional;
    fn neg(self) -> FiniteFunctional {
        FiniteFunctional {
            entries: self.entries.iter().map(|(&n, &v)| (n, -v)).collect(),
        }
    }
}

/// Number of retained coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TruncationDim(usize);

impl TruncationDim {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("K", "truncation must keep at least one coordinate"));
        }
        Ok(Self(k))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for TruncationDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The four concrete process constructions.
#[derive(Clone, Debug, PartialEq)]
pub enum LevyModel {
    /// Independent Brownian coordinates with drift `b_n` and variance rate `q_n`.
    GaussianDiagonal { drift: Vec<f64>, variances: Vec<f64> },
    /// Jumps of size `λ_n e_n` arriving at rate `λ_n` on each coordinate.
    LpCompoundPoisson { rates: Vec<f64> },
    /// Poisson(`rate`) arrivals, each adding an independent Bernoulli(`p_n`)
    /// vector.
    BernoulliCompound { rate: f64, probs: Vec<f64> },
    /// `X_n = N⁺_n − N⁻_n` with rates `2^{-n}λ_n` and `2^{-n}(1−λ_n)`.
    SkellamFamily { profile: LambdaProfile },
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::invalid(name, format!("entry {} is {v}", i + 1)));
    }
    Ok(())
}

fn check_nonempty(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(name, "at least one coordinate is required"));
    }
    Ok(())
}

impl LevyModel {
    pub fn gaussian(drift: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        check_nonempty("variances", &variances)?;
        check_finite("drift", &drift)?;
        check_finite("variances", &variances)?;
        if drift.len() != variances.len() {
            return Err(Error::invalid(
                "drift",
                format!("has {} entries but variances has {}", drift.len(), variances.len()),
            ));
        }
        if let Some(i) = variances.iter().position(|&q| q <= 0.0) {
            return Err(Error::invalid("variances", format!("entry {} is not positive", i + 1)));
        }
        Ok(Self::GaussianDiagonal { drift, variances })
    }

    /// Centered Gaussian model.
    pub fn centered_gaussian(variances: Vec<f64>) -> Result<Self> {
        let drift = vec![0.0; variances.len()];
        Self::gaussian(drift, variances)
    }

    pub fn lp_compound_poisson(rates: Vec<f64>) -> Result<Self> {
        check_nonempty("rates", &rates)?;
        check_finite("rates", &rates)?;
        if let Some(i) = rates.iter().position(|&r| r <= 0.0) {
            return Err(Error::invalid("rates", format!("entry {} is not positive", i + 1)));
        }
        Ok(Self::LpCompoundPoisson { rates })
    }

    pub fn bernoulli_compound(rate: f64, probs: Vec<f64>) -> Result<Self> {
        check_nonempty("probs", &probs)?;
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::invalid("rate", format!("{rate} is not a positive finite rate")));
        }
        if let Some(i) = probs.iter().position(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::invalid("probs", format!("entry {} is outside (0, 1)", i + 1)));
        }
        Ok(Self::BernoulliCompound { rate, probs })
    }

    pub fn skellam(profile: LambdaProfile) -> Self {
        Self::SkellamFamily { profile }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::GaussianDiagonal { variances, .. } => variances.len(),
            Self::LpCompoundPoisson { rates } => rates.len(),
            Self::BernoulliCompound { probs, .. } => probs.len(),
            Self::SkellamFamily { profile } => profile.dim(),
        }
    }

    pub fn truncation(&self) -> TruncationDim {
        TruncationDim(self.dim())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::GaussianDiagonal { .. } => "gaussian",
            Self::LpCompoundPoisson { .. } => "lp",
            Self::BernoulliCompound { .. } => "bernoulli",
            Self::SkellamFamily { .. } => "skellam",
        }
    }

    /// Whether the model carries a global arrival count.
    pub fn has_jumps(&self) -> bool {
        !matches!(self, Self::GaussianDiagonal { .. })
    }

    /// Closed-form Lévy exponent `Ψ(φ)`.
    pub fn exponent(&self, phi: &FiniteFunctional) -> Result<ComplexScalar> {
        phi.check_within(self.dim())?;
        let value = match self {
            Self::GaussianDiagonal { drift, variances } => {
                let (mut drift_term, mut quad) = (0.0, 0.0);
                for (n, v) in phi.iter() {
                    drift_term += drift[n - 1] * v;
                    quad += variances[n - 1] * v * v;
                }
                Complex64::new(-0.5 * quad, drift_term)
            }
            Self::LpCompoundPoisson { rates } => phi
                .iter()
                .map(|(n, v)| {
                    let size = rates[n - 1];
                    size * (Complex64::new(0.0, v * size).exp() - 1.0)
                })
                .sum(),
            Self::BernoulliCompound { rate, probs } => {
                let jump_cf = phi.iter().fold(Complex64::new(1.0, 0.0), |acc, (n, v)| {
                    let p = probs[n - 1];
                    acc * (p * Complex64::new(0.0, v).exp() + (1.0 - p))
                });
                *rate * (jump_cf - 1.0)
            }
            Self::SkellamFamily { profile } => phi
                .iter()
                .map(|(n, v)| {
                    let weight = 0.5f64.powi(n as i32);
                    let skew = 2.0 * profile.lambda(n) - 1.0;
                    weight * Complex64::new(v.cos() - 1.0, skew * v.sin())
                })
                .sum(),
        };
        Ok(value)
    }

    /// `E[exp(i⟨φ, L_t⟩)] = exp(tΨ(φ))`.
    pub fn characteristic_fn(&self, phi: &FiniteFunctional, t: f64) -> Result<ComplexScalar> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid("t", format!("{t} is not a positive time")));
        }
        Ok((t * self.exponent(phi)?).exp())
    }

    /// Expected increment per unit time, coordinate by coordinate.
    pub fn mean_rate(&self) -> Vec<f64> {
        match self {
            Self::GaussianDiagonal { drift, .. } => drift.clone(),
            Self::LpCompoundPoisson { rates } => rates.iter().map(|r| r * r).collect(),
            Self::BernoulliCompound { rate, probs } => probs.iter().map(|p| rate * p).collect(),
            Self::SkellamFamily { profile } => (1..=profile.dim())
                .map(|n| 0.5f64.powi(n as i32) * (2.0 * profile.lambda(n) - 1.0))
                .collect(),
        }
    }
}

pub fn levy_exponent(model: &LevyModel, phi: &FiniteFunctional) -> Result<ComplexScalar> {
    model.exponent(phi)
}

pub fn characteristic_fn(model: &LevyModel, phi: &FiniteFunctional, t: f64) -> Result<ComplexScalar> {
    model.characteristic_fn(phi, t)
}
