//! Truncated finite-dimensional realizations of Banach-space-valued Lévy
//! processes and the units of their product systems.
//!
//! Every process lives on coordinates `1..=K`. Closed-form quantities
//! (Lévy exponents, unit norms, inner products) are computed exactly and
//! cross-checked against seeded Monte Carlo ensembles drawn by [`simulate`].
//!
//! Module map:
//! - [`levy`]: process models, finite-support functionals, Lévy exponents.
//! - [`simulate`]: reproducible path ensembles and shifted views.
//! - [`skellam`]: Skellam pmf, the λ-indexed exponent family and its
//!   discriminator.
//! - [`units`]: exponential, Cameron–Martin and parity units.
//! - [`spatiality`]: Hermite machinery, density residuals, the orthogonal
//!   vector of the Skellam family.
//! - [`config`], [`report`], [`runner`]: the experiment runner behind the CLI.

pub mod config;
pub mod error;
pub mod io;
pub mod levy;
pub mod report;
pub mod rng;
pub mod runner;
pub mod sequence;
pub mod simulate;
pub mod skellam;
pub mod spatiality;
pub mod stats;
pub mod units;

pub use error::{Error, Result};
pub use levy::{characteristic_fn, levy_exponent, ComplexScalar, FiniteFunctional, LevyModel, TruncationDim};
pub use simulate::{sample_paths, PathEnsemble, PathView, TimeGrid};
pub use skellam::{LambdaProfile, SkellamParams};
