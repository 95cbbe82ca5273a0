//! Seeded path ensembles on a time grid.
//!
//! An ensemble stores per-interval increments and total arrival counts.
//! Positions `L_t` are partial sums of increments, so `L_0 = 0` holds by
//! construction and shifted views are pure re-indexing.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::{FiniteFunctional, LevyModel};
use crate::rng::{StreamFactory, StreamRng, MAX_INTERVALS};
use crate::stats::ComplexEstimate;

/// Upper bound on `M · m · K` for a single ensemble (2 GiB of increments).
pub const MAX_CELLS: u128 = 1 << 28;

const GRID_TOL: f64 = 1e-12;

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= GRID_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Strictly increasing positive times with an implicit origin `t_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("grid", "at least one time is required"));
        }
        if times.len() > MAX_INTERVALS {
            return Err(Error::invalid("grid", format!("more than {MAX_INTERVALS} times")));
        }
        let mut prev = 0.0;
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t <= prev {
                return Err(Error::invalid(
                    "grid",
                    format!("time {} ({t}) must be finite and exceed {prev}", i + 1),
                ));
            }
            prev = t;
        }
        Ok(Self { times })
    }

    /// `n` equally spaced points `h, 2h, …, nh`.
    pub fn uniform(step: f64, n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| step * i as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of intervals (= number of positive grid times).
    pub fn intervals(&self) -> usize {
        self.times.len()
    }

    /// Grid point `j`, with `point(0) = 0`.
    pub fn point(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.times[j - 1]
        }
    }

    /// Length of interval `j ∈ 1..=m`.
    pub fn interval_length(&self, j: usize) -> f64 {
        self.point(j) - self.point(j - 1)
    }

    /// Index of `t` among `0, t_1, …, t_m`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        if same_time(t, 0.0) {
            return Ok(0);
        }
        self.times
            .iter()
            .position(|&g| same_time(g, t))
            .map(|j| j + 1)
            .ok_or(Error::NotOnGrid(t))
    }
}

/// `M` independent truncated sample paths on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    model: LevyModel,
    grid: TimeGrid,
    samples: usize,
    seed: u64,
    /// `[sample][interval][coordinate]`
    increments: Vec<f64>,
    /// `[sample][interval]`
    jump_counts: Vec<u64>,
}

fn check_capacity(samples: usize, intervals: usize, dim: usize) -> Result<usize> {
    let requested = samples as u128 * intervals as u128 * dim as u128;
    if requested > MAX_CELLS {
        return Err(Error::Capacity {
            requested,
            limit: MAX_CELLS,
        });
    }
    Ok(requested as usize)
}

/// Draws one interval increment of length `dt` into `out`; returns the
/// number of arrivals.
fn draw_increment(model: &LevyModel, dt: f64, rng: &mut StreamRng, out: &mut [f64]) -> u64 {
    match model {
        LevyModel::GaussianDiagonal { drift, variances } => {
            for (n, slot) in out.iter_mut().enumerate() {
                *slot = drift[n] * dt + (variances[n] * dt).sqrt() * rng.normal();
            }
            0
        }
        LevyModel::LpCompoundPoisson { rates } => {
            let mut total = 0;
            for (n, slot) in out.iter_mut().enumerate() {
                let count = rng.poisson(rates[n] * dt);
                total += count;
                *slot = count as f64 * rates[n];
            }
            total
        }
        LevyModel::BernoulliCompound { rate, probs } => {
            out.fill(0.0);
            let arrivals = rng.poisson(rate * dt);
            for _ in 0..arrivals {
                for (n, slot) in out.iter_mut().enumerate() {
                    if rng.uniform() < probs[n] {
                        *slot += 1.0;
                    }
                }
            }
            arrivals
        }
        LevyModel::SkellamFamily { profile } => {
            let mut total = 0;
            for (i, slot) in out.iter_mut().enumerate() {
                let n = i + 1;
                let weight = 0.5f64.powi(n as i32);
                let lambda = profile.lambda(n);
                let up = rng.poisson(weight * lambda * dt);
                let down = rng.poisson(weight * (1.0 - lambda) * dt);
                total += up + down;
                *slot = up as f64 - down as f64;
            }
            total
        }
    }
}

/// Samples `M` paths of `model` on `grid`. Cell `(sample, interval)` draws
/// from its own stream, so the result is independent of scheduling.
pub fn sample_paths(model: &LevyModel, grid: &TimeGrid, samples: usize, seed: u64) -> Result<PathEnsemble> {
    if samples == 0 {
        return Err(Error::invalid("M", "at least one sample is required"));
    }
    let dim = model.dim();
    let m = grid.intervals();
    let cells = check_capacity(samples, m, dim)?;
    let factory = StreamFactory::new(seed);
    let mut increments = vec![0.0; cells];
    let mut jump_counts = vec![0u64; samples * m];
    increments
        .par_chunks_mut(m * dim)
        .zip(jump_counts.par_chunks_mut(m))
        .enumerate()
        .for_each(|(sample, (incs, counts))| {
            for (j, (inc, count)) in incs.chunks_mut(dim).zip(counts.iter_mut()).enumerate() {
                let mut rng = factory.stream(sample as u64, j as u64);
                *count = draw_increment(model, grid.interval_length(j + 1), &mut rng, inc);
            }
        });
    Ok(PathEnsemble {
        model: model.clone(),
        grid: grid.clone(),
        samples,
        seed,
        increments,
        jump_counts,
    })
}

impl PathEnsemble {
    /// Reassembles an ensemble from stored arrays (decoders use this).
    pub fn from_parts(
        model: LevyModel,
        grid: TimeGrid,
        samples: usize,
        seed: u64,
        increments: Vec<f64>,
        jump_counts: Vec<u64>,
    ) -> Result<Self> {
        if samples == 0 {
            return Err(Error::invalid("M", "at least one sample is required"));
        }
        let cells = check_capacity(samples, grid.intervals(), model.dim())?;
        if increments.len() != cells {
            return Err(Error::Decode(format!(
                "expected {cells} increments, found {}",
                increments.len()
            )));
        }
        if jump_counts.len() != samples * grid.intervals() {
            return Err(Error::Decode(format!(
                "expected {} jump counts, found {}",
                samples * grid.intervals(),
                jump_counts.len()
            )));
        }
        Ok(Self {
            model,
            grid,
            samples,
            seed,
            increments,
            jump_counts,
        })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn intervals(&self) -> usize {
        self.grid.intervals()
    }

    pub fn raw_increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn raw_jump_counts(&self) -> &[u64] {
        &self.jump_counts
    }

    /// Increment vector of `sample` over interval `j ∈ 1..=m`.
    pub fn increment(&self, sample: usize, j: usize) -> &[f64] {
        let dim = self.dim();
        let start = (sample * self.intervals() + (j - 1)) * dim;
        &self.increments[start..start + dim]
    }

    /// Arrivals of `sample` in interval `j ∈ 1..=m`.
    pub fn jump_count(&self, sample: usize, j: usize) -> u64 {
        self.jump_counts[sample * self.intervals() + (j - 1)]
    }

    /// The unshifted view, indexed by absolute time.
    pub fn view(&self) -> PathView<'_> {
        PathView { ensemble: self, offset: 0 }
    }

    /// The view `u ↦ L_{s+u} − L_s` for a grid point `s`.
    pub fn shifted_view(&self, s: f64) -> Result<PathView<'_>> {
        let offset = self.grid.index_of(s)?;
        Ok(PathView { ensemble: self, offset })
    }

    pub fn empirical_charfn(&self, phi: &FiniteFunctional, t: f64) -> Result<ComplexEstimate> {
        self.view().empirical_charfn(phi, t)
    }
}

/// Read-only re-indexing of an ensemble that starts the clock at grid point
/// `offset`. No resampling takes place.
#[derive(Clone, Copy, Debug)]
pub struct PathView<'a> {
    ensemble: &'a PathEnsemble,
    offset: usize,
}

impl<'a> PathView<'a> {
    pub fn ensemble(&self) -> &'a PathEnsemble {
        self.ensemble
    }

    pub fn model(&self) -> &'a LevyModel {
        &self.ensemble.model
    }

    pub fn samples(&self) -> usize {
        self.ensemble.samples
    }

    pub fn dim(&self) -> usize {
        self.ensemble.dim()
    }

    /// Absolute time at which this view starts.
    pub fn start(&self) -> f64 {
        self.ensemble.grid.point(self.offset)
    }

    /// Number of grid steps available after the start.
    pub fn steps(&self) -> usize {
        self.ensemble.intervals() - self.offset
    }

    /// Relative times available in this view, excluding 0.
    pub fn times(&self) -> Vec<f64> {
        let s = self.start();
        (1..=self.steps())
            .map(|k| self.ensemble.grid.point(self.offset + k) - s)
            .collect()
    }

    /// Step index `k` with `t_{offset+k} − s = u`.
    pub fn step_of(&self, u: f64) -> Result<usize> {
        let s = self.start();
        if same_time(u, 0.0) {
            return Ok(0);
        }
        (1..=self.steps())
            .find(|&k| same_time(self.ensemble.grid.point(self.offset + k) - s, u))
            .ok_or(Error::NotOnGrid(u))
    }

    /// Writes `L_{s+u_k} − L_s` of `sample` into `out`.
    pub fn position_at_step(&self, sample: usize, k: usize, out: &mut [f64]) {
        out.fill(0.0);
        for j in self.offset + 1..=self.offset + k {
            for (slot, inc) in out.iter_mut().zip(self.ensemble.increment(sample, j)) {
                *slot += inc;
            }
        }
    }

    /// Arrivals of `sample` in `(s, s + u_k]`.
    pub fn count_at_step(&self, sample: usize, k: usize) -> u64 {
        (self.offset + 1..=self.offset + k)
            .map(|j| self.ensemble.jump_count(sample, j))
            .sum()
    }

    /// All positions at relative time `u`, one row of length `K` per sample.
    pub fn positions(&self, u: f64) -> Result<Vec<f64>> {
        let k = self.step_of(u)?;
        let dim = self.dim();
        let mut out = vec![0.0; self.samples() * dim];
        for (sample, row) in out.chunks_mut(dim).enumerate() {
            self.position_at_step(sample, k, row);
        }
        Ok(out)
    }

    pub fn counts(&self, u: f64) -> Result<Vec<u64>> {
        let k = self.step_of(u)?;
        Ok((0..self.samples()).map(|i| self.count_at_step(i, k)).collect())
    }

    /// Monte Carlo estimate of `E[exp(i⟨φ, L_u⟩)]` on this view.
    pub fn empirical_charfn(&self, phi: &FiniteFunctional, u: f64) -> Result<ComplexEstimate> {
        phi.check_within(self.dim())?;
        let positions = self.positions(u)?;
        let values: Vec<Complex64> = positions
            .chunks(self.dim())
            .map(|x| Complex64::new(0.0, phi.pair(x)).exp())
            .collect();
        Ok(ComplexEstimate::from_samples(&values))
    }
}

/// Free-function form of [`PathEnsemble::shifted_view`].
pub fn shifted_view(ensemble: &PathEnsemble, s: f64) -> Result<PathView<'_>> {
    ensemble.shifted_view(s)
}

pub fn empirical_charfn(view: &PathView<'_>, phi: &FiniteFunctional, t: f64) -> Result<ComplexEstimate> {
    view.empirical_charfn(phi, t)
}
