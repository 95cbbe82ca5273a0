//! Ensemble export formats.
//!
//! CSV: one row per `(sample, interval, coordinate)` with header
//! `sample,interval,coordinate,increment,jump_count`. Indices are 0-based
//! for samples and 1-based for intervals and coordinates. The arrival count
//! repeats on every coordinate row of its cell. Model and grid are not part
//! of the CSV and must be supplied when reading.
//!
//! Binary (all integers `u64`, all reals `f64`, little-endian):
//!
//! ```text
//! magic      8 bytes  "LEVYENS1"
//! seed, M, m, K, model tag (0 gaussian, 1 lp, 2 bernoulli, 3 skellam)
//! grid       m reals
//! model      gaussian: drift[K] variances[K] | lp: rates[K]
//!            bernoulli: rate probs[K]        | skellam: lambdas[K]
//! increments M·m·K reals, [sample][interval][coordinate]
//! counts     M·m integers, [sample][interval]
//! ```
//!
//! Both formats round-trip bit-exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::simulate::{PathEnsemble, TimeGrid, MAX_CELLS};
use crate::skellam::LambdaProfile;

pub const BINARY_MAGIC: [u8; 8] = *b"LEVYENS1";

pub const CSV_HEADER: &str = "sample,interval,coordinate,increment,jump_count";

pub fn to_csv(ensemble: &PathEnsemble) -> String {
    let mut out = String::with_capacity(32 * ensemble.raw_increments().len() + 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for sample in 0..ensemble.samples() {
        for j in 1..=ensemble.intervals() {
            let count = ensemble.jump_count(sample, j);
            for (n, x) in ensemble.increment(sample, j).iter().enumerate() {
                let _ = writeln!(out, "{sample},{j},{},{x:?},{count}", n + 1);
            }
        }
    }
    out
}

fn csv_field<T: std::str::FromStr>(field: Option<&str>, line: usize, name: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::Decode(format!("line {line}: missing `{name}`")))?
        .trim()
        .parse()
        .map_err(|_| Error::Decode(format!("line {line}: malformed `{name}`")))
}

/// Reads a CSV export back into an ensemble of `model` on `grid`.
pub fn from_csv(text: &str, model: &LevyModel, grid: &TimeGrid, seed: u64) -> Result<PathEnsemble> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == CSV_HEADER => {}
        _ => return Err(Error::Decode(format!("first line must be `{CSV_HEADER}`"))),
    }
    let dim = model.dim();
    let m = grid.intervals();
    let mut increments = Vec::new();
    let mut counts = Vec::new();
    let mut expected = (0usize, 1usize, 1usize);
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let sample: usize = csv_field(fields.next(), lineno, "sample")?;
        let interval: usize = csv_field(fields.next(), lineno, "interval")?;
        let coordinate: usize = csv_field(fields.next(), lineno, "coordinate")?;
        let increment: f64 = csv_field(fields.next(), lineno, "increment")?;
        let count: u64 = csv_field(fields.next(), lineno, "jump_count")?;
        if fields.next().is_some() {
            return Err(Error::Decode(format!("line {lineno}: too many fields")));
        }
        if (sample, interval, coordinate) != expected {
            return Err(Error::Decode(format!(
                "line {lineno}: expected cell {expected:?}, found {:?}",
                (sample, interval, coordinate)
            )));
        }
        if increments.len() as u128 >= MAX_CELLS {
            return Err(Error::Capacity {
                requested: increments.len() as u128 + 1,
                limit: MAX_CELLS,
            });
        }
        increments.push(increment);
        if coordinate == 1 {
            counts.push(count);
        } else if counts.last() != Some(&count) {
            return Err(Error::Decode(format!("line {lineno}: jump_count differs within a cell")));
        }
        expected = if coordinate < dim {
            (sample, interval, coordinate + 1)
        } else if interval < m {
            (sample, interval + 1, 1)
        } else {
            (sample + 1, 1, 1)
        };
    }
    if expected.1 != 1 || expected.2 != 1 {
        return Err(Error::Decode("truncated final sample".into()));
    }
    PathEnsemble::from_parts(model.clone(), grid.clone(), expected.0, seed, increments, counts)
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn to_binary(ensemble: &PathEnsemble) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 * (8 + ensemble.raw_increments().len() + ensemble.raw_jump_counts().len()));
    out.extend_from_slice(&BINARY_MAGIC);
    put_u64(&mut out, ensemble.seed());
    put_u64(&mut out, ensemble.samples() as u64);
    put_u64(&mut out, ensemble.intervals() as u64);
    put_u64(&mut out, ensemble.dim() as u64);
    let model = ensemble.model();
    let tag = match model {
        LevyModel::GaussianDiagonal { .. } => 0,
        LevyModel::LpCompoundPoisson { .. } => 1,
        LevyModel::BernoulliCompound { .. } => 2,
        LevyModel::SkellamFamily { .. } => 3,
    };
    put_u64(&mut out, tag);
    put_f64s(&mut out, ensemble.grid().times());
    match model {
        LevyModel::GaussianDiagonal { drift, variances } => {
            put_f64s(&mut out, drift);
            put_f64s(&mut out, variances);
        }
        LevyModel::LpCompoundPoisson { rates } => put_f64s(&mut out, rates),
        LevyModel::BernoulliCompound { rate, probs } => {
            put_f64s(&mut out, &[*rate]);
            put_f64s(&mut out, probs);
        }
        LevyModel::SkellamFamily { profile } => put_f64s(&mut out, profile.lambdas()),
    }
    put_f64s(&mut out, ensemble.raw_increments());
    for c in ensemble.raw_jump_counts() {
        put_u64(&mut out, *c);
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        if self.bytes.len() < n {
            return Err(Error::Decode(format!("unexpected end of input reading {what}")));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let len = n
            .checked_mul(8)
            .ok_or_else(|| Error::Decode(format!("{what} length overflows")))?;
        Ok(self
            .take(len, what)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn small(v: u64, what: &str) -> Result<usize> {
    usize::try_from(v)
        .ok()
        .filter(|&x| (x as u128) <= MAX_CELLS)
        .ok_or_else(|| Error::Decode(format!("{what} = {v} is out of range")))
}

pub fn from_binary(bytes: &[u8]) -> Result<PathEnsemble> {
    let mut r = Reader { bytes };
    if r.take(8, "magic")? != BINARY_MAGIC {
        return Err(Error::Decode("bad magic header".into()));
    }
    let seed = r.u64("seed")?;
    let samples = small(r.u64("M")?, "M")?;
    let m = small(r.u64("m")?, "m")?;
    let dim = small(r.u64("K")?, "K")?;
    let tag = r.u64("model tag")?;
    let cells = samples as u128 * m as u128 * dim as u128;
    if cells > MAX_CELLS {
        return Err(Error::Capacity {
            requested: cells,
            limit: MAX_CELLS,
        });
    }
    // every cell needs 8 bytes; reject before allocating
    if (r.bytes.len() as u128) < 8 * (cells + (samples * m) as u128) {
        return Err(Error::Decode("input shorter than declared dimensions".into()));
    }
    let grid = TimeGrid::new(r.f64s(m, "grid")?)?;
    let model = match tag {
        0 => {
            let drift = r.f64s(dim, "drift")?;
            LevyModel::gaussian(drift, r.f64s(dim, "variances")?)?
        }
        1 => LevyModel::lp_compound_poisson(r.f64s(dim, "rates")?)?,
        2 => {
            let rate = r.f64s(1, "rate")?[0];
            LevyModel::bernoulli_compound(rate, r.f64s(dim, "probs")?)?
        }
        3 => LevyModel::skellam(LambdaProfile::new(r.f64s(dim, "lambdas")?)?),
        other => return Err(Error::Decode(format!("unknown model tag {other}"))),
    };
    let increments = r.f64s(cells as usize, "increments")?;
    let counts = (0..samples * m)
        .map(|_| r.u64("jump counts"))
        .collect::<Result<Vec<_>>>()?;
    if !r.bytes.is_empty() {
        return Err(Error::Decode(format!("{} trailing bytes", r.bytes.len())));
    }
    PathEnsemble::from_parts(model, grid, samples, seed, increments, counts)
}
