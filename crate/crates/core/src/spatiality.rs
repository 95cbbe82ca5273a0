//! Constructive side of the type classification.
//!
//! - Hermite polynomials and the linear system that recovers them from
//!   exponential (Cameron–Martin) probes.
//! - The whitening change of variables that turns a cylindrical Gaussian
//!   vector into a standard one.
//! - Least-squares residuals of a target against growing dictionaries of
//!   exponential functions, as empirical evidence of density.
//! - The centered-indicator vector of the Skellam family, orthogonal to
//!   every unit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::levy::{FiniteFunctional, LevyModel};
use crate::simulate::PathView;
use crate::skellam::{prob_zero, LambdaProfile};
use crate::stats::{ComplexEstimate, Estimate};

/// Largest Hermite degree accepted by [`hermite`].
pub const MAX_HERMITE_DEGREE: usize = 30;

/// Probabilists' Hermite polynomial `He_k(y)` by the three-term recurrence
/// `He_{k+1} = y·He_k − k·He_{k−1}`.
pub fn hermite(k: usize, y: f64) -> Result<f64> {
    if k > MAX_HERMITE_DEGREE {
        return Err(Error::invalid("k", format!("degree {k} exceeds {MAX_HERMITE_DEGREE}")));
    }
    Ok(hermite_unchecked(k, y))
}

fn hermite_unchecked(k: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, y);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = y * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// A multi-index `α ∈ ℕ₀ⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(parts: Vec<u32>) -> Self {
        Self(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    /// `α! = Π α_i!`.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).map(f64::from).product::<f64>())
            .product()
    }

    /// `z^α = Π z_i^{α_i}`.
    pub fn monomial(&self, z: &[f64]) -> f64 {
        self.0.iter().zip(z).map(|(&a, &x)| x.powi(a as i32)).product()
    }

    /// `H_α(y) = Π He_{α_i}(y_i)`.
    pub fn hermite(&self, y: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(y)
            .map(|(&a, &x)| hermite_unchecked(a as usize, x))
            .product()
    }
}

/// All multi-indices of length `n` and degree at most `d`, by increasing
/// degree and then in reverse lexicographic order within a degree.
pub fn multi_indices(n: usize, d: usize) -> Vec<MultiIndex> {
    fn fill(rest: usize, remaining: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if rest == 1 {
            prefix.push(remaining as u32);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in (0..=remaining).rev() {
            prefix.push(a as u32);
            fill(rest - 1, remaining - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for degree in 0..=d {
        fill(n, degree, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// `exp(⟨z, y⟩ − ‖z‖²/2)`.
pub fn generating_function(z: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = z.iter().zip(y).map(|(a, b)| a * b).sum();
    let norm_sq: f64 = z.iter().map(|a| a * a).sum();
    (dot - 0.5 * norm_sq).exp()
}

/// `Σ_{|α|≤d} z^α/α! · H_α(y)` summed over multi-indices.
pub fn generating_series(z: &[f64], y: &[f64], d: usize) -> f64 {
    multi_indices(z.len(), d)
        .iter()
        .map(|a| a.monomial(z) / a.factorial() * a.hermite(y))
        .sum()
}

/// The same truncated series through the one-dimensional reduction
/// `Σ_{|α|=j} z^α/α! H_α(y) = ‖z‖^j/j! · He_j(⟨z, y⟩/‖z‖)`.
pub fn generating_series_radial(z: &[f64], y: &[f64], d: usize) -> f64 {
    let norm = z.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 1.0;
    }
    let w = z.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / norm;
    let mut coeff = 1.0;
    let mut total = 0.0;
    for j in 0..=d {
        if j > 0 {
            coeff *= norm / j as f64;
        }
        total += coeff * hermite_unchecked(j, w);
    }
    total
}

/// How probe vectors `z̃_k` are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbeRule {
    /// The multi-indices themselves, read as vectors and multiplied by
    /// `scale`. The principal lattice is unisolvent for total degree `d`.
    Lattice { scale: f64 },
    /// Caller-supplied probes, one per multi-index.
    Explicit(Vec<Vec<f64>>),
}

impl Default for ProbeRule {
    fn default() -> Self {
        Self::Lattice { scale: 1.0 }
    }
}

/// The square system `A_{k,β} = z̃_k^β / β!` linking exponential probes to
/// Hermite polynomials of degree at most `d`.
#[derive(Clone, Debug)]
pub struct HermiteSystem {
    pub dim: usize,
    pub degree: usize,
    pub indices: Vec<MultiIndex>,
    pub probes: Vec<Vec<f64>>,
    pub matrix: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    /// 2-norm condition number of `matrix`.
    pub condition: f64,
    /// Number of perturbation retries used (0 when the rule worked as is).
    pub retries: usize,
}

/// Condition numbers beyond this are treated as singular.
const SINGULAR_CONDITION: f64 = 1e13;
const MAX_PROBE_RETRIES: usize = 5;

fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn jitter(attempt: usize, k: usize, i: usize) -> f64 {
    // fractional parts of a golden-ratio sequence, centered on 0
    let x = ((attempt * 131 + k * 17 + i * 7 + 1) as f64 * 0.618_033_988_749_895).fract();
    0.1 * attempt as f64 * (x - 0.5)
}

pub fn build_hermite_system(n: usize, d: usize, rule: &ProbeRule) -> Result<HermiteSystem> {
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be positive"));
    }
    let indices = multi_indices(n, d);
    let base: Vec<Vec<f64>> = match rule {
        ProbeRule::Lattice { scale } => indices
            .iter()
            .map(|b| b.parts().iter().map(|&a| scale * f64::from(a)).collect())
            .collect(),
        ProbeRule::Explicit(probes) => {
            if probes.len() != indices.len() {
                return Err(Error::invalid(
                    "probes",
                    format!("{} probes for {} multi-indices", probes.len(), indices.len()),
                ));
            }
            if let Some(p) = probes.iter().find(|p| p.len() != n) {
                return Err(Error::invalid("probes", format!("probe {p:?} does not have length {n}")));
            }
            probes.clone()
        }
    };
    let mut last_condition = f64::INFINITY;
    for attempt in 0..=MAX_PROBE_RETRIES {
        let probes: Vec<Vec<f64>> = base
            .iter()
            .enumerate()
            .map(|(k, p)| p.iter().enumerate().map(|(i, &v)| v + jitter(attempt, k, i)).collect())
            .collect();
        let size = indices.len();
        let matrix = DMatrix::from_fn(size, size, |k, j| indices[j].monomial(&probes[k]) / indices[j].factorial());
        let condition = condition_number(&matrix);
        last_condition = condition;
        if condition.is_finite() && condition < SINGULAR_CONDITION {
            if let Some(inverse) = matrix.clone().try_inverse() {
                return Ok(HermiteSystem {
                    dim: n,
                    degree: d,
                    indices,
                    probes,
                    matrix,
                    inverse,
                    condition,
                    retries: attempt,
                });
            }
        }
    }
    Err(Error::SingularSystem {
        attempts: MAX_PROBE_RETRIES + 1,
        condition: last_condition,
    })
}

impl HermiteSystem {
    /// Truncated generating-function value of every probe at `y`.
    pub fn probe_values(&self, y: &[f64]) -> Vec<f64> {
        self.probes
            .iter()
            .map(|z| generating_series_radial(z, y, self.degree))
            .collect()
    }

    /// `A⁻¹ v`: Hermite values `H_β(ỹ)` in the order of `indices`.
    pub fn reconstruct(&self, probe_values: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(probe_values);
        (&self.inverse * v).iter().copied().collect()
    }
}

/// The change of variables `ỹ = t^{-1/2} Σ^{-1/2} y`, `z̃ = t^{1/2} Σ^{1/2} z`.
#[derive(Clone, Debug)]
pub struct Whitening {
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
    t: f64,
}

impl Whitening {
    pub fn new(sigma: &DMatrix<f64>, t: f64) -> Result<Self> {
        if !sigma.is_square() {
            return Err(Error::invalid("sigma", "covariance must be square"));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid("t", format!("{t} is not a positive time")));
        }
        let n = sigma.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (sigma[(i, j)], sigma[(j, i)]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::invalid("sigma", format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        let eig = SymmetricEigen::new(sigma.clone());
        let scale = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if let Some((index, &eigenvalue)) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v > 1e-14 * scale) || !v.is_finite())
        {
            return Err(Error::NotPositiveDefinite { index, eigenvalue });
        }
        let v = &eig.eigenvectors;
        let root = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let inv_root = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()));
        Ok(Self {
            sqrt: v * root * v.transpose(),
            inv_sqrt: v * inv_root * v.transpose(),
            t,
        })
    }

    pub fn whiten(&self, y: &[f64]) -> Vec<f64> {
        let out = &self.inv_sqrt * DVector::from_column_slice(y) / self.t.sqrt();
        out.iter().copied().collect()
    }

    pub fn dual(&self, z: &[f64]) -> Vec<f64> {
        let out = &self.sqrt * DVector::from_column_slice(z) * self.t.sqrt();
        out.iter().copied().collect()
    }
}

/// `Σ_{ij} = Q(ψ_i, ψ_j)` for a diagonal Gaussian model.
pub fn covariance_matrix(model: &LevyModel, psis: &[FiniteFunctional]) -> Result<DMatrix<f64>> {
    let LevyModel::GaussianDiagonal { variances, .. } = model else {
        return Err(Error::Precondition(format!(
            "covariance form needs a gaussian model, got {}",
            model.kind()
        )));
    };
    for psi in psis {
        psi.check_within(variances.len())?;
    }
    Ok(DMatrix::from_fn(psis.len(), psis.len(), |i, j| {
        psis[i]
            .iter()
            .map(|(n, v)| variances[n - 1] * v * psis[j].get(n))
            .sum()
    }))
}

/// Relative least-squares residuals at each requested dictionary budget.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualCurve {
    /// `(J, ‖target − projection‖ / ‖target‖)`.
    pub points: Vec<(usize, f64)>,
    /// Dictionary members dropped as numerically dependent.
    pub dependent: Vec<usize>,
}

impl ResidualCurve {
    pub fn rank_deficient(&self) -> bool {
        !self.dependent.is_empty()
    }

    pub fn is_non_increasing(&self, slack: f64) -> bool {
        self.points.windows(2).all(|w| w[1].1 <= w[0].1 + slack)
    }
}

/// Columns whose remaining squared norm falls below this are treated as
/// dependent; matches a ridge penalty of the same size on the Gram matrix.
pub const RIDGE_PENALTY: f64 = 1e-10;

/// Residual of projecting `target(L_t)` onto `span{exp(i⟨φ_j, L_t⟩) : j < J}`
/// under the empirical law of the view, for each `J` in `budgets`.
///
/// The projection is built column by column with twice-iterated classical
/// Gram–Schmidt, so budgets are nested by construction.
pub fn exponential_density_residual(
    view: &PathView<'_>,
    t: f64,
    target: &dyn Fn(&[f64]) -> Complex64,
    dictionary: &[FiniteFunctional],
    budgets: &[usize],
) -> Result<ResidualCurve> {
    if budgets.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("budgets", "must be non-decreasing"));
    }
    if let Some(&b) = budgets.iter().find(|&&b| b > dictionary.len()) {
        return Err(Error::invalid(
            "budgets",
            format!("budget {b} exceeds dictionary size {}", dictionary.len()),
        ));
    }
    for phi in dictionary {
        phi.check_within(view.dim())?;
    }
    let positions = view.positions(t)?;
    let dim = view.dim();
    let m = view.samples();
    let scale = 1.0 / (m as f64).sqrt();

    let y: Vec<Complex64> = positions.chunks(dim).map(|x| target(x) * scale).collect();
    let y_norm = norm(&y);
    let relative = |r: &[Complex64]| if y_norm > 0.0 { norm(r) / y_norm } else { norm(r) };

    let mut residual = y.clone();
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut dependent = Vec::new();
    let mut points = Vec::with_capacity(budgets.len());
    let mut next_budget = budgets.iter().peekable();
    while let Some(&&b) = next_budget.peek() {
        if b == 0 {
            points.push((0, relative(&residual)));
            next_budget.next();
        } else {
            break;
        }
    }
    let j_max = budgets.last().copied().unwrap_or(0);
    for (j, phi) in dictionary.iter().enumerate().take(j_max) {
        let mut v: Vec<Complex64> = positions
            .chunks(dim)
            .map(|x| Complex64::new(0.0, phi.pair(x)).exp() * scale)
            .collect();
        let original = norm(&v);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let remaining = norm(&v);
        if remaining * remaining < RIDGE_PENALTY * original * original {
            dependent.push(j);
        } else {
            v.iter_mut().for_each(|x| *x /= remaining);
            let c = dot(&v, &residual);
            axpy(-c, &v, &mut residual);
            basis.push(v);
        }
        while let Some(&&b) = next_budget.peek() {
            if b == j + 1 {
                points.push((b, relative(&residual)));
                next_budget.next();
            } else {
                break;
            }
        }
    }
    Ok(ResidualCurve { points, dependent })
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(c: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Frequencies `k·spacing·e_coord` for `k = 0, 1, −1, 2, −2, …`, `count` of
/// them.
pub fn axis_lattice(coord: usize, spacing: f64, count: usize) -> Result<Vec<FiniteFunctional>> {
    (0..count)
        .map(|j| {
            let k = ((j + 1) / 2) as f64 * if j % 2 == 1 { 1.0 } else { -1.0 };
            FiniteFunctional::coordinate(coord, k * spacing)
        })
        .collect()
}

/// The centered indicator of `{X_n = 0}`: `1 − p` at zero, `−p` elsewhere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CenteredIndicatorFactor {
    pub coordinate: usize,
    pub p_zero: f64,
}

impl CenteredIndicatorFactor {
    pub fn new(profile: &LambdaProfile, n: usize, t: f64) -> Result<Self> {
        Ok(Self {
            coordinate: n,
            p_zero: prob_zero(profile, n, t)?,
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        if x == 0.0 {
            1.0 - self.p_zero
        } else {
            -self.p_zero
        }
    }

    /// `E[φ_n²] = p(1 − p)`.
    pub fn second_moment(&self) -> f64 {
        self.p_zero * (1.0 - self.p_zero)
    }
}

/// `∫ φ_n e^{i f X_{n,t}} dP = p_n (1 − Φ_n(f))`, with `f` reduced modulo
/// `2π` first since the coordinate law lives on `ℤ`.
pub fn orthogonal_factor(profile: &LambdaProfile, n: usize, t: f64, f: f64) -> Result<Complex64> {
    let p = prob_zero(profile, n, t)?;
    let f = f.rem_euclid(std::f64::consts::TAU);
    if f == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let phi = (t * profile.coordinate_exponent(n, f)).exp();
    Ok(p * (1.0 - phi))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalityCheck {
    /// `Π_{n≤K}` of the orthogonal factors.
    pub analytic: Complex64,
    /// Monte Carlo `mean[ψ_K · conj(u_f)]`.
    pub estimate: ComplexEstimate,
    /// `‖ψ_K‖² = Π p_n(1 − p_n)`.
    pub norm_sq: f64,
    pub norm_sq_estimate: Estimate,
}

/// Inner product of the truncated orthogonal vector `ψ_K` with the unit
/// `u_f(t)` on a Skellam-family ensemble.
pub fn orthogonality_check(view: &PathView<'_>, t: f64, f: &FiniteFunctional) -> Result<OrthogonalityCheck> {
    let LevyModel::SkellamFamily { profile } = view.model() else {
        return Err(Error::Precondition(format!(
            "orthogonality check needs a skellam model, got {}",
            view.model().kind()
        )));
    };
    let k = profile.dim();
    f.check_within(k)?;
    if f.support().len() == k {
        return Err(Error::Precondition(format!(
            "support of f covers all of 1..={k}; the truncated product only vanishes when some coordinate \
             within the truncation has f_n = 0, so increase K beyond the support"
        )));
    }
    let factors: Vec<CenteredIndicatorFactor> = (1..=k)
        .map(|n| CenteredIndicatorFactor::new(profile, n, t))
        .collect::<Result<_>>()?;
    let mut analytic = Complex64::new(1.0, 0.0);
    for n in 1..=k {
        analytic *= orthogonal_factor(profile, n, t, f.get(n))?;
    }
    let positions = view.positions(t)?;
    let mut prods = Vec::with_capacity(view.samples());
    let mut squares = vec![Vec::with_capacity(view.samples()); k];
    for x in positions.chunks(k) {
        let mut psi = 1.0;
        for ((c, &v), sq) in factors.iter().zip(x).zip(squares.iter_mut()) {
            let value = c.value(v);
            psi *= value;
            sq.push(value * value);
        }
        let unit = Complex64::new(0.0, f.pair(x)).exp();
        prods.push(psi * unit.conj());
    }
    // The direct mean of ψ_K² is dominated by samples where every
    // coordinate jumped, which are far too rare to observe for moderate K.
    // Coordinates are independent, so the product of per-coordinate second
    // moments estimates the same quantity without that degeneracy.
    let mut mean = 1.0;
    let mut rel_var = 0.0;
    for sq in &squares {
        let e = Estimate::from_samples(sq);
        mean *= e.mean;
        rel_var += (e.stderr / e.mean).powi(2);
    }
    Ok(OrthogonalityCheck {
        analytic,
        estimate: ComplexEstimate::from_samples(&prods),
        norm_sq: factors.iter().map(|c| c.second_moment()).product(),
        norm_sq_estimate: Estimate {
            mean,
            stderr: mean.abs() * rel_var.sqrt(),
        },
    })
}
