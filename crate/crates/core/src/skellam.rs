//! Skellam machinery for the λ-indexed jump family `X^λ`.
//!
//! Coordinate `n` of `X^λ_t` is the difference of independent Poisson
//! counts with means `2^{-n}λ_n t` and `2^{-n}(1−λ_n) t`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::levy::FiniteFunctional;

/// Parameters of the difference `N₁ − N₂` of independent Poissons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkellamParams {
    mu1: f64,
    mu2: f64,
}

impl SkellamParams {
    pub fn new(mu1: f64, mu2: f64) -> Result<Self> {
        for (name, v) in [("mu1", mu1), ("mu2", mu2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("{v} is not a finite nonnegative mean")));
            }
        }
        Ok(Self { mu1, mu2 })
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }
}

fn ln_factorial_exact(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Modified Bessel function `I_ν(x)` for integer order via its ascending
/// series, returned as `(ln lead, series)` with
/// `I_ν(x) = exp(ln lead) · series`, `lead = (x/2)^ν / ν!`. Terms are summed
/// until they fall below `1e-18` of the running sum.
fn bessel_i_scaled(nu: u64, x: f64) -> (f64, f64) {
    let half = 0.5 * x;
    let ln_lead = if nu == 0 {
        0.0
    } else {
        nu as f64 * half.ln() - ln_factorial_exact(nu)
    };
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0u64;
    loop {
        m += 1;
        term *= q / (m as f64 * (m + nu) as f64);
        sum += term;
        if term < 1e-18 * sum || m > 10_000 {
            break;
        }
    }
    (ln_lead, sum)
}

/// Modified Bessel function of the first kind, integer order.
pub fn bessel_i(nu: u64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    let (ln_lead, sum) = bessel_i_scaled(nu, x);
    ln_lead.exp() * sum
}

fn poisson_pmf(mean: f64, k: u64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-mean + k as f64 * mean.ln() - ln_factorial_exact(k)).exp()
}

/// `P(N₁ − N₂ = k) = e^{−(μ₁+μ₂)} (μ₁/μ₂)^{k/2} I_{|k|}(2√(μ₁μ₂))`, with the
/// one-sided Poisson cases handled without forming the ratio.
pub fn skellam_pmf(p: SkellamParams, k: i64) -> f64 {
    let (mu1, mu2) = (p.mu1, p.mu2);
    if mu2 == 0.0 {
        return if k >= 0 { poisson_pmf(mu1, k as u64) } else { 0.0 };
    }
    if mu1 == 0.0 {
        return if k <= 0 { poisson_pmf(mu2, k.unsigned_abs()) } else { 0.0 };
    }
    let nu = k.unsigned_abs();
    let x = 2.0 * (mu1 * mu2).sqrt();
    let (ln_lead, sum) = bessel_i_scaled(nu, x);
    let ln_ratio = 0.5 * k as f64 * (mu1.ln() - mu2.ln());
    (-(mu1 + mu2) + ln_ratio + ln_lead).exp() * sum
}

/// A point `λ ∈ [0,1]^K` with dyadic weights `α_n = 2^{-n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaProfile {
    lambdas: Vec<f64>,
}

impl LambdaProfile {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::invalid("lambdas", "at least one coordinate is required"));
        }
        if let Some(i) = lambdas.iter().position(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::invalid(
                "lambdas",
                format!("entry {} ({}) is outside [0, 1]", i + 1, lambdas[i]),
            ));
        }
        Ok(Self { lambdas })
    }

    pub fn constant(value: f64, dim: usize) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// `λ_n` for `n ∈ 1..=K`.
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambdas[n - 1]
    }

    /// `α_n = 2^{-n}`.
    pub fn weight(n: usize) -> f64 {
        (-(n as f64)).exp2()
    }

    /// Skellam parameters of coordinate `n` at time `t`.
    pub fn coordinate_params(&self, n: usize, t: f64) -> Result<SkellamParams> {
        self.check_index(n)?;
        let a = Self::weight(n);
        SkellamParams::new(a * self.lambda(n) * t, a * (1.0 - self.lambda(n)) * t)
    }

    /// Truncated Lévy-measure mass `Σ_{n≤K} α_n = 1 − 2^{-K}`.
    pub fn levy_mass(&self) -> f64 {
        (1..=self.dim())
            .map(|n| Self::weight(n) * (self.lambda(n) + (1.0 - self.lambda(n))))
            .sum()
    }

    /// Drift `b_n = α_n(2λ_n − 1)`.
    pub fn drift(&self) -> Vec<f64> {
        (1..=self.dim())
            .map(|n| Self::weight(n) * (2.0 * self.lambda(n) - 1.0))
            .collect()
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.dim() {
            return Err(Error::OutOfTruncation { index: n, dim: self.dim() });
        }
        Ok(())
    }

    /// Summand of coordinate `n`: `α_n[(cos φ − 1) + i(2λ_n − 1) sin φ]`.
    pub fn coordinate_exponent(&self, n: usize, phi: f64) -> Complex64 {
        let skew = 2.0 * self.lambda(n) - 1.0;
        // sin is evaluated on |φ| so that negating φ conjugates exactly
        let s = if phi < 0.0 { -(-phi).sin() } else { phi.sin() };
        Self::weight(n) * Complex64::new(phi.cos() - 1.0, skew * s)
    }
}

/// `P(X_{n,t} = 0)`.
pub fn prob_zero(profile: &LambdaProfile, n: usize, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid("t", format!("{t} is not a positive time")));
    }
    Ok(skellam_pmf(profile.coordinate_params(n, t)?, 0))
}

/// `Ψ_λ(φ) = Σ_n α_n[(cos φ_n − 1) + i(2λ_n − 1) sin φ_n]`.
pub fn psi_lambda(profile: &LambdaProfile, phi: &FiniteFunctional) -> Result<Complex64> {
    phi.check_within(profile.dim())?;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, v) in phi.iter() {
        let z = profile.coordinate_exponent(n, v);
        re += z.re;
        im += z.im;
    }
    Ok(Complex64::new(re, im))
}

/// `exp(z)` arranged so that `exp(conj z) = conj(exp z)` bit for bit.
fn exp_conj_exact(z: Complex64) -> Complex64 {
    let r = z.re.exp();
    let a = z.im.abs();
    let im = r * a.sin();
    Complex64::new(r * a.cos(), if z.im < 0.0 { -im } else { im })
}

/// `⟨u_f(t), u_g(t)⟩ = exp(tΨ_λ(f − g))`.
pub fn unit_inner_product(
    profile: &LambdaProfile,
    f: &FiniteFunctional,
    g: &FiniteFunctional,
    t: f64,
) -> Result<Complex64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid("t", format!("{t} is not a positive time")));
    }
    let psi = psi_lambda(profile, &(f - g))?;
    Ok(exp_conj_exact(t * psi))
}

/// Outcome of comparing two exponent families coordinate by coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct Discrimination {
    /// `max_{n, φ} |Ψ_a(φ e_n) − Ψ_b(φ e_n)|` over the scan grid.
    pub max_gap: f64,
    /// First coordinate whose gap exceeds `10·ε·α_n`.
    pub coordinate: Option<usize>,
    /// Per-coordinate maxima, index 0 being coordinate 1.
    pub gaps: Vec<f64>,
    /// Smallest gap that can be certified at the deepest coordinate,
    /// `10·ε·α_K`.
    pub resolution: f64,
}

/// Scans single-coordinate functionals `φ e_n` with `φ` on an equispaced
/// grid of `[0, 2π)` and reports where the two exponents differ.
pub fn discriminate(a: &LambdaProfile, b: &LambdaProfile, grid_points_per_coordinate: usize) -> Result<Discrimination> {
    if a.dim() != b.dim() {
        return Err(Error::Precondition(format!(
            "profiles have different truncations ({} and {})",
            a.dim(),
            b.dim()
        )));
    }
    if grid_points_per_coordinate == 0 {
        return Err(Error::invalid("grid_points_per_coordinate", "must be positive"));
    }
    let floor = 10.0 * f64::EPSILON;
    let mut gaps = Vec::with_capacity(a.dim());
    let mut coordinate = None;
    for n in 1..=a.dim() {
        let gap = (0..grid_points_per_coordinate)
            .map(|j| {
                let phi = TAU * j as f64 / grid_points_per_coordinate as f64;
                (a.coordinate_exponent(n, phi) - b.coordinate_exponent(n, phi)).norm()
            })
            .fold(0.0, f64::max);
        if coordinate.is_none() && gap > floor * LambdaProfile::weight(n) {
            coordinate = Some(n);
        }
        gaps.push(gap);
    }
    Ok(Discrimination {
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
        coordinate,
        gaps,
        resolution: floor * LambdaProfile::weight(a.dim()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_poisson_cases() {
        let p = SkellamParams::new(1.0, 0.0).unwrap();
        assert!((skellam_pmf(p, 2) - (-1.0f64).exp() / 2.0).abs() < 1e-16);
        assert_eq!(skellam_pmf(p, -1), 0.0);
        let q = SkellamParams::new(0.0, 2.0).unwrap();
        assert!((skellam_pmf(q, -3) - (-2.0f64).exp() * 8.0 / 6.0).abs() < 1e-16);
        assert_eq!(skellam_pmf(q, 1), 0.0);
        let z = SkellamParams::new(0.0, 0.0).unwrap();
        assert_eq!(skellam_pmf(z, 0), 1.0);
        assert_eq!(skellam_pmf(z, 1), 0.0);
    }

    #[test]
    fn symmetric_pmf_is_even() {
        let p = SkellamParams::new(0.8, 0.8).unwrap();
        for k in 0..30 {
            assert_eq!(skellam_pmf(p, k), skellam_pmf(p, -k));
        }
    }

    #[test]
    fn params_reject_negative() {
        assert!(SkellamParams::new(-0.1, 1.0).is_err());
        assert!(SkellamParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn bessel_small_order_values() {
        // I_0(1) = 1.2660658777520082, I_1(1) = 0.5651591039924851
        assert!((bessel_i(0, 1.0) - 1.266_065_877_752_008_2).abs() < 1e-15);
        assert!((bessel_i(1, 1.0) - 0.565_159_103_992_485_1).abs() < 1e-15);
        assert_eq!(bessel_i(3, 0.0), 0.0);
    }

    #[test]
    fn profile_invariants() {
        let p = LambdaProfile::new(vec![0.1, 0.9, 0.5, 1.0]).unwrap();
        assert_eq!(LambdaProfile::weight(1), 0.5);
        assert_eq!(LambdaProfile::weight(10), 2f64.powi(-10));
        assert!((p.levy_mass() - (1.0 - 2f64.powi(-4))).abs() < 1e-16);
        assert!(LambdaProfile::new(vec![1.1]).is_err());
        assert!(LambdaProfile::new(vec![]).is_err());
        assert!(p.coordinate_params(5, 1.0).is_err());
    }

    #[test]
    fn prob_zero_edges() {
        let p = LambdaProfile::new(vec![0.0, 1.0, 0.5]).unwrap();
        for n in 1..=2 {
            let expected = (-LambdaProfile::weight(n) * 2.0).exp();
            assert!((prob_zero(&p, n, 2.0).unwrap() - expected).abs() < 1e-15);
        }
        assert!(prob_zero(&p, 1, 1e-8).unwrap() > 1.0 - 1e-6);
        assert!(prob_zero(&p, 1, 0.0).is_err());
    }

    #[test]
    fn psi_real_part_nonpositive_and_zero_at_origin() {
        let p = LambdaProfile::new(vec![0.2, 0.7, 0.5]).unwrap();
        assert_eq!(psi_lambda(&p, &FiniteFunctional::zero()).unwrap(), Complex64::new(0.0, 0.0));
        let phi = FiniteFunctional::from_dense(&[1.0, -4.0, 2.5]).unwrap();
        assert!(psi_lambda(&p, &phi).unwrap().re < 0.0);
        let lattice = FiniteFunctional::from_dense(&[TAU, -2.0 * TAU, 0.0]).unwrap();
        assert!(psi_lambda(&p, &lattice).unwrap().re.abs() < 1e-15);
    }

    #[test]
    fn inner_product_conjugate_symmetry_is_exact() {
        let p = LambdaProfile::new(vec![0.2, 0.7, 0.5, 0.9]).unwrap();
        let f = FiniteFunctional::from_dense(&[0.3, -1.1, 2.0, 0.0]).unwrap();
        let g = FiniteFunctional::from_dense(&[1.7, 0.0, -0.4, 3.3]).unwrap();
        let fg = unit_inner_product(&p, &f, &g, 0.7).unwrap();
        let gf = unit_inner_product(&p, &g, &f, 0.7).unwrap();
        assert_eq!(fg, gf.conj());
        assert_eq!(unit_inner_product(&p, &f, &f, 1.0).unwrap(), Complex64::new(1.0, 0.0));
        assert!(fg.norm() < 1.0);
    }

    #[test]
    fn discriminate_identical_and_single_coordinate() {
        let a = LambdaProfile::new(vec![0.3; 6]).unwrap();
        let same = discriminate(&a, &a, 64).unwrap();
        assert_eq!(same.max_gap, 0.0);
        assert_eq!(same.coordinate, None);

        let mut l = vec![0.3; 6];
        l[0] += 0.2;
        let b = LambdaProfile::new(l).unwrap();
        let d = discriminate(&a, &b, 64).unwrap();
        assert_eq!(d.coordinate, Some(1));
        // 2·α₁·δ = δ
        assert!((d.max_gap - 0.2).abs() <= 1e-3 * 0.2);
        assert!(discriminate(&a, &LambdaProfile::new(vec![0.3]).unwrap(), 8).is_err());
    }
}
