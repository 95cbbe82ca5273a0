//! Reference computations shared by the integration tests. None of these
//! call into the library's closed forms.
#![allow(dead_code)]

use num_complex::Complex64;

/// Poisson pmf `e^{-μ} μ^k / k!` for `k = 0..len`, by the ratio recurrence.
pub fn poisson_pmfs(mu: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut p = (-mu).exp();
    for k in 0..len {
        out.push(p);
        p *= mu / (k + 1) as f64;
    }
    out
}

/// `P(N⁺ − N⁻ = k)` by direct convolution of two Poisson laws, truncated at
/// `terms` per side.
pub fn skellam_by_convolution(mu1: f64, mu2: f64, k: i64, terms: usize) -> f64 {
    let up = poisson_pmfs(mu1, terms + k.unsigned_abs() as usize + 1);
    let down = poisson_pmfs(mu2, terms + k.unsigned_abs() as usize + 1);
    (0..=terms)
        .filter_map(|j| {
            let i = j as i64 + k;
            (i >= 0).then(|| up[i as usize] * down[j])
        })
        .sum()
}

/// `E[e^{iφ(N⁺ − N⁻)}]` as a double Poisson series.
pub fn skellam_charfn_by_series(mu1: f64, mu2: f64, phi: f64, terms: usize) -> Complex64 {
    let up = poisson_pmfs(mu1, terms);
    let down = poisson_pmfs(mu2, terms);
    let mut total = Complex64::new(0.0, 0.0);
    for (i, a) in up.iter().enumerate() {
        for (j, b) in down.iter().enumerate() {
            total += a * b * Complex64::from_polar(1.0, phi * (i as f64 - j as f64));
        }
    }
    total
}

/// `E[e^{iφ λ N}]` for `N ~ Poisson(rate·t)`, by series.
pub fn scaled_poisson_charfn(rate: f64, jump: f64, phi: f64, t: f64, terms: usize) -> Complex64 {
    poisson_pmfs(rate * t, terms)
        .iter()
        .enumerate()
        .map(|(k, p)| p * Complex64::from_polar(1.0, phi * jump * k as f64))
        .sum()
}

/// `E[e^{i⟨φ, B⟩}]` for a vector of independent Bernoulli(p_n), by summing
/// over all `2^K` outcomes.
pub fn bernoulli_vector_charfn(probs: &[f64], phi: &[f64]) -> Complex64 {
    let k = probs.len();
    let mut total = Complex64::new(0.0, 0.0);
    for mask in 0u32..(1 << k) {
        let mut weight = 1.0;
        let mut angle = 0.0;
        for n in 0..k {
            if mask >> n & 1 == 1 {
                weight *= probs[n];
                angle += phi[n];
            } else {
                weight *= 1.0 - probs[n];
            }
        }
        total += weight * Complex64::from_polar(1.0, angle);
    }
    total
}

/// `E[e^{i⟨φ, Σ_{j≤N} B_j⟩}]` with `N ~ Poisson(rate·t)`, by conditioning on
/// `N`.
pub fn compound_bernoulli_charfn(rate: f64, probs: &[f64], phi: &[f64], t: f64, terms: usize) -> Complex64 {
    let jump = bernoulli_vector_charfn(probs, phi);
    poisson_pmfs(rate * t, terms)
        .iter()
        .enumerate()
        .map(|(n, p)| p * jump.powu(n as u32))
        .sum()
}

/// Small deterministic generator for choosing test cases (SplitMix64).
pub struct CaseRng(u64);

impl CaseRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
