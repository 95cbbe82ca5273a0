//! Small Monte Carlo estimators. All reductions run sequentially in sample
//! order so that results do not depend on the thread count.

use num_complex::Complex64;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, stderr: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
        }
    }

    /// `|mean − target| ≤ sigmas · stderr`.
    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.stderr
    }
}

/// Complex sample mean. The standard error is the root-mean-square of the
/// real-part and imaginary-part standard deviations, divided by `√M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexEstimate {
    pub mean: Complex64,
    pub stderr: f64,
}

impl ComplexEstimate {
    pub fn from_samples(values: &[Complex64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: Complex64::new(f64::NAN, f64::NAN),
                stderr: f64::NAN,
            };
        }
        let mean = values.iter().sum::<Complex64>() / n as f64;
        if n == 1 {
            return Self { mean, stderr: 0.0 };
        }
        let (mut ss_re, mut ss_im) = (0.0, 0.0);
        for v in values {
            ss_re += (v.re - mean.re).powi(2);
            ss_im += (v.im - mean.im).powi(2);
        }
        let denom = (n - 1) as f64;
        let rms_var = 0.5 * (ss_re / denom + ss_im / denom);
        Self {
            mean,
            stderr: (rms_var / n as f64).sqrt(),
        }
    }

    pub fn gap(&self, target: Complex64) -> f64 {
        (self.mean - target).norm()
    }

    pub fn within(&self, target: Complex64, sigmas: f64) -> bool {
        self.gap(target) <= sigmas * self.stderr
    }
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value `c(α)·√((n+m)/(nm))` with
/// `c(α) = √(−ln(α/2)/2)`.
pub fn ks_critical_value(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

/// Pearson correlation of two equal-length samples.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}
