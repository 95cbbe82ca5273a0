//! Units of the product system evaluated on simulated paths.
//!
//! A unit is a family `u(t)` with `u(s+t) = u(s) · (u(t) ∘ σ_s)`. Three
//! families are supported: exponential units `exp(i⟨φ, L_t⟩)`, the
//! Cameron–Martin units `exp(⟨ĥ, L_t⟩ − t‖h‖²_H/2)` of a Gaussian model and
//! the parity unit `(−1)^{N_t}` of a compound Poisson model.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::levy::{FiniteFunctional, LevyModel};
use crate::simulate::{PathEnsemble, PathView};
use crate::stats::{ComplexEstimate, Estimate};

/// A Cameron–Martin direction `h` of a diagonal Gaussian model, together
/// with its dual representative `ĥ_n = h_n / q_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CameronMartinVector {
    h: Vec<f64>,
    variances: Vec<f64>,
    dual: Vec<f64>,
    norm_sq: f64,
}

impl CameronMartinVector {
    pub fn new(h: Vec<f64>, variances: &[f64]) -> Result<Self> {
        if h.len() != variances.len() {
            return Err(Error::invalid(
                "h",
                format!("has {} entries, covariance has {}", h.len(), variances.len()),
            ));
        }
        if let Some(i) = variances.iter().position(|&q| !(q.is_finite() && q > 0.0)) {
            return Err(Error::invalid("variances", format!("entry {} is not positive", i + 1)));
        }
        if let Some(i) = h.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("h", format!("entry {} is not finite", i + 1)));
        }
        let dual: Vec<f64> = h.iter().zip(variances).map(|(h, q)| h / q).collect();
        let norm_sq = h.iter().zip(variances).map(|(h, q)| h * h / q).sum();
        Ok(Self {
            h,
            variances: variances.to_vec(),
            dual,
            norm_sq,
        })
    }

    /// Direction for a Gaussian model; other models have no Cameron–Martin
    /// space here.
    pub fn for_model(h: Vec<f64>, model: &LevyModel) -> Result<Self> {
        match model {
            LevyModel::GaussianDiagonal { variances, .. } => Self::new(h, variances),
            other => Err(Error::IncompatibleUnit {
                unit: "gaussian",
                model: other.kind(),
            }),
        }
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn dual(&self) -> &[f64] {
        &self.dual
    }

    /// `‖h‖²_H = Σ h_n² / q_n`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `Q(ĥ, ĥ) = Σ q_n ĥ_n²`, which equals `‖h‖²_H`.
    pub fn dual_variance(&self) -> f64 {
        self.dual.iter().zip(&self.variances).map(|(d, q)| q * d * d).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.h.iter().map(|v| c * v).collect(), &self.variances).expect("scaling preserves validity")
    }

    fn matches(&self, model: &LevyModel) -> bool {
        matches!(model, LevyModel::GaussianDiagonal { variances, .. } if *variances == self.variances)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum UnitSpec {
    Exponential { phi: FiniteFunctional },
    Gaussian { h: CameronMartinVector },
    Parity,
}

impl UnitSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Gaussian { .. } => "gaussian",
            Self::Parity => "parity",
        }
    }

    fn check(&self, model: &LevyModel) -> Result<()> {
        let ok = match self {
            Self::Exponential { phi } => {
                phi.check_within(model.dim())?;
                true
            }
            Self::Gaussian { h } => h.matches(model),
            Self::Parity => matches!(model, LevyModel::BernoulliCompound { .. }),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleUnit {
                unit: self.kind(),
                model: model.kind(),
            })
        }
    }

    fn eval_at(&self, view: &PathView<'_>, k: usize, t: f64) -> Vec<Complex64> {
        let dim = view.dim();
        let mut pos = vec![0.0; dim];
        (0..view.samples())
            .map(|i| match self {
                Self::Exponential { phi } => {
                    view.position_at_step(i, k, &mut pos);
                    Complex64::new(0.0, phi.pair(&pos)).exp()
                }
                Self::Gaussian { h } => {
                    view.position_at_step(i, k, &mut pos);
                    let pairing: f64 = h.dual.iter().zip(&pos).map(|(d, x)| d * x).sum();
                    Complex64::new((pairing - 0.5 * t * h.norm_sq).exp(), 0.0)
                }
                Self::Parity => {
                    let sign = if view.count_at_step(i, k) % 2 == 0 { 1.0 } else { -1.0 };
                    Complex64::new(sign, 0.0)
                }
            })
            .collect()
    }
}

/// Per-sample values of `u(t)` on a view (`t` relative to the view start).
pub fn eval_unit(spec: &UnitSpec, view: &PathView<'_>, t: f64) -> Result<Vec<Complex64>> {
    spec.check(view.model())?;
    let k = view.step_of(t)?;
    Ok(spec.eval_at(view, k, t))
}

/// `‖u^h(t)‖ = exp(t‖h‖²_H / 2)`.
pub fn gaussian_unit_norm(h: &CameronMartinVector, t: f64) -> f64 {
    (0.5 * t * h.norm_sq).exp()
}

/// Monte Carlo `√(mean u²)` with a delta-method standard error.
pub fn empirical_unit_norm(values: &[Complex64]) -> Estimate {
    let squares: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
    let e = Estimate::from_samples(&squares);
    let norm = e.mean.sqrt();
    Estimate {
        mean: norm,
        stderr: e.stderr / (2.0 * norm),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Factorization {
    pub max_abs_error: f64,
    pub max_magnitude: f64,
}

impl Factorization {
    pub fn relative(&self) -> f64 {
        if self.max_magnitude == 0.0 {
            self.max_abs_error
        } else {
            self.max_abs_error / self.max_magnitude
        }
    }
}

/// Pathwise `max |u(s+t) − u(s)·(u(t)∘σ_s)|`.
pub fn factorization_check(spec: &UnitSpec, ensemble: &PathEnsemble, s: f64, t: f64) -> Result<Factorization> {
    let base = ensemble.view();
    let shifted = ensemble.shifted_view(s)?;
    let whole = eval_unit(spec, &base, s + t)?;
    let head = eval_unit(spec, &base, s)?;
    let tail = eval_unit(spec, &shifted, t)?;
    let mut out = Factorization {
        max_abs_error: 0.0,
        max_magnitude: 0.0,
    };
    for ((w, a), b) in whole.iter().zip(&head).zip(&tail) {
        out.max_abs_error = out.max_abs_error.max((w - a * b).norm());
        out.max_magnitude = out.max_magnitude.max(w.norm());
    }
    Ok(out)
}

/// A bounded test function of `L_s`.
pub type TestFn<'a> = &'a dyn Fn(&[f64]) -> f64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MartingaleGap {
    pub gap: f64,
    pub stderr: f64,
}

/// Weak form of `E[u^h(s+t) | F_s] = u^h(s)`: for each test function `g`,
/// compares `mean[u(s+t)·g(L_s)]` with `mean[u(s)·g(L_s)]` on shared paths.
pub fn martingale_test(
    h: &CameronMartinVector,
    ensemble: &PathEnsemble,
    s: f64,
    t: f64,
    test_fns: &[TestFn<'_>],
) -> Result<Vec<MartingaleGap>> {
    let spec = UnitSpec::Gaussian { h: h.clone() };
    let view = ensemble.view();
    let later = eval_unit(&spec, &view, s + t)?;
    let now = eval_unit(&spec, &view, s)?;
    let positions = view.positions(s)?;
    let dim = view.dim();
    Ok(test_fns
        .iter()
        .map(|g| {
            let diffs: Vec<f64> = positions
                .chunks(dim)
                .zip(later.iter().zip(&now))
                .map(|(x, (l, n))| (l.re - n.re) * g(x))
                .collect();
            let e = Estimate::from_samples(&diffs);
            MartingaleGap {
                gap: e.mean.abs(),
                stderr: e.stderr,
            }
        })
        .collect())
}

/// Random variables for the multiplication isometry.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    Constant(Complex64),
    Unit(UnitSpec),
    RealPart(UnitSpec),
}

impl Observable {
    fn eval(&self, view: &PathView<'_>, t: f64) -> Result<Vec<Complex64>> {
        match self {
            Self::Constant(c) => {
                view.step_of(t)?;
                Ok(vec![*c; view.samples()])
            }
            Self::Unit(spec) => eval_unit(spec, view, t),
            Self::RealPart(spec) => Ok(eval_unit(spec, view, t)?
                .into_iter()
                .map(|v| Complex64::new(v.re, 0.0))
                .collect()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsometryCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
}

/// Compares `mean|f·(g∘σ_s)|²` with `mean|f|²·mean|g∘σ_s|²`, where `f` is
/// evaluated at time `s` and `g` at time `t` of the view shifted by `s`.
/// The standard error is that of the difference, from its influence
/// function.
pub fn multiplication_isometry_check(
    ensemble: &PathEnsemble,
    f: &Observable,
    g: &Observable,
    s: f64,
    t: f64,
) -> Result<IsometryCheck> {
    let fv = f.eval(&ensemble.view(), s)?;
    let gv = g.eval(&ensemble.shifted_view(s)?, t)?;
    let a: Vec<f64> = fv.iter().map(|v| v.norm_sqr()).collect();
    let b: Vec<f64> = gv.iter().map(|v| v.norm_sqr()).collect();
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let lhs = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / n;
    let influence: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y - mb * x - ma * y).collect();
    Ok(IsometryCheck {
        lhs,
        rhs: ma * mb,
        stderr: Estimate::from_samples(&influence).stderr,
    })
}

/// `|mean[(−1)^{N_t} · conj(exp(i⟨φ, L_t⟩))]|`, the empirical overlap of the
/// parity unit with an exponential unit.
pub fn parity_overlap(view: &PathView<'_>, phi: &FiniteFunctional, t: f64) -> Result<f64> {
    let parity = eval_unit(&UnitSpec::Parity, view, t)?;
    let expo = eval_unit(&UnitSpec::Exponential { phi: phi.clone() }, view, t)?;
    let prods: Vec<Complex64> = parity.iter().zip(&expo).map(|(p, e)| p * e.conj()).collect();
    Ok(ComplexEstimate::from_samples(&prods).mean.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{sample_paths, TimeGrid};

    fn grid() -> TimeGrid {
        TimeGrid::new(vec![0.5, 1.0]).unwrap()
    }

    #[test]
    fn cameron_martin_identities() {
        let q = [1.0, 0.25, 0.5];
        let h = CameronMartinVector::new(vec![0.5, -0.2, 0.1], &q).unwrap();
        assert!((h.norm_sq() - h.dual_variance()).abs() < 1e-15);
        assert!(CameronMartinVector::new(vec![1.0], &[0.0]).is_err());
        assert!(CameronMartinVector::new(vec![1.0, 2.0], &[1.0]).is_err());
        let norm2h = gaussian_unit_norm(&h.scaled(2.0), 0.3);
        let norm_h = gaussian_unit_norm(&h, 1.2);
        assert!((norm2h - norm_h).abs() < 1e-14 * norm_h);
        let zero = CameronMartinVector::new(vec![0.0; 3], &q).unwrap();
        assert_eq!(gaussian_unit_norm(&zero, 4.0), 1.0);
    }

    #[test]
    fn trivial_units_are_identically_one() {
        let model = LevyModel::centered_gaussian(vec![1.0, 0.5]).unwrap();
        let e = sample_paths(&model, &grid(), 200, 1).unwrap();
        let zero_h = CameronMartinVector::for_model(vec![0.0, 0.0], &model).unwrap();
        for spec in [
            UnitSpec::Gaussian { h: zero_h },
            UnitSpec::Exponential { phi: FiniteFunctional::zero() },
        ] {
            let v = eval_unit(&spec, &e.view(), 1.0).unwrap();
            assert!(v.iter().all(|&x| x == Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn incompatible_pairings_are_rejected() {
        let bern = LevyModel::bernoulli_compound(1.0, vec![0.3, 0.3]).unwrap();
        let gauss = LevyModel::centered_gaussian(vec![1.0, 1.0]).unwrap();
        let e = sample_paths(&gauss, &grid(), 10, 1).unwrap();
        assert!(matches!(
            eval_unit(&UnitSpec::Parity, &e.view(), 1.0),
            Err(Error::IncompatibleUnit { .. })
        ));
        assert!(CameronMartinVector::for_model(vec![1.0, 1.0], &bern).is_err());
        let other_q = CameronMartinVector::new(vec![1.0, 1.0], &[2.0, 1.0]).unwrap();
        assert!(eval_unit(&UnitSpec::Gaussian { h: other_q }, &e.view(), 1.0).is_err());
        let far = UnitSpec::Exponential {
            phi: FiniteFunctional::coordinate(3, 1.0).unwrap(),
        };
        assert!(eval_unit(&far, &e.view(), 1.0).is_err());
    }

    #[test]
    fn parity_factorization_is_exact() {
        let model = LevyModel::bernoulli_compound(2.0, vec![0.3, 0.6]).unwrap();
        let e = sample_paths(&model, &grid(), 1000, 4).unwrap();
        let f = factorization_check(&UnitSpec::Parity, &e, 0.5, 0.5).unwrap();
        assert_eq!(f.max_abs_error, 0.0);
        let v = eval_unit(&UnitSpec::Parity, &e.view(), 1.0).unwrap();
        assert!(v.iter().all(|x| x.norm() == 1.0));
    }

    #[test]
    fn martingale_with_zero_h_has_zero_gap() {
        let model = LevyModel::centered_gaussian(vec![1.0, 0.5]).unwrap();
        let e = sample_paths(&model, &grid(), 500, 2).unwrap();
        let h = CameronMartinVector::for_model(vec![0.0, 0.0], &model).unwrap();
        let g: TestFn = &|x: &[f64]| x[0].cos();
        let gaps = martingale_test(&h, &e, 0.5, 0.5, &[g]).unwrap();
        assert_eq!(gaps[0].gap, 0.0);
    }

    #[test]
    fn isometry_of_constants_is_exact() {
        let model = LevyModel::centered_gaussian(vec![1.0]).unwrap();
        let e = sample_paths(&model, &grid(), 100, 2).unwrap();
        let one = Observable::Constant(Complex64::new(1.0, 0.0));
        let c = multiplication_isometry_check(&e, &one, &one, 0.5, 0.5).unwrap();
        assert_eq!((c.lhs, c.rhs, c.stderr), (1.0, 1.0, 0.0));
    }
}
