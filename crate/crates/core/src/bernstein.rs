//! Bernstein functions `f(x) = a + b x + ∫ (1 - e^{-xs}) ν̄(ds)`, the
//! Laplace exponents of subordinators.
//!
//! Catalog families carry closed forms for values, derivatives of every order
//! up to [`MAX_DERIVATIVE_ORDER`], Lévy tails `ν(s) = a + ν̄(s, ∞)` and
//! cell integrals of the tail. [`CustomBernstein`] accepts an arbitrary tail
//! and falls back to quadrature, which is slower and less accurate.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::math::{exp, expm1, gamma, gamma_p, gamma_q, ln, ln1p, ln_gamma, pow, powi, rgamma};
use crate::quad::{exp_sinh, tanh_sinh};
use crate::{Error, Result};

/// Highest derivative order served by the exact per-family formulas. Shared
/// with the pmf truncation cap, since generator row `n` needs `ψ^{(n)}`.
pub const MAX_DERIVATIVE_ORDER: usize = 512;

const CUSTOM_QUAD_TOL: f64 = 1e-12;

/// Tail of the Lévy measure, `s ↦ ν̄(s, ∞)`, without the killing rate.
pub type TailFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied Bernstein function `a + b x + ∫(1 - e^{-xs}) ν̄(ds)`.
#[derive(Clone)]
pub struct CustomBernstein {
    pub killing: f64,
    pub drift: f64,
    pub tail: TailFn,
    pub label: String,
}

impl fmt::Debug for CustomBernstein {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomBernstein")
            .field("killing", &self.killing)
            .field("drift", &self.drift)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl PartialEq for CustomBernstein {
    fn eq(&self, other: &Self) -> bool {
        self.killing == other.killing
            && self.drift == other.drift
            && self.label == other.label
            && Arc::ptr_eq(&self.tail, &other.tail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BernsteinSpec {
    /// `x^α`, `α ∈ (0, 1]`.
    Stable { alpha: f64 },
    /// Compound Poisson with Gamma(shape, rate `beta`) jumps:
    /// `λ β^α (β^{-α} - (β + x)^{-α})`.
    CompoundPoissonGamma { rate: f64, shape: f64, beta: f64 },
    /// Compound Poisson with Exp(`beta`) jumps: `λ x / (β + x)`.
    CompoundPoissonExp { rate: f64, beta: f64 },
    /// `b x`.
    PureDrift { drift: f64 },
    /// Exponent of a sum of independent subordinators.
    Sum(Vec<BernsteinSpec>),
    Custom(CustomBernstein),
}

/// Exponent of the sum of independent subordinators with the given exponents.
pub fn sum_exponents(specs: &[BernsteinSpec]) -> Result<BernsteinSpec> {
    if specs.is_empty() {
        return Err(Error::invalid("sum_exponents needs at least one exponent"));
    }
    let spec = BernsteinSpec::Sum(specs.to_vec());
    spec.validate()?;
    Ok(spec)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("{name} must be positive and finite, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("{name} must be nonnegative and finite, got {v}")))
    }
}

impl BernsteinSpec {
    pub fn stable(alpha: f64) -> Result<Self> {
        let s = BernsteinSpec::Stable { alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn compound_poisson_gamma(rate: f64, shape: f64, beta: f64) -> Result<Self> {
        let s = BernsteinSpec::CompoundPoissonGamma { rate, shape, beta };
        s.validate()?;
        Ok(s)
    }

    pub fn compound_poisson_exp(rate: f64, beta: f64) -> Result<Self> {
        let s = BernsteinSpec::CompoundPoissonExp { rate, beta };
        s.validate()?;
        Ok(s)
    }

    pub fn drift(drift: f64) -> Result<Self> {
        let s = BernsteinSpec::PureDrift { drift };
        s.validate()?;
        Ok(s)
    }

    /// `f(x) = x`, the identity time change.
    pub fn identity() -> Self {
        BernsteinSpec::PureDrift { drift: 1.0 }
    }

    pub fn custom(killing: f64, drift: f64, tail: TailFn, label: impl Into<String>) -> Result<Self> {
        let s = BernsteinSpec::Custom(CustomBernstein {
            killing,
            drift,
            tail,
            label: label.into(),
        });
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BernsteinSpec::Stable { alpha } => {
                if alpha.is_finite() && *alpha > 0.0 && *alpha <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(alloc::format!("stable index must lie in (0, 1], got {alpha}")))
                }
            }
            BernsteinSpec::CompoundPoissonGamma { rate, shape, beta } => {
                positive("rate", *rate)?;
                positive("shape", *shape)?;
                positive("beta", *beta)
            }
            BernsteinSpec::CompoundPoissonExp { rate, beta } => {
                positive("rate", *rate)?;
                positive("beta", *beta)
            }
            BernsteinSpec::PureDrift { drift } => positive("drift", *drift),
            BernsteinSpec::Sum(parts) => {
                if parts.is_empty() {
                    return Err(Error::invalid("sum of exponents is empty"));
                }
                parts.iter().try_for_each(BernsteinSpec::validate)
            }
            BernsteinSpec::Custom(c) => {
                nonnegative("killing rate", c.killing)?;
                nonnegative("drift", c.drift)
            }
        }
    }

    /// Killing rate `a`.
    pub fn killing(&self) -> f64 {
        match self {
            BernsteinSpec::Sum(parts) => parts.iter().map(BernsteinSpec::killing).sum(),
            BernsteinSpec::Custom(c) => c.killing,
            _ => 0.0,
        }
    }

    /// Drift coefficient `b`.
    pub fn drift_coefficient(&self) -> f64 {
        match self {
            BernsteinSpec::Stable { alpha } if *alpha == 1.0 => 1.0,
            BernsteinSpec::PureDrift { drift } => *drift,
            BernsteinSpec::Sum(parts) => parts.iter().map(BernsteinSpec::drift_coefficient).sum(),
            BernsteinSpec::Custom(c) => c.drift,
            _ => 0.0,
        }
    }

    /// Stable index when the spec is a single stable exponent.
    pub fn stable_index(&self) -> Option<f64> {
        match self {
            BernsteinSpec::Stable { alpha } => Some(*alpha),
            _ => None,
        }
    }

    /// True if the Lévy measure has infinite mass (some component is stable
    /// with `α < 1`).
    pub fn has_infinite_activity(&self) -> bool {
        match self {
            BernsteinSpec::Stable { alpha } => *alpha < 1.0,
            BernsteinSpec::Sum(parts) => parts.iter().any(BernsteinSpec::has_infinite_activity),
            _ => false,
        }
    }

    /// Whether the inverse subordinator is known to have a density: infinite
    /// Lévy mass with an absolutely continuous tail. Custom specs return
    /// `false`; callers must opt in explicitly.
    pub fn satisfies_condition_i(&self) -> bool {
        match self {
            BernsteinSpec::Custom(_) => false,
            BernsteinSpec::Sum(parts) => {
                parts.iter().all(|p| !matches!(p, BernsteinSpec::Custom(_))) && self.has_infinite_activity()
            }
            other => other.has_infinite_activity(),
        }
    }

    /// Whether [`crate::pathsim`] can draw exact increments.
    pub fn is_simulatable(&self) -> bool {
        match self {
            BernsteinSpec::Custom(_) => false,
            BernsteinSpec::Sum(parts) => parts.iter().all(BernsteinSpec::is_simulatable),
            _ => true,
        }
    }

    /// Catalog specs continue analytically off the positive axis.
    pub fn is_analytic(&self) -> bool {
        self.is_simulatable()
    }

    /// `f(x)` for `x ≥ 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::invalid(alloc::format!("Bernstein argument must be finite and >= 0, got {x}")));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            BernsteinSpec::Stable { alpha } => {
                if x == 0.0 {
                    0.0
                } else {
                    pow(x, *alpha)
                }
            }
            BernsteinSpec::CompoundPoissonGamma { rate, shape, beta } => {
                -rate * expm1(-shape * ln1p(x / beta))
            }
            BernsteinSpec::CompoundPoissonExp { rate, beta } => rate * x / (beta + x),
            BernsteinSpec::PureDrift { drift } => drift * x,
            BernsteinSpec::Sum(parts) => parts.iter().map(|p| p.eval_unchecked(x)).sum(),
            BernsteinSpec::Custom(c) => {
                if x == 0.0 {
                    return c.killing;
                }
                let tail = &c.tail;
                let q = exp_sinh(|s| exp(-x * s) * tail(s), CUSTOM_QUAD_TOL);
                c.killing + c.drift * x + x * q.value
            }
        }
    }

    /// Analytic continuation to the cut plane. `None` for custom specs.
    pub(crate) fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        match self {
            BernsteinSpec::Stable { alpha } => Some(if z == Complex64::new(0.0, 0.0) {
                z
            } else {
                (z.ln() * *alpha).exp()
            }),
            BernsteinSpec::CompoundPoissonGamma { rate, shape, beta } => {
                let one = Complex64::new(1.0, 0.0);
                let ratio = (one + z / *beta).ln() * (-*shape);
                Some((one - ratio.exp()) * *rate)
            }
            BernsteinSpec::CompoundPoissonExp { rate, beta } => Some(z * *rate / (z + *beta)),
            BernsteinSpec::PureDrift { drift } => Some(z * *drift),
            BernsteinSpec::Sum(parts) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for p in parts {
                    acc += p.eval_complex(z)?;
                }
                Some(acc)
            }
            BernsteinSpec::Custom(_) => None,
        }
    }

    /// `f^{(m)}(x)`, from exact per-family formulas.
    pub fn derivative(&self, m: usize, x: f64) -> Result<f64> {
        if m > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder {
                order: m,
                cap: MAX_DERIVATIVE_ORDER,
            });
        }
        if m == 0 {
            return self.eval(x);
        }
        self.validate()?;
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::invalid(alloc::format!("Bernstein argument must be finite and >= 0, got {x}")));
        }
        let v = self.derivative_unchecked(m, x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(alloc::format!("derivative of order {m} at x = {x}")))
        }
    }

    fn derivative_unchecked(&self, m: usize, x: f64) -> f64 {
        match self {
            BernsteinSpec::Stable { alpha } => {
                // α (α-1) ... (α-m+1) x^{α-m}
                let mut c = 1.0;
                for j in 0..m {
                    c *= alpha - j as f64;
                }
                if c == 0.0 {
                    0.0
                } else {
                    c * pow(x, alpha - m as f64)
                }
            }
            BernsteinSpec::CompoundPoissonGamma { rate, shape, beta } => {
                // (-1)^{m+1} λ β^α (α)_m (β + x)^{-α-m}
                let mut rising = 1.0;
                for j in 0..m {
                    rising *= shape + j as f64;
                }
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                sign * rate * pow(beta / (beta + x), *shape) * rising * pow(beta + x, -(m as f64))
            }
            BernsteinSpec::CompoundPoissonExp { rate, beta } => {
                // (-1)^{m+1} λ β m! (β + x)^{-1-m}
                let mut fact = 1.0;
                for j in 1..=m {
                    fact *= j as f64;
                }
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                sign * rate * beta * fact * pow(beta + x, -1.0 - m as f64)
            }
            BernsteinSpec::PureDrift { drift } => {
                if m == 1 {
                    *drift
                } else {
                    0.0
                }
            }
            BernsteinSpec::Sum(parts) => parts.iter().map(|p| p.derivative_unchecked(m, x)).sum(),
            BernsteinSpec::Custom(_) => {
                let coeffs = self.taylor_coefficients_unchecked(x, 1.0, m + 1);
                exp(ln_gamma(m as f64 + 1.0).0) * coeffs[m]
            }
        }
    }

    /// Taylor coefficients `f^{(m)}(x) / m!` for `m = 0..count`.
    ///
    /// Computed by ratio recurrences, so they stay finite long after the raw
    /// derivatives overflow.
    pub fn taylor_coefficients(&self, x: f64, count: usize) -> Result<Vec<f64>> {
        self.scaled_taylor_coefficients(x, 1.0, count)
    }

    /// `f^{(m)}(x) scale^m / m!` for `m = 0..count`, with the scaling folded
    /// into the recurrences so large orders neither overflow nor underflow.
    pub fn scaled_taylor_coefficients(&self, x: f64, scale: f64, count: usize) -> Result<Vec<f64>> {
        if count > MAX_DERIVATIVE_ORDER + 1 {
            return Err(Error::UnsupportedOrder {
                order: count - 1,
                cap: MAX_DERIVATIVE_ORDER,
            });
        }
        self.validate()?;
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::invalid(alloc::format!("Bernstein argument must be finite and >= 0, got {x}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid("Taylor scale must be positive"));
        }
        let c = self.taylor_coefficients_unchecked(x, scale, count);
        if c.iter().all(|v| v.is_finite()) {
            Ok(c)
        } else {
            Err(Error::NonFinite(alloc::format!("Taylor coefficients at x = {x}")))
        }
    }

    fn taylor_coefficients_unchecked(&self, x: f64, scale: f64, count: usize) -> Vec<f64> {
        let mut out = vec![0.0; count];
        if count == 0 {
            return out;
        }
        out[0] = self.eval_unchecked(x);
        match self {
            BernsteinSpec::Stable { alpha } => {
                // binom(α, m) x^{α-m}
                let mut c = out[0];
                for m in 1..count {
                    c *= (alpha - (m - 1) as f64) * scale / (m as f64 * x);
                    out[m] = c;
                }
            }
            BernsteinSpec::CompoundPoissonGamma { rate, shape, beta } => {
                // -λ (β/(β+x))^α binom(-α, m) (β+x)^{-m}
                let mut c = -rate * pow(beta / (beta + x), *shape);
                for m in 1..count {
                    c *= (-shape - (m - 1) as f64) * scale / (m as f64 * (beta + x));
                    out[m] = c;
                }
            }
            BernsteinSpec::CompoundPoissonExp { rate, beta } => {
                // -λ β (-1)^m (β+x)^{-1-m}
                let mut c = -rate * beta / (beta + x);
                for m in 1..count {
                    c *= -scale / (beta + x);
                    out[m] = c;
                }
            }
            BernsteinSpec::PureDrift { drift } => {
                if count > 1 {
                    out[1] = *drift * scale;
                }
            }
            BernsteinSpec::Sum(parts) => {
                for p in parts {
                    for (o, v) in out.iter_mut().zip(p.taylor_coefficients_unchecked(x, scale, count)) {
                        *o += v;
                    }
                }
                out[0] = self.eval_unchecked(x);
            }
            BernsteinSpec::Custom(c) => {
                // f = a + b x + x L(x), L(x) = ∫ e^{-xs} T(s) ds, so for m ≥ 1
                // f^{(m)}/m! = x (-1)^m L_m + (-1)^{m-1} L_{m-1} (+ b if m = 1)
                // with L_j = ∫ s^j / j! e^{-xs} T(s) ds.
                let tail = &c.tail;
                let moment = |j: usize| -> f64 {
                    let lf = ln_gamma(j as f64 + 1.0).0;
                    exp_sinh(
                        |s| {
                            let w = if j == 0 { -x * s } else { j as f64 * ln(s) - lf - x * s };
                            exp(w) * tail(s)
                        },
                        CUSTOM_QUAD_TOL,
                    )
                    .value
                };
                let mut prev = moment(0);
                for m in 1..count {
                    let cur = moment(m);
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    out[m] = x * sign * cur - sign * prev;
                    if m == 1 {
                        out[m] += c.drift;
                    }
                    out[m] *= powi(scale, m as i32);
                    prev = cur;
                }
            }
        }
        out
    }

    /// Lévy tail `ν(s) = a + ν̄(s, ∞)` for `s > 0`.
    pub fn levy_tail(&self, s: f64) -> Result<f64> {
        self.validate()?;
        if !(s > 0.0) {
            return Err(Error::invalid(alloc::format!("Lévy tail argument must be positive, got {s}")));
        }
        Ok(self.levy_tail_unchecked(s))
    }

    pub(crate) fn levy_tail_unchecked(&self, s: f64) -> f64 {
        match self {
            BernsteinSpec::Stable { alpha } => {
                if *alpha == 1.0 {
                    0.0
                } else {
                    pow(s, -alpha) * rgamma(1.0 - alpha)
                }
            }
            BernsteinSpec::CompoundPoissonGamma { rate, shape, beta } => rate * gamma_q(*shape, beta * s),
            BernsteinSpec::CompoundPoissonExp { rate, beta } => rate * exp(-beta * s),
            BernsteinSpec::PureDrift { .. } => 0.0,
            BernsteinSpec::Sum(parts) => parts.iter().map(|p| p.levy_tail_unchecked(s)).sum(),
            BernsteinSpec::Custom(c) => c.killing + (c.tail)(s),
        }
    }

    /// `∫_{s0}^{s1} ν(s) ds` for `0 ≤ s0 < s1`, exact for catalog families.
    pub fn tail_integral(&self, s0: f64, s1: f64) -> Result<f64> {
        self.validate()?;
        if !(s0 >= 0.0 && s1 > s0) {
            return Err(Error::invalid(alloc::format!("tail cell must satisfy 0 <= s0 < s1, got [{s0}, {s1}]")));
        }
        Ok(self.tail_integral_unchecked(s0, s1))
    }

    pub(crate) fn tail_integral_unchecked(&self, s0: f64, s1: f64) -> f64 {
        match self {
            BernsteinSpec::Stable { alpha } => {
                if *alpha == 1.0 {
                    return 0.0;
                }
                let e = 1.0 - alpha;
                let scale = rgamma(2.0 - alpha);
                if s0 == 0.0 {
                    pow(s1, e) * scale
                } else {
                    pow(s0, e) * expm1(e * ln1p((s1 - s0) / s0)) * scale
                }
            }
            BernsteinSpec::CompoundPoissonGamma { rate, shape, beta } => {
                // ∫_0^S Q(α, βs) ds = S Q(α, βS) + (α/β) P(α+1, βS)
                let antider = |s: f64| s * gamma_q(*shape, beta * s) + shape / beta * gamma_p(shape + 1.0, beta * s);
                rate * (antider(s1) - antider(s0))
            }
            BernsteinSpec::CompoundPoissonExp { rate, beta } => {
                rate / beta * exp(-beta * s0) * -expm1(-beta * (s1 - s0))
            }
            BernsteinSpec::PureDrift { .. } => 0.0,
            BernsteinSpec::Sum(parts) => parts.iter().map(|p| p.tail_integral_unchecked(s0, s1)).sum(),
            BernsteinSpec::Custom(c) => {
                let tail = &c.tail;
                c.killing * (s1 - s0) + tanh_sinh(|s| tail(s), s0, s1, CUSTOM_QUAD_TOL).value
            }
        }
    }
}

/// Density of the stable Lévy measure, `α s^{-α-1} / Γ(1-α)`.
pub fn stable_levy_density(alpha: f64, s: f64) -> f64 {
    alpha * pow(s, -alpha - 1.0) / gamma(1.0 - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{sqrt, PI};

    fn catalog() -> Vec<BernsteinSpec> {
        vec![
            BernsteinSpec::Stable { alpha: 0.5 },
            BernsteinSpec::Stable { alpha: 0.3 },
            BernsteinSpec::Stable { alpha: 1.0 },
            BernsteinSpec::CompoundPoissonGamma { rate: 1.5, shape: 0.7, beta: 2.0 },
            BernsteinSpec::CompoundPoissonExp { rate: 2.0, beta: 1.0 },
            BernsteinSpec::PureDrift { drift: 1.3 },
            BernsteinSpec::Sum(vec![
                BernsteinSpec::Stable { alpha: 0.6 },
                BernsteinSpec::CompoundPoissonExp { rate: 1.0, beta: 3.0 },
            ]),
        ]
    }

    #[test]
    fn eval_examples() {
        assert_eq!(BernsteinSpec::Stable { alpha: 0.5 }.eval(4.0).unwrap(), 2.0);
        let cpe = BernsteinSpec::CompoundPoissonExp { rate: 2.0, beta: 1.0 };
        assert!((cpe.eval(1.0).unwrap() - 1.0).abs() < 1e-15);
        for spec in catalog() {
            assert_eq!(spec.eval(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(
            BernsteinSpec::Stable { alpha: 1.5 }.eval(1.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(BernsteinSpec::stable(0.0).is_err());
        assert!(BernsteinSpec::compound_poisson_exp(-1.0, 1.0).is_err());
        assert!(BernsteinSpec::Sum(vec![]).validate().is_err());
        assert!(BernsteinSpec::Stable { alpha: 0.5 }.eval(-1.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let st = BernsteinSpec::Stable { alpha: 0.5 };
        assert!((st.derivative(1, 4.0).unwrap() - 0.25).abs() < 1e-15);
        let cpe = BernsteinSpec::CompoundPoissonExp { rate: 2.0, beta: 1.0 };
        assert!((cpe.derivative(1, 0.0).unwrap() - 2.0).abs() < 1e-15);
        for spec in catalog() {
            assert_eq!(spec.derivative(0, 1.0).unwrap(), spec.eval(1.0).unwrap());
        }
    }

    #[test]
    fn derivative_order_cap() {
        let st = BernsteinSpec::Stable { alpha: 0.5 };
        assert_eq!(
            st.derivative(MAX_DERIVATIVE_ORDER + 1, 1.0),
            Err(Error::UnsupportedOrder {
                order: MAX_DERIVATIVE_ORDER + 1,
                cap: MAX_DERIVATIVE_ORDER
            })
        );
        assert!(st.taylor_coefficients(1.0, MAX_DERIVATIVE_ORDER + 2).is_err());
        assert!(st.taylor_coefficients(1.0, MAX_DERIVATIVE_ORDER + 1).is_ok());
    }

    #[test]
    fn derivatives_match_central_differences() {
        // Independent check of the closed forms against a 5-point stencil.
        let h = 1e-3;
        for spec in catalog() {
            for &x in &[0.7, 2.0] {
                for m in 1..=3 {
                    let lower = |y: f64| spec.derivative(m - 1, y).unwrap();
                    let fd = (-lower(x + 2.0 * h) + 8.0 * lower(x + h) - 8.0 * lower(x - h) + lower(x - 2.0 * h))
                        / (12.0 * h);
                    let exact = spec.derivative(m, x).unwrap();
                    assert!((fd - exact).abs() < 1e-8 * (1.0 + exact.abs()), "{spec:?} m={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn taylor_coefficients_agree_with_derivatives() {
        for spec in catalog() {
            let c = spec.taylor_coefficients(1.7, 20).unwrap();
            let mut fact = 1.0;
            for m in 0..20 {
                if m > 0 {
                    fact *= m as f64;
                }
                let d = spec.derivative(m, 1.7).unwrap();
                assert!((c[m] * fact - d).abs() <= 1e-12 * d.abs().max(1e-300), "{spec:?} m={m}");
            }
        }
    }

    #[test]
    fn complete_monotonicity_signs() {
        for spec in catalog() {
            for i in 0..20 {
                let x = 0.1 + i as f64 * (9.9 / 19.0);
                for m in 1..=4 {
                    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                    assert!(sign * spec.derivative(m, x).unwrap() >= -1e-12, "{spec:?} m={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn levy_tail_examples() {
        let st = BernsteinSpec::Stable { alpha: 0.5 };
        assert!((st.levy_tail(1.0).unwrap() - 1.0 / sqrt(PI)).abs() < 1e-15);
        let cpe = BernsteinSpec::CompoundPoissonExp { rate: 2.0, beta: 1.0 };
        assert!((cpe.levy_tail(1e-12).unwrap() - 2.0).abs() < 1e-11);
        for spec in catalog() {
            assert!(spec.levy_tail(1e9).unwrap().abs() < 1e-2, "{spec:?}");
        }
        for spec in catalog().into_iter().filter(|s| !s.has_infinite_activity()) {
            assert!(spec.levy_tail(1e9).unwrap() < 1e-12, "{spec:?}");
        }
        assert!(st.levy_tail(0.0).is_err());
    }

    #[test]
    fn stable_tail_integrates_levy_density() {
        // ν(1) = ∫_1^∞ α s^{-α-1}/Γ(1-α) ds, by quadrature on s = 1/u.
        let alpha = 0.5;
        let q = tanh_sinh(|u| stable_levy_density(alpha, 1.0 / u) / (u * u), 0.0, 1.0, 1e-14);
        let tail = BernsteinSpec::Stable { alpha }.levy_tail(1.0).unwrap();
        assert!((q.value - tail).abs() < 1e-12, "{q:?} {tail}");
        assert!((tail - 0.564_189_583_547_756_3).abs() < 1e-15);
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        for spec in catalog() {
            for &(a, b) in &[(0.0, 0.01), (0.3, 0.301), (1.0, 2.5)] {
                let exact = spec.tail_integral(a, b).unwrap();
                let q = tanh_sinh(|s| spec.levy_tail_unchecked(s), a, b, 1e-14).value;
                assert!((exact - q).abs() < 1e-11 * (1.0 + q.abs()), "{spec:?} [{a},{b}] {exact} {q}");
            }
        }
    }

    #[test]
    fn sum_examples() {
        let s = sum_exponents(&[BernsteinSpec::Stable { alpha: 0.5 }, BernsteinSpec::Stable { alpha: 0.5 }]).unwrap();
        assert_eq!(s.eval(4.0).unwrap(), 4.0);
        let s = sum_exponents(&[
            BernsteinSpec::Stable { alpha: 0.5 },
            BernsteinSpec::CompoundPoissonExp { rate: 2.0, beta: 1.0 },
        ])
        .unwrap();
        assert!((s.derivative(1, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(sum_exponents(&[]).is_err());
    }

    #[test]
    fn custom_matches_catalog() {
        // Exponential tail λ e^{-βs} reproduces the compound Poisson-exponential.
        let custom = BernsteinSpec::custom(0.0, 0.0, Arc::new(|s: f64| 2.0 * exp(-s)), "exp-tail").unwrap();
        let cpe = BernsteinSpec::CompoundPoissonExp { rate: 2.0, beta: 1.0 };
        for &x in &[0.2, 1.0, 5.0] {
            assert!((custom.eval(x).unwrap() - cpe.eval(x).unwrap()).abs() < 1e-9);
            for m in 1..=3 {
                let a = custom.derivative(m, x).unwrap();
                let b = cpe.derivative(m, x).unwrap();
                assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "x={x} m={m} {a} {b}");
            }
        }
        assert!((custom.levy_tail(0.5).unwrap() - cpe.levy_tail(0.5).unwrap()).abs() < 1e-15);
        assert!(!custom.is_simulatable());
        assert!(!custom.satisfies_condition_i());
    }

    #[test]
    fn complex_continuation_agrees_on_the_real_axis() {
        for spec in catalog() {
            for &x in &[0.3, 2.0, 11.0] {
                let z = spec.eval_complex(Complex64::new(x, 0.0)).unwrap();
                let r = spec.eval(x).unwrap();
                assert!((z.re - r).abs() < 1e-13 * (1.0 + r.abs()) && z.im.abs() < 1e-14, "{spec:?}");
            }
        }
    }
}
