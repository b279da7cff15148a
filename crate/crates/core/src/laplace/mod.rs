//! The inverse-subordinator transform `ℓ̃_f(t, λ) = E exp(-λ Y^f(t))` and the
//! density `ℓ_f(t, x)` of `Y^f(t)`.
//!
//! The density has time-Laplace transform
//! `∫_0^∞ e^{-rt} ℓ_f(t, x) dt = f(r)/r · e^{-x f(r)}`. Integrating against
//! `e^{-λx}` over `x ≥ 0` gives the time transform of `ℓ̃_f`:
//! `f(r) / (r (λ + f(r)))`. Both are inverted numerically in `t`.

pub mod inversion;

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::bernstein::BernsteinSpec;
use crate::pathsim::{sample_inverse_passage, SimOptions, StreamPlan, Summary};
use crate::specfun::{mittag_leffler, Estimate};
use crate::{Error, Result};

pub const DEFAULT_INVERSION_ORDER: usize = 20;

/// Noise level below which negative inverted densities are set to zero.
pub const DENSITY_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TildeEllMethod {
    /// `E_α(-λ t^α)`; stable exponents only.
    ClosedFormStable,
    /// Numerical inversion of the time transform with the given (even)
    /// order.
    NumericalInversion(usize),
    /// Average of `e^{-λY}` over `n` first-passage draws.
    MonteCarlo { n: usize, seed: u64 },
}

impl Default for TildeEllMethod {
    fn default() -> Self {
        TildeEllMethod::NumericalInversion(DEFAULT_INVERSION_ORDER)
    }
}

impl TildeEllMethod {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TildeEllMethod::NumericalInversion(order) => check_order(order),
            TildeEllMethod::MonteCarlo { n, .. } if n < 2 => Err(Error::invalid("Monte Carlo needs at least 2 draws")),
            _ => Ok(()),
        }
    }
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if order.is_multiple_of(2) && (8..=20).contains(&order) {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("inversion order must be even and in [8, 20], got {order}")))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("time must be positive and finite, got {t}")))
    }
}

/// `f(r)/r · e^{-x f(r)}`, the time transform of the density at `x`.
pub fn lt_density_t(spec: &BernsteinSpec, r: f64, x: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid("transform variable must be positive"));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::invalid("space variable must be nonnegative"));
    }
    let fr = spec.eval(r)?;
    Ok(fr / r * crate::math::exp(-x * fr))
}

/// Inverts a transform built from `f`, choosing Talbot nodes when `f`
/// continues analytically.
pub(crate) fn invert_with<G, H>(spec: &BernsteinSpec, t: f64, order: usize, context: &str, complex: G, real: H) -> Result<f64>
where
    G: Fn(Complex64, Complex64) -> Complex64,
    H: Fn(f64, f64) -> f64,
{
    let c = spec.is_analytic().then_some(|s: Complex64| {
        let fs = spec.eval_complex(s).unwrap_or(Complex64::new(f64::NAN, 0.0));
        complex(s, fs)
    });
    inversion::invert(c, |r: f64| real(r, spec.eval_unchecked(r)), t, order, context)
}

/// `ℓ̃_f(t, λ) = E e^{-λ Y^f(t)}`.
pub fn tilde_ell(spec: &BernsteinSpec, t: f64, lambda: f64, method: TildeEllMethod) -> Result<f64> {
    spec.validate()?;
    method.validate()?;
    check_time(t)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("λ must be finite and nonnegative"));
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    match method {
        TildeEllMethod::ClosedFormStable => match spec.stable_index() {
            Some(alpha) => mittag_leffler(alpha, -lambda * crate::math::pow(t, alpha)),
            None => Err(Error::MethodMismatch("closed form requires a stable exponent".into())),
        },
        TildeEllMethod::NumericalInversion(order) => invert_with(
            spec,
            t,
            order,
            "tilde_ell",
            |s, fs| fs / (s * (fs + lambda)),
            |r, fr| fr / (r * (lambda + fr)),
        ),
        TildeEllMethod::MonteCarlo { n, seed } => Ok(tilde_ell_monte_carlo(spec, t, lambda, n, seed)?.value),
    }
}

/// Monte Carlo `ℓ̃_f(t, λ)` with its standard error as the error field.
pub fn tilde_ell_monte_carlo(spec: &BernsteinSpec, t: f64, lambda: f64, n: usize, seed: u64) -> Result<Estimate> {
    check_time(t)?;
    let opts = SimOptions::default();
    let xs = StreamPlan::new(seed, n).run(|rng| Ok(crate::math::exp(-lambda * sample_inverse_passage(spec, t, rng, &opts)?)))?;
    let s = Summary::of(&xs);
    Ok(Estimate {
        value: s.mean,
        error: s.stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOptions {
    pub order: usize,
    /// Permit custom exponents, which cannot be checked for a density.
    pub allow_custom: bool,
    /// Return inverted values without clamping small negatives.
    pub raw: bool,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            order: DEFAULT_INVERSION_ORDER,
            allow_custom: false,
            raw: false,
        }
    }
}

/// `ℓ_f(t, x)` at each grid point.
pub fn density_grid(spec: &BernsteinSpec, t: f64, xs: &[f64], opts: &DensityOptions) -> Result<Vec<f64>> {
    spec.validate()?;
    check_time(t)?;
    check_order(opts.order)?;
    let allowed = spec.satisfies_condition_i() || (opts.allow_custom && matches!(spec, BernsteinSpec::Custom(_)));
    if !allowed {
        return Err(Error::unsupported(
            "the inverse subordinator has no density unless the Lévy measure has infinite mass",
        ));
    }
    if xs.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("density grid must be increasing and nonnegative"));
    }
    xs.iter()
        .map(|&x| {
            let v = invert_with(
                spec,
                t,
                opts.order,
                "density_grid",
                |s, fs| fs / s * (-fs * x).exp(),
                |r, fr| fr / r * crate::math::exp(-x * fr),
            )?;
            if opts.raw || v >= 0.0 {
                Ok(v)
            } else if v > -DENSITY_CLAMP {
                Ok(0.0)
            } else {
                Err(Error::accuracy("density_grid", v, v.abs()))
            }
        })
        .collect()
}
