//! Convolution-type derivatives with respect to a Bernstein function,
//! applied to functions sampled on a uniform grid.
//!
//! With `f(x) = a + b x + ∫(1 - e^{-xs}) ν̄(ds)` and tail `ν(s) = a + ν̄(s, ∞)`:
//!
//! - Caputo-Djrbashian type: `𝒟 u(t) = b u'(t) + ∫_0^t u'(t - s) ν(s) ds`;
//! - Riemann-Liouville type: `𝔻 u(t) = 𝒟 u(t) + ν(t) u(0)`.
//!
//! The convolution uses product integration: `u` is piecewise linear
//! between samples, so on each cell `u'` is a constant difference quotient,
//! and `ν` is integrated exactly over the cell. For `ν(s) ∝ s^{-α}` this
//! has `O(h^{2-α})` error and no trouble with the singularity at zero.

use alloc::vec::Vec;

use crate::bernstein::BernsteinSpec;
use crate::laplace::{tilde_ell, TildeEllMethod};
use crate::{Error, Result};

/// Minimum number of cells in `[0, t]` for a derivative at `t`.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub h: f64,
    pub len: usize,
}

impl UniformGrid {
    pub fn new(h: f64, len: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("grid step must be positive"));
        }
        if len < 3 {
            return Err(Error::invalid("a sampled function needs at least 3 points"));
        }
        Ok(Self { h, len })
    }

    /// Grid `0, h, …` covering `[0, t_end]` with `t_end` a grid point up to
    /// rounding.
    pub fn covering(h: f64, t_end: f64) -> Result<Self> {
        Self::new(h, crate::math::round(t_end / h) as usize + 1)
    }

    /// Checks that `times` starts at 0 and is uniform to 1e-12 relative.
    pub fn from_times(times: &[f64]) -> Result<Self> {
        if times.len() < 3 || times[0] != 0.0 {
            return Err(Error::invalid("grid must start at 0 and have at least 3 points"));
        }
        let h = times[1];
        let g = Self::new(h, times.len())?;
        for (i, &t) in times.iter().enumerate() {
            if (t - g.time(i)).abs() > 1e-12 * g.time(i).max(h) {
                return Err(Error::invalid(alloc::format!("grid is not uniform at index {i}")));
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.time(i)).collect()
    }

    /// Index of the grid point `t`, which must lie on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.h;
        let i = crate::math::round(x);
        if !(i >= 0.0) || (x - i).abs() > 1e-6 || i as usize >= self.len {
            return Err(Error::invalid(alloc::format!("t = {t} is not a grid point")));
        }
        Ok(i as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(h: f64, values: Vec<f64>) -> Result<Self> {
        let grid = UniformGrid::new(h, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sampled values must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: UniformGrid, mut f: F) -> Result<Self> {
        Self::new(grid.h, (0..grid.len).map(|i| f(grid.time(i))).collect())
    }

    /// `u'(t_i)`: centered differences inside, second-order one-sided
    /// differences at the ends.
    pub fn derivative_at(&self, i: usize) -> f64 {
        let u = &self.values;
        let h = self.grid.h;
        let n = u.len();
        if i == 0 {
            (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h)
        } else {
            (u[i + 1] - u[i - 1]) / (2.0 * h)
        }
    }
}

/// The derivative operators of one exponent on one grid, with the cell
/// integrals `W_j = ∫_{jh}^{(j+1)h} ν(s) ds` precomputed.
#[derive(Debug, Clone)]
pub struct CdOperator {
    grid: UniformGrid,
    drift: f64,
    weights: Vec<f64>,
    tails: Vec<f64>,
}

impl CdOperator {
    pub fn new(spec: &BernsteinSpec, grid: UniformGrid) -> Result<Self> {
        spec.validate()?;
        let h = grid.h;
        let weights = (0..grid.len).map(|j| spec.tail_integral(j as f64 * h, (j + 1) as f64 * h)).collect::<Result<Vec<_>>>()?;
        let tails = (0..grid.len)
            .map(|i| if i == 0 { Ok(f64::INFINITY) } else { spec.levy_tail(grid.time(i)) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            drift: spec.drift_coefficient(),
            weights,
            tails,
        })
    }

    pub fn grid(&self) -> UniformGrid {
        self.grid
    }

    fn check(&self, u: &SampledFunction, i: usize) -> Result<()> {
        if u.grid.len != self.grid.len || u.grid.h.to_bits() != self.grid.h.to_bits() {
            return Err(Error::invalid("sampled function is on a different grid"));
        }
        if i >= self.grid.len {
            return Err(Error::invalid("grid index out of range"));
        }
        if i < MIN_CELLS {
            return Err(Error::Resolution {
                cells: i,
                required: MIN_CELLS,
            });
        }
        Ok(())
    }

    /// `𝒟 u(t_i)`.
    pub fn cd(&self, u: &SampledFunction, i: usize) -> Result<f64> {
        self.check(u, i)?;
        let v = &u.values;
        let h = self.grid.h;
        let conv: f64 = (0..i).map(|j| (v[i - j] - v[i - j - 1]) / h * self.weights[j]).sum();
        let drift = if self.drift != 0.0 { self.drift * u.derivative_at(i) } else { 0.0 };
        Ok(drift + conv)
    }

    /// `𝔻 u(t_i) = 𝒟 u(t_i) + ν(t_i) u(0)`.
    pub fn rl(&self, u: &SampledFunction, i: usize) -> Result<f64> {
        Ok(self.cd(u, i)? + self.tails[i] * u.values[0])
    }
}

/// `𝒟 u(t)` at a grid point `t`.
pub fn cd_derivative(spec: &BernsteinSpec, u: &SampledFunction, t: f64) -> Result<f64> {
    let i = u.grid.index_of(t)?;
    CdOperator::new(spec, UniformGrid::new(u.grid.h, i + 1)?)?.cd(&truncate(u, i + 1), i)
}

/// `𝔻 u(t)` at a grid point `t`.
pub fn rl_derivative(spec: &BernsteinSpec, u: &SampledFunction, t: f64) -> Result<f64> {
    let i = u.grid.index_of(t)?;
    CdOperator::new(spec, UniformGrid::new(u.grid.h, i + 1)?)?.rl(&truncate(u, i + 1), i)
}

// The derivative at t only depends on samples up to t, except for the
// centered drift difference, which uses t + h when it is available.
fn truncate(u: &SampledFunction, len: usize) -> SampledFunction {
    if len == u.values.len() {
        return u.clone();
    }
    SampledFunction {
        grid: UniformGrid { h: u.grid.h, len },
        values: u.values[..len].to_vec(),
    }
}

/// Pointwise residuals of an identity on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub grid: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn new(grid: Vec<f64>, residuals: Vec<f64>, tolerance: f64) -> Self {
        let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let pass = residuals.iter().all(|r| r.is_finite()) && max_abs <= tolerance;
        Self {
            grid,
            residuals,
            max_abs,
            tolerance,
            pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOptions {
    /// Residuals are reported only for `t ≥ t_min`.
    pub t_min: f64,
    pub tolerance: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            t_min: 0.05,
            tolerance: 5e-3,
        }
    }
}

impl ResidualOptions {
    pub(crate) fn first_index(&self, grid: &UniformGrid) -> usize {
        let i = crate::math::ceil(self.t_min / grid.h - 1e-9).max(0.0) as usize;
        i.max(MIN_CELLS)
    }
}

/// Residual of `𝒟 ℓ̃(·, λ) + λ ℓ̃(·, λ) = 0` on the grid.
pub fn eigen_residual(spec: &BernsteinSpec, lambda: f64, grid: UniformGrid, opts: &ResidualOptions) -> Result<ResidualReport> {
    let method = if spec.stable_index().is_some() {
        TildeEllMethod::ClosedFormStable
    } else {
        TildeEllMethod::default()
    };
    let values = (0..grid.len)
        .map(|i| if i == 0 { Ok(1.0) } else { tilde_ell(spec, grid.time(i), lambda, method) })
        .collect::<Result<Vec<_>>>()?;
    let u = SampledFunction::new(grid.h, values)?;
    let op = CdOperator::new(spec, grid)?;
    let mut ts = Vec::new();
    let mut rs = Vec::new();
    for i in opts.first_index(&grid)..grid.len {
        ts.push(grid.time(i));
        rs.push(op.cd(&u, i)? + lambda * u.values[i]);
    }
    Ok(ResidualReport::new(ts, rs, opts.tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{gamma, pow, sqrt, PI};

    fn grid(h: f64, t: f64) -> UniformGrid {
        UniformGrid::covering(h, t).unwrap()
    }

    #[test]
    fn constant_has_zero_cd() {
        let g = grid(1e-2, 1.0);
        let u = SampledFunction::from_fn(g, |_| 3.0).unwrap();
        let st = BernsteinSpec::Stable { alpha: 0.5 };
        assert_eq!(cd_derivative(&st, &u, 1.0).unwrap(), 0.0);
        // 𝔻 c = c ν(t)
        let rl = rl_derivative(&st, &u, 1.0).unwrap();
        assert!((rl - 3.0 / sqrt(PI)).abs() < 1e-14);
    }

    #[test]
    fn drift_reduces_to_ordinary_derivative() {
        let g = grid(1e-3, 1.0);
        let u = SampledFunction::from_fn(g, |t| t * t).unwrap();
        let v = cd_derivative(&BernsteinSpec::identity(), &u, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-5, "{v}");
        assert_eq!(rl_derivative(&BernsteinSpec::identity(), &u, 1.0).unwrap(), v);
    }

    #[test]
    fn stable_caputo_of_linear_function() {
        let g = grid(1e-3, 1.0);
        let u = SampledFunction::from_fn(g, |t| t).unwrap();
        let v = cd_derivative(&BernsteinSpec::Stable { alpha: 0.5 }, &u, 1.0).unwrap();
        assert!((v - 1.0 / gamma(1.5)).abs() < 2e-3, "{v}");
    }

    #[test]
    fn stable_caputo_of_square() {
        // 𝒟 t^2 = 2 t^{2-α} / Γ(3-α)
        let a = 0.6;
        let g = grid(1e-3, 1.0);
        let u = SampledFunction::from_fn(g, |t| t * t).unwrap();
        let v = cd_derivative(&BernsteinSpec::Stable { alpha: a }, &u, 0.5).unwrap();
        let want = 2.0 * pow(0.5, 2.0 - a) / gamma(3.0 - a);
        assert!((v - want).abs() < 1e-3, "{v} {want}");
    }

    #[test]
    fn resolution_is_enforced() {
        let g = UniformGrid::new(0.1, 20).unwrap();
        let u = SampledFunction::from_fn(g, |t| t).unwrap();
        let st = BernsteinSpec::Stable { alpha: 0.5 };
        assert!(matches!(cd_derivative(&st, &u, 0.5), Err(Error::Resolution { cells: 5, required: 8 })));
        assert!(cd_derivative(&st, &u, 0.8).is_ok());
        assert!(cd_derivative(&st, &u, 0.85).is_err());
        assert!(SampledFunction::new(0.1, alloc::vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn grid_uniformity_check() {
        assert!(UniformGrid::from_times(&[0.0, 0.1, 0.2, 0.30000000000000004]).is_ok());
        assert!(UniformGrid::from_times(&[0.0, 0.1, 0.2, 0.31]).is_err());
        assert!(UniformGrid::from_times(&[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn eigen_residual_drift() {
        let r = eigen_residual(&BernsteinSpec::identity(), 1.0, grid(1e-3, 1.0), &ResidualOptions::default()).unwrap();
        assert!(r.max_abs <= 1e-4, "{}", r.max_abs);
        assert!(r.pass);
        let z = eigen_residual(&BernsteinSpec::Stable { alpha: 0.5 }, 0.0, grid(1e-3, 1.0), &ResidualOptions::default()).unwrap();
        assert!(z.max_abs <= 1e-8);
    }

    #[test]
    fn eigen_residual_stable_converges() {
        let st = BernsteinSpec::Stable { alpha: 0.5 };
        let opts = ResidualOptions::default();
        let a = eigen_residual(&st, 1.0, grid(1e-3, 1.0), &opts).unwrap();
        let b = eigen_residual(&st, 1.0, grid(5e-4, 1.0), &opts).unwrap();
        assert!(a.max_abs <= 5e-3, "{}", a.max_abs);
        assert!(a.max_abs / b.max_abs >= 1.5, "{} {}", a.max_abs, b.max_abs);
        assert_eq!(a.grid.first().copied(), Some(0.05));
    }

    #[test]
    fn eigen_residual_compound_poisson() {
        let cpe = BernsteinSpec::CompoundPoissonExp { rate: 1.0, beta: 1.0 };
        let r = eigen_residual(&cpe, 1.0, grid(1e-3, 1.0), &ResidualOptions::default()).unwrap();
        assert!(r.max_abs < 1e-3, "{}", r.max_abs);
    }
}
