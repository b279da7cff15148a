//! Distributions of counting processes time-changed by a subordinator `H^ψ`
//! and an inverse subordinator `Y^f`: pmfs, pgfs, generators and residuals
//! of the governing equations.
//!
//! A Poisson process is treated as a generalized counting process with a
//! single jump size, so both outer laws share one code path through the
//! operator `C = Σ λ_j B^j` (`B` the backshift).

mod closed;
mod generator;
mod omega;
mod pmf;

pub use closed::gn_pmf_closed;
pub use generator::{build_generator, generator_entry_from_omega, GeneratorMatrix};
pub use omega::{omega_set, OmegaTuple};
pub use pmf::{
    gcp_pmf, governing_residual, pgf, pmf_no_inverse, pmf_time_changed, poisson_pmf, PmfMethod, PmfOptions, PmfTable,
    MASS_TOLERANCE, NMAX_CAP, NEGATIVE_CLAMP,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::bernstein::{sum_exponents, BernsteinSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum OuterLaw {
    Poisson { rate: f64 },
    /// Jumps of size `j` arrive at rate `rates[j - 1]`.
    Gcp { rates: Vec<f64> },
}

impl OuterLaw {
    pub fn validate(&self) -> Result<()> {
        let rates = self.rates();
        if rates.is_empty() {
            return Err(Error::invalid("a generalized counting process needs at least one rate"));
        }
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::invalid("outer rates must be positive and finite"));
        }
        Ok(())
    }

    /// Rates by jump size, `[λ]` for Poisson.
    pub fn rates(&self) -> Vec<f64> {
        match self {
            OuterLaw::Poisson { rate } => vec![*rate],
            OuterLaw::Gcp { rates } => rates.clone(),
        }
    }

    /// `Λ = Σ λ_j`.
    pub fn total_rate(&self) -> f64 {
        self.rates().iter().sum()
    }

    /// `Σ λ_j (1 - u^j)`, the exponent of the outer pgf per unit time.
    pub fn pgf_exponent(&self, u: f64) -> f64 {
        self.rates()
            .iter()
            .enumerate()
            .map(|(j, r)| r * (1.0 - crate::math::powi(u, j as i32 + 1)))
            .sum()
    }
}

/// `outer(H^ψ(Y^f(t)))`; a missing `ψ` or `f` is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub outer: OuterLaw,
    pub inner: Option<BernsteinSpec>,
    pub inverse: Option<BernsteinSpec>,
}

impl ProcessSpec {
    pub fn new(outer: OuterLaw) -> Result<Self> {
        outer.validate()?;
        Ok(Self {
            outer,
            inner: None,
            inverse: None,
        })
    }

    pub fn poisson(rate: f64) -> Result<Self> {
        Self::new(OuterLaw::Poisson { rate })
    }

    pub fn gcp(rates: Vec<f64>) -> Result<Self> {
        Self::new(OuterLaw::Gcp { rates })
    }

    pub fn with_inner(mut self, psi: BernsteinSpec) -> Self {
        self.inner = Some(psi);
        self
    }

    /// Several independent inner subordinators, composed through the sum of
    /// their exponents.
    pub fn with_inner_sum(self, psis: &[BernsteinSpec]) -> Result<Self> {
        Ok(self.with_inner(sum_exponents(psis)?))
    }

    pub fn with_inverse(mut self, f: BernsteinSpec) -> Self {
        self.inverse = Some(f);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.outer.validate()?;
        if let Some(psi) = &self.inner {
            psi.validate()?;
        }
        if let Some(f) = &self.inverse {
            f.validate()?;
        }
        Ok(())
    }
}
