use alloc::vec;

use super::omega::omega_set;
use crate::math::{exp, ln, ln_factorial, pow};
use crate::specfun::{ml_three_param, wright_psi, WrightParams};
use crate::{Error, Result};

/// Pmf of a generalized counting process with rates `λ_1..λ_k`, run at the
/// clock of a compound Poisson-Gamma subordinator with exponent
/// `λ(1 - (β/(β+u))^α)`:
///
/// `p_n(t) = e^{-λt} Σ_{Ω(k,n)} ∏ λ_j^{x_j}/x_j! (Λ+β)^{-z} ₁Ψ₁((z, α), (0, α); w)`
/// with `w = λ t β^α / (Λ+β)^α`.
///
/// For `α = 1` the Wright function reduces to `e^w` when `z = 0` and to
/// `w z! 𝓔^{z+1}_{1,2}(w)` otherwise.
pub fn gn_pmf_closed(rates: &[f64], lambda: f64, alpha: f64, beta: f64, t: f64, n: usize) -> Result<f64> {
    if rates.is_empty() || rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::invalid("rates must be positive"));
    }
    for (name, v) in [("λ", lambda), ("α", alpha), ("β", beta), ("t", t)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(alloc::format!("{name} must be positive, got {v}")));
        }
    }
    if alpha > 1.0 {
        return Err(Error::invalid("the Gamma shape must lie in (0, 1]"));
    }
    let total: f64 = rates.iter().sum();
    let w = lambda * t * pow(beta / (total + beta), alpha);
    let mut acc = 0.0;
    for tuple in omega_set(rates.len(), n) {
        let z = tuple.z as usize;
        let mut log = -(z as f64) * ln(total + beta);
        for (x, r) in tuple.x.iter().zip(rates) {
            log += *x as f64 * ln(*r) - ln_factorial(*x as usize);
        }
        let special = if alpha == 1.0 {
            if z == 0 {
                exp(w)
            } else {
                w * exp(ln_factorial(z)) * ml_three_param(1.0, 2.0, z as f64 + 1.0, w)?
            }
        } else {
            let p = WrightParams::new(vec![(z as f64, alpha)], vec![(0.0, alpha)])?;
            wright_psi(&p, w)?
        };
        acc += exp(log) * special;
    }
    Ok(exp(-lambda * t) * acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_count_closed_forms() {
        let (rates, l, b, t) = ([1.0, 0.5], 1.3, 0.7, 2.0);
        let total = 1.5;
        let p0 = gn_pmf_closed(&rates, l, 0.6, b, t, 0).unwrap();
        let want = exp(-l * t * (1.0 - pow(b / (total + b), 0.6)));
        assert!((p0 - want).abs() < 1e-12);
        let p0 = gn_pmf_closed(&rates, l, 1.0, b, t, 0).unwrap();
        assert!((p0 - exp(-l * total * t / (total + b))).abs() < 1e-12);
    }

    #[test]
    fn alpha_one_matches_wright_limit() {
        // The α = 1 dispatch and the Wright series at α = 1 must agree.
        let rates = [1.0, 0.5];
        for n in 0..6 {
            let a = gn_pmf_closed(&rates, 1.0, 1.0, 1.0, 1.0, n).unwrap();
            let mut acc = 0.0;
            let w = 1.0 / 2.5;
            for tuple in omega_set(2, n) {
                let z = tuple.z as f64;
                let mut c = pow(2.5, -z);
                for (x, r) in tuple.x.iter().zip(&rates) {
                    c *= pow(*r, *x as f64) / exp(ln_factorial(*x as usize));
                }
                let p = WrightParams::new(vec![(z, 1.0)], vec![(0.0, 1.0)]).unwrap();
                acc += c * wright_psi(&p, w).unwrap();
            }
            assert!((a - exp(-1.0) * acc).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn sums_to_one() {
        let s: f64 = (0..80).map(|n| gn_pmf_closed(&[1.0, 0.5], 1.0, 0.6, 1.0, 1.0, n).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-10, "{s}");
    }
}
