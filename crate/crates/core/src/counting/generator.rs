use alloc::vec;
use alloc::vec::Vec;

use super::omega::omega_set;
use super::OuterLaw;
use crate::bernstein::{BernsteinSpec, MAX_DERIVATIVE_ORDER};
use crate::math::{ln, ln_factorial};
use crate::{Error, Result};

/// Lower-triangular Toeplitz generator `G` of size `nmax + 1`: `diagonal` on
/// the diagonal and `sub[m]` on the `m`-th subdiagonal (`sub[0]` unused).
///
/// `G = -ψ(Λ I - C)` with `C = Σ λ_j B^j`, so `p(t) = e^{tG} e_0` is the pmf
/// of the counting process run at the clock of `H^ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    pub diagonal: f64,
    pub sub: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn size(&self) -> usize {
        self.sub.len()
    }

    pub fn nmax(&self) -> usize {
        self.sub.len() - 1
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        match row.checked_sub(col) {
            Some(0) => self.diagonal,
            Some(m) if row < self.size() => self.sub[m],
            _ => 0.0,
        }
    }

    /// Row `n` of `G p`.
    pub fn apply_row(&self, n: usize, p: &[f64]) -> f64 {
        let mut acc = self.diagonal * p[n];
        for m in 1..=n {
            acc += self.sub[m] * p[n - m];
        }
        acc
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        (0..p.len().min(self.size())).map(|n| self.apply_row(n, p)).collect()
    }

    /// Row sums of the truncated matrix; they approach 0 away from the
    /// last rows.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut acc = self.diagonal;
        let mut out = Vec::with_capacity(self.size());
        out.push(acc);
        for m in 1..self.size() {
            acc += self.sub[m];
            out.push(acc);
        }
        out
    }
}

/// Generator of the outer law composed with `ψ` (identity when absent).
///
/// With `a_m = ψ^{(m)}(Λ)/m!`, `G = -Σ_m a_m (-C)^m`, a finite sum since
/// `C` is nilpotent on the truncated space. Writing `q = C/Λ` (a
/// probability vector over jump sizes) and `w_m = -a_m (-Λ)^m ≥ 0`, the
/// subdiagonals are `sub[n] = Σ_{m=1}^{n} w_m [q^m]_n`, a sum of
/// nonnegative terms.
pub fn build_generator(outer: &OuterLaw, psi: Option<&BernsteinSpec>, nmax: usize) -> Result<GeneratorMatrix> {
    outer.validate()?;
    if nmax > MAX_DERIVATIVE_ORDER {
        return Err(Error::UnsupportedOrder {
            order: nmax,
            cap: MAX_DERIVATIVE_ORDER,
        });
    }
    let rates = outer.rates();
    let total: f64 = rates.iter().sum();
    let mut sub = vec![0.0; nmax + 1];
    let Some(psi) = psi else {
        for (j, r) in rates.iter().enumerate() {
            if j < nmax {
                sub[j + 1] = *r;
            }
        }
        return Ok(GeneratorMatrix { diagonal: -total, sub });
    };
    let a = psi.scaled_taylor_coefficients(total, total, nmax + 1)?;
    let w: Vec<f64> = a.iter().enumerate().map(|(m, am)| if m % 2 == 0 { -am } else { *am }).collect();
    let q: Vec<f64> = rates.iter().map(|r| r / total).collect();
    // power[n] = [q^m]_n, advanced one convolution per m.
    let mut power = vec![0.0; nmax + 1];
    power[0] = 1.0;
    for m in 1..=nmax {
        let mut next = vec![0.0; nmax + 1];
        // [q^m] is supported on n ≥ m.
        for n in m..=nmax {
            let mut acc = 0.0;
            for (j, qj) in q.iter().enumerate() {
                let step = j + 1;
                if step > n {
                    break;
                }
                acc += qj * power[n - step];
            }
            next[n] = acc;
        }
        power = next;
        for n in m..=nmax {
            sub[n] += w[m] * power[n];
        }
    }
    Ok(GeneratorMatrix { diagonal: -a[0], sub })
}

/// Entry `(n, n - m)` of the generator from the Ω-sum
/// `-Σ_{Ω(k,m)} ψ^{(z)}(Λ) ∏ (-λ_j)^{x_j} / x_j!`, an independent route to
/// the subdiagonals of [`build_generator`].
pub fn generator_entry_from_omega(outer: &OuterLaw, psi: &BernsteinSpec, m: usize) -> Result<f64> {
    outer.validate()?;
    let rates = outer.rates();
    let total: f64 = rates.iter().sum();
    let mut acc = 0.0;
    for tuple in omega_set(rates.len(), m) {
        let z = tuple.z as usize;
        let dz = psi.derivative(z, total)?;
        let mut log = 0.0;
        let mut negative = false;
        for (x, r) in tuple.x.iter().zip(&rates) {
            log += *x as f64 * ln(*r) - ln_factorial(*x as usize);
            negative ^= x % 2 == 1;
        }
        let term = dz * crate::math::exp(log);
        acc += if negative { -term } else { term };
    }
    Ok(-acc)
}
