//! Numerical inversion of Laplace transforms.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::math::{cos, exp, ln_factorial, sin, LN_2, PI};
use crate::{Error, Result};

/// Fixed Talbot rule with `m` nodes on the contour
/// `s(θ) = r θ (cot θ + i)`, `r = 2m / (5t)`.
///
/// All singularities of `transform` must lie on the negative real axis.
pub fn talbot<F: FnMut(Complex64) -> Complex64>(mut transform: F, t: f64, m: usize) -> f64 {
    talbot_vec(|s, out| out[0] = transform(s), t, m, 1)[0]
}

/// [`talbot`] for a transform with `len` components, written into the
/// output slice at each node.
pub fn talbot_vec<F: FnMut(Complex64, &mut [Complex64])>(mut transform: F, t: f64, m: usize, len: usize) -> Vec<f64> {
    let mf = m as f64;
    let r = 2.0 * mf / (5.0 * t);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    transform(Complex64::new(r, 0.0), &mut buf);
    let e0 = 0.5 * exp(r * t);
    let mut acc: Vec<f64> = buf.iter().map(|v| e0 * v.re).collect();
    for k in 1..m {
        let theta = k as f64 * PI / mf;
        let cot = cos(theta) / sin(theta);
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let weight = (s * t).exp() * Complex64::new(1.0, sigma);
        transform(s, &mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            *a += (weight * v).re;
        }
    }
    acc.iter().map(|a| r / mf * a).collect()
}

/// Gaver-Stehfest rule with `n` (even) real nodes `k ln 2 / t`.
pub fn gaver_stehfest<F: FnMut(f64) -> f64>(mut transform: F, t: f64, n: usize) -> f64 {
    gaver_stehfest_vec(|s, out| out[0] = transform(s), t, n, 1)[0]
}

pub fn gaver_stehfest_vec<F: FnMut(f64, &mut [f64])>(mut transform: F, t: f64, n: usize, len: usize) -> Vec<f64> {
    let a = LN_2 / t;
    let mut buf = vec![0.0; len];
    let mut acc = vec![0.0; len];
    for k in 1..=n {
        let w = stehfest_weight(k, n);
        transform(k as f64 * a, &mut buf);
        for (o, v) in acc.iter_mut().zip(&buf) {
            *o += w * v;
        }
    }
    acc.iter().map(|v| a * v).collect()
}

fn stehfest_weight(k: usize, n: usize) -> f64 {
    let half = n / 2;
    let mut v = 0.0;
    for j in k.div_ceil(2)..=k.min(half) {
        let lj = half as f64 * crate::math::ln(j as f64) + ln_factorial(2 * j)
            - ln_factorial(half - j)
            - ln_factorial(j)
            - ln_factorial(j - 1)
            - ln_factorial(k - j)
            - ln_factorial(2 * j - k);
        v += exp(lj);
    }
    if (k + half) % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Absolute disagreement between two orders above which inversion is
/// reported as unstable.
pub const INSTABILITY_THRESHOLD: f64 = 1e-4;

/// Inverts with Talbot at order `m` when a complex transform is available,
/// else Gaver-Stehfest at `min(m, 16)`, and cross-checks against the rule
/// two orders lower.
pub(crate) fn invert<C, R>(complex: Option<C>, mut real: R, t: f64, m: usize, context: &str) -> Result<f64>
where
    C: FnMut(Complex64) -> Complex64,
    R: FnMut(f64) -> f64,
{
    let complex = complex.map(|mut c| move |s: Complex64, out: &mut [Complex64]| out[0] = c(s));
    Ok(invert_vec(complex, |r, out: &mut [f64]| out[0] = real(r), t, m, 1, context)?[0])
}

pub(crate) fn invert_vec<C, R>(complex: Option<C>, mut real: R, t: f64, m: usize, len: usize, context: &str) -> Result<Vec<f64>>
where
    C: FnMut(Complex64, &mut [Complex64]),
    R: FnMut(f64, &mut [f64]),
{
    let (hi, lo) = match complex {
        Some(mut c) => (talbot_vec(&mut c, t, m, len), talbot_vec(&mut c, t, m - 2, len)),
        None => {
            let n = m.min(16);
            (gaver_stehfest_vec(&mut real, t, n, len), gaver_stehfest_vec(&mut real, t, n - 2, len))
        }
    };
    for (h, l) in hi.iter().zip(&lo) {
        if !h.is_finite() {
            return Err(Error::NonFinite(context.into()));
        }
        let diff = (h - l).abs();
        if diff > INSTABILITY_THRESHOLD * h.abs().max(1.0) {
            return Err(Error::accuracy(context, *h, diff));
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn talbot_inverts_elementary_transforms() {
        for &t in &[0.1, 1.0, 5.0] {
            let v = talbot(|s| 1.0 / (s + 1.5), t, 20);
            assert!((v - exp(-1.5 * t)).abs() < 1e-12, "t={t} {v}");
            // 1/sqrt(s) <-> 1/sqrt(pi t)
            let v = talbot(|s| 1.0 / s.sqrt(), t, 20);
            assert!((v - 1.0 / crate::math::sqrt(PI * t)).abs() < 1e-11);
        }
    }

    #[test]
    fn stehfest_inverts_smooth_transforms() {
        for &t in &[0.5, 1.0, 3.0] {
            let v = gaver_stehfest(|s| 1.0 / (s + 1.0), t, 14);
            assert!((v - exp(-t)).abs() < 5e-5, "t={t} {v}");
        }
        let sum: f64 = (1..=14).map(|k| stehfest_weight(k, 14)).sum();
        assert!(sum.abs() < 1e-6);
    }
}
