use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::generator::{build_generator, GeneratorMatrix};
use super::omega::omega_set;
use super::ProcessSpec;
use crate::bernstein::BernsteinSpec;
use crate::gfcalc::{CdOperator, ResidualOptions, ResidualReport, SampledFunction, UniformGrid};
use crate::laplace::{check_order, inversion, tilde_ell, TildeEllMethod, DEFAULT_INVERSION_ORDER};
use crate::math::{exp, ln, ln_factorial, pow};
use crate::pathsim::{empirical_pmf, sample_time_changed_count, SimOptions, StreamPlan};
use crate::specfun::ml_three_param_estimate;
use crate::{Error, Result};

/// Target for `1 - Σ p_n` when choosing `nmax` adaptively.
pub const MASS_TOLERANCE: f64 = 1e-8;
/// Largest `nmax` the adaptive search may reach.
pub const NMAX_CAP: usize = crate::bernstein::MAX_DERIVATIVE_ORDER;
/// Negative probabilities down to this size are rounding noise and set to 0.
pub const NEGATIVE_CLAMP: f64 = 1e-12;
/// Rows computed beyond the requested index before checking the mass.
pub const GUARD_ROWS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PmfMethod {
    /// `e^{tG} e_0` for processes without an inverse subordinator.
    Generator,
    /// Inversion of `(f(s)/s)(f(s) I - G)^{-1} e_0` in `s`.
    Resolvent,
    /// Histogram of simulated counts.
    MonteCarlo { n: usize, seed: u64 },
    /// Termwise Mittag-Leffler expansion for stable `f`.
    StableClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmfOptions {
    pub order: usize,
    /// Double `nmax` until the mass deficit is below [`MASS_TOLERANCE`].
    pub adaptive: bool,
    pub cap: usize,
    pub sim: SimOptions,
}

impl Default for PmfOptions {
    fn default() -> Self {
        Self {
            order: DEFAULT_INVERSION_ORDER,
            adaptive: true,
            cap: NMAX_CAP,
            sim: SimOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable {
    pub t: f64,
    /// `p_0..p_nmax`; `nmax` may exceed the requested index.
    pub probs: Vec<f64>,
    /// Standard errors, for Monte Carlo tables.
    pub stderr: Option<Vec<f64>>,
    pub mass_deficit: f64,
    pub method: PmfMethod,
    pub requested: usize,
    /// The adaptive search stopped at the cap before reaching
    /// [`MASS_TOLERANCE`].
    pub capped: bool,
}

impl PmfTable {
    fn finish(t: f64, mut probs: Vec<f64>, method: PmfMethod, requested: usize, capped: bool) -> Result<Self> {
        for p in probs.iter_mut() {
            if *p < -NEGATIVE_CLAMP || !p.is_finite() {
                return Err(Error::accuracy("pmf", *p, p.abs()));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(Error::accuracy("pmf normalization", total, total - 1.0));
        }
        Ok(Self {
            t,
            mass_deficit: 1.0 - total,
            probs,
            stderr: None,
            method,
            requested,
            capped,
        })
    }

    /// `p_0..p_requested`.
    pub fn requested_probs(&self) -> &[f64] {
        &self.probs[..=self.requested.min(self.probs.len() - 1)]
    }

    /// `Σ p_n u^n` over the table.
    pub fn pgf(&self, u: f64) -> f64 {
        self.probs.iter().rev().fold(0.0, |acc, p| acc * u + p)
    }
}

/// Runs `compute` with growing `nmax` until the tail mass is small.
fn adaptive<F>(requested: usize, opts: &PmfOptions, mut compute: F) -> Result<(Vec<f64>, bool)>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    let cap = opts.cap.min(NMAX_CAP);
    if requested > cap {
        return Err(Error::UnsupportedOrder {
            order: requested,
            cap,
        });
    }
    if !opts.adaptive {
        return Ok((compute(requested)?, false));
    }
    let mut nmax = (requested + GUARD_ROWS).min(cap);
    loop {
        let probs = compute(nmax)?;
        let deficit = 1.0 - probs.iter().sum::<f64>();
        if deficit <= MASS_TOLERANCE {
            return Ok((probs, false));
        }
        if nmax >= cap {
            return Ok((probs, true));
        }
        nmax = (2 * nmax).min(cap);
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!("time must be finite and nonnegative, got {t}")))
    }
}

/// `e^{-λt} (λt)^k / k!`.
pub fn poisson_pmf(lambda: f64, t: f64, k: usize) -> f64 {
    let m = lambda * t;
    if m == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    exp(k as f64 * ln(m) - m - ln_factorial(k))
}

/// `Σ_{Ω(k,n)} ∏ (λ_j t)^{x_j} / x_j! · e^{-Λt}`.
pub fn gcp_pmf(rates: &[f64], t: f64, n: usize) -> f64 {
    let total: f64 = rates.iter().sum();
    if t == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    omega_set(rates.len(), n)
        .iter()
        .map(|tuple| {
            let mut log = -total * t;
            for (x, r) in tuple.x.iter().zip(rates) {
                log += *x as f64 * ln(r * t) - ln_factorial(*x as usize);
            }
            exp(log)
        })
        .sum()
}

/// `e^{tG} e_0`: with `G = g_0 I + L`, the generating function is
/// `exp(t(g_0 + L(z)))`, so `p_0 = e^{t g_0}` and
/// `n p_n = t Σ_{m=1}^{n} m ℓ_m p_{n-m}`. All `ℓ_m ≥ 0`, so nothing cancels.
fn generator_exponential(gen: &GeneratorMatrix, t: f64) -> Vec<f64> {
    let size = gen.size();
    let mut p = vec![0.0; size];
    p[0] = exp(t * gen.diagonal);
    for n in 1..size {
        let mut acc = 0.0;
        for m in 1..=n {
            acc += m as f64 * gen.sub[m] * p[n - m];
        }
        p[n] = t * acc / n as f64;
    }
    p
}

/// Pmf of `outer(H^ψ(t))` (no inverse subordinator) up to index `nmax`.
pub fn pmf_no_inverse(process: &ProcessSpec, t: f64, nmax: usize, opts: &PmfOptions) -> Result<PmfTable> {
    process.validate()?;
    check_time(t)?;
    if process.inverse.is_some() {
        return Err(Error::MethodMismatch("process has an inverse subordinator; use pmf_time_changed".into()));
    }
    let (probs, capped) = adaptive(nmax, opts, |size| {
        let gen = build_generator(&process.outer, process.inner.as_ref(), size)?;
        Ok(generator_exponential(&gen, t))
    })?;
    PmfTable::finish(t, probs, PmfMethod::Generator, nmax, capped)
}

/// Solves `(d I - L) x = e_0` for lower-triangular Toeplitz `L`.
fn toeplitz_solve<T>(d: T, sub: &[f64], out: &mut [T])
where
    T: Copy + core::ops::Mul<f64, Output = T> + core::ops::Add<Output = T> + core::ops::Div<Output = T> + From<f64>,
{
    let one: T = T::from(1.0);
    out[0] = one / d;
    for n in 1..out.len() {
        let mut acc = T::from(0.0);
        for m in 1..=n {
            acc = acc + out[n - m] * sub[m];
        }
        out[n] = acc / d;
    }
}

/// `p(t)` as the inverse transform of `(f(s)/s) (f(s) I - G)^{-1} e_0`.
fn resolvent_probs(f: &BernsteinSpec, gen: &GeneratorMatrix, t: f64, order: usize) -> Result<Vec<f64>> {
    let size = gen.size();
    let g0 = gen.diagonal;
    let complex = f.is_analytic().then_some(|s: Complex64, out: &mut [Complex64]| {
        let fs = f.eval_complex(s).unwrap_or(Complex64::new(f64::NAN, 0.0));
        toeplitz_solve(fs - g0, &gen.sub, out);
        let scale = fs / s;
        for v in out.iter_mut() {
            *v *= scale;
        }
    });
    let real = |r: f64, out: &mut [f64]| {
        let fr = f.eval_unchecked(r);
        toeplitz_solve(fr - g0, &gen.sub, out);
        for v in out.iter_mut() {
            *v *= fr / r;
        }
    };
    inversion::invert_vec(complex, real, t, order, size, "resolvent pmf")
}

/// Absolute error allowed on each entry of a stable closed-form pmf.
const CLOSED_FORM_TOLERANCE: f64 = 1e-10;

/// `p_n = Σ_{m=0}^{n} t^{αm} E^{m+1}_{α,αm+1}(g_0 t^α) [L^m]_n`.
///
/// Each Mittag-Leffler factor carries an error estimate; the propagated
/// absolute error of every entry must stay below [`CLOSED_FORM_TOLERANCE`].
fn stable_closed_probs(alpha: f64, gen: &GeneratorMatrix, t: f64) -> Result<Vec<f64>> {
    let size = gen.size();
    let ta = pow(t, alpha);
    let z = gen.diagonal * ta;
    let mut probs = vec![0.0; size];
    let mut errors = vec![0.0; size];
    let mut power = vec![0.0; size];
    power[0] = 1.0;
    for m in 0..size {
        if m > 0 {
            let mut next = vec![0.0; size];
            for n in m..size {
                next[n] = (1..=n - m + 1).map(|j| gen.sub[j] * power[n - j]).sum();
            }
            power = next;
        }
        if power[m..].iter().all(|&v| v == 0.0) {
            break;
        }
        let scale = pow(ta, m as f64);
        let e = ml_three_param_estimate(alpha, alpha * m as f64 + 1.0, m as f64 + 1.0, z)?;
        for n in m..size {
            probs[n] += scale * e.value * power[n];
            errors[n] += scale * e.error * power[n].abs();
        }
    }
    if let Some((n, err)) = errors.iter().enumerate().find(|(_, e)| !(**e <= CLOSED_FORM_TOLERANCE)) {
        return Err(Error::accuracy("stable closed-form pmf", probs[n], *err));
    }
    Ok(probs)
}

/// Pmf of `outer(H^ψ(Y^f(t)))` up to index `nmax`.
pub fn pmf_time_changed(process: &ProcessSpec, t: f64, nmax: usize, method: PmfMethod, opts: &PmfOptions) -> Result<PmfTable> {
    process.validate()?;
    check_time(t)?;
    check_order(opts.order)?;
    let Some(f) = process.inverse.as_ref() else {
        return Err(Error::MethodMismatch("process has no inverse subordinator; use pmf_no_inverse".into()));
    };
    if t == 0.0 {
        let mut probs = vec![0.0; nmax + 1];
        probs[0] = 1.0;
        return PmfTable::finish(t, probs, method, nmax, false);
    }
    match method {
        PmfMethod::Generator => Err(Error::MethodMismatch("the generator method ignores the inverse subordinator".into())),
        PmfMethod::Resolvent => {
            let (probs, capped) = adaptive(nmax, opts, |size| {
                let gen = build_generator(&process.outer, process.inner.as_ref(), size)?;
                resolvent_probs(f, &gen, t, opts.order)
            })?;
            PmfTable::finish(t, probs, method, nmax, capped)
        }
        PmfMethod::StableClosedForm => {
            let Some(alpha) = f.stable_index() else {
                return Err(Error::MethodMismatch("closed form requires a stable inverse exponent".into()));
            };
            let (probs, capped) = adaptive(nmax, opts, |size| {
                let gen = build_generator(&process.outer, process.inner.as_ref(), size)?;
                stable_closed_probs(alpha, &gen, t)
            })?;
            PmfTable::finish(t, probs, method, nmax, capped)
        }
        PmfMethod::MonteCarlo { n, seed } => {
            if n < 2 {
                return Err(Error::invalid("Monte Carlo needs at least 2 draws"));
            }
            let counts = StreamPlan::new(seed, n).run(|rng| sample_time_changed_count(process, t, rng, &opts.sim))?;
            let (probs, se) = empirical_pmf(&counts, nmax);
            let mut table = PmfTable::finish(t, probs, method, nmax, false)?;
            table.stderr = Some(se);
            Ok(table)
        }
    }
}

/// `E u^{N(t)}`: `ℓ̃_f(t, ψ(Σ λ_j (1 - u^j)))`, or `e^{-t ψ(·)}` without an
/// inverse subordinator.
pub fn pgf(process: &ProcessSpec, u: f64, t: f64, method: TildeEllMethod) -> Result<f64> {
    process.validate()?;
    check_time(t)?;
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::invalid("pgf argument must lie in [-1, 1]"));
    }
    if u == 1.0 || t == 0.0 {
        return Ok(1.0);
    }
    let mut arg = process.outer.pgf_exponent(u);
    if let Some(psi) = &process.inner {
        arg = psi.eval(arg)?;
    }
    match &process.inverse {
        Some(f) => tilde_ell(f, t, arg, method),
        None => Ok(exp(-t * arg)),
    }
}

/// Residual of the governing equation `𝒟 p_n = (G p)_n` on the grid, with
/// `𝒟` built from `f` (the ordinary derivative when `f` is absent).
pub fn governing_residual(process: &ProcessSpec, grid: UniformGrid, n: usize, opts: &ResidualOptions) -> Result<ResidualReport> {
    process.validate()?;
    let identity = BernsteinSpec::identity();
    let f = process.inverse.as_ref().unwrap_or(&identity);
    let gen = build_generator(&process.outer, process.inner.as_ref(), n)?;
    let mut rows = Vec::with_capacity(grid.len);
    for i in 0..grid.len {
        let t = grid.time(i);
        rows.push(if i == 0 {
            let mut e0 = vec![0.0; n + 1];
            e0[0] = 1.0;
            e0
        } else if process.inverse.is_none() {
            generator_exponential(&gen, t)
        } else {
            resolvent_probs(f, &gen, t, DEFAULT_INVERSION_ORDER)?
        });
    }
    let u = SampledFunction::new(grid.h, rows.iter().map(|p| p[n]).collect())?;
    let op = CdOperator::new(f, grid)?;
    let mut ts = Vec::new();
    let mut rs = Vec::new();
    for i in opts.first_index(&grid)..grid.len {
        ts.push(grid.time(i));
        rs.push(op.cd(&u, i)? - gen.apply_row(n, &rows[i]));
    }
    Ok(ResidualReport::new(ts, rs, opts.tolerance))
}
