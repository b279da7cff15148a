//! Monte Carlo sampling of subordinators, their first passages and composed
//! counts.
//!
//! All randomness flows through [`RngStream`], a ChaCha8 generator keyed by
//! `(seed, stream_id)`. Batches are split into fixed streams so results do
//! not depend on how streams are scheduled.

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};

use crate::bernstein::BernsteinSpec;
use crate::counting::{OuterLaw, ProcessSpec};
use crate::math::{exp, ln, pow, sin, sqrt, PI};
use crate::{Error, Result};

/// Reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw on the open interval (0, 1).
    fn open01(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.random();
            if u > 0.0 {
                return u;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Step of the grid walk used to locate first passages when the Lévy
    /// measure has infinite mass and no exact sampler applies.
    pub refine_eps: f64,
    /// Number of times the search horizon may double before giving up.
    pub max_doublings: u32,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            refine_eps: 1e-3,
            max_doublings: 20,
        }
    }
}

impl SimOptions {
    fn validate(&self) -> Result<()> {
        if self.refine_eps.is_finite() && self.refine_eps > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid("refine_eps must be positive"))
        }
    }
}

/// A subordinator path on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub stream_id: u64,
    pub exponent: BernsteinSpec,
}

impl PathSample {
    /// First grid time at which the path exceeds `level`, if any.
    pub fn first_passage(&self, level: f64) -> Option<f64> {
        let i = self.values.partition_point(|&v| v <= level);
        self.times.get(i).copied()
    }
}

fn ensure_simulatable(spec: &BernsteinSpec) -> Result<()> {
    spec.validate()?;
    if spec.is_simulatable() {
        Ok(())
    } else {
        Err(Error::unsupported("custom Bernstein functions cannot be simulated"))
    }
}

/// Standard positive `α`-stable variable with `E e^{-sS} = e^{-s^α}`, by
/// Kanter's representation `S = (A(U) / E)^{(1-α)/α}`.
pub fn positive_stable(alpha: f64, rng: &mut RngStream) -> f64 {
    if alpha == 1.0 {
        return 1.0;
    }
    let u = rng.open01();
    let e: f64 = Exp1.sample(rng);
    let ln_a = (alpha * ln(sin(alpha * PI * u)) + (1.0 - alpha) * ln(sin((1.0 - alpha) * PI * u))
        - ln(sin(PI * u)))
        / (1.0 - alpha);
    exp((1.0 - alpha) / alpha * (ln_a - ln(e)))
}

fn poisson_count(mean: f64, rng: &mut RngStream) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    // Poisson::new only fails for non-finite or non-positive means.
    Poisson::new(mean).map(|d| d.sample(rng)).unwrap_or(0.0)
}

fn gamma_draw(shape: f64, rate: f64, rng: &mut RngStream) -> f64 {
    Gamma::new(shape, 1.0 / rate).map(|d| d.sample(rng)).unwrap_or(0.0)
}

/// One increment `H(s + dt) - H(s)`, excluding the drift part.
fn jump_increment(spec: &BernsteinSpec, dt: f64, rng: &mut RngStream) -> f64 {
    match spec {
        BernsteinSpec::Stable { alpha } if *alpha < 1.0 => pow(dt, 1.0 / alpha) * positive_stable(*alpha, rng),
        BernsteinSpec::CompoundPoissonGamma { rate, shape, beta } => {
            let n = poisson_count(rate * dt, rng);
            if n == 0.0 {
                0.0
            } else {
                gamma_draw(shape * n, *beta, rng)
            }
        }
        BernsteinSpec::CompoundPoissonExp { rate, beta } => {
            let n = poisson_count(rate * dt, rng);
            if n == 0.0 {
                0.0
            } else {
                gamma_draw(n, *beta, rng)
            }
        }
        BernsteinSpec::Sum(parts) => parts.iter().map(|p| jump_increment(p, dt, rng)).sum(),
        _ => 0.0,
    }
}

/// One draw of `H(t)`.
pub fn sample_subordinator(spec: &BernsteinSpec, t: f64, rng: &mut RngStream) -> Result<f64> {
    ensure_simulatable(spec)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("time must be finite and nonnegative"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(spec.drift_coefficient() * t + jump_increment(spec, t, rng))
}

/// Path of `H` on the grid `0, step, 2 step, …`, ending exactly at `horizon`.
pub fn sample_subordinator_path(spec: &BernsteinSpec, horizon: f64, step: f64, rng: &mut RngStream) -> Result<PathSample> {
    ensure_simulatable(spec)?;
    if !(horizon > 0.0 && horizon.is_finite() && step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("horizon and step must be positive"));
    }
    let n = crate::math::ceil(horizon / step) as usize;
    let b = spec.drift_coefficient();
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    times.push(0.0);
    values.push(0.0);
    let mut jumps = 0.0;
    for i in 1..=n {
        let ti = if i == n { horizon } else { i as f64 * step };
        jumps += jump_increment(spec, ti - times[i - 1], rng);
        times.push(ti);
        values.push(b * ti + jumps);
    }
    Ok(PathSample {
        times,
        values,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
        exponent: spec.clone(),
    })
}

/// A compound-Poisson piece of a finite-activity exponent.
enum JumpLaw {
    Gamma { shape: f64, beta: f64 },
    Exp { beta: f64 },
}

fn collect_jump_laws(spec: &BernsteinSpec, out: &mut Vec<(f64, JumpLaw)>) {
    match spec {
        BernsteinSpec::CompoundPoissonGamma { rate, shape, beta } => out.push((
            *rate,
            JumpLaw::Gamma {
                shape: *shape,
                beta: *beta,
            },
        )),
        BernsteinSpec::CompoundPoissonExp { rate, beta } => out.push((*rate, JumpLaw::Exp { beta: *beta })),
        BernsteinSpec::Sum(parts) => parts.iter().for_each(|p| collect_jump_laws(p, out)),
        _ => {}
    }
}

/// One draw of `Y(t) = inf{s ≥ 0 : H(s) > t}`.
///
/// Three samplers, by family:
/// - a pure stable exponent uses self-similarity, `Y(t) = (t / S)^α` with
///   `S` standard positive stable, which is exact;
/// - finite-activity exponents (compound Poisson plus drift) are simulated
///   jump by jump, which is exact;
/// - remaining infinite-activity sums are walked on a grid of step
///   `refine_eps`, returning the first grid time with `H > t`, so the
///   result overshoots by less than `refine_eps`.
pub fn sample_inverse_passage(spec: &BernsteinSpec, t: f64, rng: &mut RngStream, opts: &SimOptions) -> Result<f64> {
    ensure_simulatable(spec)?;
    opts.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("time must be finite and nonnegative"));
    }
    if t == 0.0 {
        // H jumps immediately when the Lévy measure has infinite mass; with
        // only drift and finite jumps H(s) > 0 for every s > 0 as well.
        return Ok(0.0);
    }
    if let BernsteinSpec::Stable { alpha } = spec {
        if *alpha == 1.0 {
            return Ok(t);
        }
        let s = positive_stable(*alpha, rng);
        return Ok(pow(t / s, *alpha));
    }
    if spec.has_infinite_activity() {
        grid_passage(spec, t, rng, opts)
    } else {
        event_passage(spec, t, rng, opts)
    }
}

fn event_passage(spec: &BernsteinSpec, t: f64, rng: &mut RngStream, opts: &SimOptions) -> Result<f64> {
    let b = spec.drift_coefficient();
    let mut laws = Vec::new();
    collect_jump_laws(spec, &mut laws);
    let total: f64 = laws.iter().map(|l| l.0).sum();
    if total == 0.0 {
        return if b > 0.0 {
            Ok(t / b)
        } else {
            Err(Error::BudgetExceeded("subordinator is identically zero".into()))
        };
    }
    let max_events = (1u64 << opts.max_doublings.min(40)) * 1024;
    let (mut s, mut h) = (0.0, 0.0);
    for _ in 0..max_events {
        let wait: f64 = Exp1.sample(rng);
        let wait = wait / total;
        if b > 0.0 && h + b * wait > t {
            return Ok(s + (t - h) / b);
        }
        s += wait;
        h += b * wait;
        let mut pick = rng.random::<f64>() * total;
        let mut jump = 0.0;
        for (rate, law) in &laws {
            if pick < *rate {
                jump = match law {
                    JumpLaw::Gamma { shape, beta } => gamma_draw(*shape, *beta, rng),
                    JumpLaw::Exp { beta } => gamma_draw(1.0, *beta, rng),
                };
                break;
            }
            pick -= rate;
        }
        h += jump;
        if h > t {
            return Ok(s);
        }
    }
    Err(Error::BudgetExceeded(alloc::format!("no passage above {t} within {max_events} jumps")))
}

fn grid_passage(spec: &BernsteinSpec, t: f64, rng: &mut RngStream, opts: &SimOptions) -> Result<f64> {
    let d = opts.refine_eps;
    let b = spec.drift_coefficient();
    // Start with a horizon of order t and extend it by doubling.
    let mut horizon = t.max(d * 1024.0);
    let (mut s, mut h) = (0.0, 0.0);
    let mut k: u64 = 0;
    for _ in 0..=opts.max_doublings {
        while s < horizon {
            k += 1;
            let next = k as f64 * d;
            h += b * (next - s) + jump_increment(spec, next - s, rng);
            s = next;
            if h > t {
                return Ok(s);
            }
        }
        horizon *= 2.0;
    }
    Err(Error::BudgetExceeded(alloc::format!(
        "no passage above {t} before s = {horizon} after {} doublings",
        opts.max_doublings
    )))
}

/// One draw of the composed count `N(H^ψ(Y^f(t)))`, or its generalized
/// counting process analogue. Missing `ψ` or `f` act as identities.
pub fn sample_time_changed_count(process: &ProcessSpec, t: f64, rng: &mut RngStream, opts: &SimOptions) -> Result<u64> {
    process.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("time must be finite and nonnegative"));
    }
    if t == 0.0 {
        return Ok(0);
    }
    let y = match &process.inverse {
        Some(f) => sample_inverse_passage(f, t, rng, opts)?,
        None => t,
    };
    let tau = match &process.inner {
        Some(psi) => sample_subordinator(psi, y, rng)?,
        None => y,
    };
    let count = match &process.outer {
        OuterLaw::Poisson { rate } => poisson_count(rate * tau, rng),
        OuterLaw::Gcp { rates } => rates
            .iter()
            .enumerate()
            .map(|(j, r)| (j + 1) as f64 * poisson_count(r * tau, rng))
            .sum(),
    };
    Ok(count as u64)
}

/// Split of `draws` samples into streams of `per_stream` consecutive draws.
/// Stream `i` uses `RngStream::new(seed, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamPlan {
    pub seed: u64,
    pub draws: usize,
    pub per_stream: usize,
}

impl StreamPlan {
    pub const DEFAULT_PER_STREAM: usize = 4096;

    pub fn new(seed: u64, draws: usize) -> Self {
        Self {
            seed,
            draws,
            per_stream: Self::DEFAULT_PER_STREAM,
        }
    }

    pub fn streams(&self) -> usize {
        self.draws.div_ceil(self.per_stream.max(1))
    }

    pub fn stream_len(&self, stream: usize) -> usize {
        let per = self.per_stream.max(1);
        self.draws.saturating_sub(stream * per).min(per)
    }

    /// Runs one stream. Parallel drivers call this per stream and
    /// concatenate the results in stream order.
    pub fn run_stream<T, F>(&self, stream: usize, mut draw: F) -> Result<Vec<T>>
    where
        F: FnMut(&mut RngStream) -> Result<T>,
    {
        let mut rng = RngStream::new(self.seed, stream as u64);
        (0..self.stream_len(stream)).map(|_| draw(&mut rng)).collect()
    }

    /// Sequential driver.
    pub fn run<T, F>(&self, mut draw: F) -> Result<Vec<T>>
    where
        F: FnMut(&mut RngStream) -> Result<T>,
    {
        let mut out = Vec::with_capacity(self.draws);
        for s in 0..self.streams() {
            out.extend(self.run_stream(s, &mut draw)?);
        }
        Ok(out)
    }
}

/// Sample mean, standard deviation and standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                n,
                mean: f64::NAN,
                std: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let std = sqrt(var);
        Self {
            n,
            mean,
            std,
            stderr: std / sqrt(n as f64),
        }
    }
}

/// Empirical pmf of nonnegative counts on `0..=nmax` with per-entry
/// standard errors `sqrt(p(1-p)/n)`.
pub fn empirical_pmf(counts: &[u64], nmax: usize) -> (Vec<f64>, Vec<f64>) {
    let mut hist = alloc::vec![0usize; nmax + 1];
    for &c in counts {
        if (c as usize) <= nmax {
            hist[c as usize] += 1;
        }
    }
    let n = counts.len().max(1) as f64;
    let p: Vec<f64> = hist.iter().map(|&h| h as f64 / n).collect();
    let se = p.iter().map(|&q| sqrt(q * (1.0 - q) / n)).collect();
    (p, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::gamma;

    fn mc_laplace(spec: &BernsteinSpec, s: f64, n: usize, seed: u64) -> Summary {
        let plan = StreamPlan::new(seed, n);
        let xs = plan.run(|rng| Ok(exp(-s * sample_subordinator(spec, 1.0, rng)?))).unwrap();
        Summary::of(&xs)
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        let mut c = RngStream::new(7, 4);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn stable_sampler_matches_laplace_exponent() {
        for &alpha in &[0.3, 0.6, 0.9] {
            let spec = BernsteinSpec::Stable { alpha };
            for &s in &[0.5, 2.0] {
                let m = mc_laplace(&spec, s, 40_000, 11);
                let want = exp(-pow(s, alpha));
                assert!((m.mean - want).abs() < 4.0 * m.stderr, "α={alpha} s={s} {m:?} {want}");
            }
        }
    }

    #[test]
    fn compound_poisson_samplers_match_laplace_exponent() {
        let specs = [
            BernsteinSpec::CompoundPoissonGamma {
                rate: 1.5,
                shape: 0.7,
                beta: 2.0,
            },
            BernsteinSpec::CompoundPoissonExp { rate: 2.0, beta: 1.0 },
            BernsteinSpec::Sum(alloc::vec![
                BernsteinSpec::Stable { alpha: 0.5 },
                BernsteinSpec::PureDrift { drift: 0.3 },
            ]),
        ];
        for spec in &specs {
            let m = mc_laplace(spec, 1.0, 40_000, 5);
            let want = exp(-spec.eval(1.0).unwrap());
            assert!((m.mean - want).abs() < 4.0 * m.stderr, "{spec:?} {m:?} {want}");
        }
    }

    #[test]
    fn drift_path_is_exact() {
        let mut rng = RngStream::new(1, 0);
        let p = sample_subordinator_path(&BernsteinSpec::identity(), 3.0, 0.1, &mut rng).unwrap();
        assert_eq!(p.values, p.times);
        assert_eq!(*p.times.last().unwrap(), 3.0);
    }

    #[test]
    fn paths_start_at_zero_and_increase() {
        let spec = BernsteinSpec::Sum(alloc::vec![
            BernsteinSpec::Stable { alpha: 0.4 },
            BernsteinSpec::CompoundPoissonExp { rate: 1.0, beta: 2.0 },
        ]);
        let mut rng = RngStream::new(2, 0);
        let p = sample_subordinator_path(&spec, 2.0, 0.01, &mut rng).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert!(p.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn passage_on_common_path_is_monotone_and_bracketed() {
        let spec = BernsteinSpec::Stable { alpha: 0.6 };
        let eps = 1e-3;
        let mut rng = RngStream::new(9, 1);
        let p = sample_subordinator_path(&spec, 4.0, eps, &mut rng).unwrap();
        let mut prev = 0.0;
        for i in 1..40 {
            let level = 0.05 * i as f64;
            if let Some(y) = p.first_passage(level) {
                assert!(y >= prev);
                prev = y;
                let k = p.times.partition_point(|&s| s < y);
                assert!(p.values[k] > level);
                assert!(p.values[k - 1] <= level);
                assert!(y - p.times[k - 1] <= eps + 1e-15);
            }
        }
    }

    #[test]
    fn drift_passage_is_exact() {
        let mut rng = RngStream::new(3, 0);
        let y = sample_inverse_passage(&BernsteinSpec::identity(), 2.5, &mut rng, &SimOptions::default()).unwrap();
        assert_eq!(y, 2.5);
    }

    #[test]
    fn inverse_stable_mean() {
        // E Y(t) = t^α / Γ(1 + α)
        let spec = BernsteinSpec::Stable { alpha: 0.5 };
        let plan = StreamPlan::new(21, 50_000);
        let ys = plan
            .run(|rng| sample_inverse_passage(&spec, 1.0, rng, &SimOptions::default()))
            .unwrap();
        let m = Summary::of(&ys);
        let want = 1.0 / gamma(1.5);
        assert!((m.mean - want).abs() < 4.0 * m.stderr, "{m:?}");
    }

    #[test]
    fn grid_and_exact_passages_agree_in_mean() {
        // Stable plus a tiny drift goes through the grid walk; compare with
        // the exact sampler for the pure stable part.
        let mixed = BernsteinSpec::Sum(alloc::vec![
            BernsteinSpec::Stable { alpha: 0.7 },
            BernsteinSpec::PureDrift { drift: 1e-9 },
        ]);
        let opts = SimOptions {
            refine_eps: 1e-3,
            ..SimOptions::default()
        };
        let a = Summary::of(
            &StreamPlan::new(4, 4000)
                .run(|rng| sample_inverse_passage(&mixed, 0.5, rng, &opts))
                .unwrap(),
        );
        let b = Summary::of(
            &StreamPlan::new(5, 4000)
                .run(|rng| sample_inverse_passage(&BernsteinSpec::Stable { alpha: 0.7 }, 0.5, rng, &opts))
                .unwrap(),
        );
        let se = sqrt(a.stderr * a.stderr + b.stderr * b.stderr);
        assert!((a.mean - b.mean).abs() < 4.0 * se + 1e-3, "{a:?} {b:?}");
    }

    #[test]
    fn compound_poisson_passage_mean() {
        // For CP-exponential jumps without drift, E Y(t) = (1 + β t) / rate.
        let spec = BernsteinSpec::CompoundPoissonExp { rate: 2.0, beta: 1.5 };
        let ys = StreamPlan::new(8, 40_000)
            .run(|rng| sample_inverse_passage(&spec, 1.0, rng, &SimOptions::default()))
            .unwrap();
        let m = Summary::of(&ys);
        assert!((m.mean - 2.5 / 2.0).abs() < 4.0 * m.stderr, "{m:?}");
    }

    #[test]
    fn custom_specs_are_not_simulated() {
        let c = BernsteinSpec::custom(0.0, 1.0, alloc::sync::Arc::new(|s: f64| exp(-s)), "c").unwrap();
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(sample_subordinator(&c, 1.0, &mut rng), Err(Error::Unsupported(_))));
    }

    #[test]
    fn identity_time_change_gives_poisson_counts() {
        let process = ProcessSpec::poisson(1.0).unwrap().with_inverse(BernsteinSpec::identity());
        let counts = StreamPlan::new(13, 40_000)
            .run(|rng| sample_time_changed_count(&process, 2.0, rng, &SimOptions::default()))
            .unwrap();
        let (p, se) = empirical_pmf(&counts, 5);
        for k in 0..=5 {
            let want = crate::counting::poisson_pmf(1.0, 2.0, k);
            assert!((p[k] - want).abs() < 4.0 * se[k].max(1e-4), "k={k}");
        }
        let mut rng = RngStream::new(0, 0);
        assert_eq!(sample_time_changed_count(&process, 0.0, &mut rng, &SimOptions::default()).unwrap(), 0);
    }

    #[test]
    fn plan_is_independent_of_stream_split_order() {
        let plan = StreamPlan {
            seed: 3,
            draws: 1000,
            per_stream: 128,
        };
        let seq = plan.run(|rng| Ok(rng.next_u64())).unwrap();
        let mut by_stream: Vec<u64> = Vec::new();
        for s in (0..plan.streams()).rev() {
            let mut v = plan.run_stream(s, |rng| Ok(rng.next_u64())).unwrap();
            v.extend(by_stream);
            by_stream = v;
        }
        assert_eq!(seq, by_stream);
        assert_eq!(plan.streams(), 8);
        assert_eq!(plan.stream_len(7), 1000 - 7 * 128);
    }
}
