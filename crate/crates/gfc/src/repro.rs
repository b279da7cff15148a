//! End-to-end reproduction checks with independent oracles.
//!
//! Each check returns an [`Outcome`] instead of panicking so that a full
//! run reports every result. A check fails when its tolerance or its
//! runtime budget is exceeded.

use std::time::{Duration, Instant};

use gfc_core::counting::{
    build_generator, generator_entry_from_omega, gn_pmf_closed, governing_residual, omega_set, pmf_time_changed, poisson_pmf,
    PmfOptions,
};
use gfc_core::gfcalc::{eigen_residual, ResidualOptions};
use gfc_core::laplace::tilde_ell;
use gfc_core::pathsim::{empirical_pmf, sample_inverse_passage, sample_time_changed_count, StreamPlan, Summary};
use gfc_core::specfun::mittag_leffler;
use gfc_core::{BernsteinSpec, OuterLaw, PmfMethod, ProcessSpec, SimOptions, TildeEllMethod, UniformGrid};
use rand::Rng;
use serde::Serialize;

use crate::batch::run_parallel;

pub const CRITERIA: [&str; 10] = ["c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9", "c10"];
pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<4} {} {:<34} {} [{:.2}s / {:.0}s]",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds,
            self.budget_seconds
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproOptions {
    pub seed: u64,
    pub threads: usize,
}

impl Default for ReproOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            threads: crate::batch::default_threads(),
        }
    }
}

type Check = Result<(bool, String), String>;

fn timed(id: &str, name: &str, budget: f64, check: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let within = elapsed <= Duration::from_secs_f64(budget);
    let (pass, mut detail) = match result {
        Ok((ok, d)) => (ok && within, d),
        Err(e) => (false, format!("error: {e}")),
    };
    if !within {
        detail.push_str("; runtime budget exceeded");
    }
    Outcome {
        id: id.into(),
        name: name.into(),
        pass,
        detail,
        seconds: elapsed.as_secs_f64(),
        budget_seconds: budget,
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

pub fn run(id: &str, opts: &ReproOptions) -> Option<Outcome> {
    Some(match id {
        "c1" => c1(),
        "c2" => c2(),
        "c3" => c3(),
        "c4" => c4(),
        "c5" => c5(),
        "c6" => c6(opts),
        "c7" => c7(opts),
        "c8" => c8(),
        "c9" => c9(),
        "c10" => c10(opts),
        _ => return None,
    })
}

pub fn run_all(opts: &ReproOptions) -> Vec<Outcome> {
    CRITERIA.iter().filter_map(|id| run(id, opts)).collect()
}

const C1_ALPHAS: [f64; 3] = [0.3, 0.5, 0.8];
const C1_TIMES: [f64; 3] = [0.1, 1.0, 5.0];
const C1_LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

fn c1() -> Outcome {
    timed("c1", "stable transform vs Mittag-Leffler", 1.0, || {
        let mut worst = 0.0f64;
        for &a in &C1_ALPHAS {
            let f = BernsteinSpec::Stable { alpha: a };
            for &t in &C1_TIMES {
                for &l in &C1_LAMBDAS {
                    let got = tilde_ell(&f, t, l, TildeEllMethod::NumericalInversion(20)).map_err(e)?;
                    let want = mittag_leffler(a, -l * t.powf(a)).map_err(e)?;
                    worst = worst.max((got - want).abs());
                }
            }
        }
        Ok((worst <= 1e-6, format!("max |error| = {worst:.2e} (tol 1e-6)")))
    })
}

fn c2() -> Outcome {
    timed("c2", "identity reduction to Poisson", 1.0, || {
        let process = ProcessSpec::poisson(1.0).map_err(e)?.with_inverse(BernsteinSpec::PureDrift { drift: 1.0 });
        let table = pmf_time_changed(&process, 2.0, 10, PmfMethod::Resolvent, &PmfOptions::default()).map_err(e)?;
        let worst = (0..=10).map(|k| (table.probs[k] - poisson_pmf(1.0, 2.0, k)).abs()).fold(0.0, f64::max);
        Ok((worst <= 1e-6, format!("max |error| = {worst:.2e} (tol 1e-6)")))
    })
}

fn c3() -> Outcome {
    timed("c3", "eigenfunction residual", 10.0, || {
        let f = BernsteinSpec::Stable { alpha: 0.5 };
        let opts = ResidualOptions::default();
        let coarse = eigen_residual(&f, 1.0, UniformGrid::covering(1e-3, 1.0).map_err(e)?, &opts).map_err(e)?;
        let fine = eigen_residual(&f, 1.0, UniformGrid::covering(5e-4, 1.0).map_err(e)?, &opts).map_err(e)?;
        let ratio = coarse.max_abs / fine.max_abs;
        Ok((
            coarse.pass && ratio >= 1.5,
            format!("max residual {:.2e} (tol 5e-3), halving ratio {ratio:.2} (min 1.5)", coarse.max_abs),
        ))
    })
}

fn governing(process: ProcessSpec) -> Check {
    let grid = UniformGrid::covering(1e-3, 1.0).map_err(e)?;
    let mut worst = 0.0f64;
    let mut pass = true;
    for n in 0..=3 {
        let r = governing_residual(&process, grid, n, &ResidualOptions::default()).map_err(e)?;
        worst = worst.max(r.max_abs);
        pass &= r.pass;
    }
    Ok((pass, format!("max residual over n=0..3 = {worst:.2e} (tol 5e-3)")))
}

fn c4_process() -> ProcessSpec {
    ProcessSpec::new(OuterLaw::Poisson { rate: 1.0 })
        .expect("valid rate")
        .with_inner(BernsteinSpec::CompoundPoissonExp { rate: 1.0, beta: 1.0 })
        .with_inverse(BernsteinSpec::Stable { alpha: 0.6 })
}

fn c5_process() -> ProcessSpec {
    ProcessSpec::new(OuterLaw::Gcp { rates: vec![1.0, 0.5] })
        .expect("valid rates")
        .with_inner(BernsteinSpec::CompoundPoissonExp { rate: 1.0, beta: 1.0 })
        .with_inverse(BernsteinSpec::Stable { alpha: 0.6 })
}

fn c4() -> Outcome {
    timed("c4", "governing equation, Poisson outer", 30.0, || governing(c4_process()))
}

fn c5() -> Outcome {
    timed("c5", "governing equation, GCP outer", 30.0, || governing(c5_process()))
}

const C6_RATES: [f64; 2] = [1.0, 0.5];
const C6_SHAPES: [f64; 2] = [0.6, 1.0];

/// `M(G_N(t))` with `G_N` the compound Poisson-Gamma subordinator, as a
/// resolvent-method process.
fn c6_process(alpha: f64) -> ProcessSpec {
    ProcessSpec::gcp(C6_RATES.to_vec())
        .expect("valid rates")
        .with_inner(BernsteinSpec::CompoundPoissonGamma {
            rate: 1.0,
            shape: alpha,
            beta: 1.0,
        })
        .with_inverse(BernsteinSpec::PureDrift { drift: 1.0 })
}

fn c6(opts: &ReproOptions) -> Outcome {
    timed("c6", "compound Poisson-Gamma closed forms", 10.0, || {
        let mut rng = gfc_core::RngStream::new(opts.seed, 6);
        let mut zero = 0.0f64;
        for _ in 0..20 {
            let k = rng.random_range(1..=4);
            let rates: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..2.0)).collect();
            let l: f64 = rng.random_range(0.1..3.0);
            let a: f64 = rng.random_range(0.1..1.0);
            let b: f64 = rng.random_range(0.1..3.0);
            let t: f64 = rng.random_range(0.1..3.0);
            let total: f64 = rates.iter().sum();
            let want = (-l * t * (1.0 - b.powf(a) / (total + b).powf(a))).exp();
            let got = gn_pmf_closed(&rates, l, a, b, t, 0).map_err(e)?;
            zero = zero.max((got - want).abs());
        }
        let (l, b, t) = (1.3, 0.8, 1.7);
        let total: f64 = C6_RATES.iter().sum();
        let unit = (gn_pmf_closed(&C6_RATES, l, 1.0, b, t, 0).map_err(e)? - (-l * total * t / (total + b)).exp()).abs();
        let mut vs = 0.0f64;
        for &a in &C6_SHAPES {
            let table = pmf_time_changed(&c6_process(a), 1.0, 5, PmfMethod::Resolvent, &PmfOptions::default()).map_err(e)?;
            for n in 0..=5 {
                let closed = gn_pmf_closed(&C6_RATES, 1.0, a, 1.0, 1.0, n).map_err(e)?;
                vs = vs.max((closed - table.probs[n]).abs());
            }
        }
        Ok((
            zero <= 1e-12 && unit <= 1e-12 && vs <= 1e-5,
            format!("n=0 {zero:.1e}, α=1 {unit:.1e} (tol 1e-12); vs resolvent {vs:.1e} (tol 1e-5)"),
        ))
    })
}

fn c7(opts: &ReproOptions) -> Outcome {
    timed("c7", "Monte Carlo vs resolvent pmf", 120.0, || {
        let process = c5_process();
        let reference = pmf_time_changed(&process, 1.0, 4, PmfMethod::Resolvent, &PmfOptions::default()).map_err(e)?;
        let sim = SimOptions::default();
        let batch = run_parallel(StreamPlan::new(opts.seed, 100_000), opts.threads, |rng| {
            sample_time_changed_count(&process, 1.0, rng, &sim)
        })
        .map_err(e)?;
        let (p, se) = empirical_pmf(&batch.flatten(), 4);
        let worst = (0..=4).map(|n| (p[n] - reference.probs[n]).abs() / se[n]).fold(0.0, f64::max);
        Ok((worst <= 3.0, format!("max |error|/SE over n=0..4 = {worst:.2} (max 3)")))
    })
}

/// Every tuple with `Σ j x_j = n`, by exhaustive search over the box
/// `x_j ≤ n / j`.
pub fn brute_force_omega(k: usize, n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut x = vec![0u32; k];
    loop {
        let weight: usize = x.iter().enumerate().map(|(j, &v)| (j + 1) * v as usize).sum();
        if weight == n {
            out.push(x.clone());
        }
        let mut j = 0;
        loop {
            if j == k {
                return out;
            }
            if ((x[j] + 1) as usize) * (j + 1) <= n {
                x[j] += 1;
                break;
            }
            x[j] = 0;
            j += 1;
        }
    }
}

fn c8() -> Outcome {
    timed("c8", "Ω enumeration and generator", 5.0, || {
        for k in 1..=5 {
            for n in 0..=12 {
                let mut got: Vec<Vec<u32>> = omega_set(k, n).into_iter().map(|t| t.x).collect();
                let mut want = brute_force_omega(k, n);
                got.sort();
                want.sort();
                if got != want {
                    return Ok((false, format!("Ω({k},{n}) differs from brute force")));
                }
            }
        }
        let mut worst = 0.0f64;
        let psis = [
            BernsteinSpec::CompoundPoissonExp { rate: 1.0, beta: 1.0 },
            BernsteinSpec::CompoundPoissonGamma {
                rate: 1.0,
                shape: 0.6,
                beta: 1.0,
            },
            BernsteinSpec::Stable { alpha: 0.6 },
        ];
        for rates in [vec![1.0, 0.5], vec![1.0, 0.5, 0.25, 0.125, 0.0625]] {
            let outer = OuterLaw::Gcp { rates };
            for psi in &psis {
                let g = build_generator(&outer, Some(psi), 12).map_err(e)?;
                for m in 1..=12 {
                    let want = generator_entry_from_omega(&outer, psi, m).map_err(e)?;
                    worst = worst.max((g.entry(12, 12 - m) - want).abs() / want.abs().max(f64::MIN_POSITIVE));
                }
            }
        }
        Ok((worst <= 1e-12, format!("Ω exact for k≤5, n≤12; generator rel. error {worst:.1e} (tol 1e-12)")))
    })
}

fn c9() -> Outcome {
    timed("c9", "normalization of pmf tables", 10.0, || {
        let opts = PmfOptions::default();
        let mut worst = 0.0f64;
        let mut count = 0;
        let mut check = |table: gfc_core::PmfTable| {
            worst = worst.max(table.mass_deficit.abs());
            count += 1;
        };
        for &a in &C1_ALPHAS {
            for &t in &C1_TIMES {
                for &l in &C1_LAMBDAS {
                    let p = ProcessSpec::poisson(l).map_err(e)?.with_inverse(BernsteinSpec::Stable { alpha: a });
                    check(pmf_time_changed(&p, t, 10, PmfMethod::Resolvent, &opts).map_err(e)?);
                    check(pmf_time_changed(&p, t, 10, PmfMethod::StableClosedForm, &opts).map_err(e)?);
                }
            }
        }
        for process in [c4_process(), c5_process()] {
            for t in [0.05, 0.25, 0.5, 1.0] {
                check(pmf_time_changed(&process, t, 3, PmfMethod::Resolvent, &opts).map_err(e)?);
                check(pmf_time_changed(&process, t, 3, PmfMethod::StableClosedForm, &opts).map_err(e)?);
            }
        }
        for &a in &C6_SHAPES {
            check(pmf_time_changed(&c6_process(a), 1.0, 5, PmfMethod::Resolvent, &opts).map_err(e)?);
        }
        let mut closed = 0.0f64;
        for &a in &C6_SHAPES {
            let mass: f64 = (0..=96).map(|n| gn_pmf_closed(&C6_RATES, 1.0, a, 1.0, 1.0, n)).sum::<gfc_core::Result<f64>>().map_err(e)?;
            closed = closed.max((1.0 - mass).abs());
        }
        Ok((
            worst <= 1e-8 && closed <= 1e-8,
            format!("{count} tables, max deficit {worst:.1e}; closed-form sums {closed:.1e} (tol 1e-8)"),
        ))
    })
}

fn c10(opts: &ReproOptions) -> Outcome {
    timed("c10", "mean of the inverse stable clock", 120.0, || {
        let f = BernsteinSpec::Stable { alpha: 0.5 };
        let sim = SimOptions::default();
        let batch = run_parallel(StreamPlan::new(opts.seed, 100_000), opts.threads, |rng| {
            sample_inverse_passage(&f, 1.0, rng, &sim)
        })
        .map_err(e)?;
        let s = Summary::of(&batch.flatten());
        // E Y(t) = t^α / Γ(1 + α) for the α-stable inverse subordinator.
        let want = 1.0 / gfc_core::specfun::gamma_fn(1.5);
        let z = (s.mean - want).abs() / s.stderr;
        Ok((z <= 3.0, format!("mean {:.6} vs {want:.6}, {z:.2} SE (max 3)", s.mean)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_counts() {
        // Partitions of n into parts ≤ k.
        assert_eq!(brute_force_omega(1, 7).len(), 1);
        assert_eq!(brute_force_omega(2, 6).len(), 4);
        assert_eq!(brute_force_omega(5, 12).len(), 47);
        assert_eq!(brute_force_omega(3, 0), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn unknown_criterion() {
        assert!(run("c11", &ReproOptions::default()).is_none());
    }
}
