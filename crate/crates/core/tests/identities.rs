use gfc_core::counting::{gcp_pmf, pgf, pmf_no_inverse, pmf_time_changed, PmfOptions};
use gfc_core::laplace::{density_grid, tilde_ell, DensityOptions};
use gfc_core::specfun::{gamma_fn, mittag_leffler};
use gfc_core::{BernsteinSpec, OuterLaw, PmfMethod, ProcessSpec, TildeEllMethod};

fn c5_process() -> ProcessSpec {
    ProcessSpec::new(OuterLaw::Gcp { rates: vec![1.0, 0.5] })
        .unwrap()
        .with_inner(BernsteinSpec::CompoundPoissonExp { rate: 1.0, beta: 1.0 })
        .with_inverse(BernsteinSpec::Stable { alpha: 0.6 })
}

#[test]
fn table_pgf_matches_transform_pgf() {
    let p = c5_process();
    let table = pmf_time_changed(&p, 1.0, 10, PmfMethod::Resolvent, &PmfOptions::default()).unwrap();
    for u in [-0.8, 0.0, 0.3, 0.9] {
        let direct = pgf(&p, u, 1.0, TildeEllMethod::ClosedFormStable).unwrap();
        assert!((table.pgf(u) - direct).abs() < 1e-9, "u={u}");
    }
}

#[test]
fn resolvent_and_stable_closed_form_agree() {
    let p = c5_process();
    let a = pmf_time_changed(&p, 2.0, 8, PmfMethod::Resolvent, &PmfOptions::default()).unwrap();
    let b = pmf_time_changed(&p, 2.0, 8, PmfMethod::StableClosedForm, &PmfOptions::default()).unwrap();
    for n in 0..=8 {
        assert!((a.probs[n] - b.probs[n]).abs() < 1e-11, "n={n}");
    }
}

#[test]
fn fractional_poisson_zero_count() {
    // p_0(t) = E_α(-λ t^α) for the fractional Poisson process.
    for (alpha, lambda, t) in [(0.3, 2.0, 5.0), (0.7, 1.0, 0.5)] {
        let p = ProcessSpec::poisson(lambda).unwrap().with_inverse(BernsteinSpec::Stable { alpha });
        let table = pmf_time_changed(&p, t, 0, PmfMethod::StableClosedForm, &PmfOptions::default()).unwrap();
        let want = mittag_leffler(alpha, -lambda * t.powf(alpha)).unwrap();
        assert!((table.probs[0] - want).abs() < 1e-12);
    }
}

#[test]
fn identity_inner_reduces_to_the_outer_law() {
    let p = ProcessSpec::gcp(vec![0.7, 0.2, 0.1]).unwrap().with_inner(BernsteinSpec::identity());
    let table = pmf_no_inverse(&p, 1.5, 12, &PmfOptions::default()).unwrap();
    for n in 0..=12 {
        assert!((table.probs[n] - gcp_pmf(&[0.7, 0.2, 0.1], 1.5, n)).abs() < 1e-14);
    }
}

#[test]
fn density_integrates_to_one_and_has_the_right_mean() {
    let f = BernsteinSpec::Stable { alpha: 0.5 };
    let h = 0.01;
    let xs: Vec<f64> = (1..=2000).map(|i| i as f64 * h).collect();
    let d = density_grid(&f, 1.0, &xs, &DensityOptions::default()).unwrap();
    let at0 = 1.0 / std::f64::consts::PI.sqrt();
    // Trapezoid rule including the known value at x = 0.
    let mass = h * (0.5 * at0 + d[..d.len() - 1].iter().sum::<f64>() + 0.5 * d[d.len() - 1]);
    let mean = h * xs.iter().zip(&d).map(|(x, v)| x * v).sum::<f64>();
    assert!((mass - 1.0).abs() < 1e-4, "{mass}");
    assert!((mean - 1.0 / gamma_fn(1.5)).abs() < 1e-4, "{mean}");
}

#[test]
fn monte_carlo_transform_is_consistent() {
    let f = BernsteinSpec::CompoundPoissonGamma { rate: 1.0, shape: 0.5, beta: 1.0 };
    let f = gfc_core::sum_exponents(&[f, BernsteinSpec::PureDrift { drift: 0.5 }]).unwrap();
    let exact = tilde_ell(&f, 1.0, 1.0, TildeEllMethod::default()).unwrap();
    let est = gfc_core::laplace::tilde_ell_monte_carlo(&f, 1.0, 1.0, 20_000, 9).unwrap();
    assert!((est.value - exact).abs() < 4.0 * est.error, "{est:?} vs {exact}");
}
