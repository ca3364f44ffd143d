mod common;

use autocopula_core::nig::{
    fit_mle, fit_moment_matching, log_likelihood, moments_from_params, nig_ln_pdf, nig_pdf,
    params_from_moments, MomentSet, Nig, NigParams,
};
use autocopula_core::optimize::NelderMeadOptions;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn wide_scale_mle() -> NigParams<f64> {
    NigParams::new(0.0980, 0.0131, 0.0122, 2.3799).unwrap()
}

fn wide_scale_moment_matching() -> NigParams<f64> {
    NigParams::new(0.3244, 0.0231, 0.0210, 2.7129).unwrap()
}

#[test]
fn density_integrates_to_one_wide_scale() {
    let p = wide_scale_mle();
    let total = integrate_line(|x| nig_pdf(&p, x), p.mu(), nig_scale(&p), 1e-13);
    assert!((total - 1.0).abs() < 1e-6, "total {total}");
}

#[test]
fn density_integrates_to_one_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let total = integrate_line(|x| nig_pdf(&p, x), p.mu(), nig_scale(&p), 1e-13);
        assert!((total - 1.0).abs() < 1e-6, "{p:?}: {total}");
    }
}

#[test]
fn central_interval_matches_oracle() {
    let p = NigParams::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let d = Nig::new(p);
    let oracle = adaptive_integrate(|x| nig_pdf(&p, x), -1.0, 1.0, 1e-15);
    let got = d.cdf(1.0) - d.cdf(-1.0);
    assert!((got - oracle).abs() < 1e-7);
    // Independent value from a scientific Python stack.
    assert!((got - 0.751930442201063).abs() < 1e-12);
}

#[test]
fn cdf_monotone_and_consistent_with_panel_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sets = vec![
        wide_scale_mle(),
        NigParams::new(0.0, 1.0, 0.0, 1.0).unwrap(),
    ];
    for _ in 0..5 {
        sets.push(random_params(&mut rng));
    }
    for p in sets {
        let d = Nig::new(p);
        let sd = moments_from_params(&p).variance.sqrt();
        let (lo, hi) = (p.mu() - 10.0 * sd, p.mu() + 10.0 * sd);
        let grid: Vec<f64> = (0..1000)
            .map(|i| lo + (hi - lo) * i as f64 / 999.0)
            .collect();
        let vals: Vec<f64> = grid.iter().map(|&x| d.cdf(x)).collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0], "{p:?}");
        }
        for i in (0..999).step_by(37) {
            let oracle = adaptive_integrate(|x| nig_pdf(&p, x), grid[i], grid[i + 1], 1e-15);
            assert!(
                (vals[i + 1] - vals[i] - oracle).abs() < 1e-7,
                "{p:?} at {}",
                grid[i]
            );
        }
        assert_eq!(d.cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(d.cdf(f64::INFINITY), 1.0);
    }
}

#[test]
fn cdf_matches_oracle_at_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let p = random_params(&mut rng);
        let d = Nig::new(p);
        let x = p.mu() + (rng.random::<f64>() - 0.5) * 6.0 * p.delta();
        // F(x) = ∫_{-∞}^{x} f, written as ∫_{x}^{∞} of the reflected density.
        let oracle = integrate_right(|t| nig_pdf(&p, 2.0 * x - t), x, nig_scale(&p), 1e-14);
        assert!((d.cdf(x) - oracle).abs() < 1e-8, "{p:?} x={x}");
    }
}

#[test]
fn quantile_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sets = vec![
        wide_scale_mle(),
        NigParams::new(0.0, 1.0, 0.0, 1.0).unwrap(),
    ];
    for _ in 0..20 {
        sets.push(random_params(&mut rng));
    }
    for p in sets {
        let d = Nig::new(p);
        for x in [p.mu() - 3.0 * p.delta(), p.mu(), p.mu() + 3.0 * p.delta()] {
            let back = d.inv_cdf(d.cdf(x)).unwrap();
            assert!((back - x).abs() < 1e-6, "{p:?}: {x} -> {back}");
        }
        for q in [1e-9, 0.01, 0.37, 0.5, 0.99, 1.0 - 1e-9] {
            let x = d.inv_cdf(q).unwrap();
            assert!((d.cdf(x) - q).abs() < 1e-8);
        }
    }
}

#[test]
fn wide_scale_upper_percentile_by_grid_inversion() {
    let p = wide_scale_mle();
    let d = Nig::new(p);
    let q = d.inv_cdf(0.99).unwrap();
    // Brute-force inversion: scan a grid, then bisect the bracketing cell.
    let mut x = p.mu();
    let mut step = 1.0;
    while d.cdf(x + step) < 0.99 {
        x += step;
    }
    for _ in 0..60 {
        step *= 0.5;
        if d.cdf(x + step) < 0.99 {
            x += step;
        }
    }
    assert!((q - x).abs() < 1e-6, "{q} vs {x}");
    // Independent value: adaptive quadrature plus root finding in double precision.
    assert!((q - 140.9334004495).abs() < 1e-6, "{q}");
}

#[test]
fn closed_form_moments_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut sets = vec![wide_scale_mle()];
    for _ in 0..100 {
        sets.push(random_params(&mut rng));
    }
    for p in sets {
        let m = moments_from_params(&p);
        let sd = m.variance.sqrt();
        let mean = nig_raw_moment(&p, 1, 0.0);
        let var = nig_raw_moment(&p, 2, m.mean);
        let m3 = nig_raw_moment(&p, 3, m.mean);
        let m4 = nig_raw_moment(&p, 4, m.mean);
        let skew = m3 / var.powf(1.5);
        let kurt = m4 / (var * var) - 3.0;
        assert!(
            (mean - m.mean).abs() <= 1e-5 * sd.max(m.mean.abs()),
            "{p:?} mean"
        );
        assert!(((var - m.variance) / m.variance).abs() <= 1e-5, "{p:?} var");
        assert!(
            (skew - m.skewness).abs() <= 1e-5 * m.skewness.abs().max(1.0),
            "{p:?} skew"
        );
        assert!(
            (kurt - m.excess_kurtosis).abs() <= 1e-5 * m.excess_kurtosis.abs().max(1.0),
            "{p:?} kurt"
        );
    }
}

#[test]
fn mixture_sampler_agrees_with_quadrature_cdf() {
    let p = NigParams::new(0.5, 2.0, -0.7, 1.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let xs = nig_mixture_sample(&p, 20_000, &mut rng);
    let d = Nig::new(p);
    let pit: Vec<f64> = xs.iter().map(|&x| d.cdf(x)).collect();
    let ks = autocopula_core::stats::ks_uniform(&pit);
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn log_likelihood_definition_and_permutation() {
    let p = NigParams::new(0.2, 1.5, 0.4, 0.8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut xs = nig_mixture_sample(&p, 10_001, &mut rng);
    let ll = log_likelihood(&p, &xs).unwrap();
    let direct: f64 = xs.iter().map(|&x| nig_ln_pdf(&p, x)).sum();
    assert!((ll - direct).abs() <= 1e-12 * direct.abs());
    xs.reverse();
    xs.swap(0, 5000);
    let permuted = log_likelihood(&p, &xs).unwrap();
    assert!((ll - permuted).abs() <= 1e-12 * ll.abs());
}

#[test]
fn moment_matching_recovers_synthetic_parameters() {
    let truth = NigParams::new(1.0, 3.0, 1.0, 2.0).unwrap();
    let n = 100_000;
    let d = Nig::new(truth);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let xs: Vec<f64> = (0..n)
        .map(|_| d.inv_cdf(rng.random::<f64>()).unwrap())
        .collect();
    let fit = fit_moment_matching(&xs).unwrap();
    for (got, want) in [
        (fit.alpha(), truth.alpha()),
        (fit.beta(), truth.beta()),
        (fit.delta(), truth.delta()),
    ] {
        assert!(((got - want) / want).abs() < 0.10, "{fit:?}");
    }
    // μ̂ = x̄ − δ̂β̂/γ̂ scatters far more than x̄ alone; measure its spread
    // over independent replicates drawn from the mixture representation.
    let reps: Vec<f64> = (0..40)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(10_000 + r);
            fit_moment_matching(&nig_mixture_sample(&truth, n, &mut rng))
                .unwrap()
                .mu()
        })
        .collect();
    let rep_mean = reps.iter().sum::<f64>() / reps.len() as f64;
    let spread =
        (reps.iter().map(|m| (m - rep_mean).powi(2)).sum::<f64>() / (reps.len() - 1) as f64).sqrt();
    assert!(
        (fit.mu() - truth.mu()).abs() < 5.0 * spread,
        "{fit:?}, spread {spread}"
    );

    let mut shuffled = xs.clone();
    shuffled.reverse();
    let refit = fit_moment_matching(&shuffled).unwrap();
    assert!((refit.alpha() - fit.alpha()).abs() <= 1e-10 * fit.alpha());
}

#[test]
fn mle_recovers_synthetic_parameters() {
    let truth = NigParams::new(1.0, 1.5, 0.75, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let xs = nig_mixture_sample(&truth, 50_000, &mut rng);
    let init = fit_moment_matching(&xs).unwrap();
    let fit = fit_mle(&xs, &init, &NelderMeadOptions::default()).unwrap();
    let p = fit.params;
    for (got, want) in [
        (p.mu(), truth.mu()),
        (p.alpha(), truth.alpha()),
        (p.beta(), truth.beta()),
        (p.delta(), truth.delta()),
    ] {
        assert!(((got - want) / want).abs() < 0.05, "{p:?}");
    }
    let ll_init = log_likelihood(&init, &xs).unwrap();
    assert!(fit.log_likelihood >= ll_init);
    let ll_wide = log_likelihood(&wide_scale_moment_matching(), &xs).unwrap();
    assert!(fit.log_likelihood >= ll_wide);
}

#[test]
fn mle_started_at_truth_never_decreases_likelihood() {
    let truth = NigParams::new(-1.0, 1.0, -0.3, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs = nig_mixture_sample(&truth, 2_000, &mut rng);
    let fit = fit_mle(&xs, &truth, &NelderMeadOptions::default()).unwrap();
    assert!(fit.log_likelihood >= log_likelihood(&truth, &xs).unwrap());
    assert!(fit.params.beta().abs() < fit.params.alpha());
    assert!(fit.params.delta() > 0.0);
}

#[test]
fn mle_budget_exhaustion_carries_best() {
    let truth = NigParams::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs = nig_mixture_sample(&truth, 500, &mut rng);
    let init = NigParams::new(3.0, 5.0, 2.0, 4.0).unwrap();
    let opts = NelderMeadOptions {
        ftol: 1e-8,
        max_iter: 3,
        restarts: 0,
    };
    match fit_mle(&xs, &init, &opts) {
        Err(autocopula_core::Error::NonConvergence {
            best, objective, ..
        }) => {
            assert_eq!(best.len(), 4);
            assert!(objective >= log_likelihood(&init, &xs).unwrap());
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

proptest! {
    #[test]
    fn moments_roundtrip(mu in -5.0..5.0f64, alpha in 0.05..20.0f64, ratio in -0.95..0.95f64, delta in 0.05..20.0f64) {
        let p = NigParams::new(mu, alpha, alpha * ratio, delta).unwrap();
        let m = moments_from_params(&p);
        let q = params_from_moments(&m).unwrap();
        let m2 = moments_from_params(&q);
        let sd = m.variance.sqrt();
        prop_assert!((m.mean - m2.mean).abs() <= 1e-9 * sd.max(m.mean.abs()));
        prop_assert!(((m.variance - m2.variance) / m.variance).abs() <= 1e-9);
        prop_assert!((m.skewness - m2.skewness).abs() <= 1e-9 * m.skewness.abs().max(1e-3));
        prop_assert!(((m.excess_kurtosis - m2.excess_kurtosis) / m.excess_kurtosis).abs() <= 1e-9);
    }

    #[test]
    fn symmetric_law_is_symmetric(mu in -5.0..5.0f64, alpha in 0.05..20.0f64, delta in 0.05..20.0f64, s in 0.0..50.0f64) {
        let p = NigParams::new(mu, alpha, 0.0, delta).unwrap();
        let a = nig_pdf(&p, mu + s);
        let b = nig_pdf(&p, mu - s);
        // x = μ ± s is rounded, which perturbs log f by about α ulp(|μ| + s).
        let tol = 1e-14 * (1.0 + alpha * (mu.abs() + s));
        prop_assert!((a - b).abs() <= tol * a.max(1e-300));
    }

    #[test]
    fn admissible_moments_always_invert(mean in -5.0..5.0f64, var in 0.01..100.0f64, skew in -3.0..3.0f64, slack in 0.01..10.0f64) {
        let k = (5.0 * skew * skew) / 3.0 + slack;
        let m = MomentSet { mean, variance: var, skewness: skew, excess_kurtosis: k };
        prop_assert!(params_from_moments(&m).is_ok());
    }
}
