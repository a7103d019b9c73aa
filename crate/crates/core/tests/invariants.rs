#![allow(clippy::needless_range_loop)]

use dynardl_core::ardl::{bounds_test, ecm_design, fit_ecm, ModelSpec};
use dynardl_core::dataset::{Dataset, TimeSeries};
use dynardl_core::diagnostics::{cusum, im_test};
use dynardl_core::dynsim::{equilibria, simulate, ShockSpec};
use dynardl_core::regress::{fit_ols, wald_f_test, DesignMatrix};
use dynardl_core::synthetic::{macro_panel, EcmProcess};
use dynardl_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn panel(seed: u64, n: usize) -> Dataset {
    macro_panel(
        &mut rng(seed),
        1950,
        n,
        &["y", "a", "b", "c"],
        &[0.4, -0.3, 0.2],
    )
    .unwrap()
}

fn rescaled(d: &Dataset, name: &str, f: impl Fn(f64) -> f64) -> Dataset {
    let series = d
        .series()
        .iter()
        .map(|s| {
            if s.name() == name {
                let v = s.complete_values().unwrap().into_iter().map(&f).collect();
                TimeSeries::new(name, s.start_year(), v).unwrap()
            } else {
                s.clone()
            }
        })
        .collect();
    Dataset::new(series).unwrap()
}

fn design(x: &[f64]) -> DesignMatrix {
    DesignMatrix::from_columns(vec![
        ("const".into(), vec![1.0; x.len()]),
        ("x".into(), x.to_vec()),
    ])
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ecm_reconstructs_levels_ardl(seed in 0u64..10_000, n in 30usize..80) {
        let d = panel(seed, n);
        let spec = ModelSpec::uniform("y", &["a", "b", "c"], 1, 1).unwrap();
        let ecm = fit_ecm(&d, &spec).unwrap();
        let y = d.column("y").unwrap();
        let mut cols = vec![("const".to_string(), vec![1.0; n - 1]), ("y.L1".into(), y[..n - 1].to_vec())];
        for r in ["a", "b", "c"] {
            let x = d.column(r).unwrap();
            cols.push((format!("{r}.L0"), x[1..].to_vec()));
            cols.push((format!("{r}.L1"), x[..n - 1].to_vec()));
        }
        let levels = fit_ols(&DesignMatrix::from_columns(cols).unwrap(), &y[1..]).unwrap();
        for i in 0..n - 1 {
            prop_assert!((ecm.ols.fitted[i] + y[i] - levels.fitted[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn long_run_slopes_ignore_regressor_scale(seed in 0u64..10_000, a in 0.05f64..20.0) {
        let d = panel(seed, 40);
        let spec = ModelSpec::uniform("y", &["a", "b", "c"], 2, 1).unwrap();
        let base = fit_ecm(&d, &spec).unwrap();
        let moved = fit_ecm(&rescaled(&d, "a", |v| v + a.ln()), &spec).unwrap();
        for (p, q) in base.long_run.as_ref().unwrap().iter().zip(moved.long_run.as_ref().unwrap()) {
            prop_assert!((p.estimate - q.estimate).abs() < 1e-9);
        }
        let c0 = base.ols.coef("const").unwrap();
        let c1 = moved.ols.coef("const").unwrap();
        let la = base.ols.coef("a.L1").unwrap();
        prop_assert!((c1 - (c0 - la * a.ln())).abs() < 1e-8);
    }

    #[test]
    fn bounds_decision_ignores_affine_dependent(seed in 0u64..10_000, s in 0.1f64..10.0, b in -50f64..50.0) {
        let d = panel(seed, 40);
        let spec = ModelSpec::uniform("y", &["a", "b", "c"], 1, 1).unwrap();
        let base = bounds_test(&fit_ecm(&d, &spec).unwrap()).unwrap();
        let moved = bounds_test(&fit_ecm(&rescaled(&d, "y", |v| s * v + b), &spec).unwrap()).unwrap();
        prop_assert_eq!(base.decision, moved.decision);
        prop_assert!((base.f_stat - moved.f_stat).abs() < 1e-8 * base.f_stat.max(1.0));
        prop_assert!((base.t_stat - moved.t_stat).abs() < 1e-8 * base.t_stat.abs().max(1.0));
    }

    #[test]
    fn bounds_f_matches_ssr_formula(seed in 0u64..10_000, p in 1usize..3, q in 0usize..3) {
        let d = panel(seed, 45);
        let spec = ModelSpec::uniform("y", &["a", "b", "c"], p, q).unwrap();
        let fit = fit_ecm(&d, &spec).unwrap();
        let (x, dy, _) = ecm_design(&d, &spec, 0).unwrap();
        let levels: Vec<usize> = (0..x.ncols())
            .filter(|&j| fit.lambda.iter().any(|c| c.name == x.names()[j]))
            .collect();
        let keep: Vec<usize> = (0..x.ncols()).filter(|j| !levels.contains(j)).collect();
        let r = fit_ols(&x.select(&keep), &dy).unwrap();
        let oracle = ((r.ssr - fit.ols.ssr) / levels.len() as f64) / (fit.ols.ssr / fit.ols.dof as f64);
        prop_assert!((bounds_test(&fit).unwrap().f_stat - oracle).abs() < 1e-9);
    }

    #[test]
    fn duplicated_column_is_singular(seed in 0u64..10_000, n in 8usize..60, scale in -5f64..5.0) {
        prop_assume!(scale.abs() > 1e-3);
        let mut g = rng(seed);
        let x: Vec<f64> = (0..n).map(|_| g.sample(StandardNormal)).collect();
        let y: Vec<f64> = (0..n).map(|_| g.sample(StandardNormal)).collect();
        let mut m = design(&x);
        m.push("x2", &x.iter().map(|v| v * scale).collect::<Vec<_>>()).unwrap();
        let singular = matches!(fit_ols(&m, &y), Err(Error::SingularDesign { .. }));
        prop_assert!(singular);
    }

    #[test]
    fn projection_is_idempotent(seed in 0u64..10_000, n in 10usize..80) {
        let mut g = rng(seed);
        let x: Vec<f64> = (0..n).map(|_| g.sample(StandardNormal)).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - v + g.sample::<f64, _>(StandardNormal)).collect();
        let m = design(&x);
        let fit = fit_ols(&m, &y).unwrap();
        let z: Vec<f64> = fit.fitted.iter().map(|v| 3.0 * v).collect();
        let mut aux = m.clone();
        aux.push("fitted", &fit.fitted).unwrap();
        // fitted values lie in the column space, so regress them on a single column
        let on_fitted = fit_ols(&DesignMatrix::from_columns(vec![
            ("const".into(), vec![1.0; n]),
            ("fitted".into(), fit.fitted.clone()),
        ]).unwrap(), &fit.fitted).unwrap();
        prop_assert!(on_fitted.beta[0].abs() < 1e-8 && (on_fitted.beta[1] - 1.0).abs() < 1e-8);
        let refit = fit_ols(&m, &z).unwrap();
        prop_assert!(refit.residuals.iter().all(|r| r.abs() < 1e-8));
        let singular = matches!(fit_ols(&aux, &y), Err(Error::SingularDesign { .. }));
        prop_assert!(singular);
    }

    #[test]
    fn f_and_r2_are_scale_free(seed in 0u64..10_000, c in 0.01f64..100.0) {
        let mut g = rng(seed);
        let x: Vec<f64> = (0..40).map(|_| g.sample(StandardNormal)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 + 0.2 * v + g.sample::<f64, _>(StandardNormal)).collect();
        let yc: Vec<f64> = y.iter().map(|v| c * v).collect();
        let (a, b) = (fit_ols(&design(&x), &y).unwrap(), fit_ols(&design(&x), &yc).unwrap());
        prop_assert!((a.r2 - b.r2).abs() < 1e-10);
        let (fa, fb) = (wald_f_test(&a, &["x"]).unwrap().f, wald_f_test(&b, &["x"]).unwrap().f);
        prop_assert!((fa - fb).abs() < 1e-10 * fa.max(1.0));
    }

    #[test]
    fn im_total_is_component_sum(seed in 0u64..10_000, n in 20usize..120) {
        let mut g = rng(seed);
        let x: Vec<f64> = (0..n).map(|_| g.sample(StandardNormal)).collect();
        let y: Vec<f64> = x.iter().map(|v| v + g.sample::<f64, _>(StandardNormal)).collect();
        let im = im_test(&fit_ols(&design(&x), &y).unwrap()).unwrap();
        prop_assert_eq!(im.total.stat, im.heteroskedasticity.stat + im.skewness.stat + im.kurtosis.stat);
        for p in [im.total.p_value, im.heteroskedasticity.p_value, im.skewness.p_value, im.kurtosis.p_value] {
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn cusum_path_ignores_affine_response(seed in 0u64..10_000, a in 0.1f64..20.0, b in -20f64..20.0) {
        let mut g = rng(seed);
        let x: Vec<f64> = (0..60).map(|_| g.sample(StandardNormal)).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + g.sample::<f64, _>(StandardNormal)).collect();
        let y2: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        let (p, q) = (cusum(&y, &design(&x)).unwrap(), cusum(&y2, &design(&x)).unwrap());
        prop_assert_eq!(p.in_bounds, q.in_bounds);
        for (u, v) in p.path.iter().zip(&q.path) {
            prop_assert!((u - v).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulation_is_reproducible_and_nested(seed in 0u64..1_000_000, m in -0.5f64..0.5) {
        let d = EcmProcess::default().dataset(&mut rng(3), 120).unwrap();
        let fit = fit_ecm(&d, &ModelSpec::uniform("y", &["x"], 2, 1).unwrap()).unwrap();
        let shock = ShockSpec { n_sims: 150, ..ShockSpec::new("x", m) };
        let a = simulate(&fit, &shock, seed).unwrap();
        prop_assert_eq!(&a, &simulate(&fit, &shock, seed).unwrap());
        for t in 0..a.periods.len() {
            for w in a.bands.windows(2) {
                prop_assert!(w[1].lower[t] <= w[0].lower[t] && w[0].upper[t] <= w[1].upper[t]);
            }
        }
    }

    #[test]
    fn noise_free_zero_shock_sits_at_steady_state(seed in 0u64..10_000) {
        let d = EcmProcess::default().dataset(&mut rng(seed), 100).unwrap();
        let mut fit = fit_ecm(&d, &ModelSpec::uniform("y", &["x"], 1, 2).unwrap()).unwrap();
        fit.ols.cov.fill(0.0);
        fit.ols.sigma2 = 0.0;
        let shock = ShockSpec { n_sims: 1, ..ShockSpec::new("x", 0.0) };
        let (eq, _) = equilibria(&fit, &shock).unwrap();
        let b = &fit.ols.beta;
        let analytic = -(b[fit.layout.intercept] + b[fit.layout.level_x[0]] * fit.regressor_means[0]) / b[fit.layout.level_y];
        prop_assert!((eq - analytic).abs() < 1e-10);
        let r = simulate(&fit, &shock, seed).unwrap();
        prop_assert!(r.mean_path.iter().all(|y| (y - analytic).abs() < 1e-8));
    }
}
