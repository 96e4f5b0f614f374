mod common;

use bdp_core::analytic::{
    bessel_i, closed_form_nu_ratio, fpt_density_const, transformed_fpt_const,
    transformed_transition_const, transition_prob_const,
};
use bdp_core::solver::solve_forward;
use bdp_core::transform::{
    build_nu_constant_ratio, build_nu_recurrence, predict_fpt, predict_transition,
    transform_process,
};
use bdp_core::{Error, ProcessSpec, StateWindow};
use proptest::prelude::*;

fn table_strategy(width: i64) -> impl Strategy<Value = (i64, Vec<(f64, f64)>)> {
    (-width + 1..0i64).prop_flat_map(move |n_min| {
        (
            Just(n_min),
            prop::collection::vec((0.1f64..10.0, 0.1f64..10.0), width as usize + 1),
        )
    })
}

fn d0_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![0.05f64..2.0, -2.0f64..-0.05]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn increments_keep_the_sign_of_d0((n_min, rows) in table_strategy(24), d0 in d0_strategy()) {
        let spec = ProcessSpec::table(n_min, &rows).unwrap();
        let win = StateWindow::new(n_min, n_min + 24).unwrap();
        match build_nu_recurrence(&spec, win, 1.0, d0) {
            Ok(nu) => {
                for d in nu.increments() {
                    prop_assert!(d * d0 > 0.0);
                }
                for w in nu.values().windows(2) {
                    let ordered = if d0 > 0.0 { w[1] >= w[0] } else { w[1] <= w[0] };
                    prop_assert!(ordered);
                }
            }
            Err(Error::NuNotPositive { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn recurrence_residual_is_bounded((n_min, rows) in table_strategy(30), d0 in d0_strategy()) {
        let spec = ProcessSpec::table(n_min, &rows).unwrap();
        let win = StateWindow::new(n_min, n_min + 30).unwrap();
        if let Ok(nu) = build_nu_recurrence(&spec, win, 1.0, d0) {
            prop_assert!(nu.check_residuals(&spec).is_ok());
        }
    }

    #[test]
    fn transform_preserves_exit_rates((n_min, rows) in table_strategy(20), d0 in d0_strategy()) {
        let spec = ProcessSpec::table(n_min, &rows).unwrap();
        let win = StateWindow::new(n_min, n_min + 20).unwrap();
        if let Ok(nu) = build_nu_recurrence(&spec, win, 1.0, d0) {
            let tp = transform_process(&spec, &nu).unwrap();
            for n in win.interior().unwrap().states() {
                let (l, m) = spec.rates_at(n).unwrap();
                let (lt, mt) = tp.spec().rates_at(n).unwrap();
                prop_assert!(lt > 0.0 && mt > 0.0);
                prop_assert!(((lt + mt) - (l + m)).abs() <= 1e-12 * (l + m));
            }
        }
    }

    #[test]
    fn bessel_order_symmetry(k in -60i64..=60, x in 0.0f64..200.0) {
        prop_assert_eq!(bessel_i(k, x).unwrap(), bessel_i(-k, x).unwrap());
    }

    #[test]
    fn detailed_balance_of_constant_kernel(
        lambda in 0.1f64..5.0, mu in 0.1f64..5.0, k in -10i64..10, n in -10i64..10, t in 0.01f64..20.0,
    ) {
        let forward = transition_prob_const(lambda, mu, k, n, t).unwrap();
        let backward = transition_prob_const(lambda, mu, n, k, t).unwrap();
        let expected = (lambda / mu).powi((n - k) as i32) * backward;
        prop_assert!((forward - expected).abs() <= 1e-12 * forward.max(expected) + 1e-300);
    }

    #[test]
    fn closed_form_predictions_agree(
        lambda in 0.2f64..3.0, ratio in prop_oneof![0.2f64..0.9, 1.1f64..4.0], beta in 0.1f64..5.0,
        k in -8i64..8, n in -8i64..8, t in 0.05f64..10.0,
    ) {
        let mu = lambda * ratio;
        let c = mu / lambda;
        let win = StateWindow::new(-9, 9).unwrap();
        let nu = build_nu_constant_ratio(c, beta, win).unwrap();
        let p = transition_prob_const(lambda, mu, k, n, t).unwrap();
        let pt = transformed_transition_const(lambda, mu, beta, k, n, t).unwrap();
        if p <= 1.0 {
            let predicted = predict_transition(&nu, k, n, p);
            if let Ok(q) = predicted {
                prop_assert!((pt - q).abs() <= 4.0 * f64::EPSILON * pt.max(q), "{pt} vs {q}");
            }
        }
        if k != n {
            let g = fpt_density_const(lambda, mu, k, n, t).unwrap();
            let gt = transformed_fpt_const(lambda, mu, beta, k, n, t).unwrap();
            let q = predict_fpt(&nu, k, n, g).unwrap();
            prop_assert!((gt - q).abs() <= 4.0 * f64::EPSILON * gt.max(q), "{gt} vs {q}");
        }
        let r = closed_form_nu_ratio(beta, c, k, n);
        prop_assert!((r - nu.ratio(k, n).unwrap()).abs() <= 4.0 * f64::EPSILON * r);
    }

    #[test]
    fn forward_solution_is_normalized((n_min, rows) in table_strategy(30), t in 0.1f64..3.0) {
        let spec = ProcessSpec::table(n_min, &rows).unwrap();
        let win = StateWindow::new(n_min, n_min + 30).unwrap();
        let k = n_min + 15;
        let slice = solve_forward(&spec, &win, k, &[0.0, t / 2.0, t], 1e-10).unwrap();
        for i in 0..3 {
            prop_assert!(slice.values[i].iter().all(|&p| p >= 0.0));
            prop_assert!((slice.mass(i) + slice.deficit[i] - 1.0).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn error_shrinks_with_tolerance(lambda in 0.3f64..2.0, mu in 0.3f64..2.0, t in 0.2f64..2.0) {
        let spec = ProcessSpec::constant(lambda, mu).unwrap();
        let win = StateWindow::new(-60, 60).unwrap();
        let err = |tol: f64| {
            let slice = solve_forward(&spec, &win, 0, &[0.0, t], tol).unwrap();
            win.states()
                .map(|n| (slice.prob(1, n).unwrap() - transition_prob_const(lambda, mu, 0, n, t).unwrap()).abs())
                .fold(0.0, f64::max)
        };
        let coarse = err(1e-6);
        let fine = err(1e-11);
        prop_assert!(fine <= coarse.max(1e-13), "{fine} > {coarse}");
        prop_assert!(fine < 1e-9);
    }
}
