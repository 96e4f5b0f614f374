mod common;

use bdp_core::analytic::{
    fpt_density_const, transformed_fpt_const, transformed_transition_const, transition_prob_const,
};
use bdp_core::simulate::{estimate_fpt, estimate_transition, simulate_path, McOptions};
use bdp_core::solver::{fpt_numeric, solve_forward, solve_forward_auto, time_grid};
use bdp_core::transform::{build_nu_constant_ratio, transform_process};
use bdp_core::ProcessSpec;
use common::{max_abs_diff, random_table, rng, window};

#[test]
fn chapman_kolmogorov_on_random_table() {
    let mut r = rng(11);
    let win = window(-25, 25);
    let spec = random_table(&mut r, win, 0.5, 1.5);
    let (s, t) = (0.4, 0.7);
    let direct = solve_forward(&spec, &win, 0, &[0.0, s + t], 1e-11).unwrap();
    let first = solve_forward(&spec, &win, 0, &[0.0, s], 1e-11).unwrap();
    let mut composed = vec![0.0; win.len()];
    for m in win.interior().unwrap().states() {
        let weight = first.prob(1, m).unwrap();
        if weight < 1e-300 {
            continue;
        }
        let from_m = solve_forward(&spec, &win, m, &[0.0, t], 1e-11).unwrap();
        for (acc, p) in composed.iter_mut().zip(&from_m.values[1]) {
            *acc += weight * p;
        }
    }
    let err = max_abs_diff(&composed, &direct.values[1]);
    assert!(err < 1e-7, "{err}");
}

#[test]
fn jump_count_is_poisson_for_constant_rates() {
    let spec = ProcessSpec::constant(1.0, 2.0).unwrap();
    let runs = 4000;
    let total: usize = (0..runs)
        .map(|seed| simulate_path(&spec, 0, 1.0, seed).unwrap().jump_count())
        .sum();
    let mean = total as f64 / runs as f64;
    // Poisson(3): standard error sqrt(3 / 4000) ~ 0.027.
    assert!((mean - 3.0).abs() < 0.15, "{mean}");
}

#[test]
fn trajectory_is_consistent() {
    let spec = ProcessSpec::constant(0.7, 1.3).unwrap();
    for seed in 0..100 {
        let path = simulate_path(&spec, 5, 4.0, seed).unwrap();
        assert_eq!(path.states[0], 5);
        assert_eq!(path.states.len(), path.jump_times.len() + 1);
        for w in path.states.windows(2) {
            assert_eq!((w[1] - w[0]).abs(), 1);
        }
        for w in path.jump_times.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(path.jump_times.last().is_none_or(|&t| t <= 4.0));
        assert_eq!(path.state_at(4.0), path.final_state());
    }
}

#[test]
fn mc_transition_frequencies_match_closed_form() {
    let spec = ProcessSpec::constant(1.0, 2.0).unwrap();
    let dist = estimate_transition(&spec, 0, 1.0, &McOptions::new(100_000, 7)).unwrap();
    for n in -4..=3 {
        let p = transition_prob_const(1.0, 2.0, 0, n, 1.0).unwrap();
        let se = dist.std_error(n, Some(p));
        assert!((dist.frequency(n) - p).abs() < 5.0 * se, "n={n}");
    }
}

#[test]
fn mc_transformed_frequencies_match_closed_form() {
    let spec = ProcessSpec::transformed_constant(1.0, 2.0, 1.0).unwrap();
    let dist = estimate_transition(&spec, 0, 1.0, &McOptions::new(100_000, 8)).unwrap();
    for n in -3..=4 {
        let p = transformed_transition_const(1.0, 2.0, 1.0, 0, n, 1.0).unwrap();
        let se = dist.std_error(n, Some(p));
        assert!((dist.frequency(n) - p).abs() < 5.0 * se, "n={n}");
    }
}

#[test]
fn mc_is_reproducible_across_thread_counts() {
    let spec = ProcessSpec::constant(1.0, 2.0).unwrap();
    let one =
        estimate_transition(&spec, 0, 2.0, &McOptions::new(20_000, 42).with_threads(1)).unwrap();
    let four =
        estimate_transition(&spec, 0, 2.0, &McOptions::new(20_000, 42).with_threads(4)).unwrap();
    assert_eq!(one, four);
    let (h1, c1) = estimate_fpt(
        &spec,
        0,
        2,
        10.0,
        20,
        &McOptions::new(20_000, 42).with_threads(1),
    )
    .unwrap();
    let (h3, c3) = estimate_fpt(
        &spec,
        0,
        2,
        10.0,
        20,
        &McOptions::new(20_000, 42).with_threads(3),
    )
    .unwrap();
    assert_eq!(h1, h3);
    assert_eq!(c1, c3);
}

#[test]
fn mc_fpt_histogram_tracks_density() {
    let spec = ProcessSpec::constant(1.0, 2.0).unwrap();
    let (hist, _) = estimate_fpt(&spec, 0, 1, 5.0, 10, &McOptions::new(200_000, 9)).unwrap();
    for (center, d) in hist.bin_centers().iter().zip(&hist.density) {
        // Bin average of the exact density via Simpson's rule.
        let (a, b) = (center - hist.bin_width / 2.0, center + hist.bin_width / 2.0);
        let g = |t: f64| {
            if t == 0.0 {
                1.0
            } else {
                fpt_density_const(1.0, 2.0, 0, 1, t).unwrap()
            }
        };
        let exact = (g(a) + 4.0 * g(*center) + g(b)) / 6.0;
        let se = (exact / (200_000.0 * hist.bin_width)).sqrt();
        assert!(
            (d - exact).abs() < 5.0 * se + 2e-3,
            "t={center}: {d} vs {exact}"
        );
    }
}

#[test]
fn absorbed_mass_approaches_crossing_probability() {
    let spec = ProcessSpec::constant(1.0, 2.0).unwrap();
    let times = time_grid(200.0, 401).unwrap();
    let g = fpt_numeric(&spec, &window(-400, 5), 0, 1, &times, 1e-10).unwrap();
    let last = *g.absorbed_mass.last().unwrap();
    assert!((last - 0.5).abs() < 1e-6, "{last}");
    assert!((g.censored_mass - (1.0 - last)).abs() < 1e-15);
}

#[test]
fn numeric_fpt_matches_closed_form() {
    let times = time_grid(8.0, 161).unwrap();
    let spec = ProcessSpec::constant(1.0, 2.0).unwrap();
    let nu = build_nu_constant_ratio(2.0, 1.0, window(-81, 81)).unwrap();
    let tp = transform_process(&spec, &nu).unwrap();
    for (k, s) in [(0, 2), (1, -2)] {
        let g = fpt_numeric(&spec, &window(-80, 80), k, s, &times, 1e-10).unwrap();
        let gt = fpt_numeric(tp.spec(), &tp.window(), k, s, &times, 1e-10).unwrap();
        for (i, &t) in times.iter().enumerate().skip(1) {
            let a = fpt_density_const(1.0, 2.0, k, s, t).unwrap();
            let b = transformed_fpt_const(1.0, 2.0, 1.0, k, s, t).unwrap();
            assert!((g.density[i] - a).abs() < 1e-6, "g t={t}");
            assert!((gt.density[i] - b).abs() < 1e-6, "g~ t={t}");
        }
    }
}

#[test]
fn auto_window_meets_tolerance() {
    let spec = ProcessSpec::constant(1.0, 2.0).unwrap();
    let slice = solve_forward_auto(&spec, 0, &[0.0, 1.0, 3.0], 1e-10).unwrap();
    assert!(*slice.deficit.last().unwrap() < 1e-10);
    for n in -10..=10 {
        let exact = transition_prob_const(1.0, 2.0, 0, n, 3.0).unwrap();
        assert!((slice.prob(2, n).unwrap() - exact).abs() < 1e-8, "n={n}");
    }
}
