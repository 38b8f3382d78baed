//! Cross-checks of the solver against independent reference routes: a dense
//! elimination oracle for the tridiagonal solve and naive steppers for the
//! two endpoint schemes.

#![allow(clippy::needless_range_loop)]

mod common;

use fracbs::caputo::build_weights;
use fracbs::model::{GridSpec, MarketParams};
use fracbs::scheme::{solve_surface, SchemeConfig, Tridiagonal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn random_diagonally_dominant(m: usize, rng: &mut impl Rng) -> Tridiagonal {
    let lower: Vec<f64> = (0..m - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
    let upper: Vec<f64> = (0..m - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
    let diag: Vec<f64> = (0..m)
        .map(|i| {
            let band = if i > 0 { lower[i - 1].abs() } else { 0.0 }
                + if i < m - 1 { upper[i].abs() } else { 0.0 };
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * (band + rng.random_range(0.5..2.0))
        })
        .collect();
    Tridiagonal { lower, diag, upper }
}

#[test]
fn thomas_matches_dense_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    for m in [2usize, 3, 5, 17, 50, 121, 200] {
        for _ in 0..8 {
            let tri = random_diagonally_dominant(m, &mut rng);
            let rhs: Vec<f64> = (0..m).map(|_| rng.random_range(-5.0..5.0)).collect();
            let dense = common::dense_from_tridiagonal(&tri.lower, &tri.diag, &tri.upper);
            let want = common::dense_solve(&dense, &rhs).expect("dense oracle");
            let got = tri.solve(&rhs).expect("thomas");
            for (g, w) in got.iter().zip(&want) {
                assert!(
                    (g - w).abs() <= 1e-12 * w.abs().max(1.0),
                    "m = {m}: {g} vs {w}"
                );
            }
        }
    }
}

#[test]
fn thomas_residual_is_small() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for _ in 0..20 {
        let m = rng.random_range(3..120);
        let tri = random_diagonally_dominant(m, &mut rng);
        let rhs: Vec<f64> = (0..m).map(|_| rng.random_range(-10.0..10.0)).collect();
        let y = tri.solve(&rhs).unwrap();
        let back = tri.matvec(&y);
        let rhs_norm = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (b, r) in back.iter().zip(&rhs) {
            assert!((b - r).abs() <= 1e-10 * rhs_norm.max(1.0));
        }
    }
}

fn table3_config(theta: f64, alpha: f64, n: usize, steps: usize) -> SchemeConfig {
    let params = MarketParams::new(1.0, 0.04, 2.0, 4.0, 1.0, alpha).unwrap();
    let grid = GridSpec::new(-20.0, 10.0, n, steps).unwrap();
    SchemeConfig::new(theta, grid, params).unwrap()
}

#[test]
fn weighted_scheme_at_theta_zero_reduces_to_implicit_path() {
    for (alpha, n, steps) in [(0.5, 24, 12), (0.8, 40, 9), (0.2, 16, 20)] {
        let cfg = table3_config(0.0, alpha, n, steps);
        let weights = build_weights(alpha, steps, cfg.grid.dt(4.0)).unwrap();
        let want = common::implicit_reference_surface(&cfg.params, &cfg.grid, &weights);
        let got = solve_surface(&cfg).unwrap();
        let scale = got.max_abs().max(1.0);
        for k in 0..=steps {
            for i in 1..n {
                let w = want[k][i - 1];
                assert!(
                    (got.value(i, k) - w).abs() <= 1e-12 * scale,
                    "alpha {alpha}, level {k}, node {i}: {} vs {w}",
                    got.value(i, k)
                );
            }
        }
    }
}

#[test]
fn weighted_scheme_at_theta_one_reduces_to_explicit_path() {
    for (alpha, n, steps) in [(0.5, 24, 12), (0.7, 30, 8)] {
        let cfg = table3_config(1.0, alpha, n, steps);
        let weights = build_weights(alpha, steps, cfg.grid.dt(4.0)).unwrap();
        let want = common::explicit_reference_surface(&cfg.params, &cfg.grid, &weights);
        let got = solve_surface(&cfg).unwrap();
        let scale = got.max_abs().max(1.0);
        for k in 0..=steps {
            for i in 1..n {
                let w = want[k][i - 1];
                assert!(
                    (got.value(i, k) - w).abs() <= 1e-12 * scale,
                    "alpha {alpha}, level {k}, node {i}: {} vs {w}",
                    got.value(i, k)
                );
            }
        }
    }
}

#[test]
fn price_is_monotone_in_spot_on_stable_configurations() {
    let base = table3_config(0.25, 0.6, 300, 40);
    let surf = solve_surface(&base).unwrap();
    assert!(surf.stability().stable());
    let mut last = -f64::INFINITY;
    for i in 0..10 {
        let spot = 0.4 + 0.35 * i as f64;
        let price = surf.price_at_spot(spot).unwrap();
        assert!(
            price >= last - 1e-12,
            "price not monotone at spot {spot}: {price} < {last}"
        );
        last = price;
    }
}

#[test]
fn strike_free_payoff_keeps_surface_positive_and_monotone() {
    // Initial data e^x with matching boundaries: the solution should stay
    // positive and increasing in x at every level.
    let params = MarketParams::new(1.0, 0.04, 2.0, 4.0, 1.0, 0.5).unwrap();
    let grid = GridSpec::new(-8.0, 4.0, 120, 30).unwrap();
    let cfg = SchemeConfig::new(0.0, grid, params).unwrap();
    let x_min = grid.x_min;
    let surf = fracbs::scheme::solve_with(
        &cfg,
        |x| x.exp(),
        move |_t| x_min.exp(),
        |_t| 4.0f64.exp(),
    )
    .unwrap();
    for k in 0..=30 {
        for i in 0..120 {
            let here = surf.value(i, k);
            let right = surf.value(i + 1, k);
            assert!(here > 0.0, "negative value at ({i}, {k})");
            assert!(
                right >= here - 1e-9 * right.abs(),
                "not monotone at ({i}, {k}): {here} vs {right}"
            );
        }
    }
}

#[test]
fn stable_verdicts_imply_bounded_surfaces() {
    // 5×5 sweep over (θ, α) on the coarse study mesh: wherever the verdict
    // says stable, the surface must stay within a payoff-scale bound.
    let bound = 10.0 * 10.0f64.exp();
    for &theta in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        for &alpha in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let cfg = table3_config(theta, alpha, 500, 50);
            let surf = solve_surface(&cfg).unwrap();
            if surf.stability().stable() {
                assert!(
                    surf.max_abs() <= bound,
                    "theta {theta}, alpha {alpha}: max |u| = {:e}",
                    surf.max_abs()
                );
            }
        }
    }
}
