mod common;

use nevorder::growth::{growth_series, RadialGrid};
use nevorder::hopf::{i_r, region_contribution, Region, RegionSpec};
use nevorder::{builtin, HopfStratifiedSampler, RngStream};

#[test]
fn oracle_agrees_with_independent_values() {
    // Brute-force uniform Monte Carlo values (10⁸ samples) of ∫ η dV.
    assert!((common::i_r(3.0) / 486.5 - 1.0).abs() < 2e-3);
    assert!((common::i_r(10.0) / 3606.4 - 1.0).abs() < 1e-3);
    for r in [10.0, 100.0, 1000.0] {
        let parts: f64 = common::region_contributions(r, 0.1).iter().sum();
        let whole = common::i_r(r);
        assert!((parts / whole - 1.0).abs() < 1e-6, "r = {r}: {parts} vs {whole}");
    }
}

#[test]
fn stratified_i_r_matches_oracle() {
    for (k, r) in [10.0, 100.0, 316.0, 1000.0].into_iter().enumerate() {
        let est = i_r(r, 0.1, 900_000, RngStream::new(100 + k as u64, 3)).unwrap();
        let exact = common::i_r(r);
        let z = (est.value - exact) / est.stderr;
        assert!(z.abs() < 4.0, "r = {r}: {} ± {} vs {exact}", est.value, est.stderr);
        assert!(est.stderr / exact < 0.01, "r = {r}: relative error {}", est.stderr / exact);
    }
}

#[test]
fn each_region_matches_oracle() {
    let (r, eps) = (316.0, 0.1);
    let exact = common::region_contributions(r, eps);
    for (k, region) in Region::ALL.into_iter().enumerate() {
        let est = region_contribution(
            RegionSpec { region, epsilon: eps, r },
            200_000,
            RngStream::new(7, 3).split(k as u64),
        )
        .unwrap();
        let tol = 4.0 * est.stderr + 1e-9 * exact[k].abs();
        assert!(
            (est.contribution - exact[k]).abs() <= tol,
            "{region}: {} ± {} vs {}",
            est.contribution,
            est.stderr,
            exact[k]
        );
    }
}

#[test]
fn c_region_band_reference_values() {
    for (r, expected) in [(100.0, 1.462), (10f64.powf(2.5), 0.605), (1000.0, 0.2367)] {
        let c = common::region_contributions(r, 0.1)[2] / (r * r);
        assert!((c / expected - 1.0).abs() < 5e-3, "r = {r}: {c}");
    }
}

#[test]
fn error_bars_are_calibrated_across_seeds() {
    let r = 316.0;
    let exact = common::i_r(r);
    let z: Vec<f64> = (0..12)
        .map(|seed| {
            let e = i_r(r, 0.1, 90_000, RngStream::new(seed, 3)).unwrap();
            (e.value - exact) / e.stderr
        })
        .collect();
    let rms = (z.iter().map(|x| x * x).sum::<f64>() / z.len() as f64).sqrt();
    assert!((0.4..=1.8).contains(&rms), "rms z-score {rms}: {z:?}");
}

#[test]
fn hopf_order_function_matches_oracle() {
    let (map, metric) = builtin("hopf").unwrap();
    let grid = RadialGrid::geometric(100.0, 12).unwrap();
    let s = growth_series(
        &map,
        &metric,
        &grid,
        &HopfStratifiedSampler::default(),
        50_000,
        RngStream::new(5, 2),
    )
    .unwrap();
    let exact = common::hopf_t_trapezoid(grid.outer(), 16);
    for i in 1..s.len() {
        let tol = 4.0 * s.stderr[i] + 1e-6 * exact[i];
        assert!(
            (s.t[i] - exact[i]).abs() <= tol,
            "r = {}: {} ± {} vs {}",
            s.grid[i],
            s.t[i],
            s.stderr[i],
            exact[i]
        );
    }
}
