use num_complex::Complex64;

use nevorder::growth::{growth_series, RadialGrid};
use nevorder::order_fit::fit_order;
use nevorder::psh::{ball_growth_check, registered, sphere_mean_series, HoloTestFunction};
use nevorder::{builtin, Polynomial, RngStream, UniformSampler};

#[test]
fn fs_linear_order_function_matches_closed_form() {
    let (map, metric) = builtin("fs-linear").unwrap();
    let grid = RadialGrid::geometric(1000.0, 48).unwrap();
    let s = growth_series(&map, &metric, &grid, &UniformSampler, 256, RngStream::new(1, 2)).unwrap();
    for i in 1..s.len() {
        let r = s.grid[i];
        let exact = 0.5 * ((1.0 + r * r) / 2.0).ln();
        assert!((s.t[i] / exact - 1.0).abs() < 0.01, "r = {r}: {} vs {exact}", s.t[i]);
        // A(t) = t⁴/(1 + t²).
        let a = r.powi(4) / (1.0 + r * r);
        assert!((s.a[i] / a - 1.0).abs() < 0.01, "A({r})");
    }
}

#[test]
fn torus_cover_order_is_two() {
    let (map, metric) = builtin("torus-cover").unwrap();
    let grid = RadialGrid::geometric(1000.0, 48).unwrap();
    let s = growth_series(&map, &metric, &grid, &UniformSampler, 16, RngStream::new(1, 2)).unwrap();
    let fit = fit_order(&s, 0.5).unwrap();
    assert!((fit.order_estimate - 2.0).abs() < 0.05, "{}", fit.order_estimate);
}

#[test]
fn first_coordinate_sphere_mean_grows_quadratically() {
    let z1 = &registered()[1];
    let grid = RadialGrid::geometric(100.0, 12).unwrap();
    let s = sphere_mean_series(z1, grid.outer(), 100_000, RngStream::new(2, 5)).unwrap();
    assert!(s.monotone);
    // |z₁|² is uniform on [0, 1] over S(1) ⊂ C², so E|z₁| = 2/3 and M(r) = 2r²/3.
    for (r, (m, se)) in s.grid.iter().zip(s.mean.iter().zip(&s.stderr)) {
        let exact = 2.0 * r * r / 3.0;
        assert!((m - exact).abs() <= 4.0 * se + 1e-12, "r = {r}: {m} ± {se} vs {exact}");
    }
    let x: Vec<f64> = s.grid.iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = s.mean.iter().map(|m| m.ln()).collect();
    let slope = nevorder::stats::least_squares(&x, &y).unwrap().slope;
    assert!((slope - 2.0).abs() < 0.05, "{slope}");
}

#[test]
fn registered_functions_have_monotone_means_and_fast_ball_growth() {
    for (k, u) in registered().iter().enumerate() {
        let rep = ball_growth_check(u, 100.0, 24, 20_000, RngStream::new(10 + k as u64, 5)).unwrap();
        assert!(rep.monotone, "{}: {:?}", rep.u, rep.violations);
        assert!(rep.exponent >= 3.9, "{}: {}", rep.u, rep.exponent);
        assert!(rep.ball_bound_holds, "{}", rep.u);
    }
}

#[test]
fn squared_coordinate_ball_integral_has_exponent_six() {
    let u = HoloTestFunction::new("z1^2", vec![Polynomial::coordinate(2, 0)], 2.0).unwrap();
    let rep = ball_growth_check(&u, 100.0, 24, 20_000, RngStream::new(3, 5)).unwrap();
    // ∫_{S(t)} |z₁|² dV = π²t⁵, so ∫_{B(r)} |z₁|² α² = r⁶/3.
    for &(r, ball, _) in rep.ball.iter().skip(1) {
        assert!((ball / (r.powi(6) / 3.0) - 1.0).abs() < 0.02, "r = {r}: {ball}");
    }
    assert!((rep.exponent - 6.0).abs() < 0.05, "{}", rep.exponent);
}

#[test]
fn constant_witness_gives_quadratic_lower_bound_for_the_identity() {
    // ζ ≥ c₂·u with u ≡ 1 and c₂ = 1 for the flat identity; T then dominates the
    // integrated ball bound ∫_1^r (c₄/4)(t⁴ − 1) t^{-3} dt.
    let one = &registered()[0];
    let rep = ball_growth_check(one, 100.0, 24, 64, RngStream::new(4, 5)).unwrap();
    let (map, metric) = builtin("torus-cover").unwrap();
    let grid = RadialGrid::geometric(100.0, 24).unwrap();
    let s = growth_series(&map, &metric, &grid, &UniformSampler, 64, RngStream::new(4, 2)).unwrap();
    let c2 = 1.0;
    for (&r, &t) in s.grid.iter().zip(&s.t).skip(1) {
        let lower = c2 * rep.c4 / 4.0 * ((r * r - 1.0) / 2.0 + (1.0 / (r * r) - 1.0) / 2.0);
        assert!(t >= 0.9 * lower, "r = {r}: {t} < {lower}");
    }
}

#[test]
fn square_root_of_product_function_is_monotone() {
    let one = Complex64::new(1.0, 0.0);
    let f = Polynomial::from_terms(2, &[(&[0, 0], one), (&[1, 1], one)]).unwrap();
    let u = HoloTestFunction::new("sqrt", vec![f], 0.5).unwrap();
    let grid = RadialGrid::geometric(100.0, 24).unwrap();
    let s = sphere_mean_series(&u, grid.outer(), 50_000, RngStream::new(6, 5)).unwrap();
    assert!(s.monotone, "{:?}", s.violations);
}
