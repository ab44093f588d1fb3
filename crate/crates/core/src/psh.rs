//! Sphere means of powers of norms of holomorphic tuples and the growth of the
//! corresponding ball integrals.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{geometry_constants, CPoint, Polynomial};
use crate::growth::{shell_series, RadialGrid};
use crate::rng::RngStream;
use crate::sphere::{shell_mean, UniformSampler};
use crate::stats::least_squares;

/// Multiplicative slack on the ball lower bound.
pub const BALL_SLACK: f64 = 0.9;
pub const EXPONENT_MARGIN: f64 = 0.1;
const MONOTONE_SIGMAS: f64 = 3.0;

/// `u = (Σ_k |f_k|²)^{p/2}` for a tuple of polynomials `f_k` on `C^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloTestFunction {
    pub name: String,
    components: Vec<Polynomial>,
    p: f64,
}

impl HoloTestFunction {
    pub fn new(name: impl Into<String>, components: Vec<Polynomial>, p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::invalid(format!("exponent must be positive, got {p}")));
        }
        let Some(first) = components.first() else {
            return Err(Error::invalid("at least one component is required"));
        };
        let m = first.vars();
        if components.iter().any(|c| c.vars() != m) {
            return Err(Error::invalid("components must share one set of variables"));
        }
        if components.iter().all(Polynomial::is_zero) {
            return Err(Error::invalid("test function is identically zero"));
        }
        Ok(HoloTestFunction {
            name: name.into(),
            components,
            p,
        })
    }

    pub fn dim(&self) -> usize {
        self.components[0].vars()
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn eval(&self, z: &CPoint) -> f64 {
        let sq: f64 = self
            .components
            .iter()
            .map(|f| f.eval(z.coords()).norm_sqr())
            .sum();
        sq.powf(self.p / 2.0)
    }
}

/// `1`, `|z₁|` and `|1 + z₁z₂|^{1/2}` on `C²`.
pub fn registered() -> Vec<HoloTestFunction> {
    let one = Complex64::new(1.0, 0.0);
    vec![
        HoloTestFunction::new("one", vec![Polynomial::constant(2, one)], 1.0),
        HoloTestFunction::new("z1", vec![Polynomial::coordinate(2, 0)], 1.0),
        HoloTestFunction::new(
            "one-plus-z1z2",
            vec![Polynomial::from_terms(2, &[(&[0, 0], one), (&[1, 1], one)]).expect("valid")],
            0.5,
        ),
    ]
    .into_iter()
    .collect::<Result<_>>()
    .expect("registered functions are valid")
}

/// Converts a euclidean surface integral over `S(r)` into the normalised
/// sphere measure, whose total mass on `S(r)` is `r`.
pub fn gamma_factor(m: usize, r: f64) -> f64 {
    r / geometry_constants(m, r).sphere_area
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanSeries {
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Consecutive pairs `(r_k, r_{k+1})` where the mean drops by more than
    /// three combined standard errors.
    pub violations: Vec<(f64, f64)>,
    pub monotone: bool,
}

pub fn sphere_mean_series(
    u: &HoloTestFunction,
    grid: &[f64],
    n_per_shell: usize,
    stream: RngStream,
) -> Result<MeanSeries> {
    if grid.first() != Some(&1.0) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("grid must be increasing and start at r = 1"));
    }
    let m = u.dim();
    let integrand = |p: &CPoint| Ok(u.eval(p));
    let shells: Vec<(f64, f64)> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &r)| {
            let est = shell_mean(&integrand, m, r, n_per_shell, stream.split(k as u64))
                .map_err(|e| e.at_shell(r))?;
            let g = gamma_factor(m, r);
            Ok((est.integral() * g, est.integral_variance().sqrt() * g))
        })
        .collect::<Result<_>>()?;
    let (mean, stderr): (Vec<f64>, Vec<f64>) = shells.into_iter().unzip();
    let violations: Vec<(f64, f64)> = (1..grid.len())
        .filter(|&k| {
            let tol = MONOTONE_SIGMAS * stderr[k - 1].hypot(stderr[k]);
            mean[k] < mean[k - 1] - tol
        })
        .map(|k| (grid[k - 1], grid[k]))
        .collect();
    Ok(MeanSeries {
        grid: grid.to_vec(),
        monotone: violations.is_empty(),
        mean,
        stderr,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PshReport {
    pub u: String,
    pub c4: f64,
    pub exponent: f64,
    pub monotone: bool,
    pub violations: Vec<(f64, f64)>,
    /// `(r, ∫_{B(r)} u α^m, (c₄/2m)(r^{2m} − 1))` on the grid.
    pub ball: Vec<(f64, f64, f64)>,
    pub ball_bound_holds: bool,
    pub exponent_ok: bool,
    pub pass: bool,
}

impl PshReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "u": self.u,
            "c4": self.c4,
            "exponent": self.exponent,
            "monotone": self.monotone,
            "violations": self.violations,
            "ball_bound_holds": self.ball_bound_holds,
            "exponent_ok": self.exponent_ok,
            "pass": self.pass,
        })
    }
}

/// Sphere means and ball integrals of `u` on a geometric grid up to `r_max`.
/// The exponent is the log-log slope of the ball integral over the top decade.
pub fn ball_growth_check(
    u: &HoloTestFunction,
    r_max: f64,
    shells_per_decade: usize,
    n_per_shell: usize,
    stream: RngStream,
) -> Result<PshReport> {
    if !(r_max >= 10.0) {
        return Err(Error::invalid(format!("r_max must be at least 10, got {r_max}")));
    }
    let m = u.dim();
    let grid = RadialGrid::geometric(r_max, shells_per_decade)?;
    let means = sphere_mean_series(u, grid.outer(), n_per_shell, stream.split(0))?;
    let c4 = means.mean[0];

    let integrand = |p: &CPoint| Ok(u.eval(p));
    let series = shell_series(&integrand, m, &grid, &UniformSampler, n_per_shell, stream.split(1))?;
    let two_m = 2 * m as i32;
    let ball: Vec<(f64, f64, f64)> = series
        .grid
        .iter()
        .zip(&series.a)
        .map(|(&r, &a)| (r, a, c4 / f64::from(two_m) * (r.powi(two_m) - 1.0)))
        .collect();
    let ball_bound_holds = ball.iter().all(|&(_, a, b)| a >= BALL_SLACK * b);

    let (x, y): (Vec<f64>, Vec<f64>) = ball
        .iter()
        .filter(|&&(r, a, _)| r >= r_max / 10.0 * (1.0 - 1e-12) && a > 0.0)
        .map(|&(r, a, _)| (r.ln(), a.ln()))
        .unzip();
    let exponent = least_squares(&x, &y)
        .ok_or(Error::InsufficientData {
            usable: x.len(),
            needed: 2,
        })?
        .slope;
    let exponent_ok = exponent >= f64::from(two_m) - EXPONENT_MARGIN;
    Ok(PshReport {
        u: u.name.clone(),
        c4,
        exponent,
        monotone: means.monotone,
        violations: means.violations,
        ball,
        ball_bound_holds,
        exponent_ok,
        pass: means.monotone && ball_bound_holds && exponent_ok,
    })
}

/// Runs [`ball_growth_check`] for every registered test function.
pub fn psh_suite(
    r_max: f64,
    shells_per_decade: usize,
    n_per_shell: usize,
    stream: RngStream,
) -> Result<Vec<PshReport>> {
    registered()
        .iter()
        .enumerate()
        .map(|(k, u)| ball_growth_check(u, r_max, shells_per_decade, n_per_shell, stream.split(k as u64)))
        .collect()
}
