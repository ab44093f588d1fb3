use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use nevorder::forms::{MetricFormSpec, MetricKind};
use nevorder::hopf::{arith_suite, coverage_check, i_r, omega_volume, OmegaSpec, DEFAULT_EPSILON};
use nevorder::psh::psh_suite;
use nevorder::rng::purpose;
use nevorder::sphere::hit_or_miss_area;
use nevorder::{sample_sphere, RngStream};

use crate::config::{load_file, require_seed, ChecksArgs};
use crate::output::{document, write};
use crate::Failure;

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const VOLUME_RADII: [f64; 3] = [10.0, 100.0, 1000.0];
pub const ARITH_RADII: [f64; 4] = [10.0, 100.0, 1000.0, 10_000.0];
pub const VOLUME_TOL: f64 = 0.005;
pub const INVARIANCE_POINTS: usize = 10_000;
pub const INVARIANCE_TOL: f64 = 1e-12;
pub const PSH_R_MAX: f64 = 100.0;
pub const PSH_SHELLS_PER_DECADE: usize = 24;

#[derive(Clone, Debug, Serialize)]
pub struct ChecksConfig {
    pub command: &'static str,
    pub seed: u64,
    pub samples: usize,
    pub out: PathBuf,
}

fn volume_suite(seed: u64, n: usize) -> Result<Value, Failure> {
    let stream = RngStream::new(seed, purpose::VOLUME);
    let mut pass = true;
    let mut rows = Vec::new();
    for (k, &r) in VOLUME_RADII.iter().enumerate() {
        let full = 2.0 * PI * PI * r.powi(3);
        let (area, area_se) = hit_or_miss_area(2, r, n, stream.split(3 * k as u64))?;
        let regions = i_r(r, DEFAULT_EPSILON, n, stream.split(3 * k as u64 + 1))?;
        let covered = coverage_check(r, DEFAULT_EPSILON, n, stream.split(3 * k as u64 + 2))?;
        let area_err = (area / full - 1.0).abs();
        let region_err = (regions.total_volume / full - 1.0).abs();
        let ok = area_err <= VOLUME_TOL && region_err <= VOLUME_TOL;
        pass &= ok;
        rows.push(json!({
            "r": r,
            "exact": full,
            "hit_or_miss": area,
            "hit_or_miss_stderr": area_se,
            "region_sum": regions.total_volume,
            "relative_error": area_err,
            "region_relative_error": region_err,
            "covered_points": covered,
            "pass": ok,
        }));
    }

    let mut omega = Vec::new();
    for r in [1.0, 10.0, 100.0, 1000.0] {
        for k in [0.5, 1.0, 1.5] {
            for lambda in [-1.0, 0.0, 0.5] {
                for mu in [0.0, 0.5, 1.0] {
                    let v = omega_volume(OmegaSpec { k, lambda, mu, r })?;
                    let ok = v.measured <= v.bound * (1.0 + 1e-12);
                    pass &= ok;
                    omega.push(json!({
                        "k": k, "lambda": lambda, "mu": mu, "r": r,
                        "measured": v.measured, "bound": v.bound, "pass": ok,
                    }));
                }
            }
        }
    }
    Ok(json!({ "radii": rows, "omega": omega, "pass": pass }))
}

fn arithmetic_suite(seed: u64, n: usize) -> Result<Value, Failure> {
    let report = arith_suite(&ARITH_RADII, n, RngStream::new(seed, purpose::ARITH))?;
    Ok(serde_json::to_value(&report).expect("report serialises"))
}

fn invariance_suite(seed: u64) -> Result<Value, Failure> {
    let metric = MetricFormSpec::new(MetricKind::Hopf, 2);
    let lambda = Complex64::new(2.0, 1.0);
    let weight = lambda.norm_sqr();
    let per = INVARIANCE_POINTS / 4;
    let mut worst = 0.0f64;
    for (k, r) in [1e-3, 1.0, 1e3, 1e6].into_iter().enumerate() {
        for p in sample_sphere(2, r, per, RngStream::new(seed, purpose::SPHERE).split(k as u64))? {
            let h = metric.eval(&p)?;
            let hs = metric.eval(&p.scaled(lambda))?;
            let scale = (0..2).map(|a| h.get(a, a).norm()).fold(0.0, f64::max);
            for a in 0..2 {
                for b in 0..2 {
                    worst = worst.max((hs.get(a, b) * weight - h.get(a, b)).norm() / scale);
                }
            }
        }
    }
    Ok(json!({
        "lambda": [lambda.re, lambda.im],
        "points": 4 * per,
        "max_residual": worst,
        "tolerance": INVARIANCE_TOL,
        "pass": worst <= INVARIANCE_TOL,
    }))
}

fn psh_checks(seed: u64, n: usize) -> Result<Value, Failure> {
    let reports = psh_suite(PSH_R_MAX, PSH_SHELLS_PER_DECADE, n, RngStream::new(seed, purpose::PSH))?;
    let pass = reports.iter().all(|r| r.pass);
    let items: Vec<Value> = reports.iter().map(|r| r.to_json_value()).collect();
    Ok(json!({ "functions": items, "pass": pass }))
}

pub fn run(args: ChecksArgs) -> Result<(), Failure> {
    let file = load_file(args.config.as_deref())?;
    let config = ChecksConfig {
        command: "checks",
        seed: require_seed(args.seed.or(file.seed))?,
        samples: args.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
        out: args.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
    };
    if config.samples < 1000 {
        return Err(Failure::config("--samples must be at least 1000"));
    }

    let suites = [
        ("volume", volume_suite(config.seed, config.samples)?),
        ("arithmetic", arithmetic_suite(config.seed, config.samples)?),
        ("invariance", invariance_suite(config.seed)?),
        ("psh", psh_checks(config.seed, (config.samples / 50).max(1000))?),
    ];
    let failed: Vec<&str> = suites
        .iter()
        .filter(|(_, v)| v["pass"] != Value::Bool(true))
        .map(|(name, _)| *name)
        .collect();
    for (name, v) in &suites {
        println!("{} {name}", if v["pass"] == Value::Bool(true) { "ok  " } else { "FAIL" });
    }

    let mut body = serde_json::Map::new();
    for (name, v) in suites {
        body.insert(name.to_string(), v);
    }
    write(
        &config.out,
        "checks.json",
        &document(&config, json!({ "suites": body, "pass": failed.is_empty() })),
    )?;

    if !failed.is_empty() {
        return Err(Failure::check(format!("suites failed: {}", failed.join(", "))));
    }
    Ok(())
}
