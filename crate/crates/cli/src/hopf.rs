use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use nevorder::hopf::{hopf_report, DEFAULT_EPSILON};
use nevorder::rng::purpose;
use nevorder::RngStream;

use crate::config::{load_file, require_seed, HopfArgs};
use crate::output::{document, metadata, write};
use crate::Failure;

pub const DEFAULT_RADII: [f64; 3] = [100.0, 316.0, 1000.0];
pub const DEFAULT_BUDGET: usize = 900_000;

#[derive(Clone, Debug, Serialize)]
pub struct HopfConfig {
    pub command: &'static str,
    pub seed: u64,
    pub r: Vec<f64>,
    pub epsilon: f64,
    pub samples: usize,
    pub check: bool,
    pub out: PathBuf,
}

pub fn run(args: HopfArgs) -> Result<(), Failure> {
    let file = load_file(args.config.as_deref())?;
    let config = HopfConfig {
        command: "hopf",
        seed: require_seed(args.seed.or(file.seed))?,
        r: args.r.or(file.r).unwrap_or_else(|| DEFAULT_RADII.to_vec()),
        epsilon: args.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON),
        samples: args.samples.or(file.samples).unwrap_or(DEFAULT_BUDGET),
        check: args.check || file.check.unwrap_or(false),
        out: args.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
    };

    let report = hopf_report(
        &config.r,
        config.epsilon,
        config.samples,
        RngStream::new(config.seed, purpose::REGION),
    )?;

    let meta = metadata(&config);
    write(&config.out, "regions.csv", &report.regions_csv(&meta))?;
    write(&config.out, "ir.csv", &report.ir_csv(&meta))?;
    write(&config.out, "jr.csv", &report.jr_csv(&meta))?;
    write(
        &config.out,
        "check.json",
        &document(
            &config,
            json!({
                "checks": report.checks,
                "ir": report.ir,
                "jr": report.jr,
                "ir_slope": report.ir_slope,
                "pass": report.pass,
            }),
        ),
    )?;

    for row in &report.ir {
        println!("r = {:>8}  I_r = {:.6e} ± {:.2e}", row.r, row.value, row.stderr);
    }
    if let Some(s) = report.ir_slope {
        println!("I_r log-log slope {s:.4}");
    }
    for c in &report.checks {
        println!(
            "{} {}: {:.4} (limit {})",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        );
    }

    if config.check && !report.pass {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        return Err(Failure::check(format!("bound checks failed: {}", failed.join(", "))));
    }
    Ok(())
}
