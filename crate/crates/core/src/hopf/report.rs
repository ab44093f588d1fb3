use serde::Serialize;

use super::region::Region;
use super::sampler::{i_r, IrEstimate};
use super::j_r;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::least_squares;

pub const REGION_CSV_HEADER: &str =
    "r,region,volume,contribution,stderr,bound_exponent,measured_slope";
pub const C_BAND_LIMIT: f64 = 20.0;
pub const J_BAND_LIMIT: f64 = 10.0;
pub const IR_BAND_LIMIT: f64 = 30.0;
const SLOPE_MARGIN: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionRow {
    pub r: f64,
    pub region: Region,
    pub volume: f64,
    pub contribution: f64,
    pub stderr: f64,
    pub bound_exponent: f64,
    pub measured_slope: Option<f64>,
    pub empty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrRow {
    pub r: f64,
    pub value: f64,
    pub stderr: f64,
    pub ratio_r2: f64,
    pub total_volume: f64,
    pub zeta_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JrRow {
    pub r: f64,
    pub value: f64,
    pub ratio_r4: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HopfReport {
    pub epsilon: f64,
    pub radii: Vec<f64>,
    pub regions: Vec<RegionRow>,
    pub ir: Vec<IrRow>,
    pub jr: Vec<JrRow>,
    /// Log-log slope of `I_r`; reported, not asserted.
    pub ir_slope: Option<f64>,
    pub checks: Vec<BoundCheck>,
    pub pass: bool,
}

fn band(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(r, v)| (r.ln(), v.ln()))
        .unzip();
    if x.len() < 2 {
        return None;
    }
    least_squares(&x, &y).map(|f| f.slope)
}

/// Upper limit on the measured contribution slope of a region.
pub fn slope_limit(region: Region, epsilon: f64) -> f64 {
    match region {
        Region::A => 1.0 + SLOPE_MARGIN,
        Region::E => 2.0 + 2.0 * epsilon + SLOPE_MARGIN,
        _ => 2.0 + SLOPE_MARGIN,
    }
}

/// Region contributions, `I_r` and `J_r` on the radii, with the bound checks.
pub fn hopf_report(radii: &[f64], epsilon: f64, budget: usize, stream: RngStream) -> Result<HopfReport> {
    if radii.is_empty() {
        return Err(Error::invalid("at least one radius is required"));
    }
    if let Some(r) = radii.iter().find(|r| !(**r >= 10.0 && **r <= 1e4)) {
        return Err(Error::invalid(format!("radii must lie in [10, 10^4], got {r}")));
    }
    let estimates: Vec<IrEstimate> = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| i_r(r, epsilon, budget, stream.split(k as u64)).map_err(|e| e.at_shell(r)))
        .collect::<Result<_>>()?;
    let jr: Vec<JrRow> = radii
        .iter()
        .map(|&r| {
            j_r(r).map(|value| JrRow {
                r,
                value,
                ratio_r4: value / r.powi(4),
            })
        })
        .collect::<Result<_>>()?;

    let slopes: Vec<(Region, Option<f64>)> = Region::ALL
        .iter()
        .enumerate()
        .map(|(i, &region)| {
            let pts: Vec<(f64, f64)> = estimates
                .iter()
                .filter(|e| !e.regions[i].empty)
                .map(|e| (e.r, e.regions[i].contribution))
                .collect();
            (region, slope(&pts))
        })
        .collect();

    let mut regions = vec![];
    for e in &estimates {
        for (i, est) in e.regions.iter().enumerate() {
            regions.push(RegionRow {
                r: e.r,
                region: est.region,
                volume: est.volume,
                contribution: est.contribution,
                stderr: est.stderr,
                bound_exponent: est.region.contribution_exponent(),
                measured_slope: slopes[i].1,
                empty: est.empty,
            });
        }
    }
    let ir: Vec<IrRow> = estimates
        .iter()
        .map(|e| IrRow {
            r: e.r,
            value: e.value,
            stderr: e.stderr,
            ratio_r2: e.value / (e.r * e.r),
            total_volume: e.total_volume,
            zeta_residual: e.zeta_residual,
        })
        .collect();

    let mut checks = vec![];
    for (region, s) in &slopes {
        if let Some(s) = s {
            let limit = slope_limit(*region, epsilon);
            checks.push(BoundCheck {
                name: format!("slope {region}"),
                value: *s,
                limit,
                pass: *s <= limit,
            });
        }
    }
    let c_index = Region::ALL.iter().position(|r| *r == Region::C).unwrap();
    let c_ratios: Vec<f64> = estimates
        .iter()
        .map(|e| e.regions[c_index].contribution / (e.r * e.r))
        .collect();
    let mut push_band = |name: &str, values: &[f64], limit: f64| {
        let value = band(values);
        checks.push(BoundCheck {
            name: name.into(),
            value,
            limit,
            pass: value <= limit,
        });
    };
    push_band("C band", &c_ratios, C_BAND_LIMIT);
    push_band("J_r band", &jr.iter().map(|j| j.ratio_r4).collect::<Vec<_>>(), J_BAND_LIMIT);
    push_band("I_r band", &ir.iter().map(|i| i.ratio_r2).collect::<Vec<_>>(), IR_BAND_LIMIT);

    let ir_slope = slope(&ir.iter().map(|i| (i.r, i.value)).collect::<Vec<_>>());
    let pass = checks.iter().all(|c| c.pass);
    Ok(HopfReport {
        epsilon,
        radii: radii.to_vec(),
        regions,
        ir,
        jr,
        ir_slope,
        checks,
        pass,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

impl HopfReport {
    pub fn regions_csv(&self, metadata: &[String]) -> String {
        let mut out = comment_lines(metadata);
        out.push_str(REGION_CSV_HEADER);
        out.push('\n');
        for row in &self.regions {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.r,
                row.region,
                row.volume,
                row.contribution,
                row.stderr,
                row.bound_exponent,
                opt(row.measured_slope)
            ));
        }
        out
    }

    pub fn ir_csv(&self, metadata: &[String]) -> String {
        let mut out = comment_lines(metadata);
        out.push_str("r,I_r,stderr,I_r_over_r2,total_volume,zeta_residual\n");
        for row in &self.ir {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.r, row.value, row.stderr, row.ratio_r2, row.total_volume, row.zeta_residual
            ));
        }
        out
    }

    pub fn jr_csv(&self, metadata: &[String]) -> String {
        let mut out = comment_lines(metadata);
        out.push_str("r,J_r,J_r_over_r4\n");
        for row in &self.jr {
            out.push_str(&format!("{},{},{}\n", row.r, row.value, row.ratio_r4));
        }
        out
    }
}

fn comment_lines(metadata: &[String]) -> String {
    metadata.iter().map(|l| format!("# {l}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_and_slope_helpers() {
        assert_eq!(band(&[1.0, 4.0, 2.0]), 4.0);
        assert_eq!(band(&[0.0, 1.0]), f64::INFINITY);
        let s = slope(&[(10.0, 100.0), (100.0, 10_000.0)]).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
        assert_eq!(slope(&[(10.0, 1.0)]), None);
    }

    #[test]
    fn radii_outside_range_are_rejected() {
        assert!(hopf_report(&[5.0], 0.1, 10_000, RngStream::new(1, 3)).is_err());
        assert!(hopf_report(&[], 0.1, 10_000, RngStream::new(1, 3)).is_err());
    }

    #[test]
    fn small_report_has_all_rows() {
        let rep = hopf_report(&[10.0, 30.0], 0.1, 20_000, RngStream::new(2, 3)).unwrap();
        assert_eq!(rep.regions.len(), 18);
        assert_eq!(rep.ir.len(), 2);
        let csv = rep.regions_csv(&["x".into()]);
        assert!(csv.starts_with("# x\nr,region,volume"));
        assert_eq!(csv.lines().count(), 20);
    }
}
