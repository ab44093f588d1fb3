//! Growth-order estimation from a sampled order function.
//!
//! The order is a limsup of `log T / log r`. On a finite range we fit
//! `log T` against `log r` by least squares on the top part of the range, and use
//! the largest slope over half-decade sliding windows as the limsup proxy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::GrowthSeries;
use crate::stats::least_squares;

pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;
pub const MIN_POINTS: usize = 8;
const HALF_DECADE: f64 = std::f64::consts::LN_10 / 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub order_estimate: f64,
    pub window: (f64, f64),
    pub sliding_slopes: Vec<f64>,
    pub max_residual: f64,
    /// Points inside the window dropped because `T ≤ 0`.
    pub excluded: usize,
}

pub fn fit_order(series: &GrowthSeries, window_fraction: f64) -> Result<OrderFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "window_fraction must lie in (0, 1], got {window_fraction}"
        )));
    }
    let (Some(&first), Some(&last)) = (series.grid.first(), series.grid.last()) else {
        return Err(Error::InsufficientData {
            usable: 0,
            needed: MIN_POINTS,
        });
    };
    let (log_lo, log_hi) = (first.ln(), last.ln());
    let cut = log_hi - window_fraction * (log_hi - log_lo);
    let in_window = |r: f64| r.ln() >= cut - 1e-12 * cut.abs().max(1.0);

    let mut excluded = 0;
    let mut xs = vec![];
    let mut ys = vec![];
    for (&r, &t) in series.grid.iter().zip(&series.t) {
        if !in_window(r) {
            continue;
        }
        if t > 0.0 && t.is_finite() {
            xs.push(r.ln());
            ys.push(t.ln());
        } else {
            excluded += 1;
        }
    }
    if xs.len() < MIN_POINTS {
        return Err(Error::InsufficientData {
            usable: xs.len(),
            needed: MIN_POINTS,
        });
    }
    let fit = least_squares(&xs, &ys).ok_or(Error::InsufficientData {
        usable: xs.len(),
        needed: MIN_POINTS,
    })?;

    let x_end = *xs.last().unwrap();
    let slack = 1e-9;
    let mut sliding_slopes = vec![];
    for start in 0..xs.len() {
        let stop = xs[start] + HALF_DECADE;
        if stop > x_end + slack {
            break;
        }
        let idx: Vec<usize> = (start..xs.len()).take_while(|&i| xs[i] <= stop + slack).collect();
        if idx.len() < 2 {
            continue;
        }
        let wx: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
        let wy: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
        if let Some(w) = least_squares(&wx, &wy) {
            sliding_slopes.push(w.slope);
        }
    }
    if sliding_slopes.is_empty() {
        sliding_slopes.push(fit.slope);
    }
    let order_estimate = sliding_slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    Ok(OrderFit {
        slope: fit.slope,
        intercept: fit.intercept,
        order_estimate,
        window: (xs[0].exp(), x_end.exp()),
        sliding_slopes,
        max_residual: fit.max_residual,
        excluded,
    })
}

impl OrderFit {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "slope": self.slope,
            "intercept": self.intercept,
            "order_estimate": self.order_estimate,
            "window": [self.window.0, self.window.1],
            "sliding_slopes": self.sliding_slopes,
            "max_residual": self.max_residual,
            "excluded": self.excluded,
        })
    }
}
