//! Reference values computed independently of the library: the θ integral of
//! the Hopf integrand is done in closed form and the rest by adaptive Simpson.

#![allow(dead_code)]

use std::f64::consts::PI;

pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Integrates over `[a, b]` piecewise between sorted breakpoints, each piece on
/// a geometric subdivision, to a relative tolerance.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], rel: f64) -> f64 {
    let mut pts: Vec<f64> = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    let mut pieces = vec![];
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let k = 16;
        if lo > 0.0 && hi / lo > 4.0 {
            for i in 0..k {
                let x0 = lo * (hi / lo).powf(i as f64 / k as f64);
                let x1 = lo * (hi / lo).powf((i + 1) as f64 / k as f64);
                pieces.push((x0, x1));
            }
        } else {
            for i in 0..k {
                pieces.push((lo + (hi - lo) * i as f64 / k as f64, lo + (hi - lo) * (i + 1) as f64 / k as f64));
            }
        }
    }
    let rough: f64 = pieces.iter().map(|&(x0, x1)| simpson(f, x0, x1, f64::INFINITY)).sum();
    let tol = rel * rough.abs() / pieces.len() as f64;
    pieces.iter().map(|&(x0, x1)| simpson(f, x0, x1, tol.max(1e-300))).sum()
}

/// `∫_{-α}^{α} dφ / (c + b cos φ)` for `c > |b|`, with `c ± b` given separately.
fn arc(c_minus_b: f64, c_plus_b: f64, alpha: f64) -> f64 {
    let root = (c_minus_b * c_plus_b).sqrt();
    4.0 / root * ((c_minus_b / c_plus_b).sqrt() * (alpha / 2.0).tan()).atan()
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Angles {
    Full,
    /// `|sin θ| ≤ 1/r`.
    Small,
    /// `|sin θ| ≥ 1/r`.
    Large,
}

/// `∫ dθ r²/(ρ² + |1 + a e^{iθ}|²)` over the angle set, `a = ρ·sqrt(r² − ρ²)`.
pub fn theta_integral(r: f64, rho: f64, set: Angles) -> f64 {
    let s = ((r - rho) * (r + rho)).max(0.0).sqrt();
    let a = rho * s;
    let lo = rho * rho + (1.0 - a) * (1.0 - a); // c − 2a
    let hi = rho * rho + (1.0 + a) * (1.0 + a); // c + 2a
    let full = 2.0 * PI / (lo * hi).sqrt();
    let alpha = (1.0 / r).asin();
    // Arc around θ = 0 (cos θ ≈ 1) and around θ = π (cos θ ≈ −1).
    let small = arc(hi, lo, alpha) + arc(lo, hi, alpha);
    r * r
        * match set {
            Angles::Full => full,
            Angles::Small => small,
            Angles::Large => full - small,
        }
}

/// Radius where `|zw| = 1` on `S(r)`, the centre of the peak.
pub fn peak_radius(r: f64) -> f64 {
    ((r * r - (r.powi(4) - 4.0).sqrt()) / 2.0).sqrt()
}

/// `∫ η dV` over `lo ≤ |z| ≤ hi` and the angle set.
pub fn band_integral(r: f64, lo: f64, hi: f64, set: Angles) -> f64 {
    let f = |rho: f64| 2.0 * PI * r * rho * theta_integral(r, rho, set);
    let p = peak_radius(r);
    let breaks = [p, p * (1.0 - 4.0 / (r * r)), p * (1.0 + 4.0 / (r * r)), 1.0 / r, r.sqrt()];
    integrate(&f, lo, hi, &breaks, 1e-9)
}

pub fn i_r(r: f64) -> f64 {
    band_integral(r, 0.0, r, Angles::Full)
}

/// Exact contribution of each region, in the library's reporting order
/// `A, B, C, D-2, D-1, D0, D1, E, F`.
pub fn region_contributions(r: f64, eps: f64) -> Vec<f64> {
    let inner = 1.0 / (2.0 * r);
    let outer = 3.0 / (2.0 * r);
    let cut = r.powf(1.0 - eps);
    let f_start = (r * r - r).sqrt();
    let mut out = vec![
        band_integral(r, 0.0, inner, Angles::Full),
        band_integral(r, inner, outer, Angles::Small),
        band_integral(r, inner, outer, Angles::Large),
    ];
    for g in -2..=1 {
        let lo = outer.max(r.sqrt().powi(g));
        let hi = cut.min(r.sqrt().powi(g + 1)).min(f_start);
        out.push(if hi > lo { band_integral(r, lo, hi, Angles::Full) } else { 0.0 });
    }
    out.push(if f_start > cut { band_integral(r, cut, f_start, Angles::Full) } else { 0.0 });
    out.push(band_integral(r, f_start.max(outer), r, Angles::Full));
    out
}

/// Exact order function of the Hopf map on the given outer grid, using the
/// same trapezoid rules as the pipeline (16 inner shells on `[0, 1)`).
pub fn hopf_t_trapezoid(outer: &[f64], inner_shells: usize) -> Vec<f64> {
    let shell = |t: f64| -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        // ζ = (1 + t²)/(2t²)·η on S(t).
        (1.0 + t * t) / (2.0 * t * t) * i_r(t)
    };
    let top = 2.0 / (PI * PI);
    let nodes: Vec<f64> = (0..inner_shells)
        .map(|k| k as f64 / inner_shells as f64)
        .chain(outer.iter().copied())
        .collect();
    let values: Vec<f64> = nodes.iter().map(|&t| shell(t)).collect();
    let mut a = 0.0;
    let mut t_val = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    let mut out = vec![];
    for k in 0..nodes.len() {
        if k > 0 {
            a += 0.5 * top * (nodes[k] - nodes[k - 1]) * (values[k - 1] + values[k]);
        }
        if k < inner_shells {
            continue;
        }
        let t = nodes[k];
        if let Some((tp, ap)) = prev {
            t_val += 0.5 * (t - tp) * (ap / tp.powi(3) + a / t.powi(3));
        }
        out.push(t_val);
        prev = Some((t, a));
    }
    out
}
