//! The Hopf-surface map `(z, w) ↦ (z, 1 + zw)`: its integrand on spheres, the
//! volume-preserving `(z, ψ)` parametrisation of `S(r)`, the nine-region
//! decomposition and the region-stratified sampler built on it.

mod arith;
mod region;
mod report;
mod sampler;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::CPoint;
use crate::quad;
use crate::rng::RngStream;
use crate::sphere::sample_sphere;
use rayon::prelude::*;

pub use arith::{arith_suite, ArithCheck, ArithReport, LARGE_R};
pub use region::{classify_region, Classification, Region, RegionSpec};
pub use report::{
    hopf_report, slope_limit, BoundCheck, HopfReport, IrRow, JrRow, RegionRow, C_BAND_LIMIT,
    IR_BAND_LIMIT, J_BAND_LIMIT, REGION_CSV_HEADER,
};
pub use sampler::{
    i_r, region_contribution, region_integral, HopfStratifiedSampler, IrEstimate, RegionEstimate,
    MIN_REGION_SAMPLES,
};

pub const DEFAULT_EPSILON: f64 = 0.1;

/// `|z|² + |1 + zw|²`.
pub fn phi(z: Complex64, w: Complex64) -> f64 {
    z.norm_sqr() + (1.0 + z * w).norm_sqr()
}

/// `r² / φ(z, w)` with `r = ‖(z, w)‖`.
pub fn eta(z: Complex64, w: Complex64) -> Result<f64> {
    let r2 = z.norm_sqr() + w.norm_sqr();
    if r2 == 0.0 {
        return Err(Error::Domain {
            what: "eta at the origin".into(),
            point: vec![0.0; 4],
        });
    }
    Ok(r2 / phi(z, w))
}

pub fn eta_at(p: &CPoint) -> Result<f64> {
    let c = two_coords(p)?;
    eta(c.0, c.1)
}

pub(crate) fn two_coords(p: &CPoint) -> Result<(Complex64, Complex64)> {
    match p.coords() {
        [z, w] => Ok((*z, *w)),
        _ => Err(Error::invalid("Hopf quantities live on C^2")),
    }
}

/// `θ = arg(zw) ∈ [0, 2π)`, with `θ = 0` on the fibres `z = 0` or `w = 0`.
pub fn theta(z: Complex64, w: Complex64) -> f64 {
    let zw = z * w;
    if zw == Complex64::new(0.0, 0.0) {
        return 0.0;
    }
    let a = zw.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// `|sin θ|` computed without the angle.
pub fn abs_sin_theta(z: Complex64, w: Complex64) -> f64 {
    let zw = z * w;
    let n = zw.norm();
    if n == 0.0 {
        0.0
    } else {
        (zw.im / n).abs()
    }
}

/// Maps `(z, ψ)` with `|z| ≤ r`, `ψ ∈ [0, 2πr)` to the point of `S(r)` with
/// `|w| = sqrt(r² − |z|²)` and `arg(zw) = ψ/r`. Lebesgue measure on the box
/// pushes forward to the euclidean volume on `S(r)`.
pub fn sphere_param(z: Complex64, psi: f64, r: f64) -> Result<CPoint> {
    let rho = z.norm();
    if !(r > 0.0) || rho > r {
        return Err(Error::Domain {
            what: format!("sphere_param needs |z| ≤ r = {r}"),
            point: vec![z.re, z.im, psi, r],
        });
    }
    let s = ((r - rho) * (r + rho)).max(0.0).sqrt();
    let chi = if rho == 0.0 { 0.0 } else { z.arg() };
    Ok(point_from_moduli(rho, s, chi, psi / r))
}

/// Inverse of [`sphere_param`]: `(z, r·θ, r)`.
pub fn sphere_unparam(p: &CPoint) -> Result<(Complex64, f64, f64)> {
    let (z, w) = two_coords(p)?;
    let r = p.norm();
    Ok((z, r * theta(z, w), r))
}

/// `z = ρ e^{iχ}`, `w = s e^{i(θ−χ)}` so that `arg(zw) = θ`.
pub(crate) fn point_from_moduli(rho: f64, s: f64, chi: f64, theta: f64) -> CPoint {
    CPoint::pair(
        Complex64::from_polar(rho, chi),
        Complex64::from_polar(s, theta - chi),
    )
}

/// `Ω_{K,λ,μ} = {(z, w) ∈ S(r) : |z| ≤ K r^λ, |sin θ| ≤ r^{−μ}}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OmegaSpec {
    pub k: f64,
    pub lambda: f64,
    pub mu: f64,
    pub r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OmegaVolume {
    /// `2K²π² r^{2λ+1−μ}`.
    pub bound: f64,
    /// Exact volume of the image box: disc area times the ψ-measure.
    pub measured: f64,
}

/// Lebesgue measure of `{θ ∈ [0, 2π) : |sin θ| ≤ c}`.
pub fn small_sine_measure(c: f64) -> f64 {
    4.0 * c.clamp(0.0, 1.0).asin()
}

impl OmegaSpec {
    pub fn contains(&self, p: &CPoint) -> Result<bool> {
        let (z, w) = two_coords(p)?;
        Ok(z.norm() <= self.k * self.r.powf(self.lambda)
            && abs_sin_theta(z, w) <= self.r.powf(-self.mu))
    }
}

pub fn omega_volume(spec: OmegaSpec) -> Result<OmegaVolume> {
    let OmegaSpec { k, lambda, mu, r } = spec;
    if !(r >= 1.0) {
        return Err(Error::Domain {
            what: "omega_volume needs r ≥ 1".into(),
            point: vec![r],
        });
    }
    if !(k > 0.0) || !(mu >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("omega needs K > 0, μ ≥ 0 and finite λ"));
    }
    let radius = (k * r.powf(lambda)).min(r);
    Ok(OmegaVolume {
        bound: 2.0 * k * k * PI * PI * r.powf(2.0 * lambda + 1.0 - mu),
        measured: PI * radius * radius * r * small_sine_measure(r.powf(-mu)),
    })
}

/// `J_r = ∫ 2r²/sin²(ψ/r) dψ` over `1 < ψ < 2πr`, `|sin(ψ/r)| > 1/r`.
pub fn j_r(r: f64) -> Result<f64> {
    if !(r >= 2.0) {
        return Err(Error::invalid(format!("J_r needs r ≥ 2, got {r}")));
    }
    let a = (1.0 / r).asin();
    let integrand = |psi: f64| {
        let s = (psi / r).sin();
        2.0 * r * r / (s * s)
    };
    // `a·r > 1`, so the constraint ψ > 1 is implied on both arcs.
    let arcs = [(r * a, r * (PI - a)), (r * (PI + a), r * (2.0 * PI - a))];
    let mut total = 0.0;
    for (lo, hi) in arcs {
        let mid = 0.5 * (lo + hi);
        let q = quad::integrate(integrand, lo.max(1.0), hi, &[mid], 1e-10, 0.0, 20_000);
        if !q.converged {
            return Err(Error::invalid(format!("J_r quadrature did not converge at r = {r}")));
        }
        total += q.value;
    }
    Ok(total)
}

/// Classifies `n` uniform points of `S(r)`; fails on the first uncovered one.
pub fn coverage_check(r: f64, epsilon: f64, n: usize, stream: RngStream) -> Result<u64> {
    let pts = sample_sphere(2, r, n, stream)?;
    pts.par_iter()
        .map(|p| classify_region(p, epsilon).map(|_| ()))
        .collect::<Result<Vec<()>>>()?;
    Ok(pts.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn phi_and_eta_reference_values() {
        assert_eq!(phi(c(1.0, 0.0), c(0.0, 0.0)), 2.0);
        assert_eq!(phi(c(1.0, 0.0), c(-1.0, 0.0)), 1.0);
        assert_eq!(phi(c(0.0, 0.0), c(3.0, -4.0)), 1.0);
        assert_eq!(eta(c(1.0, 0.0), c(0.0, 0.0)).unwrap(), 0.5);
        assert_eq!(eta(c(1.0, 0.0), c(-1.0, 0.0)).unwrap(), 2.0);
        assert_eq!(eta(c(0.0, 0.0), c(5.0, 0.0)).unwrap(), 25.0);
        assert!(eta(c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn param_edge_cases() {
        let r = 7.0;
        let p = sphere_param(c(0.0, 7.0), 3.0, r).unwrap();
        assert_eq!(p.coords()[1], c(0.0, 0.0));
        assert!(sphere_param(c(7.5, 0.0), 1.0, r).is_err());
        let p = sphere_param(c(0.0, 0.0), 2.0, r).unwrap();
        assert!((p.norm() - r).abs() < 1e-12);
    }

    #[test]
    fn param_round_trip() {
        let r = 12.5;
        for (z, psi) in [(c(3.0, -4.0), 5.0), (c(-0.1, 0.2), 70.0), (c(9.0, 8.0), 0.3)] {
            let p = sphere_param(z, psi, r).unwrap();
            assert!((p.norm() / r - 1.0).abs() < 1e-12);
            let (z2, psi2, r2) = sphere_unparam(&p).unwrap();
            assert!((z2 - z).norm() < 1e-10);
            assert!((psi2 - psi).abs() < 1e-10);
            assert!((r2 - r).abs() < 1e-10);
        }
    }

    #[test]
    fn omega_volume_examples() {
        for r in [1.0, 10.0, 1000.0] {
            let v = omega_volume(OmegaSpec { k: 1.0, lambda: 1.0, mu: 0.0, r }).unwrap();
            let full = 2.0 * PI * PI * r * r * r;
            assert!((v.measured / full - 1.0).abs() < 1e-12);
            assert!((v.bound / full - 1.0).abs() < 1e-12);
        }
        let v = omega_volume(OmegaSpec { k: 1.5, lambda: -1.0, mu: 1.0, r: 10.0 }).unwrap();
        assert!((v.bound - 0.4441).abs() < 1e-4);
        assert!(v.measured <= v.bound);
        assert!(omega_volume(OmegaSpec { k: 1.0, lambda: 0.0, mu: 0.0, r: 0.5 }).is_err());
    }

    #[test]
    fn sine_bound_boundary_case() {
        assert!((small_sine_measure(1.0) - 2.0 * PI).abs() < 1e-15);
        for c in [1e-6, 0.01, 0.3, 0.9] {
            assert!(small_sine_measure(c) <= 2.0 * PI * c);
        }
    }

    #[test]
    fn j_r_matches_cotangent_closed_form() {
        for r in [2.0, 100.0, 10f64.powf(2.5), 1000.0] {
            let exact = 8.0 * r.powi(3) * (r * r - 1.0).sqrt();
            let got = j_r(r).unwrap();
            assert!(got > 0.0);
            assert!((got / exact - 1.0).abs() < 1e-6, "r = {r}: {got} vs {exact}");
        }
        assert!(j_r(1.5).is_err());
    }

    #[test]
    fn j_r_integrand_is_bounded_at_the_constraint() {
        let r: f64 = 100.0;
        let psi = r * (1.0 / r).asin();
        let v = 2.0 * r * r / (psi / r).sin().powi(2);
        assert!(v.is_finite() && v <= 2.0 * r.powi(4) * (1.0 + 1e-12));
    }
}
