//! Importance sampling of each region of the decomposition, in the
//! coordinates `(|z| or |w|, θ, χ)` where `dV = 2π r u du dθ` after the free
//! angle `χ` is integrated out.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::region::{assigned_region, check_epsilon, Region, RegionSpec};
use super::{eta_at, point_from_moduli};
use crate::error::{Error, Result};
use crate::forms::{geometry_constants, zeta, CPoint, MapSpec, MetricFormSpec, MetricKind};
use crate::rng::RngStream;
use crate::sphere::{
    block_sizes, finite_value, Integrand, ShellEstimate, ShellSampler, StratumEstimate,
    UniformSampler,
};
use crate::stats::{pairwise_reduce, Moments};

pub const MIN_REGION_SAMPLES: usize = 1000;
/// Share of samples drawn from the peak law in the two regions around `(1/r, π)`.
const PEAK_WEIGHT: f64 = 0.5;
/// Radii of the peak law, in units where the peak has width `1/r`.
const PEAK_INNER: f64 = 0.01;
const PEAK_OUTER: f64 = 0.5;
const ZETA_CHECK_SAMPLES: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Modulus {
    Z,
    W,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum ThetaSet {
    Full,
    SmallSin,
    LargeSin,
}

impl ThetaSet {
    fn measure(self, a: f64) -> f64 {
        match self {
            ThetaSet::Full => 2.0 * PI,
            ThetaSet::SmallSin => 4.0 * a,
            ThetaSet::LargeSin => 2.0 * PI - 4.0 * a,
        }
    }

    /// Maps `u ∈ [0, 1)` onto the set, `a = asin(1/r)`.
    fn draw(self, a: f64, u: f64) -> f64 {
        let t = u * self.measure(a);
        match self {
            ThetaSet::Full => t,
            ThetaSet::SmallSin => {
                if t < a {
                    t
                } else if t < 3.0 * a {
                    PI - a + (t - a)
                } else {
                    2.0 * PI - a + (t - 3.0 * a)
                }
            }
            ThetaSet::LargeSin => {
                let arc = PI - 2.0 * a;
                if t < arc {
                    a + t
                } else {
                    PI + a + (t - arc)
                }
            }
        }
    }

    fn contains(self, sin_abs: f64, r: f64) -> bool {
        match self {
            ThetaSet::Full => true,
            ThetaSet::SmallSin => sin_abs <= 1.0 / r,
            ThetaSet::LargeSin => sin_abs >= 1.0 / r,
        }
    }
}

/// Product proposal covering one region: a radial mixture of area-uniform and
/// log-uniform laws in the chosen modulus, uniform `θ` on a sine set, and
/// optionally a polar law centred on the peak.
#[derive(Clone, Copy, Debug)]
struct RegionBox {
    region: Region,
    r: f64,
    modulus: Modulus,
    lo: f64,
    hi: f64,
    area_weight: f64,
    log_lo: f64,
    theta: ThetaSet,
    peak_weight: f64,
}

struct Draw {
    point: CPoint,
    u: f64,
    rho: f64,
    s: f64,
    theta: f64,
    sin_abs: f64,
}

impl RegionBox {
    fn new(spec: RegionSpec) -> Option<Self> {
        let RegionSpec { region, epsilon, r } = spec;
        let inner = 1.0 / (2.0 * r);
        let outer = 3.0 / (2.0 * r);
        let root = r.sqrt();
        let z_box = |lo: f64, hi: f64, theta, peak_weight| RegionBox {
            region,
            r,
            modulus: Modulus::Z,
            lo,
            hi,
            area_weight: 0.0,
            log_lo: lo,
            theta,
            peak_weight,
        };
        let b = match region {
            Region::A => RegionBox {
                area_weight: 1.0,
                ..z_box(0.0, inner, ThetaSet::Full, 0.0)
            },
            Region::B => z_box(inner, outer, ThetaSet::SmallSin, PEAK_WEIGHT),
            Region::C => z_box(inner, outer, ThetaSet::LargeSin, PEAK_WEIGHT),
            Region::D(g) => {
                let g = i32::from(g);
                let lo = outer.max(root.powi(g));
                let hi = r.powf(1.0 - epsilon).min(root.powi(g + 1));
                z_box(lo, hi, ThetaSet::Full, 0.0)
            }
            Region::F => RegionBox {
                modulus: Modulus::W,
                area_weight: 0.5,
                log_lo: 1.0 / r,
                ..z_box(0.0, root, ThetaSet::Full, 0.0)
            },
            Region::E => {
                let cut = r.powf(1.0 - epsilon);
                let hi = ((r - cut) * (r + cut)).max(0.0).sqrt();
                RegionBox {
                    modulus: Modulus::W,
                    area_weight: 0.5,
                    ..z_box(root, hi, ThetaSet::Full, 0.0)
                }
            }
        };
        (b.hi > b.lo).then_some(b)
    }

    fn sine_angle(&self) -> f64 {
        (1.0 / self.r).asin()
    }

    #[cfg(test)]
    fn volume(&self) -> f64 {
        PI * (self.hi * self.hi - self.lo * self.lo) * self.r * self.theta.measure(self.sine_angle())
    }

    fn peak_range(&self) -> (f64, f64) {
        (PEAK_INNER / self.r, PEAK_OUTER)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Draw {
        let r = self.r;
        let (u, theta) = if self.peak_weight > 0.0 && rng.random::<f64>() < self.peak_weight {
            let (d_lo, d_hi) = self.peak_range();
            let d = d_lo * (d_hi / d_lo).powf(rng.random::<f64>());
            let beta = 2.0 * PI * rng.random::<f64>();
            ((1.0 + d * beta.cos()) / r, PI + d * beta.sin())
        } else {
            let theta = self.theta.draw(self.sine_angle(), rng.random::<f64>());
            let u = if rng.random::<f64>() < self.area_weight {
                let (l2, h2) = (self.lo * self.lo, self.hi * self.hi);
                (l2 + rng.random::<f64>() * (h2 - l2)).sqrt()
            } else {
                self.log_lo * (self.hi / self.log_lo).powf(rng.random::<f64>())
            };
            (u.clamp(self.lo, self.hi), theta)
        };
        let other = ((r - u) * (r + u)).max(0.0).sqrt();
        let (rho, s) = match self.modulus {
            Modulus::Z => (u, other),
            Modulus::W => (other, u),
        };
        let chi = 2.0 * PI * rng.random::<f64>();
        Draw {
            point: point_from_moduli(rho, s, chi, theta),
            u,
            rho,
            s,
            theta,
            sin_abs: theta.sin().abs(),
        }
    }

    /// Proposal density per unit `du dθ`.
    fn density(&self, d: &Draw) -> f64 {
        let mut base = 0.0;
        if d.u >= self.lo && d.u <= self.hi && self.theta.contains(d.sin_abs, self.r) {
            let mut radial = 0.0;
            if self.area_weight > 0.0 {
                radial += self.area_weight * 2.0 * d.u / (self.hi * self.hi - self.lo * self.lo);
            }
            if self.area_weight < 1.0 && d.u >= self.log_lo {
                radial += (1.0 - self.area_weight) / (d.u * (self.hi / self.log_lo).ln());
            }
            base = radial / self.theta.measure(self.sine_angle());
        }
        let mut peak = 0.0;
        if self.peak_weight > 0.0 {
            let (d_lo, d_hi) = self.peak_range();
            let dist = (d.u * self.r - 1.0).hypot(d.theta - PI);
            if dist >= d_lo && dist <= d_hi {
                peak = self.r / (2.0 * PI * dist * dist * (d_hi / d_lo).ln());
            }
        }
        (1.0 - self.peak_weight) * base + self.peak_weight * peak
    }
}

/// Integral of an integrand over one region of `S(r)`, together with the
/// region's volume from the same samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionEstimate {
    pub region: Region,
    pub r: f64,
    pub volume: f64,
    pub volume_stderr: f64,
    pub contribution: f64,
    pub stderr: f64,
    pub n_samples: u64,
    /// Set when the region is empty at this radius; the estimate is then zero.
    pub empty: bool,
}

impl RegionEstimate {
    fn empty(region: Region, r: f64) -> Self {
        RegionEstimate {
            region,
            r,
            volume: 0.0,
            volume_stderr: 0.0,
            contribution: 0.0,
            stderr: 0.0,
            n_samples: 0,
            empty: true,
        }
    }

    pub fn to_stratum(&self) -> StratumEstimate {
        StratumEstimate {
            label: self.region.label(),
            volume: self.volume,
            mass: self.contribution,
            variance: self.stderr * self.stderr,
            n_samples: self.n_samples,
            empty: self.empty,
        }
    }
}

fn check_region_args(spec: &RegionSpec) -> Result<()> {
    check_epsilon(spec.epsilon)?;
    if !(spec.r >= 2.0 && spec.r.is_finite()) {
        return Err(Error::invalid(format!(
            "region decomposition needs r ≥ 2, got {}",
            spec.r
        )));
    }
    Ok(())
}

fn sample_box(
    b: &RegionBox,
    epsilon: f64,
    integrand: &Integrand,
    n: usize,
    stream: RngStream,
) -> Result<RegionEstimate> {
    let blocks: Vec<Result<(Moments, Moments)>> = block_sizes(n)
        .map(|(block, len)| {
            let mut rng = stream.split(block).rng();
            let mut vol = Moments::default();
            let mut int = Moments::default();
            for _ in 0..len {
                let d = b.draw(&mut rng);
                let assigned = assigned_region(b.r, d.rho, d.s, d.sin_abs, epsilon).ok_or_else(|| {
                    Error::CoverageViolation {
                        r: b.r,
                        point: d.point.reals(),
                    }
                })?;
                let (wv, wi) = if assigned == b.region {
                    let weight = 2.0 * PI * b.r * d.u / b.density(&d);
                    (weight, weight * finite_value(integrand, &d.point)?)
                } else {
                    (0.0, 0.0)
                };
                vol.push(wv);
                int.push(wi);
            }
            Ok((vol, int))
        })
        .collect();
    let blocks = blocks.into_iter().collect::<Result<Vec<_>>>()?;
    let (vol, int) = pairwise_reduce(
        &blocks,
        (Moments::default(), Moments::default()),
        &|a, b| (a.0.merge(&b.0), a.1.merge(&b.1)),
    );
    Ok(RegionEstimate {
        region: b.region,
        r: b.r,
        volume: vol.mean,
        volume_stderr: vol.variance_of_mean().sqrt(),
        contribution: int.mean,
        stderr: int.variance_of_mean().sqrt(),
        n_samples: int.count,
        empty: false,
    })
}

/// `∫_{region} integrand dV` over the disjoint part of the region assigned by
/// the priority order.
pub fn region_integral(
    integrand: &Integrand,
    spec: RegionSpec,
    n: usize,
    stream: RngStream,
) -> Result<RegionEstimate> {
    check_region_args(&spec)?;
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    match RegionBox::new(spec) {
        Some(b) => sample_box(&b, spec.epsilon, integrand, n, stream),
        None => Ok(RegionEstimate::empty(spec.region, spec.r)),
    }
}

/// `∫_{region} η dV`.
pub fn region_contribution(spec: RegionSpec, n: usize, stream: RngStream) -> Result<RegionEstimate> {
    if n < MIN_REGION_SAMPLES {
        return Err(Error::invalid(format!(
            "region contributions need at least {MIN_REGION_SAMPLES} samples, got {n}"
        )));
    }
    region_integral(&eta_at, spec, n, stream)
}

fn nonempty_regions(r: f64, epsilon: f64) -> Vec<(usize, Region, bool)> {
    Region::ALL
        .into_iter()
        .enumerate()
        .map(|(k, region)| (k, region, RegionBox::new(RegionSpec { region, epsilon, r }).is_some()))
        .collect()
}

/// All nine regions with the budget split equally among the nonempty ones.
fn all_regions(
    integrand: &Integrand,
    r: f64,
    epsilon: f64,
    budget: usize,
    min_each: usize,
    stream: RngStream,
) -> Result<Vec<RegionEstimate>> {
    let regions = nonempty_regions(r, epsilon);
    let live = regions.iter().filter(|x| x.2).count().max(1);
    let each = (budget / live).max(min_each);
    regions
        .into_iter()
        .map(|(k, region, live)| {
            if !live {
                return Ok(RegionEstimate::empty(region, r));
            }
            region_integral(integrand, RegionSpec { region, epsilon, r }, each, stream.split(k as u64))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrEstimate {
    pub r: f64,
    pub epsilon: f64,
    /// `I_r = ∫_{S(r)} η dV`.
    pub value: f64,
    pub stderr: f64,
    pub regions: Vec<RegionEstimate>,
    /// Sum of the region volume estimates; `2π²r³` up to sampling error.
    pub total_volume: f64,
    /// Largest relative deviation of the pulled-back density of the Hopf map
    /// from `(1 + r²)/(2r²)·η` on a check sample.
    pub zeta_residual: f64,
}

pub fn i_r(r: f64, epsilon: f64, budget: usize, stream: RngStream) -> Result<IrEstimate> {
    check_region_args(&RegionSpec {
        region: Region::A,
        epsilon,
        r,
    })?;
    let regions = all_regions(&eta_at, r, epsilon, budget, MIN_REGION_SAMPLES, stream)?;
    let value = regions.iter().map(|e| e.contribution).sum();
    let stderr = regions.iter().map(|e| e.stderr * e.stderr).sum::<f64>().sqrt();
    let total_volume = regions.iter().map(|e| e.volume).sum();
    Ok(IrEstimate {
        r,
        epsilon,
        value,
        stderr,
        regions,
        total_volume,
        zeta_residual: zeta_residual(r, epsilon, stream.split(Region::ALL.len() as u64))?,
    })
}

fn zeta_residual(r: f64, epsilon: f64, stream: RngStream) -> Result<f64> {
    let map = MapSpec::hopf();
    let metric = MetricFormSpec::new(MetricKind::Hopf, 2);
    let factor = (1.0 + r * r) / (2.0 * r * r);
    let mut worst: f64 = 0.0;
    for (k, region, live) in nonempty_regions(r, epsilon) {
        if !live {
            continue;
        }
        let b = RegionBox::new(RegionSpec { region, epsilon, r }).expect("nonempty");
        let mut rng = stream.split(k as u64).rng();
        for _ in 0..ZETA_CHECK_SAMPLES {
            let d = b.draw(&mut rng);
            let z = zeta(&map, &metric, &d.point)?;
            let e = eta_at(&d.point)?;
            worst = worst.max((z - factor * e).abs() / z.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

/// Shell sampler stratified over the region decomposition; falls back to
/// uniform sampling below `r = 2`, where the decomposition is undefined.
#[derive(Clone, Copy, Debug)]
pub struct HopfStratifiedSampler {
    pub epsilon: f64,
}

impl Default for HopfStratifiedSampler {
    fn default() -> Self {
        HopfStratifiedSampler {
            epsilon: super::DEFAULT_EPSILON,
        }
    }
}

impl ShellSampler for HopfStratifiedSampler {
    fn name(&self) -> &str {
        "hopf-stratified"
    }

    fn resolves_hopf_peak(&self) -> bool {
        true
    }

    fn shell(
        &self,
        integrand: &Integrand,
        m: usize,
        r: f64,
        n: usize,
        stream: RngStream,
    ) -> Result<ShellEstimate> {
        if m != 2 {
            return Err(Error::invalid("the region-stratified sampler works on C^2 only"));
        }
        if r < 2.0 {
            return UniformSampler.shell(integrand, m, r, n, stream);
        }
        check_epsilon(self.epsilon)?;
        if n == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        let regions = all_regions(integrand, r, self.epsilon, n, 1, stream)?;
        let area = geometry_constants(2, r).sphere_area;
        let total: f64 = regions.iter().map(|e| e.contribution).sum();
        let var: f64 = regions.iter().map(|e| e.stderr * e.stderr).sum();
        Ok(ShellEstimate {
            r,
            mean: total / area,
            variance_of_mean: var / (area * area),
            n_samples: regions.iter().map(|e| e.n_samples).sum(),
            area,
            strata: Some(regions.iter().map(RegionEstimate::to_stratum).collect()),
        })
    }
}

#[cfg(test)]
fn box_volume(spec: RegionSpec) -> f64 {
    RegionBox::new(spec).map_or(0.0, |b| b.volume())
}

/// `n` proposal draws from the box covering a region.
pub(crate) fn box_draws(spec: RegionSpec, n: usize, stream: RngStream) -> Vec<CPoint> {
    let Some(b) = RegionBox::new(spec) else {
        return vec![];
    };
    let blocks: Vec<Vec<CPoint>> = block_sizes(n)
        .map(|(block, len)| {
            let mut rng = stream.split(block).rng();
            (0..len).map(|_| b.draw(&mut rng).point).collect()
        })
        .collect();
    blocks.into_par_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(region: Region, r: f64) -> RegionSpec {
        RegionSpec {
            region,
            epsilon: 0.1,
            r,
        }
    }

    #[test]
    fn theta_draws_land_in_their_sets() {
        let r: f64 = 30.0;
        let a = (1.0 / r).asin();
        for set in [ThetaSet::SmallSin, ThetaSet::LargeSin, ThetaSet::Full] {
            for k in 0..1000 {
                let t = set.draw(a, k as f64 / 1000.0);
                assert!((0.0..2.0 * PI).contains(&t));
                let s = t.sin().abs();
                match set {
                    ThetaSet::SmallSin => assert!(s <= 1.0 / r + 1e-12),
                    ThetaSet::LargeSin => assert!(s >= 1.0 / r - 1e-12),
                    ThetaSet::Full => {}
                }
            }
        }
    }

    #[test]
    fn draws_lie_on_the_sphere_inside_their_box() {
        let r = 250.0;
        let stream = RngStream::new(5, 3);
        for region in Region::ALL {
            let Some(b) = RegionBox::new(spec(region, r)) else { continue };
            let mut rng = stream.split(1).rng();
            for _ in 0..2000 {
                let d = b.draw(&mut rng);
                assert!((d.point.norm() / r - 1.0).abs() < 1e-12, "{region}");
                assert!(d.u >= b.lo && d.u <= b.hi, "{region}");
                assert!(b.density(&d) > 0.0, "{region}");
            }
        }
    }

    #[test]
    fn constant_integrand_recovers_box_volumes() {
        // A, D and E/F are full boxes; the volume estimator must be near exact.
        let r = 100.0;
        for region in [Region::A, Region::D(0), Region::F, Region::E] {
            let e = region_integral(&|_| Ok(1.0), spec(region, r), 20_000, RngStream::new(1, 3))
                .unwrap();
            let exact = box_volume(spec(region, r));
            assert!(
                (e.volume / exact - 1.0).abs() < 5.0 * e.volume_stderr / exact + 1e-9,
                "{region}: {} vs {exact}",
                e.volume
            );
            assert_eq!(e.volume, e.contribution);
        }
    }

    #[test]
    fn region_volumes_add_up_to_the_sphere() {
        let est = i_r(100.0, 0.1, 90_000, RngStream::new(11, 3)).unwrap();
        let full = 2.0 * PI * PI * 1e6;
        assert!((est.total_volume / full - 1.0).abs() < 0.005);
        assert!(est.zeta_residual < 1e-9, "{}", est.zeta_residual);
    }

    #[test]
    fn small_budget_is_rejected_for_contributions() {
        assert!(region_contribution(spec(Region::A, 10.0), 10, RngStream::new(1, 3)).is_err());
        assert!(region_contribution(spec(Region::A, 1.0), 1000, RngStream::new(1, 3)).is_err());
    }

    #[test]
    fn empty_regions_are_flagged() {
        // At r = 2 the band |w| ∈ [√2, sqrt(4 − 2^1.8)] is empty.
        let e = region_contribution(spec(Region::E, 2.0), 1000, RngStream::new(1, 3)).unwrap();
        assert!(e.empty && e.contribution == 0.0);
    }

    #[test]
    fn stratified_sampler_refuses_other_dimensions() {
        let s = HopfStratifiedSampler::default();
        assert!(s.shell(&|_| Ok(1.0), 3, 10.0, 100, RngStream::new(1, 1)).is_err());
        assert!(s.resolves_hopf_peak());
    }
}
