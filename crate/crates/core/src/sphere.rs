//! Uniform sampling on spheres `S(r) ⊂ C^m` and Monte Carlo shell averages.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{geometry_constants, CPoint, Coords};
use crate::rng::RngStream;
use crate::stats::{pairwise_reduce, Moments};

use num_complex::Complex64;

/// Samples per independently seeded block.
pub const BLOCK_SIZE: usize = 4096;

pub type Integrand<'a> = dyn Fn(&CPoint) -> Result<f64> + Sync + 'a;

/// Per-stratum part of a stratified shell estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StratumEstimate {
    pub label: String,
    /// Euclidean volume of the stratum.
    pub volume: f64,
    /// Estimated integral of the integrand over the stratum.
    pub mass: f64,
    pub variance: f64,
    pub n_samples: u64,
    /// Set when the stratum is empty at this radius.
    pub empty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellEstimate {
    pub r: f64,
    /// Surface average of the integrand over `S(r)`.
    pub mean: f64,
    pub variance_of_mean: f64,
    pub n_samples: u64,
    /// Euclidean volume of `S(r)`.
    pub area: f64,
    pub strata: Option<Vec<StratumEstimate>>,
}

impl ShellEstimate {
    pub fn integral(&self) -> f64 {
        self.mean * self.area
    }

    pub fn integral_variance(&self) -> f64 {
        self.variance_of_mean * self.area * self.area
    }

    pub fn stderr(&self) -> f64 {
        self.variance_of_mean.sqrt()
    }
}

/// A way of estimating `∫_{S(r)} g dV`.
pub trait ShellSampler: Sync {
    fn name(&self) -> &str;

    /// Whether the sampler resolves the `r⁴` peak of the Hopf pullback density.
    fn resolves_hopf_peak(&self) -> bool {
        false
    }

    fn shell(
        &self,
        integrand: &Integrand,
        m: usize,
        r: f64,
        n: usize,
        stream: RngStream,
    ) -> Result<ShellEstimate>;
}

/// Plain uniform sampling on the sphere.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformSampler;

impl ShellSampler for UniformSampler {
    fn name(&self) -> &str {
        "uniform"
    }

    fn shell(
        &self,
        integrand: &Integrand,
        m: usize,
        r: f64,
        n: usize,
        stream: RngStream,
    ) -> Result<ShellEstimate> {
        shell_mean(integrand, m, r, n, stream)
    }
}

pub(crate) fn uniform_point<R: Rng + ?Sized>(m: usize, r: f64, rng: &mut R) -> CPoint {
    loop {
        let coords: Coords = (0..m)
            .map(|_| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
            .collect();
        let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            let s = r / norm;
            return CPoint::from_coords_unchecked(coords.into_iter().map(|c| c * s).collect());
        }
    }
}

fn check_shell_args(m: usize, r: f64, n: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive, got {r}")));
    }
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    Ok(())
}

pub(crate) fn block_sizes(n: usize) -> impl IndexedParallelIterator<Item = (u64, usize)> {
    let blocks = n.div_ceil(BLOCK_SIZE);
    (0..blocks)
        .into_par_iter()
        .map(move |b| (b as u64, BLOCK_SIZE.min(n - b * BLOCK_SIZE)))
}

/// `n` points uniformly distributed on `S(r) ⊂ C^m`.
pub fn sample_sphere(m: usize, r: f64, n: usize, stream: RngStream) -> Result<Vec<CPoint>> {
    check_shell_args(m, r, n)?;
    let blocks: Vec<Vec<CPoint>> = block_sizes(n)
        .map(|(b, len)| {
            let mut rng = stream.split(b).rng();
            (0..len).map(|_| uniform_point(m, r, &mut rng)).collect()
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}

/// Evaluates `integrand` at a point, turning non-finite values into errors.
pub(crate) fn finite_value(integrand: &Integrand, p: &CPoint) -> Result<f64> {
    let v = integrand(p)?;
    if !v.is_finite() {
        return Err(Error::NonFinite {
            value: v,
            point: p.reals(),
        });
    }
    Ok(v)
}

/// Reduces per-block results in block order, surfacing the first error.
pub(crate) fn reduce_blocks(blocks: Vec<Result<Moments>>) -> Result<Moments> {
    let blocks = blocks.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(pairwise_reduce(&blocks, Moments::default(), &|a, b| a.merge(b)))
}

/// Monte Carlo surface average of `integrand` over `S(r)` from uniform samples.
pub fn shell_mean(
    integrand: &Integrand,
    m: usize,
    r: f64,
    n: usize,
    stream: RngStream,
) -> Result<ShellEstimate> {
    check_shell_args(m, r, n)?;
    let blocks: Vec<Result<Moments>> = block_sizes(n)
        .map(|(b, len)| {
            let mut rng = stream.split(b).rng();
            let mut acc = Moments::default();
            for _ in 0..len {
                let p = uniform_point(m, r, &mut rng);
                acc.push(finite_value(integrand, &p)?);
            }
            Ok(acc)
        })
        .collect();
    let total = reduce_blocks(blocks)?;
    Ok(ShellEstimate {
        r,
        mean: total.mean,
        variance_of_mean: total.variance_of_mean(),
        n_samples: total.count,
        area: geometry_constants(m, r).sphere_area,
        strata: None,
    })
}

/// Hit-or-miss estimate of the euclidean volume of `S(r) ⊂ C^m`: the ball
/// volume from points uniform in the enclosing cube, times `2m/r`. Returns
/// `(area, stderr)`.
pub fn hit_or_miss_area(m: usize, r: f64, n: usize, stream: RngStream) -> Result<(f64, f64)> {
    check_shell_args(m, r, n)?;
    let hits: Vec<u64> = block_sizes(n)
        .map(|(b, len)| {
            let mut rng = stream.split(b).rng();
            (0..len)
                .filter(|_| {
                    (0..2 * m)
                        .map(|_| (2.0 * rng.random::<f64>() - 1.0).powi(2))
                        .sum::<f64>()
                        <= 1.0
                })
                .count() as u64
        })
        .collect();
    let frac = hits.iter().sum::<u64>() as f64 / n as f64;
    let cube = (2.0 * r).powi(2 * m as i32);
    let scale = cube * 2.0 * m as f64 / r;
    Ok((frac * scale, (frac * (1.0 - frac) / n as f64).sqrt() * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn points_lie_on_the_sphere_and_are_reproducible() {
        let s = RngStream::new(42, 1);
        let pts = sample_sphere(3, 5.0, 10_000, s).unwrap();
        assert_eq!(pts.len(), 10_000);
        assert!(pts.iter().all(|p| (p.norm() / 5.0 - 1.0).abs() < 1e-12));
        let again = sample_sphere(3, 5.0, 10_000, s).unwrap();
        let bits = |v: &[CPoint]| -> Vec<u64> {
            v.iter().flat_map(|p| p.reals()).map(f64::to_bits).collect()
        };
        assert_eq!(bits(&pts), bits(&again));
    }

    #[test]
    fn coordinates_average_to_zero() {
        let (r, n) = (5.0, 100_000);
        let pts = sample_sphere(2, r, n, RngStream::new(42, 1)).unwrap();
        // Each real coordinate has variance r²/4 on S³(r).
        let sigma = r / 2.0 / (n as f64).sqrt();
        for k in 0..4 {
            let mean = pts.iter().map(|p| p.reals()[k]).sum::<f64>() / n as f64;
            assert!(mean.abs() < 3.0 * sigma, "coordinate {k}: {mean}");
        }
    }

    #[test]
    fn first_coordinate_second_moment_is_half() {
        let pts = sample_sphere(2, 1.0, 1_000_000, RngStream::new(9, 1)).unwrap();
        let mean = pts.iter().map(|p| p.coords()[0].norm_sqr()).sum::<f64>() / 1e6;
        assert!((mean - 0.5).abs() < 1e-3, "{mean}");
    }

    #[test]
    fn constant_integrand_is_exact() {
        let est = shell_mean(&|_| Ok(1.0), 2, 3.0, 5000, RngStream::new(1, 1)).unwrap();
        assert_eq!(est.variance_of_mean, 0.0);
        assert!((est.integral() - 2.0 * PI * PI * 27.0).abs() < 1e-9);
    }

    #[test]
    fn odd_integrand_averages_to_zero() {
        let est = shell_mean(
            &|p| Ok(p.coords()[0].re),
            2,
            7.0,
            200_000,
            RngStream::new(3, 1),
        )
        .unwrap();
        assert!(est.mean.abs() < 4.0 * est.stderr());
    }

    #[test]
    fn non_finite_value_reports_the_point() {
        let err = shell_mean(&|_| Ok(f64::NAN), 2, 1.0, 10, RngStream::new(1, 1)).unwrap_err();
        match err {
            Error::NonFinite { point, .. } => assert_eq!(point.len(), 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hit_or_miss_area_is_close() {
        let (a, se) = hit_or_miss_area(2, 3.0, 400_000, RngStream::new(5, 6)).unwrap();
        let exact = 2.0 * PI * PI * 27.0;
        assert!((a - exact).abs() < 4.0 * se, "{a} ± {se} vs {exact}");
    }

    #[test]
    fn invalid_arguments() {
        assert!(sample_sphere(2, 0.0, 10, RngStream::new(1, 1)).is_err());
        assert!(sample_sphere(2, 1.0, 0, RngStream::new(1, 1)).is_err());
    }
}
