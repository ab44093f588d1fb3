//! Radial accumulation of shell integrals into `A(t) = ∫_{B(t)} ζ α^m` and the
//! order function `T(r) = ∫_1^r A(t) t^{1−2m} dt`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{geometry_constants, is_hopf_pair, zeta, CPoint, MapSpec, MetricFormSpec};
use crate::rng::RngStream;
use crate::sphere::{Integrand, ShellEstimate, ShellSampler};

pub const DEFAULT_SHELLS_PER_DECADE: usize = 48;
pub const DEFAULT_INNER_SHELLS: usize = 16;
pub const DEFAULT_SAMPLES_PER_SHELL: usize = 200_000;
/// Radius from which uniform sampling of the Hopf integrand is refused.
pub const HOPF_UNIFORM_LIMIT: f64 = 100.0;

/// Radii for the radial quadrature: a linear inner grid on `[0, 1)` and the
/// reported outer grid starting at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    inner: Vec<f64>,
    outer: Vec<f64>,
}

impl RadialGrid {
    /// Geometric grid on `[1, r_max]` with at least `shells_per_decade` nodes per
    /// decade, hitting `r_max` exactly.
    pub fn geometric(r_max: f64, shells_per_decade: usize) -> Result<Self> {
        if !(r_max > 1.0 && r_max.is_finite()) {
            return Err(Error::invalid(format!("r_max must exceed 1, got {r_max}")));
        }
        if shells_per_decade == 0 {
            return Err(Error::invalid("shells_per_decade must be positive"));
        }
        let steps = ((shells_per_decade as f64) * r_max.log10() - 1e-9).ceil().max(1.0) as usize;
        let mut outer: Vec<f64> = (0..=steps)
            .map(|k| r_max.powf(k as f64 / steps as f64))
            .collect();
        outer[0] = 1.0;
        outer[steps] = r_max;
        Self::from_outer(outer)
    }

    pub fn from_outer(outer: Vec<f64>) -> Result<Self> {
        if outer.len() < 2 || outer[0] != 1.0 {
            return Err(Error::invalid("outer grid must start at r = 1 with at least two radii"));
        }
        if outer.windows(2).any(|w| !(w[1] > w[0])) || outer.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("outer grid must be strictly increasing and finite"));
        }
        Ok(Self {
            inner: (0..DEFAULT_INNER_SHELLS)
                .map(|k| k as f64 / DEFAULT_INNER_SHELLS as f64)
                .collect(),
            outer,
        })
    }

    pub fn outer(&self) -> &[f64] {
        &self.outer
    }

    pub fn r_max(&self) -> f64 {
        *self.outer.last().unwrap()
    }

    fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.inner.iter().chain(&self.outer).copied()
    }
}

/// Sampled order function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub grid: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    /// Standard error of `T`.
    pub stderr: Vec<f64>,
    pub n_samples: Vec<u64>,
}

pub const GROWTH_CSV_HEADER: &str = "r,A,T,stderr_T,n_samples";

impl GrowthSeries {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Rows with `lo ≤ r ≤ hi`.
    pub fn restrict(&self, lo: f64, hi: f64) -> GrowthSeries {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.grid[i] >= lo && self.grid[i] <= hi)
            .collect();
        GrowthSeries {
            grid: keep.iter().map(|&i| self.grid[i]).collect(),
            a: keep.iter().map(|&i| self.a[i]).collect(),
            t: keep.iter().map(|&i| self.t[i]).collect(),
            stderr: keep.iter().map(|&i| self.stderr[i]).collect(),
            n_samples: keep.iter().map(|&i| self.n_samples[i]).collect(),
        }
    }

    /// CSV with optional leading `# ` metadata lines. Floats use Rust's
    /// shortest round-trip formatting.
    pub fn to_csv(&self, metadata: &[String]) -> String {
        let mut out = String::new();
        for line in metadata {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(GROWTH_CSV_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.grid[i], self.a[i], self.t[i], self.stderr[i], self.n_samples[i]
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        if lines.next() != Some(GROWTH_CSV_HEADER) {
            return Err(Error::invalid("missing growth series CSV header"));
        }
        let mut s = GrowthSeries {
            grid: vec![],
            a: vec![],
            t: vec![],
            stderr: vec![],
            n_samples: vec![],
        };
        for (k, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            let bad = || Error::invalid(format!("bad growth CSV row {}: {line}", k + 1));
            if cols.len() != 5 {
                return Err(bad());
            }
            let f = |i: usize| cols[i].parse::<f64>().map_err(|_| bad());
            s.grid.push(f(0)?);
            s.a.push(f(1)?);
            s.t.push(f(2)?);
            s.stderr.push(f(3)?);
            s.n_samples.push(cols[4].parse().map_err(|_| bad())?);
        }
        Ok(s)
    }
}

/// Computes `A` and `T` on the grid from independent per-shell estimates of
/// `∫_{S(t)} g dV` at every node (inner nodes first, then outer).
pub fn accumulate(m: usize, grid: &RadialGrid, shells: &[ShellEstimate]) -> GrowthSeries {
    let nodes: Vec<f64> = grid.nodes().collect();
    assert_eq!(nodes.len(), shells.len());
    let top = geometry_constants(m, 1.0).top_factor;
    let inner = grid.inner.len();
    let n = nodes.len();
    let var: Vec<f64> = shells.iter().map(ShellEstimate::integral_variance).collect();
    let value: Vec<f64> = shells.iter().map(ShellEstimate::integral).collect();

    // A and T are linear in the shell integrals; carry the coefficient vectors so
    // the variance follows from independence across shells.
    let mut a_coef = vec![0.0; n];
    let mut a_val = 0.0;
    let mut t_coef = vec![0.0; n];
    let mut t_val = 0.0;
    let pow = 2 * m as i32 - 1;
    let mut prev: Option<(f64, f64, Vec<f64>)> = None;

    let mut out = GrowthSeries {
        grid: grid.outer.clone(),
        a: vec![],
        t: vec![],
        stderr: vec![],
        n_samples: vec![],
    };
    for k in 0..n {
        if k > 0 {
            let h = nodes[k] - nodes[k - 1];
            let w = 0.5 * top * h;
            a_coef[k - 1] += w;
            a_coef[k] += w;
            a_val += w * (value[k - 1] + value[k]);
        }
        if k < inner {
            continue;
        }
        let t = nodes[k];
        let scale = t.powi(pow);
        if let Some((t_prev, a_prev, coef_prev)) = prev.take() {
            let h = t - t_prev;
            let prev_scale = t_prev.powi(pow);
            t_val += 0.5 * h * (a_prev / prev_scale + a_val / scale);
            for i in 0..n {
                t_coef[i] += 0.5 * h * (coef_prev[i] / prev_scale + a_coef[i] / scale);
            }
        }
        let t_var: f64 = t_coef.iter().zip(&var).map(|(c, v)| c * c * v).sum();
        out.a.push(a_val);
        out.t.push(t_val);
        out.stderr.push(t_var.sqrt());
        out.n_samples.push(shells[k].n_samples);
        prev = Some((t, a_val, a_coef.clone()));
    }
    out
}

/// Order function of `map` against `metric` on `grid`.
pub fn growth_series(
    map: &MapSpec,
    metric: &MetricFormSpec,
    grid: &RadialGrid,
    sampler: &dyn ShellSampler,
    n_per_shell: usize,
    stream: RngStream,
) -> Result<GrowthSeries> {
    if is_hopf_pair(map, metric)
        && !sampler.resolves_hopf_peak()
        && grid.r_max() >= HOPF_UNIFORM_LIMIT
    {
        return Err(Error::SamplerInvalid(format!(
            "sampler '{}' cannot resolve the Hopf integrand up to r = {}; use the region-stratified sampler",
            sampler.name(),
            grid.r_max()
        )));
    }
    let m = map.source_dim();
    let integrand = |p: &CPoint| zeta(map, metric, p);
    shell_series(&integrand, m, grid, sampler, n_per_shell, stream)
}

/// `A` and `T` for an arbitrary nonnegative integrand in place of `ζ`.
pub fn shell_series(
    integrand: &Integrand,
    m: usize,
    grid: &RadialGrid,
    sampler: &dyn ShellSampler,
    n_per_shell: usize,
    stream: RngStream,
) -> Result<GrowthSeries> {
    let nodes: Vec<f64> = grid.nodes().collect();
    let shells: Vec<Result<ShellEstimate>> = nodes
        .par_iter()
        .enumerate()
        .map(|(k, &r)| {
            if r == 0.0 {
                return Ok(ShellEstimate {
                    r,
                    mean: 0.0,
                    variance_of_mean: 0.0,
                    n_samples: 0,
                    area: 0.0,
                    strata: None,
                });
            }
            sampler
                .shell(integrand, m, r, n_per_shell, stream.split(k as u64))
                .map_err(|e| e.at_shell(r))
        })
        .collect();
    let shells = shells.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(accumulate(m, grid, &shells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::builtin;
    use crate::sphere::UniformSampler;

    #[test]
    fn geometric_grid_shape() {
        let g = RadialGrid::geometric(1000.0, 48).unwrap();
        assert_eq!(g.outer().len(), 145);
        assert_eq!(g.outer()[0], 1.0);
        assert_eq!(g.r_max(), 1000.0);
        assert!(g.outer().windows(2).all(|w| w[1] > w[0]));
        assert!(RadialGrid::geometric(1.0, 48).is_err());
        assert!(RadialGrid::from_outer(vec![2.0, 3.0]).is_err());
    }

    #[test]
    fn flat_identity_has_exact_mass_and_zero_error() {
        let (map, metric) = builtin("torus-cover").unwrap();
        let grid = RadialGrid::geometric(1000.0, 48).unwrap();
        let s = growth_series(&map, &metric, &grid, &UniformSampler, 64, RngStream::new(1, 2)).unwrap();
        for i in 0..s.len() {
            let r = s.grid[i];
            let ratio = s.a[i] / r.powi(4);
            assert!((0.995..=1.005).contains(&ratio), "A({r})/r^4 = {ratio}");
            assert_eq!(s.stderr[i], 0.0);
            let exact = (r * r - 1.0) / 2.0;
            if i == 0 {
                assert_eq!(s.t[0], 0.0);
            } else {
                assert!((s.t[i] / exact - 1.0).abs() < 0.01, "T({r})");
            }
        }
    }

    #[test]
    fn hopf_pair_refuses_uniform_sampler_at_large_radius() {
        let (map, metric) = builtin("hopf").unwrap();
        let grid = RadialGrid::geometric(100.0, 4).unwrap();
        let err = growth_series(&map, &metric, &grid, &UniformSampler, 16, RngStream::new(1, 2))
            .unwrap_err();
        assert!(matches!(err, Error::SamplerInvalid(_)));
        // Small radii are fine.
        let grid = RadialGrid::geometric(10.0, 4).unwrap();
        assert!(growth_series(&map, &metric, &grid, &UniformSampler, 16, RngStream::new(1, 2)).is_ok());
    }

    #[test]
    fn shell_failures_carry_the_radius() {
        // The identity map pulled back against the Hopf metric hits the origin
        // only at p = 0, which is never sampled; use an always-failing sampler.
        struct Failing;
        impl ShellSampler for Failing {
            fn name(&self) -> &str {
                "failing"
            }
            fn shell(
                &self,
                _: &crate::sphere::Integrand,
                _: usize,
                r: f64,
                _: usize,
                _: RngStream,
            ) -> Result<ShellEstimate> {
                if r > 2.0 {
                    Err(Error::invalid("boom"))
                } else {
                    Ok(ShellEstimate {
                        r,
                        mean: 1.0,
                        variance_of_mean: 0.0,
                        n_samples: 1,
                        area: geometry_constants(2, r).sphere_area,
                        strata: None,
                    })
                }
            }
        }
        let (map, metric) = builtin("torus-cover").unwrap();
        let grid = RadialGrid::geometric(10.0, 4).unwrap();
        let err = growth_series(&map, &metric, &grid, &Failing, 1, RngStream::new(1, 2)).unwrap_err();
        match err {
            Error::Shell { r, .. } => assert!(r > 2.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = GrowthSeries {
            grid: vec![1.0, 1.0491397291363, 2.5],
            a: vec![1.0000000000000002, 1.2, 39.0625],
            t: vec![0.0, 0.05033, std::f64::consts::PI],
            stderr: vec![0.0, 1e-300, 0.125],
            n_samples: vec![200_000, 200_000, 7],
        };
        let text = s.to_csv(&["config: {}".to_string()]);
        assert!(text.starts_with("# config: {}\nr,A,T,stderr_T,n_samples\n"));
        assert_eq!(GrowthSeries::from_csv(&text).unwrap(), s);
    }
}
