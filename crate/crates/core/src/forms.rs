//! Points of C^m, polynomial maps with exact Jacobians, hermitian metric forms
//! and the pullback density `zeta`.
//!
//! Every (1,1)-form is stored through its coefficient matrix `H` under the
//! convention `(i/2π) Σ H_{ab̄} dx_a ∧ dx̄_b`. With this normalisation the flat
//! form `dd^c‖z‖²` has `H = I`, `α^m = (m!/π^m)·Lebesgue`, and the α^m-mass of
//! the ball `B(r)` is exactly `r^{2m}`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Below this norm a homogeneous representative counts as the origin.
pub const ORIGIN_CUTOFF: f64 = 1e-100;

pub type Coords = SmallVec<[Complex64; 4]>;

/// A point of C^m.
#[derive(Clone, PartialEq)]
pub struct CPoint {
    coords: Coords,
}

impl CPoint {
    pub fn new(coords: impl IntoIterator<Item = Complex64>) -> Result<Self> {
        let coords: Coords = coords.into_iter().collect();
        if coords.is_empty() {
            return Err(Error::invalid("a point needs at least one coordinate"));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(Self { coords })
    }

    /// Builds a point from `2m` reals laid out as `(re_1, im_1, re_2, im_2, ...)`.
    pub fn from_reals(reals: &[f64]) -> Result<Self> {
        if reals.len() % 2 != 0 {
            return Err(Error::invalid("real coordinate count must be even"));
        }
        Self::new(
            reals
                .chunks_exact(2)
                .map(|pair| Complex64::new(pair[0], pair[1])),
        )
    }

    /// Two-variable shorthand used throughout the Hopf code.
    pub fn pair(z: Complex64, w: Complex64) -> Self {
        Self {
            coords: SmallVec::from_slice(&[z, w]),
        }
    }

    pub(crate) fn from_coords_unchecked(coords: Coords) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn reals(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Euclidean norm, rescaled so that large coordinates do not overflow.
    pub fn norm(&self) -> f64 {
        let scale = self
            .coords
            .iter()
            .map(|c| c.re.abs().max(c.im.abs()))
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let s: f64 = self
            .coords
            .iter()
            .map(|c| (c / scale).norm_sqr())
            .sum();
        scale * s.sqrt()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }
}

impl fmt::Debug for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords.iter()).finish()
    }
}

/// Dense complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }
}

/// Coefficient matrix of a (1,1)-form at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn scaled_identity(n: usize, scale: f64) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(scale, 0.0));
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.0.get(a, b)
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Largest entrywise `|H_ab - conj(H_ba)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                worst = worst.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        worst
    }

    /// `Σ_ab H_ab · u_a · conj(v_b)`, the form evaluated on `(u, v̄)`.
    pub fn pair(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                acc += self.get(a, b) * u[a] * v[b].conj();
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub exp: SmallVec<[u32; 4]>,
    pub coeff: Complex64,
}

impl Monomial {
    fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.exp
            .iter()
            .zip(z)
            .fold(self.coeff, |acc, (&e, &zj)| acc * zj.powu(e))
    }
}

/// A polynomial in `m` complex variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    m: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(m: usize, terms: Vec<Monomial>) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("polynomial needs at least one variable"));
        }
        for t in &terms {
            if t.exp.len() != m {
                return Err(Error::invalid(format!(
                    "exponent {:?} has wrong length (expected {m})",
                    t.exp
                )));
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::invalid("coefficients must be finite"));
            }
        }
        Ok(Self { m, terms })
    }

    /// Convenience constructor from `(exponents, coefficient)` pairs.
    pub fn from_terms(m: usize, terms: &[(&[u32], Complex64)]) -> Result<Self> {
        Self::new(
            m,
            terms
                .iter()
                .map(|(e, c)| Monomial {
                    exp: SmallVec::from_slice(e),
                    coeff: *c,
                })
                .collect(),
        )
    }

    pub fn constant(m: usize, c: Complex64) -> Self {
        Self {
            m,
            terms: vec![Monomial {
                exp: SmallVec::from_elem(0, m),
                coeff: c,
            }],
        }
    }

    /// The coordinate function `z_j`.
    pub fn coordinate(m: usize, j: usize) -> Self {
        let mut exp = SmallVec::from_elem(0, m);
        exp[j] = 1;
        Self {
            m,
            terms: vec![Monomial {
                exp,
                coeff: Complex64::new(1.0, 0.0),
            }],
        }
    }

    pub fn vars(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == Complex64::new(0.0, 0.0))
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.exp.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }

    /// Exact partial derivative with respect to `z_j`.
    pub fn derivative(&self, j: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exp[j] > 0)
            .map(|t| {
                let mut exp = t.exp.clone();
                exp[j] -= 1;
                Monomial {
                    exp,
                    coeff: t.coeff * f64::from(t.exp[j]),
                }
            })
            .collect();
        Polynomial { m: self.m, terms }
    }
}

/// A polynomial holomorphic map `C^m → C^N`, with its partial derivatives
/// precomputed symbolically.
#[derive(Clone, Debug)]
pub struct MapSpec {
    m: usize,
    components: Vec<Polynomial>,
    partials: Vec<Vec<Polynomial>>,
}

impl PartialEq for MapSpec {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.components == other.components
    }
}

impl MapSpec {
    pub fn new(m: usize, components: Vec<Polynomial>) -> Result<Self> {
        if m == 0 || components.is_empty() {
            return Err(Error::invalid("map needs m ≥ 1 and at least one component"));
        }
        if let Some(bad) = components.iter().find(|c| c.vars() != m) {
            return Err(Error::invalid(format!(
                "component in {} variables, map source dimension is {m}",
                bad.vars()
            )));
        }
        let partials = components
            .iter()
            .map(|c| (0..m).map(|j| c.derivative(j)).collect())
            .collect();
        Ok(Self {
            m,
            components,
            partials,
        })
    }

    pub fn identity(m: usize) -> Self {
        Self::new(m, (0..m).map(|j| Polynomial::coordinate(m, j)).collect())
            .expect("identity map is well formed")
    }

    /// `(z, w) ↦ (z, 1 + zw)`.
    pub fn hopf() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let second = Polynomial::from_terms(2, &[(&[0, 0], one), (&[1, 1], one)]).unwrap();
        Self::new(2, vec![Polynomial::coordinate(2, 0), second]).unwrap()
    }

    /// Homogeneous lift `(z, w) ↦ (1, z, w)` of the linear chart of P².
    pub fn fs_linear() -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self::new(
            2,
            vec![
                Polynomial::constant(2, one),
                Polynomial::coordinate(2, 0),
                Polynomial::coordinate(2, 1),
            ],
        )
        .unwrap()
    }

    pub fn source_dim(&self) -> usize {
        self.m
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn eval(&self, p: &CPoint) -> Result<CPoint> {
        self.check_dim(p)?;
        let coords: Coords = self.components.iter().map(|c| c.eval(p.coords())).collect();
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite {
                value: f64::NAN,
                point: p.reals(),
            });
        }
        Ok(CPoint::from_coords_unchecked(coords))
    }

    /// Entry `(a, j)` is `∂F_a/∂z_j` at `p`.
    pub fn jacobian(&self, p: &CPoint) -> Result<CMatrix> {
        self.check_dim(p)?;
        let mut jac = CMatrix::zeros(self.target_dim(), self.m);
        for (a, row) in self.partials.iter().enumerate() {
            for (j, d) in row.iter().enumerate() {
                jac.set(a, j, d.eval(p.coords()));
            }
        }
        Ok(jac)
    }

    fn check_dim(&self, p: &CPoint) -> Result<()> {
        if p.dim() != self.m {
            return Err(Error::invalid(format!(
                "point has dimension {}, map expects {}",
                p.dim(),
                self.m
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MapSpecWire::from(self)).expect("map serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: MapSpecWire =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("map JSON: {e}")))?;
        wire.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct MonomialWire {
    exp: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct MapSpecWire {
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    components: Vec<Vec<MonomialWire>>,
}

impl From<&MapSpec> for MapSpecWire {
    fn from(map: &MapSpec) -> Self {
        Self {
            m: map.m,
            n: map.target_dim(),
            components: map
                .components
                .iter()
                .map(|c| {
                    c.terms
                        .iter()
                        .map(|t| MonomialWire {
                            exp: t.exp.to_vec(),
                            re: t.coeff.re,
                            im: t.coeff.im,
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<MapSpecWire> for MapSpec {
    type Error = Error;

    fn try_from(wire: MapSpecWire) -> Result<Self> {
        if wire.components.len() != wire.n {
            return Err(Error::invalid(format!(
                "N = {} but {} components given",
                wire.n,
                wire.components.len()
            )));
        }
        let components = wire
            .components
            .into_iter()
            .map(|terms| {
                Polynomial::new(
                    wire.m,
                    terms
                        .into_iter()
                        .map(|t| Monomial {
                            exp: SmallVec::from_vec(t.exp),
                            coeff: Complex64::new(t.re, t.im),
                        })
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        MapSpec::new(wire.m, components)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// `dd^c‖x‖²`.
    Flat,
    /// `dd^c‖x‖² / ‖x‖²`, invariant under `x ↦ λx`.
    Hopf,
    /// Fubini–Study form read on homogeneous coordinates.
    FubiniStudy,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Flat => "flat",
            MetricKind::Hopf => "hopf",
            MetricKind::FubiniStudy => "fubini-study",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "flat" => Some(MetricKind::Flat),
            "hopf" => Some(MetricKind::Hopf),
            "fubini-study" | "fs" => Some(MetricKind::FubiniStudy),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricFormSpec {
    pub kind: MetricKind,
    /// Ambient dimension of the target chart.
    pub dim: usize,
}

impl MetricFormSpec {
    pub fn new(kind: MetricKind, dim: usize) -> Self {
        Self { kind, dim }
    }

    pub fn eval(&self, q: &CPoint) -> Result<HermitianMatrix> {
        if q.dim() != self.dim {
            return Err(Error::invalid(format!(
                "metric on C^{} evaluated at a point of C^{}",
                self.dim,
                q.dim()
            )));
        }
        match self.kind {
            MetricKind::Flat => Ok(HermitianMatrix::scaled_identity(self.dim, 1.0)),
            MetricKind::Hopf => {
                let n2 = self.nonzero_norm_sqr(q, "hopf metric at the origin")?;
                Ok(HermitianMatrix::scaled_identity(self.dim, 1.0 / n2))
            }
            MetricKind::FubiniStudy => {
                let n2 = self.nonzero_norm_sqr(q, "Fubini–Study metric at the zero vector")?;
                let n4 = n2 * n2;
                let c = q.coords();
                let mut h = CMatrix::zeros(self.dim, self.dim);
                for a in 0..self.dim {
                    for b in 0..self.dim {
                        let diag = if a == b { n2 } else { 0.0 };
                        h.set(a, b, (Complex64::new(diag, 0.0) - c[a].conj() * c[b]) / n4);
                    }
                }
                Ok(HermitianMatrix(h))
            }
        }
    }

    fn nonzero_norm_sqr(&self, q: &CPoint, what: &str) -> Result<f64> {
        let n = q.norm();
        if n < ORIGIN_CUTOFF {
            return Err(Error::Domain {
                what: what.to_string(),
                point: q.reals(),
            });
        }
        let direct = q.norm_sqr();
        Ok(if direct.is_normal() { direct } else { n * n })
    }
}

/// Normalisation constants of `C^m` under the `(i/2π)` convention.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryConstants {
    /// `m!/π^m`, so that `α^m = top_factor · dLebesgue`.
    pub top_factor: f64,
    /// Euclidean `(2m−1)`-volume of `S(r)`.
    pub sphere_area: f64,
    /// `∫_{B(r)} α^m = r^{2m}`.
    pub ball_alpha_mass: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn geometry_constants(m: usize, r: f64) -> GeometryConstants {
    debug_assert!(m >= 1 && r > 0.0);
    let pi_m = PI.powi(m as i32);
    GeometryConstants {
        top_factor: factorial(m) / pi_m,
        sphere_area: 2.0 * pi_m * r.powi(2 * m as i32 - 1) / factorial(m - 1),
        ball_alpha_mass: r.powi(2 * m as i32),
    }
}

/// Pullback density: `f^*ω ∧ α^{m−1} = ζ α^m`.
///
/// The pulled-back coefficient matrix is `P_jk = Σ_ab H_ab J_aj conj(J_bk)`, and
/// `ζ = tr(P)/m`.
pub fn zeta(map: &MapSpec, metric: &MetricFormSpec, p: &CPoint) -> Result<f64> {
    let q = map.eval(p)?;
    let h = metric.eval(&q)?;
    let jac = map.jacobian(p)?;
    let n = jac.rows();
    let mut column: SmallVec<[Complex64; 4]> = SmallVec::from_elem(Complex64::new(0.0, 0.0), n);
    let mut trace = 0.0;
    for j in 0..jac.cols() {
        for (a, slot) in column.iter_mut().enumerate() {
            *slot = jac.get(a, j);
        }
        trace += h.pair(&column, &column).re;
    }
    let value = trace / map.source_dim() as f64;
    if !value.is_finite() {
        return Err(Error::NonFinite {
            value,
            point: p.reals(),
        });
    }
    Ok(value.max(0.0))
}

/// Registered map/metric pairs.
pub const BUILTIN_NAMES: [&str; 3] = ["hopf", "torus-cover", "fs-linear"];

pub fn builtin(name: &str) -> Option<(MapSpec, MetricFormSpec)> {
    match name {
        "hopf" => Some((MapSpec::hopf(), MetricFormSpec::new(MetricKind::Hopf, 2))),
        // The universal covering of a 2-torus is the identity on the chart,
        // pulled back against the flat form.
        "torus-cover" => Some((MapSpec::identity(2), MetricFormSpec::new(MetricKind::Flat, 2))),
        "fs-linear" => Some((
            MapSpec::fs_linear(),
            MetricFormSpec::new(MetricKind::FubiniStudy, 3),
        )),
        _ => None,
    }
}

/// True for the Hopf map paired with the Hopf metric, whose integrand needs the
/// region-stratified sampler.
pub fn is_hopf_pair(map: &MapSpec, metric: &MetricFormSpec) -> bool {
    metric.kind == MetricKind::Hopf && *map == MapSpec::hopf()
}
