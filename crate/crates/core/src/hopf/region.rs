use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::{abs_sin_theta, two_coords};
use crate::error::{Error, Result};
use crate::forms::CPoint;

/// Comparison slack on region boundaries, so that ties computed from a
/// slightly perturbed norm still fall on both sides.
const EDGE_SLACK: f64 = 1e-12;

/// The nine pieces of the sphere decomposition. `D(γ)` are the dyadic-in-exponent
/// annuli `r^{γ/2} ≤ |z| ≤ r^{(γ+1)/2}` for `γ ∈ {−2, −1, 0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    A,
    B,
    C,
    D(i8),
    E,
    F,
}

impl Region {
    /// Reporting order.
    pub const ALL: [Region; 9] = [
        Region::A,
        Region::B,
        Region::C,
        Region::D(-2),
        Region::D(-1),
        Region::D(0),
        Region::D(1),
        Region::E,
        Region::F,
    ];

    /// Tie-breaking order for the disjoint assignment.
    pub const PRIORITY: [Region; 9] = [
        Region::A,
        Region::B,
        Region::C,
        Region::D(-2),
        Region::D(-1),
        Region::D(0),
        Region::D(1),
        Region::F,
        Region::E,
    ];

    pub fn label(self) -> String {
        self.to_string()
    }

    /// Exponent `e` in the volume bound `vol ≲ r^e`.
    pub fn volume_exponent(self) -> f64 {
        match self {
            Region::A => -1.0,
            Region::B => -2.0,
            Region::C => -1.0,
            Region::D(g) => f64::from(g) + 2.0,
            Region::E => 3.0,
            Region::F => 2.0,
        }
    }

    /// Exponent `e` in the contribution bound `∫_region η dV ≲ r^e`.
    pub fn contribution_exponent(self) -> f64 {
        match self {
            Region::C => 2.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::A => f.write_str("A"),
            Region::B => f.write_str("B"),
            Region::C => f.write_str("C"),
            Region::D(g) => write!(f, "D{g}"),
            Region::E => f.write_str("E"),
            Region::F => f.write_str("F"),
        }
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Region::ALL
            .into_iter()
            .find(|r| r.to_string() == s)
            .ok_or_else(|| Error::invalid(format!("unknown region label {s:?}")))
    }
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A region at a given radius and cut-off exponent `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionSpec {
    pub region: Region,
    pub epsilon: f64,
    pub r: f64,
}

fn le(a: f64, b: f64) -> bool {
    a <= b * (1.0 + EDGE_SLACK)
}

fn ge(a: f64, b: f64) -> bool {
    a >= b * (1.0 - EDGE_SLACK)
}

/// Powers `r^{k/2}` via the square root, exact on perfect squares.
fn half_power(r: f64, k: i32) -> f64 {
    r.sqrt().powi(k)
}

impl RegionSpec {
    /// Membership of a point with `|z| = rho`, `|w| = s`, `|sin θ| = sin_abs`
    /// on the sphere of radius `self.r`.
    pub(crate) fn contains_moduli(&self, rho: f64, s: f64, sin_abs: f64) -> bool {
        let r = self.r;
        let inner = 1.0 / (2.0 * r);
        let outer = 3.0 / (2.0 * r);
        let cut = r.powf(1.0 - self.epsilon);
        match self.region {
            Region::A => le(rho, inner),
            Region::B => ge(rho, inner) && le(rho, outer) && le(sin_abs, 1.0 / r),
            Region::C => ge(rho, inner) && le(rho, outer) && ge(sin_abs, 1.0 / r),
            Region::D(g) => {
                let g = i32::from(g);
                ge(rho, outer)
                    && le(rho, cut)
                    && ge(rho, half_power(r, g))
                    && le(rho, half_power(r, g + 1))
            }
            Region::E => ge(rho, cut) && ge(s, r.sqrt()),
            Region::F => le(s, r.sqrt()),
        }
    }

    pub fn contains(&self, p: &CPoint) -> Result<bool> {
        let (z, w) = two_coords(p)?;
        let spec = RegionSpec { r: p.norm(), ..*self };
        Ok(spec.contains_moduli(z.norm(), w.norm(), abs_sin_theta(z, w)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    /// Every region whose closed definition contains the point.
    pub matches: Vec<Region>,
    /// The first match in priority order.
    pub assigned: Region,
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    Ok(())
}

/// Classifies a point of `S(r)`, `r = ‖p‖ ≥ 2`.
pub fn classify_region(p: &CPoint, epsilon: f64) -> Result<Classification> {
    let (z, w) = two_coords(p)?;
    check_epsilon(epsilon)?;
    let r = p.norm();
    if !(r >= 2.0) {
        return Err(Error::invalid(format!("region decomposition needs r ≥ 2, got {r}")));
    }
    classify_moduli(r, z.norm(), w.norm(), abs_sin_theta(z, w), epsilon).ok_or_else(|| {
        Error::CoverageViolation {
            r,
            point: p.reals(),
        }
    })
}

pub(crate) fn classify_moduli(
    r: f64,
    rho: f64,
    s: f64,
    sin_abs: f64,
    epsilon: f64,
) -> Option<Classification> {
    let matches: Vec<Region> = Region::PRIORITY
        .into_iter()
        .filter(|&region| RegionSpec { region, epsilon, r }.contains_moduli(rho, s, sin_abs))
        .collect();
    let assigned = *matches.first()?;
    let mut matches = matches;
    matches.sort();
    Some(Classification { matches, assigned })
}

/// Assigned region only, skipping the full match list.
pub(crate) fn assigned_region(r: f64, rho: f64, s: f64, sin_abs: f64, epsilon: f64) -> Option<Region> {
    Region::PRIORITY
        .into_iter()
        .find(|&region| RegionSpec { region, epsilon, r }.contains_moduli(rho, s, sin_abs))
}
