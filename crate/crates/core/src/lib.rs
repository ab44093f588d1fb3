//! Numerical growth orders of holomorphic maps into hermitian targets.
//!
//! The pipeline pulls a (1,1)-form back along a polynomial map, integrates the
//! resulting density over spheres by Monte Carlo, accumulates the order
//! function `T(r)` radially and fits its log-log growth. A dedicated module
//! treats the Hopf surface, whose pullback density is sharply peaked on a thin
//! set of each sphere.

pub mod error;
pub mod forms;
pub mod growth;
pub mod hopf;
pub mod order_fit;
pub mod psh;
pub mod quad;
pub mod rng;
pub mod sphere;
pub mod stats;

pub use error::{Error, Result};
pub use forms::{
    builtin, geometry_constants, zeta, CMatrix, CPoint, GeometryConstants, HermitianMatrix,
    MapSpec, MetricFormSpec, MetricKind, Polynomial,
};
pub use growth::{growth_series, GrowthSeries, RadialGrid};
pub use hopf::HopfStratifiedSampler;
pub use order_fit::{fit_order, OrderFit};
pub use rng::RngStream;
pub use sphere::{sample_sphere, shell_mean, ShellEstimate, ShellSampler, UniformSampler};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
